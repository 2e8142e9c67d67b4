#pragma once

#include "tubeflow/tensor.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

// Uniform tensor-product grid. Values are stored row-major (last axis fastest).
struct GridSpec {
    int n = 0;
    double h = 0.0;
    Vec x0;
    std::vector<int> dims;

    size_t size() const;
    size_t flat(const std::vector<int>& idx) const;
    std::vector<int> unflat(size_t id) const;
    Vec node(const std::vector<int>& idx) const;
    Vec node(size_t id) const { return node(unflat(id)); }
};

// Cubic B-spline interpolant (C^2) of grid values, natural or periodic ends.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(const GridSpec& spec, const std::vector<double>& values, bool periodic);

    double operator()(const Vec& x) const;
    bool covers(const Vec& x) const;  // always true when periodic
    const GridSpec& spec() const { return spec_; }
    bool periodic() const { return periodic_; }

private:
    GridSpec spec_;
    bool periodic_ = false;
    std::vector<double> coef_;  // same layout as values
    double coefficient(std::vector<int>& idx) const;
};

struct GridFile {
    GridSpec spec;
    std::vector<double> values;
    std::optional<double> t;  // present for checkpoints
};

// Header "n h x0_1 .. x0_n", then values, one row (last axis) per line.
// Commas are accepted as separators. Checkpoints carry a leading "t=<value>" line.
GridFile read_grid(std::istream& in);
void write_grid(std::ostream& out, const GridFile& g);
GridFile load_grid_file(const std::string& path);
void save_grid_file(const std::string& path, const GridFile& g);

}  // namespace tubeflow
