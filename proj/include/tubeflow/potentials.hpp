#pragma once

#include "tubeflow/certificate.hpp"
#include "tubeflow/grid.hpp"
#include "tubeflow/parallel.hpp"
#include "tubeflow/taylor.hpp"
#include "tubeflow/tensor.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

enum class DomainKind { Box, Ball, HalfSpace, Cone, FullSpace, Torus };

// Parameters by kind:
//   Box       lo_1 hi_1 .. lo_n hi_n
//   Ball      radius p       (p = 1 or 2, centred at 0)
//   HalfSpace a_1 .. a_n b   ({a.x > b})
//   Cone      variant        (0: positive orthant, 1: {|x1| > |x2|})
//   FullSpace punctured      (1: the origin is excluded)
//   Torus     period
// An optional affine pull-back x -> Lx + b is applied before the test.
struct DomainSpec {
    int n = 1;
    DomainKind kind = DomainKind::FullSpace;
    std::vector<double> params;
    double margin = 0.0;
    Mat pullback_L;
    Vec pullback_b;

    double boundary_distance(const Vec& x) const;  // +inf when unbounded
    bool contains(const Vec& x) const { return boundary_distance(x) >= margin; }
    // Box used for random sampling of unbounded domains.
    std::pair<Vec, Vec> sampling_box() const;
    std::string describe() const;
};

struct PotentialJet {
    Vec x;
    double value = 0.0;
    Vec gradient;
    Mat hessian;
    Tensor3 third;
    Tensor4 fourth;
};

enum class EvalMode { ClosedForm, GridInterpolated };

// String-valued parameter bag shared by the catalog and the config reader.
class Params {
public:
    Params() = default;
    Params(std::initializer_list<std::pair<const std::string, double>> init);
    Params& set(const std::string& k, double v);
    Params& set(const std::string& k, const std::string& v);
    bool has(const std::string& k) const { return v_.count(k) != 0; }
    double get(const std::string& k, double dflt) const;
    std::string get_string(const std::string& k, const std::string& dflt) const;
    const std::map<std::string, std::string>& items() const { return v_; }

private:
    std::map<std::string, std::string> v_;
};

using ScalarFn = std::function<double(const Vec&)>;
using TaylorFn = std::function<Taylor(const std::vector<Taylor>&)>;

class PotentialHandle {
public:
    std::string name;
    DomainSpec domain;
    EvalMode mode = EvalMode::ClosedForm;
    Params params;

    static PotentialHandle closed_form(std::string name, DomainSpec domain, ScalarFn f, TaylorFn ft,
                                       Params params = {});
    static PotentialHandle from_grid(std::string name, const GridFile& grid, bool periodic,
                                     Params params = {});

    int dim() const { return domain.n; }
    double value(const Vec& x) const;  // domain not checked
    Taylor expand(const std::vector<Taylor>& x) const;
    // c * Psi(L x + b)
    PotentialHandle scaled(double c) const;
    PotentialHandle affine(const Mat& L, const Vec& b) const;

    // Quadratic part A when Psi - x^T A x / 2 is 1-periodic (torus-ready handles).
    const std::optional<Mat>& torus_quadratic() const { return torus_quadratic_; }
    void set_torus_quadratic(const Mat& a) { torus_quadratic_ = a; }
    const CubicSpline* spline() const { return spline_.get(); }
    // Spacing used by finite-difference jets of grid handles.
    double fd_spacing() const;

private:
    ScalarFn f_;
    TaylorFn ft_;
    std::shared_ptr<const CubicSpline> spline_;
    std::optional<Mat> torus_quadratic_;
};

// Exact jets for closed-form handles; finite-difference jets for grid handles.
PotentialJet jet(const PotentialHandle& handle, const Vec& x);
// Second-order central finite-difference jet with spacing h (stencil radius <= 2).
PotentialJet fd_jet(const ScalarFn& f, const Vec& x, double h);
// Raises NotConvexHere unless the hessian passes the scale-aware PD test.
void check_convex(const Mat& hessian, const Vec& x);
double pd_tolerance(const Mat& hessian);

struct CatalogEntry {
    std::string name;
    std::string domain;
    std::string formula;
    std::string origin;
};
const std::vector<CatalogEntry>& catalog_entries();
PotentialHandle catalog(const std::string& name, const Params& params = {});

// Region sampling: explicit points, seeded uniform samples in a box, a regular
// grid in a box, or a radial shell |x|^2 in [s_lo, s_hi] with random directions.
struct SampleSpec {
    enum class Kind { Explicit, RandomBox, GridBox, Shell } kind = Kind::RandomBox;
    std::vector<Vec> points;
    Vec lo, hi;
    int count = 100;
    int per_dim = 10;
    double s_lo = 0.0, s_hi = 0.9;
    uint64_t seed = 1;
};
std::vector<Vec> generate_samples(const SampleSpec& spec, const DomainSpec& domain);

SignCertificate convexity_certify(const PotentialHandle& handle, const SampleSpec& region,
                                  Exec exec = Exec::Parallel);
SignCertificate convexity_certify(const PotentialHandle& handle, int sample_count, uint64_t seed,
                                  Exec exec = Exec::Parallel);

}  // namespace tubeflow
