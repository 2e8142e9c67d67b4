#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace tubeflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense n x n x n array, used for third derivative jets.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), a_(static_cast<size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k) { return a_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }
    double operator()(int i, int j, int k) const { return a_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }
    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }
    double max_abs() const;

private:
    int n_ = 0;
    std::vector<double> a_;
};

// Dense n^4 array. Curvature-type tensors carry the symmetries
// i<->k, j<->l and (i,k)<->(j,l); jets are fully symmetric.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int n) : n_(n), a_(static_cast<size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    size_t index(int i, int j, int k, int l) const {
        return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }
    double& operator()(int i, int j, int k, int l) { return a_[index(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return a_[index(i, j, k, l)]; }
    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    // sum A_ijkl a^i b^j c^k d^l
    double eval(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const;
    // A(v, w, v, w)
    double abc(const Vec& v, const Vec& w) const { return eval(v, w, v, w); }
    // gradient of A(v,w,v,w) with respect to v and w
    void abc_gradient(const Vec& v, const Vec& w, Vec& gv, Vec& gw) const;
    // gradient of A(v,v,v,v)
    Vec diag_gradient(const Vec& v) const;

    double max_abs() const;
    double norm() const;  // Frobenius

    Tensor4& operator+=(const Tensor4& o);
    Tensor4& operator-=(const Tensor4& o);
    Tensor4& operator*=(double c);
    friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
    friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
    friend Tensor4 operator*(double c, Tensor4 a) { return a *= c; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

// Orbits of the curvature symmetry group acting on index tuples of dimension n.
// Each orbit lists flat indices in increasing order; the first is the
// lexicographically smallest tuple and serves as the representative.
const std::vector<std::vector<int>>& curvature_orbits(int n);

// Replaces each orbit by the mean of its entries, summed in a fixed order, so
// the result satisfies the symmetries bit-exactly.
void symmetrize_curvature(Tensor4& t);
// Largest |t(g.idx) - t(idx)| over the symmetry generators.
double curvature_symmetry_defect(const Tensor4& t);

// Copies the entry at the sorted index tuple to every permutation.
void symmetrize_full(Tensor3& t);
void symmetrize_full(Tensor4& t);
double full_symmetry_defect(const Tensor3& t);
double full_symmetry_defect(const Tensor4& t);

// T'_ijkl = sum T_abcd M_ai M_bj M_ck M_dl (columns of M are the new basis).
Tensor4 change_basis(const Tensor4& t, const Mat& m);
Tensor3 change_basis(const Tensor3& t, const Mat& m);

// delta_ik delta_jl: the shift direction that adds |v|^2|w|^2 to A(v,w,v,w).
Tensor4 metric_square(int n);

// Random curvature-type tensor with independent standard normal orbit values.
Tensor4 random_curvature(int n, std::mt19937_64& rng);

// Text format: header line with n, then one independent component per line
// in lexicographic order of orbit representatives: "i j k l value".
void write_curvature(std::ostream& out, const Tensor4& t);
Tensor4 read_curvature(std::istream& in);

std::string format_double(double v);

}  // namespace tubeflow
