#pragma once

#include "tubeflow/extremize.hpp"
#include "tubeflow/parallel.hpp"
#include "tubeflow/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

// Algebraic curvature tensors live in a unitary polarized frame, so the
// reference metric is the identity and every contraction is a plain sum.

// Q(A)_ijkl = 2 (A_ijpq A_qpkl + A_ilpq A_qpkj - A_ipkq A_pjql), one value per
// symmetry orbit, so the result carries the symmetries exactly.
Tensor4 q_quadratic(const Tensor4& a);

struct OdeTrajectory {
    std::vector<double> times;
    std::vector<Tensor4> states;
    double max_drift = 0.0;          // symmetry defect removed by re-symmetrization
    std::optional<double> blowup_t;  // set when an entry passed 1e12
};

// dA/dt = Q(A) with RK4. The step is dt, capped so that one step changes A by
// at most 1% in norm; states are recorded every record_every steps and at T.
// Blow-up is reported in the trajectory rather than thrown when keep_partial.
OdeTrajectory integrate_ode(const Tensor4& a0, double T, double dt, int record_every = 1,
                            bool keep_partial = false);

enum class ExtremalMode { MaxAbc, MinOrthAbc };
PairExtremum extremal_pair(const Tensor4& a, ExtremalMode mode, uint64_t seed = 7);

// Shifts A by a multiple of delta_ik delta_jl so the chosen extremum becomes 0:
// the max of A(v,w,v,w) for the negative cone, the min over orthogonal pairs for
// the orthogonal one. A(v,w,v,w) moves by exactly the shift on unit pairs.
Tensor4 negative_boundary(const Tensor4& a, uint64_t seed = 7);
Tensor4 orth_boundary(const Tensor4& a, uint64_t seed = 7);

// Q(A)(v, w, v, w).
double q_at_pair(const Tensor4& a, const Vec& v, const Vec& w);

struct NullVectorReport {
    Vec v, w;
    double max_abc = 0.0;
    double first_derivative = 0.0;  // max |A(v,x,v,w)|, |A(x,w,v,w)| over basis x
    double h_form_min_eig = 0.0;    // smallest eigenvalue of -H
    double q_value = 0.0;           // Q(A)(v,w,v,w)
    double sharper = 0.0;           // Q + Tr(M1 M2)
    double trace_m1m2 = 0.0;
    double norm = 0.0;
    bool first_ok = false, h_ok = false, q_ok = false, sharper_ok = false;
    bool ok() const { return first_ok && h_ok && q_ok && sharper_ok; }
};

// Checks the null-vector condition at the maximizing pair of a tensor on the
// boundary of the non-positive cone. Throws NotExtremal when the maximum is not
// within 1e-9 (1 + max|A|) of zero.
NullVectorReport null_vector_check_negative(const Tensor4& a, uint64_t seed = 7);

struct BlockInstance {
    Mat m1, m2, n;
    Mat g1() const;
    Mat g2() const;  // [[M2, -N^T], [-N, M1]]
};

struct TraceLemmaResult {
    double value = 0.0;      // Tr(M1 M2 - N^2)
    double charpoly_gap = 0.0;  // max coefficient gap between G1 and G2, c_i over rho^(m-i)
    double similarity_gap = 0.0;  // max |J G1 J^T - G2|
};

// Throws NotPSD when G1 has an eigenvalue below -1e-12 (1 + |G1|).
TraceLemmaResult trace_lemma(const BlockInstance& inst);
// G1 = B^T B, B uniform in [-1,1]^(2n x 2n), possibly rank deficient.
BlockInstance random_block_instance(int n, std::mt19937_64& rng);
// Characteristic polynomial coefficients c_0..c_m of det(x I - M), c_m = 1.
std::vector<double> characteristic_polynomial(const Mat& m);

struct ProbeResult {
    long trials_run = 0;
    std::optional<Tensor4> counterexample;
    Vec v, w;
    double q_value = 0.0;  // Q at the vanishing orthogonal pair
    double min_q = 0.0;    // smallest Q seen over all trials
};

// Random search over tensors on the boundary of the orthogonal cone
// (orthogonal minimum 0) for a negative Q at the vanishing pair.
ProbeResult noab_probe(int n, uint64_t seed, long trials, Exec exec = Exec::Parallel);

// Component intervals implied by: A(u,w,u,w) <= 0 for all u, w;
// A(u,u,u,u) >= h_lower |u|^4; sum_{i != j} A_ijij >= o_lower.
struct ComponentBound {
    std::array<int, 4> index;
    double lo = 0.0, hi = 0.0, value = 0.0;
    bool inside = false;
};
struct PolarizationReport {
    double h_lower = 0.0, o_lower = 0.0;
    std::vector<ComponentBound> bounds;  // one per orbit
    double worst_excess = 0.0;           // largest amount by which a component leaves its interval
    int sweeps = 0;
    bool ok() const { return worst_excess <= 0.0; }
};

// Throws NotNegativeABC when max A(v,w,v,w) exceeds the degenerate band.
PolarizationReport polarization_bounds(const Tensor4& a, double h_lower, double o_lower, uint64_t seed = 7);

// Random tensor with non-positive ABC: a random curvature tensor pushed onto
// the negative boundary and shifted further in by a random amount.
Tensor4 random_negative_tensor(int n, std::mt19937_64& rng, uint64_t seed = 7);

}  // namespace tubeflow
