#pragma once

#include "tubeflow/curvature.hpp"
#include "tubeflow/parallel.hpp"

#include <cstdint>
#include <vector>

namespace tubeflow {

struct SphereAverage {
    double estimate = 0.0;
    double standard_error = 0.0;
    long count = 0;
    uint64_t seed = 0;
};

struct SphereMoments {
    int n = 0;
    SphereAverage m4, m22;          // E z_1^4 and E z_1^2 z_2^2 on the real unit sphere
    std::vector<double> m4_by_coord;
    double exact_m4 = 0.0, exact_m22 = 0.0;
    double ratio = 0.0;             // m4 / m22
    double ratio_error = 0.0;       // delta-method standard error
};

// Monte Carlo over S^{n-1} with antithetic pairs (z, -z). Work is split into a
// fixed number of shards with derived seeds; shard sums are combined serially.
SphereMoments sphere_moments(int n, long count, uint64_t seed, Exec exec = Exec::Parallel);

// Average of E(z,z,z,z) over h-unit polarized z (frame coordinates).
SphereAverage polarized_average(const CurvatureSample& s, long count, uint64_t seed, Exec exec = Exec::Parallel);

struct DecompositionRow {
    double avg = 0.0, se = 0.0;
    double S = 0.0, O = 0.0, D = 0.0;  // scalar, off-diagonal trace, diagonal sum
};

struct DecompositionFit {
    std::vector<DecompositionRow> rows;
    double alpha = 0.0, beta = 0.0;    // avg ~ alpha S + beta O
    double residual = 0.0;             // max |avg - fit|
    double mc_error = 0.0;             // largest per-row standard error
    // avg ~ a S + b O + c D, exact weights m22 (2, 1, 1)
    double a3 = 0.0, b3 = 0.0, c3 = 0.0, residual3 = 0.0;
    double beta_over_alpha() const { return beta / alpha; }
};

DecompositionRow decomposition_row(const CurvatureSample& s, long count, uint64_t seed, Exec exec = Exec::Parallel);
DecompositionFit fit_decomposition(std::vector<DecompositionRow> rows);

struct TrigFit {
    double a[5] = {0, 0, 0, 0, 0};  // a0 + a1 cos2t + a2 sin2t + a3 cos4t + a4 sin4t
    double residual = 0.0;
    Vec x, x_perp;
    double model(double theta) const;
};

// f(theta) = E(X_t,X_t,X_t,X_t), X_t = cos t X + sin t X_perp, projected on 360 angles.
// X and X_perp are coordinate vectors and must be h-orthonormal (BadFrame).
TrigFit plane_fit(const CurvatureSample& s, const Vec& x, const Vec& x_perp);
// Samples f on the same grid, for plotting.
std::vector<std::pair<double, double>> plane_samples(const CurvatureSample& s, const Vec& x, const Vec& x_perp);

struct FifthReport {
    double h_min = 0.0;           // polarized HSC at the minimizer
    Vec minimizer;
    int planes = 0;
    double fifth_margin = 0.0;    // min over planes of H/5 - a0
    double wedge_margin = 0.0;    // min over planes and |t| <= pi/12 of H/5 - f(t)
    double constraint_a2a4 = 0.0; // max |a2 + 2 a4|
    double constraint_a1a3 = 0.0; // max a1 + 4 a3
    double constraint_a1 = 0.0;   // max a1
    double fit_residual = 0.0;
    bool constraints_ok() const {
        return constraint_a2a4 < 1e-8 && constraint_a1a3 <= 1e-8 && constraint_a1 <= 1e-8;
    }
    bool ok() const { return fifth_margin >= 0 && wedge_margin >= 0 && constraints_ok(); }
};

// Planes through the minimizer: every frame direction orthogonal to it plus
// 32 seeded random ones when n >= 3. Throws NotNegativeHSC unless the polarized
// HSC is strictly negative.
FifthReport fifth_and_wedge_checks(const CurvatureSample& s, uint64_t seed = 11);

struct RicciAverage {
    double lhs = 0.0;             // Ric(X, X-bar)
    SphereAverage integral;       // mean of R(X, X-bar, Z, Z-bar) over the unit sphere of C^n
    double ratio = 0.0;           // lhs / integral
    double ratio_error = 0.0;
};

// X = a + i b in frame coordinates, unit length.
RicciAverage ricci_average(const CurvatureSample& s, const Vec& a, const Vec& b, long count, uint64_t seed,
                           Exec exec = Exec::Parallel);

}  // namespace tubeflow
