#include "tubeflow/berger.hpp"

#include "tubeflow/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace tubeflow {

namespace {

constexpr int kShards = 64;

// Splits count points into antithetic pairs spread over shards. body(rng, pairs, shard)
// fills per-shard accumulators; the caller combines them in shard order.
template <class Body>
void run_shards(long count, uint64_t seed, Exec exec, Body&& body) {
    long pairs = std::max<long>(1, count / 2);
    for_each_index(exec, kShards, [&](std::ptrdiff_t s) {
        long lo = pairs * s / kShards, hi = pairs * (s + 1) / kShards;
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(s)));
        body(rng, hi - lo, static_cast<int>(s));
    });
}

Vec unit_normal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec z(n);
    double nrm = 0.0;
    do {
        for (int i = 0; i < n; ++i) z[i] = g(rng);
        nrm = z.norm();
    } while (nrm == 0.0);
    return z / nrm;
}

struct Acc {
    double s = 0, ss = 0;
    long k = 0;
    void add(double v) {
        s += v;
        ss += v * v;
        ++k;
    }
};

SphereAverage finish(const std::vector<Acc>& shards, long count, uint64_t seed) {
    double s = 0, ss = 0;
    long k = 0;
    for (const auto& a : shards) {
        s += a.s;
        ss += a.ss;
        k += a.k;
    }
    SphereAverage r;
    r.count = count;
    r.seed = seed;
    r.estimate = s / k;
    double var = k > 1 ? std::max(0.0, (ss - s * s / k) / (k - 1)) : 0.0;
    r.standard_error = std::sqrt(var / k);
    return r;
}

}  // namespace

SphereMoments sphere_moments(int n, long count, uint64_t seed, Exec exec) {
    if (n < 2) throw BadParams("sphere moments need n >= 2");
    if (count < 10000) throw BadParams("sphere moments need at least 1e4 samples");
    struct Shard {
        Acc f, g;
        double fg = 0;
        std::vector<double> by_coord;
    };
    std::vector<Shard> sh(kShards);
    run_shards(count, seed, exec, [&](std::mt19937_64& rng, long pairs, int s) {
        Shard& a = sh[s];
        a.by_coord.assign(n, 0.0);
        for (long p = 0; p < pairs; ++p) {
            Vec z = unit_normal(n, rng);
            // z and -z give the same even integrand values
            double f = std::pow(z[0], 4), g = z[0] * z[0] * z[1] * z[1];
            a.f.add(f);
            a.g.add(g);
            a.fg += f * g;
            for (int j = 0; j < n; ++j) a.by_coord[j] += std::pow(z[j], 4);
        }
    });
    std::vector<Acc> fs, gs;
    double fg = 0;
    SphereMoments m;
    m.n = n;
    m.m4_by_coord.assign(n, 0.0);
    long k = 0;
    for (const auto& a : sh) {
        fs.push_back(a.f);
        gs.push_back(a.g);
        fg += a.fg;
        k += a.f.k;
        for (int j = 0; j < n; ++j) m.m4_by_coord[j] += a.by_coord[j];
    }
    for (auto& v : m.m4_by_coord) v /= k;
    m.m4 = finish(fs, count, seed);
    m.m22 = finish(gs, count, seed);
    m.exact_m4 = 3.0 / (n * (n + 2.0));
    m.exact_m22 = 1.0 / (n * (n + 2.0));
    double mf = m.m4.estimate, mg = m.m22.estimate;
    m.ratio = mf / mg;
    double vf = m.m4.standard_error * m.m4.standard_error, vg = m.m22.standard_error * m.m22.standard_error;
    double cov = (fg / k - mf * mg) / k;
    m.ratio_error = std::sqrt(std::max(0.0, vf / (mg * mg) - 2 * mf * cov / (mg * mg * mg) + mf * mf * vg / (mg * mg * mg * mg)));
    return m;
}

SphereAverage polarized_average(const CurvatureSample& s, long count, uint64_t seed, Exec exec) {
    const int n = s.E.dim();
    std::vector<Acc> sh(kShards);
    run_shards(count, seed, exec, [&](std::mt19937_64& rng, long pairs, int k) {
        for (long p = 0; p < pairs; ++p) {
            Vec z = unit_normal(n, rng);
            sh[k].add(s.frame_E.abc(z, z));
        }
    });
    return finish(sh, count, seed);
}

DecompositionRow decomposition_row(const CurvatureSample& s, long count, uint64_t seed, Exec exec) {
    DecompositionRow r;
    SphereAverage a = polarized_average(s, count, seed, exec);
    r.avg = a.estimate;
    r.se = a.standard_error;
    r.S = scalar(s);
    r.O = s.E.dim() > 1 ? oab_trace(s) : 0.0;
    for (int i = 0; i < s.E.dim(); ++i) r.D += s.frame_E(i, i, i, i);
    return r;
}

DecompositionFit fit_decomposition(std::vector<DecompositionRow> rows) {
    if (rows.size() < 2) throw BadParams("decomposition fit needs at least two samples");
    DecompositionFit f;
    const int m = static_cast<int>(rows.size());
    Mat X2(m, 2), X3(m, 3);
    Vec y(m);
    for (int i = 0; i < m; ++i) {
        X2.row(i) << rows[i].S, rows[i].O;
        X3.row(i) << rows[i].S, rows[i].O, rows[i].D;
        y[i] = rows[i].avg;
        f.mc_error = std::max(f.mc_error, rows[i].se);
    }
    Vec c2 = X2.completeOrthogonalDecomposition().solve(y);
    Vec c3 = X3.completeOrthogonalDecomposition().solve(y);
    f.alpha = c2[0];
    f.beta = c2[1];
    f.a3 = c3[0];
    f.b3 = c3[1];
    f.c3 = c3[2];
    f.residual = (X2 * c2 - y).cwiseAbs().maxCoeff();
    f.residual3 = (X3 * c3 - y).cwiseAbs().maxCoeff();
    f.rows = std::move(rows);
    return f;
}

double TrigFit::model(double t) const {
    return a[0] + a[1] * std::cos(2 * t) + a[2] * std::sin(2 * t) + a[3] * std::cos(4 * t) + a[4] * std::sin(4 * t);
}

namespace {

void check_pair(const CurvatureSample& s, const Vec& x, const Vec& y) {
    double xx = x.dot(s.h * x), yy = y.dot(s.h * y), xy = x.dot(s.h * y);
    if (std::abs(xx - 1) > 1e-10 || std::abs(yy - 1) > 1e-10 || std::abs(xy) > 1e-10)
        throw BadFrame("plane vectors are not h-orthonormal");
}

constexpr int kAngles = 360;

}  // namespace

std::vector<std::pair<double, double>> plane_samples(const CurvatureSample& s, const Vec& x, const Vec& x_perp) {
    check_pair(s, x, x_perp);
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < kAngles; ++k) {
        double t = 2 * std::numbers::pi * k / kAngles;
        Vec v = std::cos(t) * x + std::sin(t) * x_perp;
        out.push_back({t, s.E.abc(v, v)});
    }
    return out;
}

TrigFit plane_fit(const CurvatureSample& s, const Vec& x, const Vec& x_perp) {
    auto samples = plane_samples(s, x, x_perp);
    TrigFit f;
    f.x = x;
    f.x_perp = x_perp;
    for (auto [t, v] : samples) {
        f.a[0] += v;
        f.a[1] += 2 * v * std::cos(2 * t);
        f.a[2] += 2 * v * std::sin(2 * t);
        f.a[3] += 2 * v * std::cos(4 * t);
        f.a[4] += 2 * v * std::sin(4 * t);
    }
    for (double& c : f.a) c /= kAngles;
    for (auto [t, v] : samples) f.residual = std::max(f.residual, std::abs(f.model(t) - v));
    return f;
}

FifthReport fifth_and_wedge_checks(const CurvatureSample& s, uint64_t seed) {
    const int n = s.E.dim();
    if (n < 2) throw BadParams("planes need n >= 2");
    PointExtrema e = point_extrema(s, Quantity::HscPol);
    if (!(e.max_value < -e.tolerance))
        throw NotNegativeHSC("polarized holomorphic sectional curvature reaches " + format_double(e.max_value));
    FifthReport r;
    r.h_min = e.min_value;
    r.minimizer = e.min_v;
    // work in the orthonormal frame, then map back to coordinates
    Vec a = s.frame.transpose() * s.h * e.min_v;
    a.normalize();
    std::vector<Vec> perps;
    Mat basis = Mat::Identity(n, n);
    for (int j = 0; j < n; ++j) {
        Vec p = basis.col(j) - a.dot(basis.col(j)) * a;
        for (const auto& q : perps) p -= q.dot(p) * q;
        if (p.norm() > 1e-8) perps.push_back(p.normalized());
    }
    if (n >= 3) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (int k = 0; k < 32; ++k) {
            Vec p(n);
            for (int i = 0; i < n; ++i) p[i] = g(rng);
            p -= a.dot(p) * a;
            if (p.norm() > 1e-8) perps.push_back(p.normalized());
        }
    }
    r.fifth_margin = r.wedge_margin = std::numeric_limits<double>::infinity();
    r.constraint_a2a4 = 0.0;
    r.constraint_a1a3 = r.constraint_a1 = -std::numeric_limits<double>::infinity();
    Vec x = s.frame * a;
    for (const auto& p : perps) {
        Vec xp = s.frame * p;
        TrigFit f = plane_fit(s, x, xp);
        double H = s.E.abc(x, x);
        r.fit_residual = std::max(r.fit_residual, f.residual);
        r.fifth_margin = std::min(r.fifth_margin, H / 5 - f.a[0]);
        for (int k = -120; k <= 120; ++k) {
            double t = std::numbers::pi / 12 * k / 120.0;
            Vec v = std::cos(t) * x + std::sin(t) * xp;
            r.wedge_margin = std::min(r.wedge_margin, H / 5 - s.E.abc(v, v));
        }
        r.constraint_a2a4 = std::max(r.constraint_a2a4, std::abs(f.a[2] + 2 * f.a[4]));
        r.constraint_a1a3 = std::max(r.constraint_a1a3, f.a[1] + 4 * f.a[3]);
        r.constraint_a1 = std::max(r.constraint_a1, f.a[1]);
        ++r.planes;
    }
    return r;
}

RicciAverage ricci_average(const CurvatureSample& s, const Vec& a, const Vec& b, long count, uint64_t seed,
                           Exec exec) {
    using C = std::complex<double>;
    const int n = s.E.dim();
    if (n < 2) throw BadParams("ricci average needs n >= 2");
    double nrm = std::sqrt(a.squaredNorm() + b.squaredNorm());
    if (nrm == 0.0) throw ZeroVector("ricci average of the zero vector");
    std::vector<C> X(n);
    for (int i = 0; i < n; ++i) X[i] = C(a[i], b[i]) / nrm;
    // M_kl = sum_ij E_ijkl X_i conj(X_j)
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) M(k, l) += s.frame_E(i, j, k, l) * X[i] * std::conj(X[j]);
    RicciAverage r;
    r.lhs = M.trace().real();
    std::vector<Acc> sh(kShards);
    run_shards(count, seed, exec, [&](std::mt19937_64& rng, long pairs, int k) {
        for (long p = 0; p < pairs; ++p) {
            Vec z = unit_normal(2 * n, rng);
            Eigen::VectorXcd Z(n);
            for (int i = 0; i < n; ++i) Z[i] = C(z[i], z[n + i]);
            sh[k].add((Z.transpose() * M * Z.conjugate())(0, 0).real());
        }
    });
    r.integral = finish(sh, count, seed);
    r.ratio = r.lhs / r.integral.estimate;
    r.ratio_error = std::abs(r.ratio) * r.integral.standard_error / std::abs(r.integral.estimate);
    return r;
}

}  // namespace tubeflow
