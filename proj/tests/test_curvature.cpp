#include "oracles.hpp"

#include "tubeflow/curvature.hpp"
#include "tubeflow/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace tubeflow;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

PotentialHandle named(const std::string& name, int n = 2) {
    Params p;
    p.set("n", n);
    return catalog(name, p);
}

CurvatureSample at(const PotentialHandle& h, const Vec& x) { return core_form(jet(h, x)); }

// Hand-derived Hessian of -log(1 - |x|^2).
Mat calabi_metric(const Vec& x) {
    double q = 1 - x.squaredNorm();
    return 2 * Mat::Identity(x.size(), x.size()) / q + 4 * x * x.transpose() / (q * q);
}

// Kaehler curvature R_{i j' k l'} = -d_k d_l' g_ij' + g^{pq'} d_k g_iq' d_l' g_pj' of the
// lifted metric g_ij' = Hess/4, with d_k = (1/2) d/dx_k on functions of Re z.
Tensor4 lifted_curvature(const Vec& x) {
    const int n = x.size();
    const double h = 1e-4;
    auto g = [](const Vec& y) { return Mat(calabi_metric(y) / 4); };
    auto dg = [&](const Vec& y, int k) {
        Vec e = oracle::unit(n, k) * h;
        return Mat((-g(y + 2 * e) + 8 * g(y + e) - 8 * g(y - e) + g(y - 2 * e)) / (12 * h) / 2);
    };
    std::vector<Mat> d(n);
    std::vector<std::vector<Mat>> dd(n, std::vector<Mat>(n));
    for (int k = 0; k < n; ++k) {
        d[k] = dg(x, k);
        for (int l = 0; l < n; ++l) {
            Vec e = oracle::unit(n, l) * h;
            dd[k][l] = (-dg(x + 2 * e, k) + 8 * dg(x + e, k) - 8 * dg(x - e, k) + dg(x - 2 * e, k)) / (12 * h) / 2;
        }
    }
    Mat ginv = g(x).inverse();
    Tensor4 r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = -dd[k][l](i, j);
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) v += ginv(p, q) * d[k](i, q) * d[l](p, j);
                    r(i, j, k, l) = v;
                }
    return r;
}

// Smallest raw sectional value over Euclidean-unit complex directions (cos t, e^{i psi} sin t).
double min_full_raw(const CurvatureSample& s) {
    auto f = [&](double t, double p) {
        Vec a = v2(std::cos(t), std::cos(p) * std::sin(t)), b = v2(0, std::sin(p) * std::sin(t));
        return sectional_raw(s, a, b);
    };
    double best = 1e300, bt = 0, bp = 0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j < 200; ++j) {
            double t = kPi / 2 * i / 200, p = 2 * kPi * j / 200, v = f(t, p);
            if (v < best) best = v, bt = t, bp = p;
        }
    for (double step = 0.02; step > 1e-10; step *= 0.5)
        for (int rep = 0; rep < 4; ++rep)
            for (auto [dt, dp] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
                double v = f(bt + dt, bp + dp);
                if (v < best) best = v, bt += dt, bp += dp;
            }
    return best;
}

}  // namespace

TEST_CASE("log barrier core form") {
    Vec x(1);
    x << 1;
    CurvatureSample s = at(named("log_barrier", 1), x);
    CHECK(s.E(0, 0, 0, 0) == doctest::Approx(-2));
}

TEST_CASE("quadratic is flat") {
    CurvatureSample s = at(named("quadratic"), v2(0.3, -1));
    CHECK(s.E.max_abs() == 0.0);
    CHECK(ricci(s).norm() == 0.0);
    CHECK(scalar(s) == 0.0);
    CHECK(hsc(s, v2(1, 2)) == 0.0);
    CHECK(hsc_full(s, v2(1, 0), v2(0.3, 2)) == 0.0);
    SampleSpec spec;
    spec.count = 5;
    spec.lo = v2(-1, -1);
    spec.hi = v2(1, 1);
    CHECK(certify_sign(named("quadratic"), Quantity::Abc, spec).verdict == Verdict::Degenerate);
    CHECK(mtw_tensor(named("quadratic"), v2(1, 0), v2(0, 1), v2(1, 2), v2(-1, 3)).value == 0.0);
}

TEST_CASE("core form symmetries hold exactly") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const char* name : {"calabi_ball", "bidisk_trig", "radial_sym"}) {
        for (int t = 0; t < 10; ++t) {
            Vec x = 0.5 * v2(u(rng), u(rng));
            if (x.norm() < 0.05) continue;
            CurvatureSample s = at(named(name), x);
            CHECK(curvature_symmetry_defect(s.E) == 0.0);
        }
    }
    Vec x3(3);
    x3 << 0.2, -0.3, 0.4;
    CHECK(curvature_symmetry_defect(at(named("calabi_ball", 3), x3).E) == 0.0);
}

TEST_CASE("calabi core form matches the lifted Kaehler curvature") {
    for (Vec x : {v2(0, 0), v2(0.3, -0.2), v2(-0.5, 0.45)}) {
        CurvatureSample s = at(named("calabi_ball"), x);
        Tensor4 r = lifted_curvature(x);
        for (size_t i = 0; i < r.data().size(); ++i)
            CHECK(std::abs(16 * r.data()[i] - s.E.data()[i]) < 1e-6 * (1 + s.E.max_abs()));
        // scalar curvature from the oracle in the same h-frame
        Tensor4 fr = change_basis(r, s.frame);
        double S = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) S += 16 * fr(i, i, j, j);
        CHECK(scalar(s) == doctest::Approx(S).epsilon(1e-6));
    }
}

TEST_CASE("calabi origin angle ratio") {
    CurvatureSample s = at(named("calabi_ball"), v2(0, 0));
    for (double th : {0.0, 0.4, 1.3}) {
        Vec v = v2(std::cos(th), std::sin(th)), w = v2(-std::sin(th), std::cos(th));
        CHECK(anti_bisectional(s, v, w) / anti_bisectional(s, v, v) == doctest::Approx(1.0 / 3));
    }
    Vec v = v2(0.6, 0.8);
    CHECK(anti_bisectional(s, v, v) == doctest::Approx(s.E.eval(v, v, v, v)));
}

TEST_CASE("calabi non-polarized minimum") {
    auto m = [](double s) { return min_full_raw(at(named("calabi_ball"), v2(std::sqrt(s), 0))); };
    CHECK(m(0.0) / m(0.5) == doctest::Approx(9.0 / 220).epsilon(1e-6));
    // one calibration constant, 2 in engine units
    for (double s : {0.1, 0.3, 0.6}) {
        double closed = -2 * (3 + 3 * s + 9 * s * s + s * s * s) / (std::pow(s - 1, 4) * (s + 1));
        CHECK(m(s) / closed == doctest::Approx(2).epsilon(1e-6));
    }
    // frozen engine values at the origin: real direction and e1 + i e2
    CurvatureSample c0 = at(named("calabi_ball"), v2(0, 0));
    CHECK(hsc_full(c0, v2(1, 0), v2(0, 0)) == doctest::Approx(-3));
    CHECK(hsc_full(c0, v2(1, 0), v2(0, 1)) == doctest::Approx(-2));
}

TEST_CASE("calabi two-dimensional bound in raw units") {
    for (double s : {0.0, 0.2, 0.5, 0.8}) {
        CurvatureSample cs = at(named("calabi_ball"), v2(std::sqrt(s), 0));
        double mx = -1e300;
        for (int i = 0; i < 90; ++i)
            for (int j = 0; j < 90; ++j) {
                double th = kPi * i / 90, ph = kPi * j / 90;
                Vec w = cs.h.inverse() * v2(std::sin(ph), -std::cos(ph));
                mx = std::max(mx, cs.E.abc(v2(std::cos(th), std::sin(th)), w));
            }
        CHECK(std::pow(1 + s, 3) * mx <= std::pow(s - 1, 3) + 1e-9);
    }
}

TEST_CASE("product and trace identities") {
    CurvatureSample b = at(named("bidisk_product"), v2(0.7, 1.6));
    CHECK(anti_bisectional(b, v2(1, 0), v2(0, 1)) == doctest::Approx(0).epsilon(1e-14));
    CHECK(std::abs(oab_trace(b)) < 1e-13);
    Mat ric = ricci(b);
    CHECK(std::abs(ric(0, 1)) < 1e-13);
    Vec x1(1), x2(1);
    x1 << 0.7;
    x2 << 1.6;
    double s1 = scalar(at(named("log_barrier", 1), x1)), s2 = scalar(at(named("log_barrier", 1), x2));
    CHECK(scalar(b) == doctest::Approx(s1 + s2));
    CHECK(scalar(b) == doctest::Approx(ric.trace()));

    CurvatureSample c = at(named("calabi_ball"), v2(0.5, 0));
    CHECK(oab_trace(c) == doctest::Approx(2 * c.frame_E(0, 1, 0, 1)));
    Mat rows = c.frame.transpose();
    CHECK(oab_trace(c, rows) == doctest::Approx(oab_trace(c)));
    CHECK_THROWS_AS(oab_trace(c, Mat::Identity(2, 2)), BadFrame);
}

TEST_CASE("holomorphic sectional curvature scaling") {
    CurvatureSample c = at(named("calabi_ball"), v2(0.2, 0.3));
    Vec v = v2(0.3, -1.1);
    CHECK(hsc(c, 3.5 * v) == doctest::Approx(hsc(c, v)));
    CHECK(hsc(c, -v) == doctest::Approx(hsc(c, v)));
    CHECK_THROWS_AS(hsc(c, v2(0, 0)), ZeroVector);
    CHECK(hsc_full(c, v, Vec::Zero(2)) == doctest::Approx(hsc(c, v)));
    CHECK_THROWS_AS(hsc_full(c, Vec::Zero(2), Vec::Zero(2)), ZeroVector);
    // the hyperbolic half line is homogeneous
    double ref = 0;
    for (double x : {0.5, 1.0, 2.0}) {
        Vec p(1), e(1);
        p << x;
        e << 1;
        double hv = hsc(at(named("log_barrier", 1), p), e);
        if (x == 0.5) ref = hv;
        CHECK(hv == doctest::Approx(ref));
    }
}

TEST_CASE("MTW tensor is proportional to ABC with constant 1") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    struct Case {
        const char* name;
        Vec p;
    };
    for (const Case& c : {Case{"calabi_ball", v2(0.3, 0.1)}, Case{"cone2d", v2(2, 0.4)}, Case{"radial_sym", v2(-1, 0.5)},
                          Case{"bidisk_trig", v2(0.2, -0.6)}, Case{"bidisk_product", v2(0.6, 1.2)}}) {
        CAPTURE(c.name);
        PotentialHandle h = named(c.name);
        CurvatureSample s = at(h, c.p);
        for (int t = 0; t < 20; ++t) {
            Vec y = v2(g(rng), g(rng)), xi = v2(g(rng), g(rng)), eta = v2(g(rng), g(rng));
            double a = s.E.abc(xi, s.h.inverse() * eta);
            double m = mtw_tensor(h, c.p + y, y, xi, eta).value;
            CHECK(m == doctest::Approx(a).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(mtw_tensor(named("calabi_ball"), v2(0.9, 0), v2(-0.5, 0), v2(1, 0), v2(0, 1)), OutOfDomain);
}

TEST_CASE("radial potential has non-negative orthogonal MTW") {
    PotentialHandle h = named("radial_sym");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    int done = 0;
    while (done < 50) {
        Vec p = v2(u(rng), u(rng));
        if (p.norm() < 0.2) continue;
        CHECK(mtw_point_extrema(h, p).min_value >= -1e-10);
        ++done;
    }
}

TEST_CASE("sign certificates") {
    SampleSpec shell;
    shell.kind = SampleSpec::Kind::Shell;
    shell.count = 60;
    shell.s_hi = 0.9;
    SignCertificate c = certify_sign(named("calabi_ball"), Quantity::Abc, shell);
    CHECK(c.verdict == Verdict::NonPositive);
    // the witness reproduces the extremal value
    CurvatureSample w = at(named("calabi_ball"), c.witness_x);
    CHECK(std::abs(anti_bisectional_normalized(w, c.witness_v, c.witness_w) - c.extremal_value) < 1e-12);
    // non-positive ABC forces non-positive polarized HSC
    CHECK(certify_sign(named("calabi_ball"), Quantity::HscPol, shell).max_value <= 1e-9);

    SampleSpec cone_pts;
    cone_pts.kind = SampleSpec::Kind::Explicit;
    cone_pts.points = {v2(1, 0), v2(2, 0.7), v2(-1.5, 0.2)};
    SignCertificate k = certify_sign(named("cone2d"), Quantity::Abc, cone_pts);
    CHECK(k.verdict == Verdict::NonPositive);
    CHECK(std::abs(k.max_value) <= k.tolerance);
    CHECK_THROWS_AS(quantity_from_string("BISECTIONAL"), UnknownName);
}

TEST_CASE("verdicts and witnesses are scale invariant") {
    SampleSpec pts;
    pts.kind = SampleSpec::Kind::Explicit;
    pts.points = {v2(0.2, 0.1), v2(-0.4, 0.5), v2(0.6, 0)};
    PotentialHandle h = named("calabi_ball");
    SignCertificate base = certify_sign(h, Quantity::OrthAbc, pts);
    for (double c : {0.5, 3.0}) {
        SignCertificate s = certify_sign(h.scaled(c), Quantity::OrthAbc, pts);
        CHECK(s.verdict == base.verdict);
        CHECK(s.witness_x == base.witness_x);
        Vec a = s.witness_v.normalized(), b = base.witness_v.normalized();
        CHECK(std::min((a - b).norm(), (a + b).norm()) < 1e-6);
    }
}

TEST_CASE("normalized quantities are affine invariant") {
    Mat L(2, 2);
    L << 0.8, 0.3, -0.2, 1.1;
    Vec b = v2(0.05, -0.1);
    PotentialHandle h = named("calabi_ball");
    PotentialHandle g = h.affine(L, b);
    Vec x = v2(0.1, 0.2), v = v2(0.4, -0.9), w = v2(1, 0.3);
    CurvatureSample sg = at(g, x), sh = at(h, L * x + b);
    CHECK(hsc(sg, v) == doctest::Approx(hsc(sh, L * v)).epsilon(1e-10));
    CHECK(anti_bisectional_normalized(sg, v, w) == doctest::Approx(anti_bisectional_normalized(sh, L * v, L * w)).epsilon(1e-10));
}

TEST_CASE("serial and parallel certificates are identical") {
    SampleSpec spec;
    spec.count = 40;
    spec.seed = 3;
    spec.lo = v2(-0.6, -0.6);
    spec.hi = v2(0.6, 0.6);
    for (Quantity q : {Quantity::Abc, Quantity::OrthAbc}) {
        SignCertificate a = certify_sign(named("calabi_ball"), q, spec, {}, Exec::Serial);
        SignCertificate b = certify_sign(named("calabi_ball"), q, spec, {}, Exec::Parallel);
        CHECK(a.max_value == b.max_value);
        CHECK(a.min_value == b.min_value);
        CHECK(a.witness_v == b.witness_v);
    }
}

TEST_CASE("curvature scan csv") {
    std::vector<Vec> pts = {v2(0.1, 0.2), v2(-0.3, 0)};
    auto rows = curvature_scan(named("calabi_ball"), pts);
    std::ostringstream out;
    write_scan_csv(out, rows);
    CHECK(out.str().rfind("x1,x2,S,O,Hmin_pol,ABC_min,v1,v2,w1,w2\n", 0) == 0);
    CHECK(rows[0].S < 0);
}
