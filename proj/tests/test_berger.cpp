#include "tubeflow/berger.hpp"
#include "tubeflow/errors.hpp"
#include "tubeflow/potentials.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tubeflow;

namespace {

CurvatureSample sample_at(const std::string& name, double x1, double x2) {
    Vec x(2);
    x << x1, x2;
    return core_form(jet(catalog(name), x));
}

// exact mean of E(z,z,z,z) over the real unit sphere
double exact_polarized(const Tensor4& e) {
    int n = e.dim();
    double m22 = 1.0 / (n * (n + 2)), m4 = 3.0 * m22, off = 0, diag = 0;
    for (int i = 0; i < n; ++i) {
        diag += e(i, i, i, i);
        for (int j = 0; j < n; ++j)
            if (i != j) off += e(i, i, j, j) + e(i, j, i, j) + e(i, j, j, i);
    }
    return m4 * diag + m22 * off;
}

}  // namespace

TEST_CASE("sphere moments agree with the exact values") {
    for (int n : {2, 3, 4}) {
        SphereMoments m = sphere_moments(n, 200000, 5 + n);
        CHECK(m.exact_m4 == doctest::Approx(3.0 / (n * (n + 2))));
        CHECK(m.exact_m22 == doctest::Approx(1.0 / (n * (n + 2))));
        CHECK(std::abs(m.m4.estimate - m.exact_m4) < 4 * m.m4.standard_error);
        CHECK(std::abs(m.m22.estimate - m.exact_m22) < 4 * m.m22.standard_error);
        CHECK(std::abs(m.ratio - 3.0) < 4 * m.ratio_error);
        CHECK(m.m4_by_coord.size() == static_cast<size_t>(n));
    }
}

TEST_CASE("sphere moments do not depend on the execution mode") {
    SphereMoments a = sphere_moments(3, 20000, 17, Exec::Serial), b = sphere_moments(3, 20000, 17, Exec::Parallel);
    CHECK(a.m4.estimate == b.m4.estimate);
    CHECK(a.m22.estimate == b.m22.estimate);
    CHECK(a.m4.count == b.m4.count);
}

TEST_CASE("polarized average matches the exact quadrature") {
    for (const char* name : {"calabi_ball", "bidisk_product", "cone2d"}) {
        CurvatureSample s = std::string(name) == "cone2d" ? sample_at(name, 1.2, 0.4) : sample_at(name, 0.3, 0.2);
        SphereAverage a = polarized_average(s, 200000, 21);
        CHECK(std::abs(a.estimate - exact_polarized(s.frame_E)) < 4 * a.standard_error + 1e-12);
    }
}

TEST_CASE("plane fit on the calabi origin") {
    CurvatureSample s = sample_at("calabi_ball", 0, 0);
    Mat hinv_sqrt = s.frame;  // columns are h-orthonormal
    TrigFit f = plane_fit(s, hinv_sqrt.col(0), hinv_sqrt.col(1));
    CHECK(f.a[0] < 0);
    CHECK(f.residual < 1e-10);
    Vec bad = hinv_sqrt.col(0) * 2.0;
    CHECK_THROWS_AS(plane_fit(s, bad, hinv_sqrt.col(1)), BadFrame);
    CHECK_THROWS_AS(plane_fit(s, hinv_sqrt.col(0), hinv_sqrt.col(0)), BadFrame);
}

TEST_CASE("plane fit reproduces the samples") {
    CurvatureSample s = sample_at("bidisk_product", 0.5, 1.3);
    auto samples = plane_samples(s, s.frame.col(0), s.frame.col(1));
    TrigFit f = plane_fit(s, s.frame.col(0), s.frame.col(1));
    double worst = 0;
    for (auto& [t, v] : samples) worst = std::max(worst, std::abs(f.model(t) - v));
    CHECK(worst < 1e-10);
    CHECK(samples.size() == 360);
}

TEST_CASE("plane fit of a flat tensor is zero") {
    CurvatureSample s = core_form(jet(catalog("quadratic"), Vec::Zero(2)));
    TrigFit f = plane_fit(s, s.frame.col(0), s.frame.col(1));
    for (double a : f.a) CHECK(std::abs(a) < 1e-14);
}

TEST_CASE("fifth bound and wedge on negative examples") {
    for (auto [name, x1, x2] : {std::tuple{"calabi_ball", 0.5, 0.0}, std::tuple{"calabi_ball", 0.1, -0.3},
                                std::tuple{"bidisk_product", 0.7, 0.3}}) {
        FifthReport r = fifth_and_wedge_checks(sample_at(name, x1, x2));
        CHECK(r.h_min < 0);
        CHECK(r.planes >= 1);
        CHECK(r.fit_residual < 1e-9);
        CHECK(r.ok());
    }
    CurvatureSample flat = core_form(jet(catalog("quadratic"), Vec::Zero(2)));
    CHECK_THROWS_AS(fifth_and_wedge_checks(flat), NotNegativeHSC);
}

TEST_CASE("Ricci average is a fixed multiple of the sphere integral") {
    CurvatureSample flat = core_form(jet(catalog("quadratic"), Vec::Zero(2)));
    Vec a = Vec::Unit(2, 0), b = Vec::Zero(2);
    RicciAverage z = ricci_average(flat, a, b, 10000, 3);
    CHECK(z.lhs == 0.0);
    CHECK(z.integral.estimate == 0.0);

    CurvatureSample s = sample_at("calabi_ball", 0.2, 0.1);
    Vec a2(2), b2(2);
    a2 << 0.6, 0.0;
    b2 << 0.0, 0.8;
    RicciAverage r = ricci_average(s, a2, b2, 200000, 4);
    CHECK(std::abs(r.ratio - 2.0) < 4 * r.ratio_error + 1e-9);
}

TEST_CASE("decomposition fit recovers synthetic coefficients") {
    std::vector<DecompositionRow> rows;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (int i = 0; i < 8; ++i) {
        DecompositionRow r;
        r.S = g(rng), r.O = g(rng), r.D = g(rng);
        r.avg = 0.5 * r.S + 0.25 * r.O + 0.125 * r.D;
        r.se = 1e-3;
        rows.push_back(r);
    }
    DecompositionFit f = fit_decomposition(rows);
    CHECK(f.a3 == doctest::Approx(0.5));
    CHECK(f.b3 == doctest::Approx(0.25));
    CHECK(f.c3 == doctest::Approx(0.125));
    CHECK(f.residual3 < 1e-12);
    CHECK(f.mc_error == 1e-3);

    for (auto& r : rows) r.avg = 0.5 * r.S + 0.25 * r.O;
    DecompositionFit two = fit_decomposition(rows);
    CHECK(two.alpha == doctest::Approx(0.5));
    CHECK(two.beta_over_alpha() == doctest::Approx(0.5));
    CHECK(two.residual < 1e-12);
}

TEST_CASE("decomposition rows follow the exact weights") {
    std::vector<DecompositionRow> rows;
    for (auto [x1, x2] : {std::pair{0.0, 0.0}, {0.3, 0.1}, {-0.2, 0.5}, {0.6, -0.1}})
        rows.push_back(decomposition_row(sample_at("calabi_ball", x1, x2), 100000, 9));
    rows.push_back(decomposition_row(sample_at("bidisk_product", 0.4, 0.2), 100000, 9));
    DecompositionFit f = fit_decomposition(rows);
    CHECK(f.residual3 < 3 * f.mc_error);
    CHECK(f.a3 == doctest::Approx(2.0 / 8).epsilon(0.1));
}
