#include "oracles.hpp"

#include "tubeflow/curvature.hpp"
#include "tubeflow/errors.hpp"
#include "tubeflow/reaction.hpp"
#include "tubeflow/suites.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tubeflow;

namespace {

Tensor4 scalar_tensor(double a) {
    Tensor4 t(1);
    t(0, 0, 0, 0) = a;
    return t;
}

Tensor4 calabi_frame_tensor(double x1, double x2) {
    Vec x(2);
    x << x1, x2;
    return core_form(jet(catalog("calabi_ball"), x)).frame_E;
}

}  // namespace

TEST_CASE("Q in one dimension and at zero") {
    for (double a : {-1.5, 0.0, 0.3, 2.0}) CHECK(q_quadratic(scalar_tensor(a))(0, 0, 0, 0) == doctest::Approx(2 * a * a));
    CHECK(q_quadratic(Tensor4(3)).max_abs() == 0.0);
}

TEST_CASE("Q matches the plain contraction and keeps the symmetries") {
    std::mt19937_64 rng(3);
    for (int n : {2, 3, 4}) {
        Tensor4 a = random_curvature(n, rng);
        Tensor4 q = q_quadratic(a), ref = oracle::q_naive(a);
        for (size_t i = 0; i < q.data().size(); ++i) CHECK(std::abs(q.data()[i] - ref.data()[i]) < 1e-12 * (1 + ref.max_abs()));
        CHECK(curvature_symmetry_defect(q) == 0.0);
        Tensor4 q2 = q_quadratic(2.5 * a);
        for (size_t i = 0; i < q.data().size(); ++i) CHECK(q2.data()[i] == doctest::Approx(6.25 * q.data()[i]));
    }
}

TEST_CASE("scalar ODE against its closed form") {
    OdeTrajectory neg = integrate_ode(scalar_tensor(-1), 0.5, 1e-3, 100);
    CHECK(std::abs(neg.states.back()(0, 0, 0, 0) + 0.5) < 1e-8);
    for (size_t i = 0; i < neg.times.size(); ++i) {
        CHECK(neg.states[i](0, 0, 0, 0) < 0);
        CHECK(neg.states[i](0, 0, 0, 0) == doctest::Approx(-1 / (1 + 2 * neg.times[i])).epsilon(1e-10));
    }
    CHECK_THROWS_AS(integrate_ode(scalar_tensor(1), 1.0, 1e-3), BlowUp);
    OdeTrajectory pos = integrate_ode(scalar_tensor(2), 1.0, 1e-3, 1, true);
    REQUIRE(pos.blowup_t);
    CHECK(std::abs(*pos.blowup_t - 0.25) < 0.05 * 0.25);
    OdeTrajectory zero = integrate_ode(scalar_tensor(0), 1.0, 1e-2);
    for (const Tensor4& s : zero.states) CHECK(s(0, 0, 0, 0) == 0.0);
    CHECK_THROWS_AS(integrate_ode(scalar_tensor(1), 1.0, 0.0), BadParams);
}

TEST_CASE("ODE keeps the symmetry class") {
    std::mt19937_64 rng(8);
    Tensor4 a = random_curvature(3, rng);
    OdeTrajectory tr = integrate_ode(0.1 * a, 0.05, 1e-3, 10);
    for (const Tensor4& s : tr.states) CHECK(curvature_symmetry_defect(s) == 0.0);
    CHECK(tr.max_drift < 1e-13 * (1 + a.norm()));
}

TEST_CASE("extremal pairs") {
    CHECK(extremal_pair(Tensor4(2), ExtremalMode::MaxAbc).value == 0.0);
    Vec x(2);
    x << 0.8, 1.5;
    Tensor4 prod = core_form(jet(catalog("bidisk_product"), x)).frame_E;
    CHECK(extremal_pair(prod, ExtremalMode::MaxAbc).value < 0);

    std::mt19937_64 rng(9);
    Tensor4 b = orth_boundary(random_curvature(2, rng));
    PairExtremum e = extremal_pair(b, ExtremalMode::MinOrthAbc);
    CHECK(std::abs(e.value) < 1e-9 * (1 + b.max_abs()));
    CHECK(std::abs(e.a.dot(e.b)) < 1e-9);

    Tensor4 nb = negative_boundary(random_curvature(3, rng));
    CHECK(std::abs(extremal_pair(nb, ExtremalMode::MaxAbc).value) < 1e-9 * (1 + nb.max_abs()));
}

TEST_CASE("null-vector check on an engine boundary tensor") {
    Tensor4 a = negative_boundary(calabi_frame_tensor(0.3, 0.2));
    NullVectorReport r = null_vector_check_negative(a);
    CHECK(r.ok());
    CHECK(r.q_value <= 1e-8 * r.norm * r.norm);
    CHECK(r.sharper <= 1e-8 * r.norm * r.norm);

    NullVectorReport z = null_vector_check_negative(Tensor4(1));
    CHECK(z.ok());
    CHECK(z.q_value == 0.0);

    CHECK_THROWS_AS(null_vector_check_negative(calabi_frame_tensor(0.3, 0.2)), NotExtremal);
}

TEST_CASE("null-vector suite on a small batch") {
    NullVectorSuite s = null_vector_suite(20, 4);
    CHECK(s.failures == 0);
    CHECK(s.engine_sources == 10);
    NullVectorSuite p = null_vector_suite(20, 4, Exec::Serial);
    CHECK(p.worst_q == s.worst_q);
    CHECK(p.worst_first == s.worst_first);
}

TEST_CASE("block trace lemma") {
    BlockInstance id;
    id.m1 = id.m2 = Mat::Identity(3, 3);
    id.n = Mat::Zero(3, 3);
    CHECK(trace_lemma(id).value == doctest::Approx(3));
    TraceLemmaResult f = trace_lemma(footnote_instance());
    CHECK(f.value == 0.0);
    BlockInstance bad = id;
    bad.m1(0, 0) = -1;
    CHECK_THROWS_AS(trace_lemma(bad), NotPSD);

    std::mt19937_64 rng(10);
    for (int t = 0; t < 300; ++t) {
        BlockInstance b = random_block_instance(1 + t % 6, rng);
        TraceLemmaResult r = trace_lemma(b);
        CHECK(r.value >= -1e-9);
        CHECK(r.charpoly_gap < 1e-9);
        CHECK(r.similarity_gap < 1e-12);
    }
}

TEST_CASE("characteristic polynomial of a known matrix") {
    Mat m = Mat::Zero(3, 3);
    m.diagonal() << 1, 2, 3;
    Mat q = Eigen::HouseholderQR<Mat>(Mat::Random(3, 3)).householderQ();
    std::vector<double> c = characteristic_polynomial(q * m * q.transpose());
    REQUIRE(c.size() == 4);
    CHECK(c[0] == doctest::Approx(-6));
    CHECK(c[1] == doctest::Approx(11));
    CHECK(c[2] == doctest::Approx(-6));
    CHECK(c[3] == doctest::Approx(1));
}

TEST_CASE("two-dimensional NOAB identity is exact") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        Tensor4 a = noab_constrained_tensor(rng);
        CHECK(a(0, 1, 0, 1) == 0.0);
        CHECK(a(0, 1, 0, 0) == a(0, 1, 1, 1));
        double q = q_quadratic(a)(0, 1, 0, 1);
        CHECK(std::abs(q - 4 * a(0, 0, 0, 1) * a(0, 0, 0, 1)) <= 1e-12);
    }
    CHECK(noab_identity_suite(500, 3).worst_gap <= 1e-12);
}

TEST_CASE("three-dimensional probe finds a negative Q, two-dimensional does not") {
    ProbeResult p3 = noab_probe(3, 62, 1000);
    REQUIRE(p3.counterexample);
    CHECK(p3.q_value < -1e-6);
    CHECK(std::abs(p3.v.dot(p3.w)) < 1e-9);
    // the serialized tensor reproduces Q at the recorded pair
    std::stringstream text;
    write_curvature(text, *p3.counterexample);
    Tensor4 back = read_curvature(text);
    CHECK(q_at_pair(back, p3.v, p3.w) == doctest::Approx(p3.q_value).epsilon(1e-9));

    ProbeResult p2 = noab_probe(2, 63, 2000);
    CHECK_FALSE(p2.counterexample);
    CHECK(p2.min_q >= -1e-6);
    CHECK_THROWS_AS(noab_probe(3, 1, 0), BadParams);

    ProbeResult s = noab_probe(3, 64, 50, Exec::Serial), q = noab_probe(3, 64, 50, Exec::Parallel);
    CHECK(s.trials_run == q.trials_run);
    CHECK(s.q_value == q.q_value);
}

TEST_CASE("polarization bounds") {
    PolarizationReport flat = polarization_bounds(Tensor4(2), 0.0, 0.0);
    CHECK(flat.ok());
    for (const ComponentBound& b : flat.bounds) {
        CHECK(b.lo == 0.0);
        CHECK(b.hi == 0.0);
    }
    Tensor4 pos = scalar_tensor(1.0);
    CHECK_THROWS_AS(polarization_bounds(pos, 0.0, 0.0), NotNegativeABC);

    Vec x(2);
    x << 0.4, -0.1;
    CurvatureSample s = core_form(jet(catalog("calabi_ball"), x));
    double hmin = point_extrema(s, Quantity::HscPol).min_value;
    PolarizationReport r = polarization_bounds(s.frame_E, hmin, oab_trace(s));
    CHECK(r.ok());
    CHECK(polarization_suite(50, 6).violations == 0);
}

TEST_CASE("tensor text round trip") {
    std::mt19937_64 rng(13);
    Tensor4 a = random_curvature(3, rng);
    std::stringstream text;
    write_curvature(text, a);
    Tensor4 b = read_curvature(text);
    CHECK(a.data() == b.data());
}
