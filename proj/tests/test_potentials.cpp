#include "oracles.hpp"

#include "tubeflow/errors.hpp"
#include "tubeflow/potentials.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tubeflow;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

PotentialHandle calabi2() {
    Params p;
    p.set("n", 2);
    return catalog("calabi_ball", p);
}

Mat rotation(double a) {
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

}  // namespace

TEST_CASE("calabi jet at the origin") {
    PotentialJet j = jet(calabi2(), v2(0, 0));
    CHECK(j.value == doctest::Approx(0).epsilon(1e-15));
    CHECK(j.gradient.norm() < 1e-15);
    CHECK((j.hessian - 2 * Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK(j.third.max_abs() < 1e-14);
    CHECK(j.fourth(0, 0, 0, 0) == doctest::Approx(12));
    CHECK(j.fourth(0, 0, 1, 1) == doctest::Approx(4));
    CHECK(std::abs(j.fourth(0, 1, 1, 1)) < 1e-14);
    CHECK(j.fourth(1, 1, 1, 1) == doctest::Approx(12));
}

TEST_CASE("log barrier derivatives at 1") {
    Params p;
    p.set("n", 1);
    Vec x(1);
    x << 1;
    PotentialJet j = jet(catalog("log_barrier", p), x);
    CHECK(j.gradient[0] == doctest::Approx(-1));
    CHECK(j.hessian(0, 0) == doctest::Approx(1));
    CHECK(j.third(0, 0, 0) == doctest::Approx(-2));
    CHECK(j.fourth(0, 0, 0, 0) == doctest::Approx(6));
}

TEST_CASE("quadratic has flat higher jets") {
    for (int n : {1, 2, 3}) {
        Params p;
        p.set("n", n);
        PotentialHandle h = catalog("quadratic", p);
        Vec x = Vec::LinSpaced(n, -0.7, 1.3);
        PotentialJet j = jet(h, x);
        CHECK((j.hessian - Mat::Identity(n, n)).norm() < 1e-15);
        CHECK(j.third.max_abs() == 0.0);
        CHECK(j.fourth.max_abs() == 0.0);
    }
}

TEST_CASE("catalog names and parameter errors") {
    CHECK(catalog_entries().size() >= 7);
    CHECK_THROWS_AS(catalog("no_such_potential"), UnknownName);
    Params bad;
    bad.set("C", 0.0);
    CHECK_THROWS_AS(catalog("radial_sym", bad), BadParams);
    Params amp;
    amp.set("amplitude", 1.5);
    CHECK_THROWS_AS(catalog("quadratic_plus_periodic", amp), BadParams);
    Params grid;
    CHECK_THROWS_AS(catalog("grid", grid), BadParams);
}

TEST_CASE("catalog formulas match their closed forms") {
    PotentialHandle cone = catalog("cone2d");
    Vec x = v2(1.5, 0.4);
    CHECK(cone.value(x) == doctest::Approx(-std::log(1.5 * 1.5 - 0.4 * 0.4)).epsilon(1e-14));
    CHECK(cone.domain.contains(v2(-2, 1)));
    CHECK_FALSE(cone.domain.contains(v2(0.5, 1)));
    PotentialHandle radial = catalog("radial_sym");
    double r = x.norm();
    CHECK(radial.value(x) == doctest::Approx(r - std::log(r + 1)).epsilon(1e-14));
    Params c3;
    c3.set("C", 3.0);
    CHECK(catalog("radial_sym", c3).value(x) == doctest::Approx(r - 3 * std::log(r + 3)).epsilon(1e-14));
    CHECK(calabi2().value(v2(0.3, 0.4)) == doctest::Approx(-std::log(1 - 0.25)).epsilon(1e-14));
    CHECK(catalog("bidisk_trig").value(v2(0.2, -0.5)) ==
          doctest::Approx(-std::log(std::cos(0.2) + std::cos(-0.5))).epsilon(1e-14));
}

TEST_CASE("zero amplitude periodic potential equals the quadratic") {
    Params p;
    p.set("amplitude", 0.0);
    PotentialHandle per = catalog("quadratic_plus_periodic", p);
    PotentialHandle quad = catalog("quadratic");
    Vec x = v2(0.13, -0.42);
    PotentialJet a = jet(per, x), b = jet(quad, x);
    CHECK(a.value == doctest::Approx(b.value));
    CHECK((a.hessian - b.hessian).norm() < 1e-15);
    CHECK(a.fourth.max_abs() == 0.0);
}

TEST_CASE("domain violations and concavity raise") {
    CHECK_THROWS_AS(jet(calabi2(), v2(0.9, 0.5)), OutOfDomain);
    CHECK_THROWS_AS(jet(catalog("cone2d"), v2(0.1, 0.5)), OutOfDomain);
    Params n2;
    n2.set("n", 2);
    CHECK_THROWS_AS(jet(catalog("radial_sym", n2), v2(0, 0)), OutOfDomain);
    DomainSpec plane;
    plane.n = 2;
    PotentialHandle concave = PotentialHandle::closed_form(
        "concave", plane, [](const Vec& y) { return -y.squaredNorm(); },
        [](const std::vector<Taylor>& y) { return -(y[0] * y[0] + y[1] * y[1]); });
    CHECK_THROWS_AS(jet(concave, v2(0.2, 0.1)), NotConvexHere);
    CHECK_THROWS_AS(convexity_certify(concave, 10, 1), NotConvexHere);
}

TEST_CASE("closed-form jets agree with a finite-difference oracle") {
    struct Case {
        std::string name;
        Vec x;
    };
    std::vector<Case> cases = {{"calabi_ball", v2(0.3, -0.2)},
                               {"cone2d", v2(1.4, 0.5)},
                               {"radial_sym", v2(0.8, 1.1)},
                               {"bidisk_trig", v2(0.3, 0.4)},
                               {"bidisk_product", v2(0.7, 1.9)}};
    for (const Case& c : cases) {
        CAPTURE(c.name);
        PotentialHandle h = catalog(c.name);
        oracle::Fn f = [&](const Vec& y) { return h.value(y); };
        PotentialJet j = jet(h, c.x);
        double scale2 = 1 + j.hessian.cwiseAbs().maxCoeff();
        double scale3 = 1 + j.third.max_abs();
        for (int a = 0; a < 2; ++a) {
            CHECK(std::abs(oracle::d1(f, c.x, a, 1e-3) - j.gradient[a]) < 1e-8 * (1 + j.gradient.norm()));
            for (int b = 0; b < 2; ++b) {
                CHECK(std::abs(oracle::d2(f, c.x, a, b, 1e-3) - j.hessian(a, b)) < 1e-6 * scale2);
                for (int d = 0; d < 2; ++d)
                    CHECK(std::abs(oracle::d3(f, c.x, a, b, d, 1e-2) - j.third(a, b, d)) < 1e-4 * scale3);
            }
        }
    }
}

TEST_CASE("jet tensors are fully symmetric") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    Params p3;
    p3.set("n", 3);
    PotentialHandle h = catalog("calabi_ball", p3);
    for (int t = 0; t < 20; ++t) {
        Vec x(3);
        x << u(rng), u(rng), u(rng) * 0.5;
        PotentialJet j = jet(h, x);
        CHECK(full_symmetry_defect(j.third) == 0.0);
        CHECK(full_symmetry_defect(j.fourth) == 0.0);
        CHECK((j.hessian - j.hessian.transpose()).norm() == 0.0);
    }
}

TEST_CASE("rotation invariant potentials obey the tensor law") {
    for (const char* name : {"calabi_ball", "radial_sym"}) {
        CAPTURE(name);
        PotentialHandle h = catalog(name);
        Vec x = v2(0.35, 0.2);
        Mat R = rotation(0.7);
        PotentialJet a = jet(h, x), b = jet(h, R * x);
        CHECK((a.hessian - R.transpose() * b.hessian * R).cwiseAbs().maxCoeff() < 1e-9);
        Tensor3 t3 = change_basis(b.third, R);
        Tensor4 t4 = change_basis(b.fourth, R);
        for (size_t i = 0; i < t3.data().size(); ++i) CHECK(std::abs(t3.data()[i] - a.third.data()[i]) < 1e-9);
        for (size_t i = 0; i < t4.data().size(); ++i) CHECK(std::abs(t4.data()[i] - a.fourth.data()[i]) < 1e-9);
    }
}

TEST_CASE("finite-difference jets converge at second order") {
    PotentialHandle h = calabi2();
    Vec x = v2(0.2, 0.1);
    PotentialJet exact = jet(h, x);
    ScalarFn f = [&](const Vec& y) { return h.value(y); };
    auto err2 = [&](double s) { return (fd_jet(f, x, s).hessian - exact.hessian).cwiseAbs().maxCoeff(); };
    auto err4 = [&](double s) {
        PotentialJet j = fd_jet(f, x, s);
        double e = 0;
        for (size_t i = 0; i < j.fourth.data().size(); ++i)
            e = std::max(e, std::abs(j.fourth.data()[i] - exact.fourth.data()[i]));
        return e;
    };
    double order2 = std::log2(err2(0.02) / err2(0.01));
    double order4 = std::log2(err4(0.1) / err4(0.05));
    CHECK(order2 == doctest::Approx(2).epsilon(0.25));
    CHECK(order4 == doctest::Approx(2).epsilon(0.25));
}

TEST_CASE("convexity certificates") {
    SignCertificate q = convexity_certify(catalog("quadratic"), 100, 3);
    CHECK(q.verdict == Verdict::Pass);
    CHECK(q.extremal_value == doctest::Approx(1));
    SampleSpec shell;
    shell.kind = SampleSpec::Kind::Shell;
    shell.count = 200;
    shell.s_hi = 0.9;
    SignCertificate c = convexity_certify(calabi2(), shell);
    CHECK(c.verdict == Verdict::Pass);
    CHECK(c.extremal_value >= 2 - 1e-12);
    CHECK_THROWS_AS(convexity_certify(calabi2(), 0, 1), BadParams);
}

TEST_CASE("serial and parallel convexity certificates are identical") {
    SampleSpec s;
    s.count = 300;
    s.seed = 9;
    SignCertificate a = convexity_certify(catalog("bidisk_trig"), s, Exec::Serial);
    SignCertificate b = convexity_certify(catalog("bidisk_trig"), s, Exec::Parallel);
    CHECK(a.extremal_value == b.extremal_value);
    CHECK(a.witness_x == b.witness_x);
}

TEST_CASE("samples respect the domain and the seed") {
    SampleSpec s;
    s.count = 50;
    s.seed = 2;
    PotentialHandle cone = catalog("cone2d");
    auto a = generate_samples(s, cone.domain), b = generate_samples(s, cone.domain);
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(cone.domain.contains(a[i]));
        CHECK(a[i] == b[i]);
    }
    SampleSpec g;
    g.kind = SampleSpec::Kind::GridBox;
    g.per_dim = 5;
    g.lo = v2(-0.5, -0.5);
    g.hi = v2(0.5, 0.5);
    CHECK(generate_samples(g, calabi2().domain).size() == 25);
}

TEST_CASE("grid potentials reproduce the sampled function") {
    GridFile g;
    g.spec.n = 2;
    g.spec.h = 0.025;
    g.spec.x0 = v2(-0.5, -0.5);
    g.spec.dims = {41, 41};
    PotentialHandle c = calabi2();
    for (size_t id = 0; id < g.spec.size(); ++id) g.values.push_back(c.value(g.spec.node(id)));
    std::stringstream text;
    write_grid(text, g);
    GridFile back = read_grid(text);
    CHECK(back.values == g.values);
    PotentialHandle h = PotentialHandle::from_grid("grid", back, false);
    Vec x = v2(0.11, -0.07);
    CHECK(h.value(x) == doctest::Approx(c.value(x)).epsilon(1e-6));
    PotentialJet a = jet(h, x), b = jet(c, x);
    CHECK((a.hessian - b.hessian).cwiseAbs().maxCoeff() < 1e-2);
    CHECK_THROWS_AS(jet(h, v2(0.7, 0)), OutOfDomain);
}
