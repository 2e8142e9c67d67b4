#include "oracles.hpp"

#include "tubeflow/errors.hpp"
#include "tubeflow/transport.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tubeflow;

namespace {

std::vector<Vec> random_points(int m, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Vec> pts;
    for (int i = 0; i < m; ++i) {
        Vec x(2);
        x << u(rng), u(rng);
        pts.push_back(x);
    }
    return pts;
}

Vec pt(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

}  // namespace

TEST_CASE("exact solver matches brute force on uniform instances") {
    std::mt19937_64 rng(1);
    PotentialHandle q = catalog("quadratic");
    for (int m = 1; m <= 7; ++m)
        for (int rep = 0; rep < 10; ++rep) {
            auto mu = DiscreteMeasure::uniform(random_points(m, rng, -1, 1));
            auto nu = DiscreteMeasure::uniform(random_points(m, rng, -1, 1));
            Mat C = cost_matrix(q, mu.points, nu.points);
            TransportPlan p = solve_exact(mu, nu, C);
            CHECK(p.cost == doctest::Approx(oracle::assignment_min(C)).epsilon(1e-12));
            CHECK(p.certified());
            CHECK(std::abs(p.cost - p.dual_value) < 1e-12);
        }
}

TEST_CASE("monotone matching in one dimension") {
    PotentialHandle q = catalog("quadratic", {{"n", 1.0}});
    std::vector<Vec> xs, ys;
    for (double a : {0.3, -1.0, 2.0, 0.9}) xs.push_back(Vec::Constant(1, a));
    for (double b : {5.0, -2.0, 1.0, 0.0}) ys.push_back(Vec::Constant(1, b));
    auto mu = DiscreteMeasure::uniform(xs), nu = DiscreteMeasure::uniform(ys);
    TransportPlan p = solve_exact(mu, nu, cost_matrix(q, xs, ys));
    std::vector<Vec> t = transport_map(p, mu, nu);
    // sorted sources go to sorted targets
    CHECK(t[1](0) == -2.0);
    CHECK(t[0](0) == 0.0);
    CHECK(t[3](0) == 1.0);
    CHECK(t[2](0) == 5.0);
}

TEST_CASE("identical measures give the identity coupling") {
    std::mt19937_64 rng(2);
    auto mu = DiscreteMeasure::uniform(random_points(12, rng, -1, 1));
    TransportPlan p = solve_exact(mu, mu, cost_matrix(catalog("quadratic"), mu.points, mu.points));
    CHECK(p.cost == 0.0);
    for (int a = 0; a < 12; ++a) CHECK(p.coupling(a, a) == doctest::Approx(1.0 / 12));
    CHECK(holder_modulus(p, mu, mu, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("translation and collapse moduli") {
    std::mt19937_64 rng(3);
    auto mu = DiscreteMeasure::uniform(random_points(9, rng, -1, 1));
    std::vector<Vec> shifted;
    for (const Vec& x : mu.points) shifted.push_back(x + pt(0.4, -0.2));
    auto nu = DiscreteMeasure::uniform(shifted);
    TransportPlan p = solve_exact(mu, nu, cost_matrix(catalog("quadratic"), mu.points, nu.points));
    CHECK(holder_modulus(p, mu, nu, 1.0) == doctest::Approx(1.0));

    DiscreteMeasure one{{pt(0.1, 0.1)}, {1.0}};
    TransportPlan c = solve_exact(mu, one, cost_matrix(catalog("quadratic"), mu.points, one.points));
    CHECK(holder_modulus(c, mu, one, 0.5) == 0.0);
}

TEST_CASE("split mass is not a map") {
    DiscreteMeasure mu{{pt(0, 0)}, {1.0}};
    DiscreteMeasure nu{{pt(1, 0), pt(0, 1), pt(-1, 0)}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    TransportPlan p = solve_exact(mu, nu, cost_matrix(catalog("quadratic"), mu.points, nu.points));
    CHECK_THROWS_AS(transport_map(p, mu, nu), NotDeterministic);
}

TEST_CASE("unequal masses are infeasible") {
    DiscreteMeasure mu{{pt(0, 0), pt(1, 1)}, {0.5, 0.5}};
    DiscreteMeasure nu{{pt(0, 1)}, {0.5}};
    CHECK_THROWS_AS(solve_exact(mu, nu, Mat::Ones(2, 1)), Infeasible);
    DiscreteMeasure bad{{pt(0, 0), pt(0, 0)}, {0.5, 0.5}};
    CHECK_THROWS_AS(bad.validate(), BadParams);
}

TEST_CASE("optimal cost is 1-Lipschitz in the cost matrix") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int rep = 0; rep < 30; ++rep) {
        int m = 2 + rep % 6;
        std::vector<Vec> xs = random_points(m, rng, -0.5, 0.5);
        for (Vec& x : xs) x(0) += 2.5;
        auto mu = DiscreteMeasure::uniform(xs);
        auto nu = DiscreteMeasure::uniform(random_points(m, rng, -0.5, 0.5));
        Mat C = cost_matrix(catalog("cone2d"), mu.points, nu.points), D = C;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) D(a, b) += 0.01 * u(rng);
        double gap = std::abs(solve_exact(mu, nu, C).cost - solve_exact(mu, nu, D).cost);
        CHECK(gap <= (C - D).cwiseAbs().maxCoeff() + 1e-14);
    }
}

TEST_CASE("general weights are certified") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        DiscreteMeasure mu{random_points(6, rng, -1, 1), {}}, nu{random_points(9, rng, -1, 1), {}};
        for (auto* m : {&mu, &nu}) {
            double sum = 0;
            for (size_t i = 0; i < m->points.size(); ++i) sum += m->weights.emplace_back(u(rng));
            for (double& w : m->weights) w /= sum;
        }
        TransportPlan p = solve_exact(mu, nu, cost_matrix(catalog("radial_sym"), mu.points, nu.points));
        CHECK(p.certified());
        CHECK(std::abs(p.cost - p.dual_value) < 1e-12);
        CHECK(p.coupling.minCoeff() >= 0);
    }
}

TEST_CASE("cost matrix respects the domain") {
    std::vector<Vec> x{pt(0.9, 0)}, y{pt(-0.9, 0)};
    CHECK_THROWS_AS(cost_matrix(catalog("calabi_ball"), x, y), OutOfDomain);
    Mat c = cost_matrix(catalog("calabi_ball"), x, x);
    CHECK(c(0, 0) == doctest::Approx(jet(catalog("calabi_ball"), Vec::Zero(2)).value));
}

TEST_CASE("instance CSV round trip") {
    OtInstance inst = random_instance(7, pt(0, 0), pt(1, 1), pt(-1, -1), pt(0, 0), 9);
    std::stringstream text;
    write_instance(text, inst);
    OtInstance back = read_instance(text);
    REQUIRE(back.mu.points.size() == 7);
    REQUIRE(back.nu.points.size() == 7);
    for (int i = 0; i < 7; ++i) {
        CHECK(back.mu.points[i] == inst.mu.points[i]);
        CHECK(back.nu.weights[i] == inst.nu.weights[i]);
    }
    std::istringstream bad("mu,0,0,1\nxx,1,1,1\n");
    CHECK_THROWS(read_instance(bad));
}

TEST_CASE("plan distance") {
    std::mt19937_64 rng(6);
    auto mu = DiscreteMeasure::uniform(random_points(5, rng, -1, 1));
    auto nu = DiscreteMeasure::uniform(random_points(5, rng, -1, 1));
    TransportPlan p = solve_exact(mu, nu, cost_matrix(catalog("quadratic"), mu.points, nu.points));
    CHECK(plan_tv(p, p) == 0.0);
    TransportPlan r = p;
    r.coupling = Mat::Constant(5, 5, 1.0 / 25);
    CHECK(plan_tv(p, r) > 0);
    CHECK(plan_tv(p, r) <= 1.0);
}

TEST_CASE("continuity experiment on a stationary potential") {
    OtInstance inst = random_instance(20, pt(0.5, 0.5), pt(1, 1), pt(-1, -1), pt(-0.5, -0.5), 12);
    FlowGrid g;
    g.mode = BoundaryMode::FrozenWindow;
    g.points = 33;
    g.lo = pt(-2, -2);
    g.hi = pt(2, 2);
    std::vector<ContinuityRow> rows = weak_continuity_experiment(catalog("quadratic"), inst, {0.0, 0.002}, 0.5, g);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].tv == 0.0);
    CHECK(rows[1].cost == doctest::Approx(rows[0].cost).epsilon(1e-9));
    CHECK(rows[0].certificate_residual < 1e-9);
    std::ostringstream csv;
    write_continuity_csv(csv, rows);
    CHECK(csv.str().rfind("t,cost,holder_modulus,plan_tv_to_t0\n", 0) == 0);
    CHECK_THROWS_AS(weak_continuity_experiment(catalog("quadratic"), inst, {0.01, 0.0}, 0.5, g), BadParams);
}
