#include "tubeflow/errors.hpp"
#include "tubeflow/flow.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace tubeflow;

namespace {

FlowGrid torus(int points) {
    FlowGrid g;
    g.points = points;
    return g;
}

FlowGrid window(double lo0, double lo1, double hi0, double hi1, int points) {
    FlowGrid g;
    g.mode = BoundaryMode::FrozenWindow;
    g.points = points;
    g.lo = Vec(2);
    g.hi = Vec(2);
    g.lo << lo0, lo1;
    g.hi << hi0, hi1;
    return g;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("quadratic is stationary") {
    FlowState s = init_flow(catalog("quadratic"), torus(16));
    CHECK(max_abs(flow_rhs(s, s.u)) == 0.0);
    for (int i = 0; i < 5; ++i) flow_step(s);
    CHECK(max_abs(s.u) == 0.0);
}

TEST_CASE("constant Hessian shifts by 2nt log c") {
    for (double c : {0.5, 2.0, 3.0}) {
        FlowState s = init_flow(catalog("quadratic", {{"c", c}}), torus(8));
        for (int i = 0; i < 4; ++i) flow_step(s);
        double expect = 2 * 2 * s.t * std::log(c);
        for (double v : s.u) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("adaptive step follows the Hessian") {
    FlowState a = init_flow(catalog("quadratic"), torus(64));
    double h = 1.0 / 64;
    CHECK(adaptive_dt(a) == doctest::Approx(0.25 * h * h / 2));
    FlowState b = init_flow(catalog("quadratic", {{"c", 2.0}}), torus(64));
    CHECK(adaptive_dt(b) == doctest::Approx(2 * adaptive_dt(a)));
    CHECK(flow_step(a, 1e-9) == 1e-9);
}

TEST_CASE("incompatible boundary modes") {
    CHECK_THROWS_AS(init_flow(catalog("calabi_ball"), torus(8)), IncompatibleMode);
    CHECK_THROWS_AS(init_flow(catalog("calabi_ball"), window(-1.0, -1.0, 1.0, 1.0, 9)), OutOfDomain);
    FlowState w = init_flow(catalog("calabi_ball"), window(-0.5, -0.5, 0.5, 0.5, 9));
    CHECK_THROWS_AS(mode_amplitude(w, Vec::Ones(2)), IncompatibleMode);
}

TEST_CASE("frozen ring keeps its width") {
    FlowGrid g = window(-0.5, -0.5, 0.5, 0.5, 13);
    g.ring = FlowGrid::Ring::Values;
    FlowState s = init_flow(catalog("calabi_ball"), g);
    std::vector<double> r = flow_rhs(s, s.u);
    long evolved = 0;
    for (size_t id = 0; id < s.u.size(); ++id) {
        if (s.edge_distance(id) < s.frozen_width) {
            CHECK_FALSE(s.active(id));
            CHECK(r[id] == 0.0);
        } else {
            CHECK(s.active(id));
            ++evolved;
        }
    }
    CHECK(evolved == 9 * 9);

    // extrapolated ring: interior rates unchanged
    g.ring = FlowGrid::Ring::Extrapolate;
    FlowState e = init_flow(catalog("calabi_ball"), g);
    std::vector<double> re = flow_rhs(e, e.u);
    for (size_t id = 0; id < e.u.size(); ++id)
        if (e.active(id)) CHECK(re[id] == r[id]);
        else CHECK(std::isfinite(re[id]));
}

TEST_CASE("small periodic modes decay at the linear rate") {
    Params p{{"amplitude", 1e-3}};
    FlowState s = init_flow(catalog("quadratic_plus_periodic", p), torus(32));
    Vec k = Vec::Zero(2);
    k(0) = 1;
    double a0 = mode_amplitude(s, k);
    CHECK(a0 > 0);
    while (s.t < 0.005) flow_step(s, 0.005 - s.t);
    double a1 = mode_amplitude(s, k);
    double rate = -std::log(a1 / a0) / s.t;
    double expect = 2 * 4 * std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(rate - expect) < 0.05 * expect);
}

TEST_CASE("serial and parallel runs agree") {
    Params p{{"amplitude", 0.05}, {"modes", 2.0}, {"k2_1", 1.0}, {"k2_2", 1.0}};
    FlowState s = init_flow(catalog("quadratic_plus_periodic", p), torus(16));
    CHECK(flow_rhs(s, s.u, Exec::Serial) == flow_rhs(s, s.u, Exec::Parallel));
    MonitorSpec m;
    m.every = 5;
    FlowRun a = run_flow(s, 0.002, m, Exec::Serial), b = run_flow(s, 0.002, m, Exec::Parallel);
    CHECK(a.state.u == b.state.u);
    CHECK(a.series.times == b.series.times);
    CHECK(a.series.channels == b.series.channels);
}

TEST_CASE("monitor CSV and checkpoint format") {
    FlowState s = init_flow(catalog("quadratic"), torus(8));
    MonitorSpec m;
    m.every = 2;
    FlowRun r = run_flow(s, 0.001, m);
    CHECK_FALSE(r.failure);
    std::ostringstream csv;
    write_monitor_csv(csv, r.series);
    CHECK(csv.str().rfind("t,S_min,S_max,ABC_max,ORTH_ABC_min,H_pol_min,O_max,chen_residual\n", 0) == 0);
    CHECK(r.series.times.front() == 0.0);
    CHECK(r.series.times.back() == doctest::Approx(0.001));
    for (double v : r.series.channels.at("ABC_max")) CHECK(std::abs(v) < 1e-9);

    std::ostringstream ck;
    write_grid(ck, r.state.checkpoint());
    CHECK(ck.str().rfind("t=", 0) == 0);
    std::istringstream in(ck.str());
    GridFile back = read_grid(in);
    REQUIRE(back.t);
    CHECK(*back.t == doctest::Approx(r.state.t));
    CHECK(back.values.size() == r.state.u.size());
}

TEST_CASE("window monitors start from the exact curvature") {
    FlowState s = init_flow(catalog("calabi_ball"), window(-0.3, -0.3, 0.3, 0.3, 9));
    MonitorSpec m;
    m.every = 1000;
    FlowRun r = run_flow(s, 1e-5, m);
    REQUIRE(!r.series.times.empty());
    CHECK(r.series.channels.at("ABC_max")[0] < 0);
    CHECK(r.series.channels.at("S_max")[0] < 0);
}

TEST_CASE("KR probe on flat and curved data") {
    MonitorSpec m;
    m.epochs = 3;
    KrVerdict flat = kr_probe(catalog("quadratic"), 0.001, window(-0.5, -0.5, 0.5, 0.5, 13), m);
    CHECK(flat.weakly_regular);
    CHECK(flat.label().rfind("KR-WEAKLY-REGULAR(", 0) == 0);

    KrVerdict cal = kr_probe(catalog("calabi_ball"), 0.005, window(-0.5, -0.5, 0.5, 0.5, 17), m);
    CHECK_FALSE(cal.weakly_regular);
    CHECK(cal.label() == "KR-VIOLATION");
    CHECK(cal.worst < -1e-6);
    REQUIRE(cal.first_violation_t);
    CHECK_THROWS_AS(kr_probe(catalog("quadratic"), 0.0, window(-0.5, -0.5, 0.5, 0.5, 13), m), BadParams);
}
