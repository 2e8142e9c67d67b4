#include "tubeflow/acceptance.hpp"

#include "tubeflow/config.hpp"
#include "tubeflow/curvature.hpp"
#include "tubeflow/errors.hpp"
#include "tubeflow/experiments.hpp"
#include "tubeflow/suites.hpp"
#include "tubeflow/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#ifndef TUBEFLOW_CONFIG_DIR
#define TUBEFLOW_CONFIG_DIR "configs"
#endif

namespace tubeflow {

namespace fs = std::filesystem;

fs::path default_config_dir() { return TUBEFLOW_CONFIG_DIR; }

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> parts;
    void add(const std::string& s) { parts.push_back(s); }
    void require(bool ok, const std::string& s) {
        if (!ok) pass = false;
        parts.push_back(ok ? s : "FAILED " + s);
    }
};

struct Ctx {
    fs::path config_dir;
    fs::path dir;  // output directory of this pass
};

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(3) << v;
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Runs a shipped config with its outputs redirected into the pass directory.
void run_shipped(const Ctx& ctx, const std::string& name, Outcome& o) {
    try {
        Config cfg = Config::load(ctx.config_dir / (name + ".ini"));
        cfg.set("output", "dir", fs::absolute(ctx.dir).string());
        ExperimentResult r = run_experiment(cfg);
        std::string line = name + ": " + r.verdict;
        for (const std::string& f : r.failures) line += " [" + f + "]";
        o.require(r.pass, line);
    } catch (const std::exception& e) {
        o.require(false, name + ": " + e.what());
    }
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// ------------------------------------------------------------ 1

Outcome mtw_proportionality(const Ctx& ctx) {
    Outcome o;
    std::ostringstream csv;
    csv << "potential,p1,p2,mtw,abc,ratio\n";
    const char* names[] = {"calabi_ball", "cone2d", "radial_sym"};
    for (int k = 0; k < 3; ++k) {
        std::string name = names[k];
        Params prm;
        prm.set("n", 2);
        PotentialHandle h = catalog(name, prm);
        std::mt19937_64 rng(derive_seed(101, k));
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unit;
        std::vector<double> ratios;
        long attempts = 0;
        while (ratios.size() < 200 && attempts < 10000) {
            ++attempts;
            Vec p;
            if (name == "calabi_ball") {
                double r = std::sqrt(0.8 * unit(rng)), a = 2 * kPi * unit(rng);
                p = vec2(r * std::cos(a), r * std::sin(a));
            } else if (name == "cone2d") {
                // stay a fixed angle inside the cone; the log loses digits near its edge
                double r = 0.5 + 2.5 * unit(rng), a = 0.6 * (2 * unit(rng) - 1);
                p = vec2(r * std::cos(a), r * std::sin(a));
            } else {
                p = vec2(6 * unit(rng) - 3, 6 * unit(rng) - 3);
                if (p.norm() < 0.3) continue;
            }
            Vec y = vec2(gauss(rng), gauss(rng));
            Vec xi = vec2(gauss(rng), gauss(rng)), eta = vec2(gauss(rng), gauss(rng));
            MTWValue m = mtw_tensor(h, p + y, y, xi, eta);
            CurvatureSample s = core_form(jet(h, p));
            Mat hinv = s.h.inverse();
            double a = s.E.abc(xi, hinv * eta);
            double scale = xi.dot(s.h * xi) * eta.dot(hinv * eta) * (1.0 + s.frame_E.max_abs());
            if (std::abs(a) < 1e-6 * scale) continue;  // near a null pair the ratio is undefined
            ratios.push_back(m.value / a);
            csv << name << "," << format_double(p[0]) << "," << format_double(p[1]) << "," << format_double(m.value)
                << "," << format_double(a) << "," << format_double(m.value / a) << "\n";
        }
        auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
        double spread = (*hi - *lo) / std::abs(mean);
        o.require(ratios.size() >= 100 && spread < 1e-8,
                  name + " triples=" + std::to_string(ratios.size()) + " ratio=" + num(mean) + " spread=" + num(spread));
    }
    write_file(ctx.dir / "mtw_abc_ratio.csv", csv.str());
    return o;
}

// ------------------------------------------------------------ 2

double calabi2_closed(double s, double th, double ph) {
    double d = std::pow(1 + s, 3);
    return std::cos(2 * (th - ph)) - 2 * (1 + s + 2 * s * s) / d + 2 * (s * s - s) * std::cos(2 * ph) / d;
}

// E(v, h^-1 w, v, h^-1 w) for a coordinate vector v and a covector w.
double engine_pair(const CurvatureSample& s, const Vec& v, const Vec& w) {
    return s.E.abc(v, s.h.ldlt().solve(w));
}

Outcome calabi_formulas(const Ctx& ctx) {
    Outcome o;
    Params p2;
    p2.set("n", 2);
    PotentialHandle h2 = catalog("calabi_ball", p2);
    std::vector<double> eng, cf;
    std::ostringstream csv;
    csv << "s,theta,phi,engine,closed_form\n";
    for (int i = 0; i < 20; ++i) {
        double s = 0.95 * i / 19;
        CurvatureSample cs = core_form(jet(h2, vec2(std::sqrt(s), 0)));
        for (int j = 0; j < 20; ++j)
            for (int k = 0; k < 20; ++k) {
                double th = kPi * j / 20, ph = kPi * k / 20;
                double e = engine_pair(cs, vec2(std::cos(th), std::sin(th)), vec2(std::sin(ph), -std::cos(ph)));
                double f = calabi2_closed(s, th, ph);
                eng.push_back(e);
                cf.push_back(f);
                csv << format_double(s) << "," << format_double(th) << "," << format_double(ph) << ","
                    << format_double(e) << "," << format_double(f) << "\n";
            }
    }
    write_file(ctx.dir / "calabi2d_grid.csv", csv.str());
    double num_c = 0, den_c = 0;
    for (size_t i = 0; i < eng.size(); ++i) {
        num_c += eng[i] * cf[i];
        den_c += cf[i] * cf[i];
    }
    const double c = num_c / den_c;
    double dev = 0.0;
    for (size_t i = 0; i < eng.size(); ++i) dev = std::max(dev, std::abs(eng[i] - c * cf[i]));
    o.require(dev <= 1e-8, "2D grid 20^3 constant=" + format_double(c) + " max_dev=" + num(dev));

    run_shipped(ctx, "calabi_abc_certify", o);

    Params p3;
    p3.set("n", 3);
    PotentialHandle h3 = catalog("calabi_ball", p3);
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unit;
    double worst = -std::numeric_limits<double>::infinity(), form_dev = 0.0;
    for (int t = 0; t < 1000; ++t) {
        double s = 0.95 * unit(rng), th = 2 * kPi * unit(rng), ph = 2 * kPi * unit(rng), al = 2 * kPi * unit(rng);
        Vec x = Vec::Zero(3);
        x[0] = std::sqrt(s);
        CurvatureSample cs = core_form(jet(h3, x));
        Vec v(3), w(3);
        v << std::cos(th), std::sin(th), 0;
        w << std::sin(ph), -std::cos(ph) * std::cos(al), -std::cos(ph) * std::sin(al);
        double a = engine_pair(cs, v, w) / c;
        double lhs = std::pow(1 + s, 3) * a;
        worst = std::max(worst, lhs + std::pow(1 - s, 3));
        double mix = std::cos(th) * std::sin(ph) - std::cos(ph) * std::cos(al) * std::sin(th);
        double closed = -(1 - s) * (1 + s) * (1 + s) * std::cos(ph) * std::cos(ph) -
                        std::pow(1 - s, 3) * std::sin(ph) * std::sin(ph) - 2 * std::pow(1 + s, 3) * mix * mix;
        form_dev = std::max(form_dev, std::abs(lhs - closed));
    }
    o.require(worst <= 1e-9, "n=3 bound at 1000 configs, max (1+s)^3 A + (1-s)^3 = " + num(worst));
    o.add("n=3 closed form dev " + num(form_dev));
    return o;
}

// ------------------------------------------------------------ 3

double mod_pi(double a) {
    a = std::fmod(a, kPi);
    return a < 0 ? a + kPi : a;
}

Outcome cone_shape(const Ctx& ctx) {
    Outcome o;
    PotentialHandle h = catalog("cone2d");
    std::ostringstream csv;
    csv << "x1,x2,theta,phi,engine,closed_form\n";
    const Vec pts[] = {vec2(1, 0), vec2(2, 0.5), vec2(1.5, -0.6), vec2(-1.2, 0.3)};
    std::vector<double> eng, cf;
    double witness_err = 0.0, witness_val = 0.0;
    for (const Vec& x : pts) {
        CurvatureSample cs = core_form(jet(h, x));
        for (int j = 0; j < 40; ++j)
            for (int k = 0; k < 40; ++k) {
                double th = kPi * j / 40, ph = kPi * k / 40;
                double e = engine_pair(cs, vec2(std::cos(th), std::sin(th)), vec2(std::sin(ph), -std::cos(ph)));
                double f = -1 + std::sin(2 * th) * std::sin(2 * ph);
                eng.push_back(e);
                cf.push_back(f);
                csv << format_double(x[0]) << "," << format_double(x[1]) << "," << format_double(th) << ","
                    << format_double(ph) << "," << format_double(e) << "," << format_double(f) << "\n";
            }
        PointExtrema ex = point_extrema(cs, Quantity::Abc);
        witness_val = std::max(witness_val, std::abs(ex.max_value));
        double th = mod_pi(std::atan2(ex.max_v[1], ex.max_v[0]));
        Vec cov = cs.h * ex.max_w;
        double ph = mod_pi(std::atan2(cov[0], -cov[1]));
        double err = std::numeric_limits<double>::infinity();
        for (double target : {kPi / 4, 3 * kPi / 4})
            err = std::min(err, std::max(std::abs(th - target), std::abs(ph - target)));
        witness_err = std::max(witness_err, err);
    }
    write_file(ctx.dir / "cone_shape.csv", csv.str());
    double nc = 0, dc = 0;
    for (size_t i = 0; i < eng.size(); ++i) {
        nc += eng[i] * cf[i];
        dc += cf[i] * cf[i];
    }
    double c = nc / dc, dev = 0.0;
    for (size_t i = 0; i < eng.size(); ++i) dev = std::max(dev, std::abs(eng[i] - c * cf[i]));
    o.require(dev <= 1e-9, "shape constant=" + format_double(c) + " max_dev=" + num(dev));
    o.require(witness_err <= 1e-6 && witness_val <= 1e-9,
              "degenerate witness angle error=" + num(witness_err) + " |max ABC|=" + num(witness_val));
    return o;
}

// ------------------------------------------------------------ 4..7

Outcome trace(const Ctx& ctx) {
    Outcome o;
    run_shipped(ctx, "trace_suite", o);
    TraceSuite ts = trace_suite(10000, 6, 2024);
    o.require(ts.min_value >= -1e-9, "min Tr(M1M2 - N^2)=" + num(ts.min_value));
    o.require(ts.footnote_value == 0.0, "footnote instance value=" + num(ts.footnote_value));
    return o;
}

Outcome null_vector(const Ctx&) {
    Outcome o;
    NullVectorSuite nv = null_vector_suite(200, 31);
    o.require(nv.failures == 0, "trials=" + std::to_string(nv.trials) + " engine=" + std::to_string(nv.engine_sources) +
                                    " failures=" + std::to_string(nv.failures) + (nv.failures ? " " + nv.failure_note : ""));
    o.add("max Q/|A|^2=" + num(nv.worst_q) + " max sharper/|A|^2=" + num(nv.worst_sharper) +
          " first-derivative/|A|=" + num(nv.worst_first) + " min eig(-H)/|A|=" + num(nv.worst_h));
    return o;
}

Outcome noab(const Ctx&) {
    Outcome o;
    NoabIdentity ni = noab_identity_suite(1000, 61);
    o.require(ni.worst_gap <= 1e-12, "n=2 identity on 1000 tensors gap=" + num(ni.worst_gap));
    ProbeResult p3 = noab_probe(3, 62, 100000);
    o.require(p3.counterexample && p3.q_value < -1e-6,
              "n=3 probe trials=" + std::to_string(p3.trials_run) + " Q=" + num(p3.q_value));
    ProbeResult p2 = noab_probe(2, 63, 10000);
    o.add("n=2 probe trials=" + std::to_string(p2.trials_run) + (p2.counterexample ? " hit" : " no hit") +
          " min Q=" + num(p2.min_q));
    return o;
}

Outcome ode(const Ctx& ctx) {
    Outcome o;
    run_shipped(ctx, "ode_negative", o);
    run_shipped(ctx, "ode_pole", o);
    OdeCheck c = ode_closed_form_check();
    o.require(c.negative_error <= 1e-8, "A(0.5) error=" + num(c.negative_error));
    o.require(c.pole_rel_error <= 0.05, "pole " + num(c.pole_found) + " vs " + num(c.pole_predicted));
    return o;
}

// ------------------------------------------------------------ 8..10

Outcome flow_correctness(const Ctx& ctx) {
    Outcome o;
    for (const char* n : {"flow_quadratic_stationary", "flow_decay_10", "flow_decay_11"}) run_shipped(ctx, n, o);
    return o;
}

Outcome chen(const Ctx& ctx) {
    Outcome o;
    for (const char* n : {"flow_chen_02", "flow_chen_05", "flow_chen_10"}) run_shipped(ctx, n, o);
    return o;
}

Outcome sign_preservation(const Ctx& ctx) {
    Outcome o;
    for (const char* n : {"sign_torus_quadratic", "sign_calabi_window", "sign_bidisk_window", "kr_radial", "kr_calabi"})
        run_shipped(ctx, n, o);
    o.add("label: desk-scale surrogates of statements about complete manifolds");
    return o;
}

// ------------------------------------------------------------ 11, 12

Outcome berger(const Ctx& ctx) {
    Outcome o;
    run_shipped(ctx, "berger_suite", o);
    return o;
}

// Minimum over all bijections, the permutation oracle.
double brute_force(const Mat& C) {
    const int m = static_cast<int>(C.rows());
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += C(a, perm[a]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / m;
}

Outcome transport(const Ctx& ctx) {
    Outcome o;
    struct Family {
        const char* name;
        Vec xlo, xhi, ylo, yhi;
    };
    const Family fams[] = {
        {"quadratic", vec2(-1, -1), vec2(1, 1), vec2(-1, -1), vec2(1, 1)},
        {"radial_sym", vec2(-2, -2), vec2(2, 2), vec2(-2, -2), vec2(2, 2)},
        {"cone2d", vec2(2.5, -0.5), vec2(3.5, 0.5), vec2(-0.5, -0.5), vec2(0.5, 0.5)},
    };
    long instances = 0;
    double worst_gap = 0.0, worst_cert = 0.0;
    int f_id = 0;
    for (const Family& f : fams) {
        PotentialHandle h = catalog(f.name);
        for (int m = 1; m <= 8; ++m)
            for (int rep = 0; rep < 40; ++rep) {
                OtInstance inst = random_instance(m, f.xlo, f.xhi, f.ylo, f.yhi, derive_seed(1200 + f_id, m * 1000 + rep));
                Mat C;
                try {
                    C = cost_matrix(h, inst.mu.points, inst.nu.points);
                } catch (const OutOfDomain&) {
                    continue;
                }
                TransportPlan plan = solve_exact(inst.mu, inst.nu, C);
                double bf = brute_force(C);
                worst_gap = std::max(worst_gap, std::abs(plan.cost - bf) / (1.0 + std::abs(bf)));
                worst_cert = std::max({worst_cert, plan.dual_infeasibility, plan.slackness, plan.marginal_error});
                ++instances;
            }
        ++f_id;
    }
    o.require(worst_gap <= 1e-12, "exhaustive oracle on " + std::to_string(instances) + " instances (1..8 points), gap=" + num(worst_gap));
    o.require(worst_cert <= 1e-9, "dual certificate residual=" + num(worst_cert));
    run_shipped(ctx, "ot_radial", o);
    run_shipped(ctx, "ot_quadratic", o);
    return o;
}

// ------------------------------------------------------------ driver

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome(const Ctx&)> fn;
    bool emits_csv;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "MTW-ABC proportionality", mtw_proportionality, true},
        {2, "Calabi closed forms", calabi_formulas, true},
        {3, "cone closed form", cone_shape, true},
        {4, "trace lemma", trace, false},
        {5, "null-vector suite", null_vector, false},
        {6, "NOAB algebra", noab, false},
        {7, "reaction ODE", ode, true},
        {8, "flow correctness", flow_correctness, true},
        {9, "Chen bound", chen, true},
        {10, "sign-preservation surrogate", sign_preservation, true},
        {11, "Berger suite", berger, true},
        {12, "OT suite", transport, true},
    };
    return list;
}

std::vector<fs::path> csv_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") out.push_back(e.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool selected(const AcceptanceOptions& opts, int id) {
    return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), id) != opts.only.end();
}

void print(std::ostream& out, const CriterionResult& r) {
    out << (r.pass ? "PASS " : "FAIL ") << std::setw(2) << r.id << " " << r.title << ": " << r.detail << " ("
        << std::fixed << std::setprecision(1) << r.seconds << " s)" << std::defaultfloat << std::endl;
}

}  // namespace

std::vector<CriterionResult> run_criteria(const AcceptanceOptions& opts, std::ostream& out) {
    using clock = std::chrono::steady_clock;
    auto suite_start = clock::now();
    Ctx ctx{opts.config_dir.empty() ? default_config_dir() : opts.config_dir, opts.out_dir / "run1"};
    fs::remove_all(ctx.dir);
    fs::create_directories(ctx.dir);
    std::vector<CriterionResult> results;
    auto join = [](const Outcome& o) {
        std::string s;
        for (const std::string& p : o.parts) s += (s.empty() ? "" : "; ") + p;
        return s;
    };
    for (const Criterion& c : criteria()) {
        if (!selected(opts, c.id)) continue;
        auto start = clock::now();
        CriterionResult r{c.id, c.title, false, "", 0.0};
        try {
            Outcome o = c.fn(ctx);
            r.pass = o.pass;
            r.detail = join(o);
        } catch (const std::exception& e) {
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(clock::now() - start).count();
        print(out, r);
        results.push_back(r);
    }
    if (selected(opts, 13)) {
        // second pass of every CSV-producing criterion, then a byte comparison
        auto start = clock::now();
        CriterionResult r{13, "reproducibility", false, "", 0.0};
        Ctx again{ctx.config_dir, opts.out_dir / "run2"};
        fs::remove_all(again.dir);
        fs::create_directories(again.dir);
        try {
            for (const Criterion& c : criteria())
                if (c.emits_csv && selected(opts, c.id)) c.fn(again);
            std::vector<fs::path> a = csv_files(ctx.dir), b = csv_files(again.dir);
            std::vector<std::string> differ;
            for (const fs::path& f : a)
                if (!fs::exists(again.dir / f) || slurp(ctx.dir / f) != slurp(again.dir / f)) differ.push_back(f.string());
            if (a != b && differ.empty()) differ.push_back("file lists differ");
            double total = std::chrono::duration<double>(clock::now() - suite_start).count();
            Outcome o;
            o.require(!a.empty() && differ.empty(), std::to_string(a.size()) + " CSV files byte-identical across two runs" +
                                                        (differ.empty() ? "" : ", differing: " + differ.front()));
            o.require(total < 900, "total runtime " + num(total) + " s (limit 900 s)");
            r.pass = o.pass;
            r.detail = join(o);
        } catch (const std::exception& e) {
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(clock::now() - start).count();
        print(out, r);
        results.push_back(r);
    }
    return results;
}

int run_acceptance(const AcceptanceOptions& opts, std::ostream& out) {
    std::vector<CriterionResult> results = run_criteria(opts, out);
    long failed = std::count_if(results.begin(), results.end(), [](const CriterionResult& r) { return !r.pass; });
    out << (failed ? "FAIL " : "PASS ") << results.size() - failed << "/" << results.size() << " criteria" << std::endl;
    return failed ? 1 : 0;
}

}  // namespace tubeflow
