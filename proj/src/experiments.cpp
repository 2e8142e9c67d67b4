#include "tubeflow/experiments.hpp"

#include "tubeflow/curvature.hpp"
#include "tubeflow/errors.hpp"
#include "tubeflow/flow.hpp"
#include "tubeflow/suites.hpp"
#include "tubeflow/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace tubeflow {

namespace fs = std::filesystem;

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"curvature-scan", "certify",           "flow-run",
                                                   "kr-probe",       "ode-run",           "null-vector-suite",
                                                   "trace-suite",    "berger-suite",      "ot-experiment"};
    return kinds;
}

void print_catalog(std::ostream& out) {
    for (const CatalogEntry& e : catalog_entries())
        out << std::left << std::setw(24) << e.name << " domain: " << e.domain << "\n"
            << std::setw(24) << "" << " psi: " << e.formula << "\n"
            << std::setw(24) << "" << " from: " << e.origin << "\n";
}

namespace {

struct Output {
    fs::path dir;
    std::string name;
    fs::path path(const std::string& ext) const { return dir / (name + ext); }
};

Output output_of(const Config& cfg) {
    cfg.only_keys("output", {"dir", "name"});
    Output o;
    o.dir = cfg.resolve(cfg.str("output", "dir", "."));
    o.name = cfg.str("output", "name", cfg.str("experiment", "kind"));
    fs::create_directories(o.dir);
    return o;
}

// Key-value report, one "key = value" per line.
class Report {
public:
    template <class T>
    void add(const std::string& k, const T& v) {
        std::ostringstream s;
        if constexpr (std::is_floating_point_v<T>) s << format_double(v);
        else s << v;
        lines_.emplace_back(k, s.str());
    }
    void write(const fs::path& p) const {
        std::ofstream out(p);
        for (const auto& [k, v] : lines_) out << k << " = " << v << "\n";
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw ConfigError("cannot write " + p.string());
}

// CSV plus a whitespace-delimited copy for plotting tools.
void write_table(ExperimentResult& res, const Output& o, const std::string& csv) {
    write_text(o.path(".csv"), csv);
    std::string dat = "# " + csv;
    std::replace(dat.begin(), dat.end(), ',', ' ');
    write_text(o.path(".dat"), dat);
    res.outputs.push_back(o.path(".csv"));
    res.outputs.push_back(o.path(".dat"));
}

std::string tensor_text(const Tensor4& t) {
    std::ostringstream s;
    write_curvature(s, t);
    return s.str();
}

std::string witness_text(double t, const Witness& w) {
    return "t=" + format_double(t) + " x=" + format_vec(w.x) + " v=" + format_vec(w.v) + " w=" + format_vec(w.w) +
           " value=" + format_double(w.value);
}

uint64_t master_seed(const Config& cfg) { return cfg.seed("experiment", "seed"); }

PotentialHandle potential_of(const Config& cfg) {
    if (!cfg.has_section("potential")) throw ConfigError("missing [potential] section");
    return catalog(cfg.str("potential", "name"), cfg.params("potential", {"name"}));
}

std::vector<Vec> parse_points(const std::string& text) {
    std::vector<Vec> pts;
    std::istringstream rows(text);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::replace(row.begin(), row.end(), ',', ' ');
        std::istringstream ls(row);
        std::vector<double> v;
        double x;
        while (ls >> x) v.push_back(x);
        if (!ls.eof()) throw ConfigError("bad point list entry '" + row + "'");
        if (v.empty()) continue;
        pts.push_back(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (pts.empty()) throw ConfigError("[samples] points is empty");
    return pts;
}

SampleSpec samples_of(const Config& cfg, uint64_t seed) {
    cfg.only_keys("samples", {"kind", "count", "per_dim", "lo", "hi", "s_lo", "s_hi", "points"});
    SampleSpec s;
    std::string kind = cfg.str("samples", "kind", "random");
    if (kind == "random") s.kind = SampleSpec::Kind::RandomBox;
    else if (kind == "grid") s.kind = SampleSpec::Kind::GridBox;
    else if (kind == "shell") s.kind = SampleSpec::Kind::Shell;
    else if (kind == "points") s.kind = SampleSpec::Kind::Explicit;
    else throw ConfigError("[samples] kind must be random, grid, shell or points");
    s.count = static_cast<int>(cfg.integer("samples", "count", 100));
    s.per_dim = static_cast<int>(cfg.integer("samples", "per_dim", 10));
    if (cfg.has("samples", "lo")) s.lo = cfg.vec("samples", "lo");
    if (cfg.has("samples", "hi")) s.hi = cfg.vec("samples", "hi");
    s.s_lo = cfg.num("samples", "s_lo", 0.0);
    s.s_hi = cfg.num("samples", "s_hi", 0.9);
    if (s.kind == SampleSpec::Kind::Explicit) s.points = parse_points(cfg.str("samples", "points"));
    s.seed = seed;
    return s;
}

FlowGrid grid_of(const Config& cfg) {
    cfg.only_keys("flow", {"mode", "points", "lo", "hi", "ring", "T", "lambda"});
    FlowGrid g;
    std::string mode = cfg.str("flow", "mode", "torus");
    if (mode == "torus") g.mode = BoundaryMode::Periodic;
    else if (mode == "window") g.mode = BoundaryMode::FrozenWindow;
    else throw ConfigError("[flow] mode must be torus or window");
    g.points = static_cast<int>(cfg.integer("flow", "points", 64));
    if (g.mode == BoundaryMode::FrozenWindow) {
        g.lo = cfg.vec("flow", "lo");
        g.hi = cfg.vec("flow", "hi");
    }
    std::string ring = cfg.str("flow", "ring", "extrapolate");
    if (ring == "extrapolate") g.ring = FlowGrid::Ring::Extrapolate;
    else if (ring == "rate") g.ring = FlowGrid::Ring::Rate;
    else if (ring == "values") g.ring = FlowGrid::Ring::Values;
    else throw ConfigError("[flow] ring must be extrapolate, rate or values");
    return g;
}

MonitorSpec monitor_of(const Config& cfg, uint64_t seed) {
    cfg.only_keys("monitor", {"every", "epochs", "stride", "curvature"});
    MonitorSpec m;
    m.every = static_cast<int>(cfg.integer("monitor", "every", 50));
    m.epochs = static_cast<int>(cfg.integer("monitor", "epochs", 0));
    m.stride = static_cast<int>(cfg.integer("monitor", "stride", 1));
    m.curvature = cfg.flag("monitor", "curvature", true);
    m.seed = seed;
    if (m.every < 1 || m.stride < 1 || m.epochs < 0) throw ConfigError("[monitor] values must be positive");
    return m;
}

const char* kSurrogate =
    "desk-scale surrogate: compact torus or frozen window standing in for a complete manifold";

// ---------------------------------------------------------------- kinds

ExperimentResult curvature_scan_kind(const Config& cfg) {
    ExperimentResult res;
    PotentialHandle h = potential_of(cfg);
    std::vector<Vec> pts = generate_samples(samples_of(cfg, master_seed(cfg)), h.domain);
    SearchSpec search;
    search.seed = master_seed(cfg);
    std::vector<ScanRow> rows = curvature_scan(h, pts, search);
    std::ostringstream csv;
    write_scan_csv(csv, rows);
    Output o = output_of(cfg);
    write_table(res, o, csv.str());
    for (const ScanRow& r : rows)
        if (!std::isfinite(r.S) || !std::isfinite(r.O) || !std::isfinite(r.hmin_pol) || !std::isfinite(r.abc_min))
            res.failures.push_back("non-finite scan row at x=" + format_vec(r.x));
    res.verdict = "SCAN " + h.name + " rows=" + std::to_string(rows.size());
    return res;
}

ExperimentResult certify_kind(const Config& cfg) {
    cfg.only_keys("certify", {"quantity", "expect"});
    ExperimentResult res;
    PotentialHandle h = potential_of(cfg);
    Quantity q = quantity_from_string(cfg.str("certify", "quantity"));
    SearchSpec search;
    search.seed = master_seed(cfg);
    SignCertificate c = certify_sign(h, q, samples_of(cfg, master_seed(cfg)), search);
    Output o = output_of(cfg);
    std::ostringstream text;
    write_certificate(text, c);
    write_text(o.path(".cert"), text.str());
    res.outputs.push_back(o.path(".cert"));
    res.verdict = "CERTIFY " + h.name + " " + to_string(q) + " " + to_string(c.verdict);
    if (cfg.has("certify", "expect")) {
        std::string want = cfg.str("certify", "expect");
        if (want != to_string(c.verdict))
            res.failures.push_back("expected " + want + ", got " + to_string(c.verdict) + " witness x=" +
                                   format_vec(c.witness_x) + " v=" + format_vec(c.witness_v) +
                                   " w=" + format_vec(c.witness_w) + " value=" + format_double(c.extremal_value));
    }
    return res;
}

ExperimentResult flow_run_kind(const Config& cfg) {
    cfg.only_keys("checks", {"abc_max_le", "orth_min_ge", "chen_ge", "stationary", "decay_k", "decay_tol"});
    ExperimentResult res;
    PotentialHandle h = potential_of(cfg);
    FlowGrid g = grid_of(cfg);
    double T = cfg.num("flow", "T");
    double lambda = cfg.num("flow", "lambda", 0.0);
    FlowState s0 = init_flow(h, g, lambda);
    std::vector<double> psi0(s0.u.size());
    for (size_t id = 0; id < psi0.size(); ++id) psi0[id] = s0.psi(id);
    std::optional<Vec> decay_k;
    double amp0 = 0.0;
    if (cfg.has("checks", "decay_k")) {
        decay_k = cfg.vec("checks", "decay_k");
        amp0 = mode_amplitude(s0, *decay_k);
    }
    FlowRun run = run_flow(std::move(s0), T, monitor_of(cfg, master_seed(cfg)));
    const MonitorSeries& ms = run.series;

    Output o = output_of(cfg);
    std::ostringstream csv;
    write_monitor_csv(csv, ms);
    write_table(res, o, csv.str());
    std::ostringstream grid_text;
    write_grid(grid_text, run.state.checkpoint());
    write_text(o.path(".grid"), grid_text.str());
    res.outputs.push_back(o.path(".grid"));

    Report rep;
    rep.add("potential", h.name);
    rep.add("label", kSurrogate);
    rep.add("steps", run.steps);
    rep.add("t_final", run.state.t);
    rep.add("K", ms.K);
    for (const std::string& note : ms.notes) rep.add("note", note);
    if (run.failure) res.failures.push_back("flow stopped: " + *run.failure);

    const auto& times = ms.times;
    if (cfg.has("checks", "abc_max_le")) {
        double tol = cfg.num("checks", "abc_max_le");
        const auto& ch = ms.channels.at("ABC_max");
        for (size_t i = 0; i < times.size(); ++i)
            if (ch[i] > tol) {
                res.failures.push_back("ABC_max above " + format_double(tol) + ": " +
                                       witness_text(times[i], ms.abc_max_witness[i]));
                break;
            }
        // a non-positive ABC forces a non-positive polarized HSC
        const auto& hp = ms.channels.at("H_pol_min");
        for (size_t i = 0; i < times.size(); ++i)
            if (ch[i] <= tol && hp[i] > tol) {
                res.failures.push_back("H_pol_min positive while ABC_max <= 0 at t=" + format_double(times[i]));
                break;
            }
    }
    if (cfg.has("checks", "orth_min_ge")) {
        double tol = cfg.num("checks", "orth_min_ge");
        const auto& ch = ms.channels.at("ORTH_ABC_min");
        for (size_t i = 0; i < times.size(); ++i)
            if (ch[i] < tol) {
                res.failures.push_back("ORTH_ABC_min below " + format_double(tol) + ": " +
                                       witness_text(times[i], ms.orth_min_witness[i]));
                break;
            }
    }
    if (cfg.has("checks", "chen_ge")) {
        double tol = cfg.num("checks", "chen_ge");
        const auto& ch = ms.channels.at("chen_residual");
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < times.size(); ++i) {
            worst = std::min(worst, ch[i]);
            if (ch[i] < tol) {
                res.failures.push_back("chen_residual " + format_double(ch[i]) + " at t=" + format_double(times[i]));
                break;
            }
        }
        rep.add("chen_residual_min", worst);
    }
    if (cfg.has("checks", "stationary")) {
        double tol = cfg.num("checks", "stationary");
        double shift = run.state.psi(0) - psi0[0], worst = 0.0;
        for (size_t id = 0; id < psi0.size(); ++id)
            worst = std::max(worst, std::abs(run.state.psi(id) - psi0[id] - shift));
        for (const auto& [name, ch] : ms.channels) {
            if (name == "chen_residual" || name == "hpol_bound_residual") continue;
            for (double v : ch)
                if (std::isfinite(v) && std::isfinite(ch.front())) worst = std::max(worst, std::abs(v - ch.front()));
        }
        rep.add("stationarity_defect", worst);
        if (worst > tol) res.failures.push_back("not stationary: defect " + format_double(worst));
    }
    if (decay_k) {
        double tol = cfg.num("checks", "decay_tol", 0.05);
        double amp = mode_amplitude(run.state, *decay_k);
        double rate = -std::log(amp / amp0) / run.state.t;
        double want = 8 * std::numbers::pi * std::numbers::pi * decay_k->squaredNorm();
        rep.add("decay_rate", rate);
        rep.add("decay_rate_predicted", want);
        if (!(std::abs(rate - want) <= tol * want))
            res.failures.push_back("decay rate " + format_double(rate) + " vs " + format_double(want));
    }
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));
    res.verdict = "FLOW " + h.name + " steps=" + std::to_string(run.steps) + " t=" + format_double(run.state.t) +
                  " (" + kSurrogate + ")";
    return res;
}

ExperimentResult kr_probe_kind(const Config& cfg) {
    cfg.only_keys("kr", {"epsilon", "tolerance", "expect"});
    ExperimentResult res;
    PotentialHandle h = potential_of(cfg);
    KrVerdict v = kr_probe(h, cfg.num("kr", "epsilon"), grid_of(cfg), monitor_of(cfg, master_seed(cfg)),
                           cfg.num("kr", "tolerance", 1e-6));
    Output o = output_of(cfg);
    Report rep;
    rep.add("potential", h.name);
    rep.add("verdict", v.label());
    rep.add("label", kSurrogate);
    rep.add("worst_orth_abc", v.worst);
    rep.add("tolerance", v.tolerance);
    if (v.first_violation_t) rep.add("first_violation", witness_text(*v.first_violation_t, v.witness));
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));
    res.verdict = v.label() + " " + h.name;
    if (cfg.has("kr", "expect")) {
        std::string want = cfg.str("kr", "expect");
        if (want != "weakly-regular" && want != "violation")
            throw ConfigError("[kr] expect must be weakly-regular or violation");
        if ((want == "weakly-regular") != v.weakly_regular)
            res.failures.push_back("expected " + want + ", got " + v.label() +
                                   (v.first_violation_t ? " " + witness_text(*v.first_violation_t, v.witness) : ""));
    }
    return res;
}

ExperimentResult ode_run_kind(const Config& cfg) {
    cfg.only_keys("ode", {"init", "n", "a0", "path", "T", "dt", "record_every", "closed_form_tol", "expect_blowup"});
    ExperimentResult res;
    std::string init = cfg.str("ode", "init", "scalar");
    Tensor4 a0;
    if (init == "scalar") {
        a0 = Tensor4(1);
        a0(0, 0, 0, 0) = cfg.num("ode", "a0");
    } else if (init == "random") {
        std::mt19937_64 rng(master_seed(cfg));
        a0 = random_curvature(static_cast<int>(cfg.integer("ode", "n", 2)), rng);
    } else if (init == "file") {
        std::ifstream in(cfg.resolve(cfg.str("ode", "path")));
        if (!in) throw ConfigError("cannot open tensor file " + cfg.str("ode", "path"));
        a0 = read_curvature(in);
    } else {
        throw ConfigError("[ode] init must be scalar, random or file");
    }
    double T = cfg.num("ode", "T"), dt = cfg.num("ode", "dt", 1e-3);
    bool expect_blowup = cfg.flag("ode", "expect_blowup", false);
    OdeTrajectory tr = integrate_ode(a0, T, dt, static_cast<int>(cfg.integer("ode", "record_every", 1)), true);

    const auto& orbits = curvature_orbits(a0.dim());
    std::ostringstream csv;
    csv << "t";
    for (size_t k = 0; k < orbits.size(); ++k) csv << ",c" << k + 1;
    csv << "\n";
    for (size_t i = 0; i < tr.times.size(); ++i) {
        csv << format_double(tr.times[i]);
        for (const auto& orbit : orbits) csv << "," << format_double(tr.states[i].data()[orbit.front()]);
        csv << "\n";
    }
    Output o = output_of(cfg);
    write_table(res, o, csv.str());

    Report rep;
    rep.add("n", a0.dim());
    rep.add("max_symmetry_drift", tr.max_drift);
    rep.add("blowup_t", tr.blowup_t ? format_double(*tr.blowup_t) : std::string("none"));
    if (a0.dim() == 1) {
        double a = a0(0, 0, 0, 0), worst = 0.0;
        for (size_t i = 0; i < tr.times.size(); ++i) {
            double t = tr.times[i];
            double exact = a / (1 - 2 * a * t);
            worst = std::max(worst, std::abs(tr.states[i](0, 0, 0, 0) - exact));
        }
        rep.add("closed_form_error", worst);
        double tol = cfg.num("ode", "closed_form_tol", 1e-8);
        if (!tr.blowup_t && worst > tol) res.failures.push_back("closed form error " + format_double(worst));
        if (expect_blowup && a > 0) {
            double pole = 1.0 / (2 * a);
            rep.add("pole_predicted", pole);
            if (!tr.blowup_t || std::abs(*tr.blowup_t - pole) > 0.05 * pole)
                res.failures.push_back("pole not found within 5% of " + format_double(pole));
        }
    }
    if (expect_blowup && !tr.blowup_t) res.failures.push_back("expected a blow-up before T");
    if (!expect_blowup && tr.blowup_t) res.failures.push_back("blow-up at t=" + format_double(*tr.blowup_t));
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));
    res.verdict = "ODE n=" + std::to_string(a0.dim()) + " steps=" + std::to_string(tr.times.size() - 1) +
                  (tr.blowup_t ? " blowup at t=" + format_double(*tr.blowup_t) : std::string(" no blowup"));
    return res;
}

ExperimentResult null_vector_kind(const Config& cfg) {
    cfg.only_keys("suite", {"trials", "noab_trials", "probe_trials", "polarization_trials"});
    ExperimentResult res;
    uint64_t seed = master_seed(cfg);
    Output o = output_of(cfg);
    Report rep;
    NullVectorSuite nv = null_vector_suite(cfg.integer("suite", "trials", 200), seed);
    rep.add("trials", nv.trials);
    rep.add("engine_sources", nv.engine_sources);
    rep.add("failures", nv.failures);
    rep.add("worst_q_over_norm2", nv.worst_q);
    rep.add("worst_sharper_over_norm2", nv.worst_sharper);
    rep.add("worst_first_derivative_over_norm", nv.worst_first);
    rep.add("min_minus_h_eig_over_norm", nv.worst_h);
    if (nv.first_failure) {
        write_text(o.path(".failure.tensor"), tensor_text(*nv.first_failure));
        res.outputs.push_back(o.path(".failure.tensor"));
        res.failures.push_back("null-vector check failed (" + nv.failure_note + "), tensor in " +
                               o.path(".failure.tensor").string());
    }
    long noab = cfg.integer("suite", "noab_trials", 0);
    if (noab > 0) {
        NoabIdentity ni = noab_identity_suite(noab, derive_seed(seed, 1));
        rep.add("noab_identity_trials", ni.trials);
        rep.add("noab_identity_gap", ni.worst_gap);
        if (ni.worst_gap > 1e-12) res.failures.push_back("NOAB identity gap " + format_double(ni.worst_gap));
    }
    long probe = cfg.integer("suite", "probe_trials", 0);
    if (probe > 0) {
        ProbeResult p = noab_probe(3, derive_seed(seed, 2), probe);
        rep.add("probe3_trials_run", p.trials_run);
        rep.add("probe3_found", p.counterexample ? "yes" : "no");
        if (p.counterexample) {
            rep.add("probe3_q", p.q_value);
            rep.add("probe3_v", format_vec(p.v));
            rep.add("probe3_w", format_vec(p.w));
            write_text(o.path(".probe3.tensor"), tensor_text(*p.counterexample));
            res.outputs.push_back(o.path(".probe3.tensor"));
        } else {
            res.failures.push_back("no n=3 counterexample in " + std::to_string(probe) + " trials");
        }
    }
    long pol = cfg.integer("suite", "polarization_trials", 0);
    if (pol > 0) {
        PolarizationSuite ps = polarization_suite(pol, derive_seed(seed, 3));
        rep.add("polarization_trials", ps.trials);
        rep.add("polarization_violations", ps.violations);
        rep.add("polarization_worst_excess", ps.worst_excess);
        if (ps.violations) res.failures.push_back(std::to_string(ps.violations) + " polarization bound violations");
    }
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));
    res.verdict = "NULL-VECTOR trials=" + std::to_string(nv.trials) + " failures=" + std::to_string(nv.failures);
    return res;
}

ExperimentResult trace_kind(const Config& cfg) {
    cfg.only_keys("suite", {"trials", "n_max"});
    ExperimentResult res;
    TraceSuite ts = trace_suite(cfg.integer("suite", "trials", 10000), static_cast<int>(cfg.integer("suite", "n_max", 6)),
                                master_seed(cfg));
    Output o = output_of(cfg);
    Report rep;
    rep.add("trials", ts.trials);
    rep.add("min_value", ts.min_value);
    rep.add("footnote_value", ts.footnote_value);
    rep.add("worst_charpoly_gap", ts.worst_charpoly_gap);
    rep.add("worst_similarity_gap", ts.worst_similarity_gap);
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));
    if (ts.min_value < -1e-9) {
        std::ostringstream s;
        s << "trace below -1e-9: " << format_double(ts.min_value) << " M1=" << ts.min_instance.m1.format(Eigen::IOFormat(17))
          << " M2=" << ts.min_instance.m2.format(Eigen::IOFormat(17)) << " N=" << ts.min_instance.n.format(Eigen::IOFormat(17));
        res.failures.push_back(s.str());
    }
    if (ts.footnote_value != 0.0) res.failures.push_back("footnote instance gives " + format_double(ts.footnote_value));
    if (ts.worst_charpoly_gap > 1e-9) res.failures.push_back("characteristic polynomials differ by " + format_double(ts.worst_charpoly_gap));
    res.verdict = "TRACE trials=" + std::to_string(ts.trials) + " min=" + format_double(ts.min_value);
    return res;
}

ExperimentResult berger_kind(const Config& cfg) {
    cfg.only_keys("berger", {"moment_samples", "row_samples", "ricci_samples"});
    ExperimentResult res;
    BergerSpec spec;
    spec.moment_samples = cfg.integer("berger", "moment_samples", spec.moment_samples);
    spec.row_samples = cfg.integer("berger", "row_samples", spec.row_samples);
    spec.ricci_samples = cfg.integer("berger", "ricci_samples", spec.ricci_samples);
    spec.seed = master_seed(cfg);
    BergerSuite b = berger_suite(spec);
    Output o = output_of(cfg);

    std::ostringstream csv;
    csv << "S,O,D,avg,se\n";
    for (const DecompositionRow& r : b.pooled_fit.rows)
        csv << format_double(r.S) << "," << format_double(r.O) << "," << format_double(r.D) << ","
            << format_double(r.avg) << "," << format_double(r.se) << "\n";
    write_table(res, o, csv.str());

    Report rep;
    for (const SphereMoments& m : b.moments) {
        std::string p = "n" + std::to_string(m.n) + "_";
        rep.add(p + "m4", m.m4.estimate);
        rep.add(p + "m4_se", m.m4.standard_error);
        rep.add(p + "m4_exact", m.exact_m4);
        rep.add(p + "m22", m.m22.estimate);
        rep.add(p + "m22_se", m.m22.standard_error);
        rep.add(p + "m22_exact", m.exact_m22);
        rep.add(p + "ratio", m.ratio);
        rep.add(p + "ratio_se", m.ratio_error);
        rep.add(p + "ratio_vs_stated_2", m.ratio - 2.0);
        rep.add(p + "ratio_vs_gamma_3", m.ratio - 3.0);
    }
    rep.add("two_term_calabi_alpha", b.calabi_fit.alpha);
    rep.add("two_term_calabi_beta", b.calabi_fit.beta);
    rep.add("two_term_calabi_residual", b.calabi_fit.residual);
    rep.add("two_term_calabi_mc_error", b.calabi_fit.mc_error);
    rep.add("two_term_pooled_alpha", b.pooled_fit.alpha);
    rep.add("two_term_pooled_beta", b.pooled_fit.beta);
    rep.add("two_term_pooled_residual", b.pooled_fit.residual);
    rep.add("three_term_S", b.pooled_fit.a3);
    rep.add("three_term_O", b.pooled_fit.b3);
    rep.add("three_term_D", b.pooled_fit.c3);
    rep.add("three_term_residual", b.pooled_fit.residual3);
    rep.add("pooled_mc_error", b.pooled_fit.mc_error);
    double fifth = std::numeric_limits<double>::infinity(), wedge = fifth;
    for (const FifthReport& f : b.fifth) {
        fifth = std::min(fifth, f.fifth_margin);
        wedge = std::min(wedge, f.wedge_margin);
    }
    rep.add("fifth_batches", b.batch_names.size());
    rep.add("fifth_points", b.fifth.size());
    rep.add("fifth_margin_min", fifth);
    rep.add("wedge_margin_min", wedge);
    rep.add("ricci_ratio_mean", b.ricci_mean);
    rep.add("ricci_max_deviation_in_se", b.ricci_spread);
    rep.write(o.path(".report"));
    res.outputs.push_back(o.path(".report"));

    if (!b.moments_ok) res.failures.push_back("sphere moments outside 3 standard errors");
    if (!b.decomposition_ok)
        res.failures.push_back("decomposition residual " + format_double(b.pooled_fit.residual3) + " vs MC error " +
                               format_double(b.pooled_fit.mc_error));
    for (size_t i = 0; i < b.fifth.size(); ++i)
        if (!b.fifth[i].ok())
            res.failures.push_back("fifth/wedge check failed in batch " + b.batch_names[b.fifth_batch[i]] +
                                   " minimizer=" + format_vec(b.fifth[i].minimizer));
    if (!b.ricci_ok) res.failures.push_back("Ricci-average ratio not constant within 3 standard errors");
    res.verdict = "BERGER ratio=" + format_double(b.moments.front().ratio) + " ricci=" + format_double(b.ricci_mean);
    return res;
}

ExperimentResult ot_kind(const Config& cfg) {
    cfg.only_keys("ot", {"instance", "points", "mu_lo", "mu_hi", "nu_lo", "nu_hi", "times", "alpha", "identical_rows"});
    ExperimentResult res;
    PotentialHandle h = potential_of(cfg);
    OtInstance inst;
    if (cfg.has("ot", "instance")) {
        std::ifstream in(cfg.resolve(cfg.str("ot", "instance")));
        if (!in) throw ConfigError("cannot open instance " + cfg.str("ot", "instance"));
        inst = read_instance(in);
    } else {
        inst = random_instance(static_cast<int>(cfg.integer("ot", "points", 120)), cfg.vec("ot", "mu_lo"),
                               cfg.vec("ot", "mu_hi"), cfg.vec("ot", "nu_lo"), cfg.vec("ot", "nu_hi"), master_seed(cfg));
    }
    std::vector<double> times = cfg.list("ot", "times");
    FlowGrid g = grid_of(cfg);
    if (g.mode != BoundaryMode::FrozenWindow) throw ConfigError("ot-experiment flows on a window grid");
    std::vector<ContinuityRow> rows = weak_continuity_experiment(h, inst, times, cfg.num("ot", "alpha", 1.0), g);

    Output o = output_of(cfg);
    std::ostringstream csv;
    write_continuity_csv(csv, rows);
    write_table(res, o, csv.str());
    std::ostringstream inst_text;
    write_instance(inst_text, inst);
    write_text(o.path(".instance.csv"), inst_text.str());
    res.outputs.push_back(o.path(".instance.csv"));

    for (const ContinuityRow& r : rows)
        if (r.certificate_residual > 1e-9)
            res.failures.push_back("dual certificate residual " + format_double(r.certificate_residual) +
                                   " at t=" + format_double(r.t));
    // distance to the first plan must not shrink as t grows
    const double noise = 1e-9;
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].tv < rows[i - 1].tv - noise)
            res.failures.push_back("plan distance drops from " + format_double(rows[i - 1].tv) + " to " +
                                   format_double(rows[i].tv) + " at t=" + format_double(rows[i].t));
    if (cfg.flag("ot", "identical_rows", false))
        for (const ContinuityRow& r : rows)
            if (r.cost != rows.front().cost || r.modulus != rows.front().modulus || r.tv != 0.0)
                res.failures.push_back("row at t=" + format_double(r.t) + " differs from t=" + format_double(rows.front().t));
    res.verdict = "OT " + h.name + " points=" + std::to_string(inst.mu.points.size()) + " times=" +
                  std::to_string(rows.size()) + " tv_max=" + format_double(rows.back().tv);
    return res;
}

}  // namespace

ExperimentResult run_experiment(const Config& cfg) {
    cfg.only_keys("experiment", {"kind", "seed"});
    std::string kind = cfg.str("experiment", "kind");
    master_seed(cfg);  // reproducibility: every experiment names its seed
    ExperimentResult res;
    if (kind == "curvature-scan") res = curvature_scan_kind(cfg);
    else if (kind == "certify") res = certify_kind(cfg);
    else if (kind == "flow-run") res = flow_run_kind(cfg);
    else if (kind == "kr-probe") res = kr_probe_kind(cfg);
    else if (kind == "ode-run") res = ode_run_kind(cfg);
    else if (kind == "null-vector-suite") res = null_vector_kind(cfg);
    else if (kind == "trace-suite") res = trace_kind(cfg);
    else if (kind == "berger-suite") res = berger_kind(cfg);
    else if (kind == "ot-experiment") res = ot_kind(cfg);
    else throw ConfigError("unknown experiment kind '" + kind + "'");
    res.kind = kind;
    res.pass = res.failures.empty();
    return res;
}

int run_config(const fs::path& path, std::ostream& out, std::ostream& err) {
    std::optional<Config> cfg;
    ExperimentResult res;
    auto start = std::chrono::system_clock::now();
    try {
        cfg = Config::load(path);
        res = run_experiment(*cfg);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const UnknownName& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const BadParams& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        out << "FAIL " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 2;
    }
    for (const std::string& f : res.failures) out << "  failure: " << f << "\n";
    out << (res.pass ? "PASS " : "FAIL ") << res.verdict << "\n";

    // timestamps live only in the log, so the data files stay byte-stable
    try {
        Output o = output_of(*cfg);
        std::ofstream log(o.path(".log"), std::ios::app);
        std::time_t t0 = std::chrono::system_clock::to_time_t(start);
        double secs = std::chrono::duration<double>(std::chrono::system_clock::now() - start).count();
        log << std::put_time(std::gmtime(&t0), "%Y-%m-%dT%H:%M:%SZ") << " " << res.kind << " "
            << (res.pass ? "PASS" : "FAIL") << " " << std::fixed << std::setprecision(2) << secs << "s "
            << res.verdict << "\n";
    } catch (const std::exception&) {
    }
    return res.pass ? 0 : 1;
}

}  // namespace tubeflow
