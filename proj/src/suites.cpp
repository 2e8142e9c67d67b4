#include "tubeflow/suites.hpp"

#include "tubeflow/curvature.hpp"
#include "tubeflow/errors.hpp"
#include "tubeflow/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tubeflow {

void set_orbit(Tensor4& t, int i, int j, int k, int l, double v) {
    const int id = static_cast<int>(t.index(i, j, k, l));
    for (const auto& orbit : curvature_orbits(t.dim()))
        if (std::find(orbit.begin(), orbit.end(), id) != orbit.end()) {
            for (int x : orbit) t.data()[x] = v;
            return;
        }
}

Tensor4 engine_tensor(const std::string& name, int n, std::mt19937_64& rng) {
    Params p;
    p.set("n", n);
    PotentialHandle h = catalog(name, p);
    SampleSpec spec;
    spec.kind = SampleSpec::Kind::RandomBox;
    spec.count = 1;
    spec.seed = rng();
    if (name == "calabi_ball") {
        spec.kind = SampleSpec::Kind::Shell;
        spec.s_lo = 0.0;
        spec.s_hi = 0.8;
    }
    Vec x = generate_samples(spec, h.domain).front();
    return core_form(jet(h, x)).frame_E;
}

namespace {

struct NullTrial {
    NullVectorReport r;
    Tensor4 a;
    bool engine = false;
    std::string error;
};

}  // namespace

NullVectorSuite null_vector_suite(long trials, uint64_t seed, Exec exec) {
    static const std::pair<const char*, int> sources[] = {
        {"calabi_ball", 2}, {"cone2d", 2}, {"bidisk_product", 2}, {"calabi_ball", 3}, {"bidisk_trig", 2}};
    std::vector<NullTrial> out(trials);
    for_each_index(exec, trials, [&](std::ptrdiff_t i) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(i)));
        NullTrial& t = out[i];
        Tensor4 raw;
        if (i % 2 == 0) {
            raw = random_curvature(2 + (i / 2) % 3, rng);
        } else {
            auto [name, n] = sources[(i / 2) % 5];
            raw = engine_tensor(name, n, rng);
            t.engine = true;
        }
        t.a = negative_boundary(raw);
        try {
            t.r = null_vector_check_negative(t.a);
        } catch (const Error& e) {
            t.error = e.what();
        }
    });
    NullVectorSuite s;
    s.trials = trials;
    s.worst_h = std::numeric_limits<double>::infinity();
    for (const NullTrial& t : out) {
        if (t.engine) ++s.engine_sources;
        bool bad = !t.error.empty() || !t.r.ok();
        if (bad) {
            ++s.failures;
            if (!s.first_failure) {
                s.first_failure = t.a;
                s.failure_note = t.error.empty() ? "check failed" : t.error;
            }
        }
        if (!t.error.empty()) continue;
        double nn = std::max(t.r.norm, 1e-300);
        s.worst_q = std::max(s.worst_q, t.r.q_value / (nn * nn));
        s.worst_sharper = std::max(s.worst_sharper, t.r.sharper / (nn * nn));
        s.worst_first = std::max(s.worst_first, t.r.first_derivative / nn);
        s.worst_h = std::min(s.worst_h, t.r.h_form_min_eig / nn);
    }
    return s;
}

BlockInstance footnote_instance() {
    Mat g = Mat::Zero(4, 4);
    g(1, 1) = g(1, 2) = g(2, 1) = g(2, 2) = 1.0;
    BlockInstance b;
    b.m1 = g.block(0, 0, 2, 2);
    b.n = g.block(0, 2, 2, 2);
    b.m2 = g.block(2, 2, 2, 2);
    return b;
}

TraceSuite trace_suite(long trials, int n_max, uint64_t seed, Exec exec) {
    if (trials < 1 || n_max < 1) throw BadParams("trace suite needs trials >= 1 and n_max >= 1");
    std::vector<BlockInstance> inst(trials);
    std::vector<TraceLemmaResult> res(trials);
    for_each_index(exec, trials, [&](std::ptrdiff_t i) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(i)));
        inst[i] = random_block_instance(1 + static_cast<int>(i % n_max), rng);
        res[i] = trace_lemma(inst[i]);
    });
    TraceSuite s;
    s.trials = trials;
    s.min_value = std::numeric_limits<double>::infinity();
    for (long i = 0; i < trials; ++i) {
        if (res[i].value < s.min_value) {
            s.min_value = res[i].value;
            s.min_instance = inst[i];
        }
        s.worst_charpoly_gap = std::max(s.worst_charpoly_gap, res[i].charpoly_gap);
        s.worst_similarity_gap = std::max(s.worst_similarity_gap, res[i].similarity_gap);
    }
    s.footnote_value = trace_lemma(footnote_instance()).value;
    return s;
}

Tensor4 noab_constrained_tensor(std::mt19937_64& rng) {
    Tensor4 a = random_curvature(2, rng);
    set_orbit(a, 0, 1, 0, 1, 0.0);
    set_orbit(a, 0, 1, 1, 1, a(0, 1, 0, 0));
    return a;
}

NoabIdentity noab_identity_suite(long trials, uint64_t seed) {
    NoabIdentity s;
    s.trials = trials;
    std::mt19937_64 rng(seed);
    for (long i = 0; i < trials; ++i) {
        Tensor4 a = noab_constrained_tensor(rng);
        Tensor4 q = q_quadratic(a);
        double want = 4.0 * a(0, 0, 0, 1) * a(0, 0, 0, 1);
        s.worst_gap = std::max(s.worst_gap, std::abs(q(0, 1, 0, 1) - want));
    }
    return s;
}

PolarizationSuite polarization_suite(long trials, uint64_t seed, Exec exec) {
    std::vector<double> excess(trials);
    for_each_index(exec, trials, [&](std::ptrdiff_t i) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(i)));
        const int n = 2 + static_cast<int>(i % 2);
        Tensor4 a = random_negative_tensor(n, rng);
        double h = extremize_pairs(a, PairMode::Diag, false).value;
        double o = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (p != q) o += a(p, q, p, q);
        excess[i] = polarization_bounds(a, h, o).worst_excess;
    });
    PolarizationSuite s;
    s.trials = trials;
    s.worst_excess = -std::numeric_limits<double>::infinity();
    for (double e : excess) {
        if (e > 0) ++s.violations;
        s.worst_excess = std::max(s.worst_excess, e);
    }
    return s;
}

OdeCheck ode_closed_form_check(double dt) {
    OdeCheck c;
    Tensor4 a(1);
    a(0, 0, 0, 0) = -1.0;
    OdeTrajectory neg = integrate_ode(a, 0.5, dt);
    c.negative_error = std::abs(neg.states.back()(0, 0, 0, 0) + 0.5);
    c.max_drift = neg.max_drift;
    a(0, 0, 0, 0) = 1.0;
    OdeTrajectory pos = integrate_ode(a, 1.0, dt, 1, true);
    c.pole_found = pos.blowup_t.value_or(std::numeric_limits<double>::infinity());
    c.pole_rel_error = std::abs(c.pole_found - c.pole_predicted) / c.pole_predicted;
    c.max_drift = std::max(c.max_drift, pos.max_drift);
    return c;
}

namespace {

CurvatureSample sample_at(const char* name, int n, std::initializer_list<double> xs) {
    Params p;
    p.set("n", n);
    if (std::string(name) == "radial_sym") p.set("C", 1.0);
    Vec x(static_cast<int>(xs.size()));
    int i = 0;
    for (double v : xs) x[i++] = v;
    return core_form(jet(catalog(name, p), x));
}

std::vector<CurvatureSample> calabi_batch() {
    std::vector<CurvatureSample> out;
    for (int i = 0; i < 6; ++i) out.push_back(sample_at("calabi_ball", 2, {0.15 * i, 0.05 * i - 0.2}));
    return out;
}

}  // namespace

BergerSuite berger_suite(const BergerSpec& spec, Exec exec) {
    BergerSuite b;
    b.moments_ok = true;
    for (int n : {2, 3}) {
        SphereMoments m = sphere_moments(n, spec.moment_samples, derive_seed(spec.seed, n), exec);
        b.moments_ok = b.moments_ok && std::abs(m.m4.estimate - m.exact_m4) <= 3 * m.m4.standard_error &&
                       std::abs(m.m22.estimate - m.exact_m22) <= 3 * m.m22.standard_error;
        b.moments.push_back(m);
    }

    std::vector<DecompositionRow> rows;
    uint64_t row_seed = derive_seed(spec.seed, 100);
    for (const CurvatureSample& s : calabi_batch()) rows.push_back(decomposition_row(s, spec.row_samples, row_seed++, exec));
    b.calabi_fit = fit_decomposition(rows);
    for (const CurvatureSample& s : {sample_at("cone2d", 2, {1.0, 0.3}), sample_at("bidisk_product", 2, {0.5, 1.5}),
                                     sample_at("radial_sym", 2, {0.3, -0.5}), sample_at("bidisk_trig", 2, {0.3, 0.2})})
        rows.push_back(decomposition_row(s, spec.row_samples, row_seed++, exec));
    b.pooled_fit = fit_decomposition(rows);
    // The exact average is m22 (2S + O + D); S and O alone leave a model error
    // (7e-4 on the calabi batch) that only hides below coarse sampling noise.
    b.decomposition_ok = b.pooled_fit.residual3 < 3 * b.pooled_fit.mc_error;

    std::vector<std::vector<CurvatureSample>> batches(4);
    b.batch_names = {"calabi_ball(2)", "cone2d", "bidisk_product", "calabi_ball(3)"};
    for (int i = 0; i < 8; ++i) {
        batches[0].push_back(sample_at("calabi_ball", 2, {0.1 * i, 0.05 * i - 0.2}));
        batches[1].push_back(sample_at("cone2d", 2, {1.0 + 0.2 * i, 0.1 * i - 0.3}));
        batches[2].push_back(sample_at("bidisk_product", 2, {0.3 + 0.2 * i, 1.5 - 0.15 * i}));
    }
    for (int i = 0; i < 4; ++i) batches[3].push_back(sample_at("calabi_ball", 3, {0.1 * i, 0.3 - 0.1 * i, 0.05 * i - 0.1}));
    b.fifth_ok = true;
    for (size_t k = 0; k < batches.size(); ++k)
        for (size_t i = 0; i < batches[k].size(); ++i) {
            FifthReport r = fifth_and_wedge_checks(batches[k][i], derive_seed(spec.seed, 200 + 16 * k + i));
            b.fifth_ok = b.fifth_ok && r.ok();
            b.fifth.push_back(r);
            b.fifth_batch.push_back(static_cast<int>(k));
        }

    std::vector<CurvatureSample> rs = calabi_batch();
    for (int i = 0; i < 2; ++i) rs.push_back(sample_at("cone2d", 2, {1.2 + 0.3 * i, 0.2 - 0.3 * i}));
    for (int i = 0; i < 2; ++i) rs.push_back(sample_at("bidisk_product", 2, {0.5 + 0.4 * i, 1.5 - 0.5 * i}));
    Vec va(2), vb(2);
    va << 0.6, 0.8;
    vb << 0.3, -0.1;
    double wsum = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
        RicciAverage r = ricci_average(rs[i], va, vb, spec.ricci_samples, derive_seed(spec.seed, 300 + i), exec);
        b.ricci.push_back(r);
        double w = 1.0 / (r.ratio_error * r.ratio_error);
        b.ricci_mean += w * r.ratio;
        wsum += w;
    }
    b.ricci_mean /= wsum;
    b.ricci_ok = true;
    for (const RicciAverage& r : b.ricci) {
        double dev = std::abs(r.ratio - b.ricci_mean);
        if (dev / r.ratio_error > b.ricci_spread) {
            b.ricci_spread = dev / r.ratio_error;
            b.ricci_error = r.ratio_error;
        }
        b.ricci_ok = b.ricci_ok && dev <= 3 * r.ratio_error;
    }
    return b;
}

}  // namespace tubeflow
