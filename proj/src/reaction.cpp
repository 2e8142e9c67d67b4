#include "tubeflow/reaction.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

namespace tubeflow {

namespace {

std::array<int, 4> unflat4(int id, int n) {
    return {id / (n * n * n), (id / (n * n)) % n, (id / n) % n, id % n};
}

double band(const Tensor4& a) { return 1e-9 * (1.0 + a.max_abs()); }

}  // namespace

Tensor4 q_quadratic(const Tensor4& a) {
    const int n = a.dim();
    Tensor4 q(n);
    for (const auto& orbit : curvature_orbits(n)) {
        auto [i, j, k, l] = unflat4(orbit.front(), n);
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int r = 0; r < n; ++r)
                s += a(i, j, p, r) * a(r, p, k, l) + a(i, l, p, r) * a(r, p, k, j) - a(i, p, k, r) * a(p, j, r, l);
        s *= 2.0;
        for (int m : orbit) q.data()[m] = s;
    }
    return q;
}

double q_at_pair(const Tensor4& a, const Vec& v, const Vec& w) { return q_quadratic(a).abc(v, w); }

OdeTrajectory integrate_ode(const Tensor4& a0, double T, double dt, int record_every, bool keep_partial) {
    if (!(dt > 0) || !(T >= 0)) throw BadParams("integrate_ode needs dt > 0 and T >= 0");
    OdeTrajectory tr;
    Tensor4 a = a0;
    symmetrize_curvature(a);
    double t = 0.0;
    tr.times.push_back(t);
    tr.states.push_back(a);
    long steps = 0;
    while (t < T) {
        Tensor4 k1 = q_quadratic(a);
        double h = std::min(dt, T - t);
        double qn = k1.norm(), an = a.norm();
        if (qn > 0 && an > 0) h = std::min(h, 0.01 * an / qn);
        Tensor4 k2 = q_quadratic(a + (0.5 * h) * k1);
        Tensor4 k3 = q_quadratic(a + (0.5 * h) * k2);
        Tensor4 k4 = q_quadratic(a + h * k3);
        a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (T - t - h <= 1e-15 * std::max(1.0, T)) ? T : t + h;
        tr.max_drift = std::max(tr.max_drift, curvature_symmetry_defect(a));
        symmetrize_curvature(a);
        ++steps;
        double m = a.max_abs();
        if (!std::isfinite(m) || m > 1e12) {
            tr.blowup_t = t;
            tr.times.push_back(t);
            tr.states.push_back(a);
            if (keep_partial) return tr;
            throw BlowUp("curvature ODE blew up at t = " + format_double(t));
        }
        if (steps % record_every == 0 || t == T) {
            tr.times.push_back(t);
            tr.states.push_back(a);
        }
    }
    return tr;
}

PairExtremum extremal_pair(const Tensor4& a, ExtremalMode mode, uint64_t seed) {
    if (mode == ExtremalMode::MaxAbc) return extremize_pairs(a, PairMode::Abc, true, seed);
    return extremize_pairs(a, PairMode::Orth, false, seed);
}

Tensor4 negative_boundary(const Tensor4& a, uint64_t seed) {
    double m = extremal_pair(a, ExtremalMode::MaxAbc, seed).value;
    return a - m * metric_square(a.dim());
}

Tensor4 orth_boundary(const Tensor4& a, uint64_t seed) {
    double m = extremal_pair(a, ExtremalMode::MinOrthAbc, seed).value;
    return a - m * metric_square(a.dim());
}

NullVectorReport null_vector_check_negative(const Tensor4& a, uint64_t seed) {
    const int n = a.dim();
    NullVectorReport r;
    PairExtremum ex = extremal_pair(a, ExtremalMode::MaxAbc, seed);
    r.max_abc = ex.value;
    if (std::abs(ex.value) > band(a))
        throw NotExtremal("max A(v,w,v,w) = " + format_double(ex.value) + " is not on the boundary");
    r.v = ex.a;
    r.w = ex.b;
    r.norm = a.norm();
    const Vec& v = r.v;
    const Vec& w = r.w;

    Mat m1(n, n), m2(n, n), nn(n, n);
    std::vector<Vec> e(n, Vec::Zero(n));
    for (int i = 0; i < n; ++i) e[i][i] = 1.0;
    r.first_derivative = 0.0;
    for (int i = 0; i < n; ++i) {
        r.first_derivative = std::max(r.first_derivative, std::abs(a.eval(v, e[i], v, w)));
        r.first_derivative = std::max(r.first_derivative, std::abs(a.eval(e[i], w, v, w)));
        for (int j = 0; j < n; ++j) {
            m1(i, j) = -a.eval(e[i], w, e[j], w);
            m2(i, j) = -a.eval(v, e[i], v, e[j]);
            nn(i, j) = -2.0 * a.eval(v, w, e[i], e[j]);
        }
    }
    r.first_ok = r.first_derivative <= 1e-7 * r.norm;

    BlockInstance inst{m1, m2, nn};
    Mat g1 = inst.g1();
    r.h_form_min_eig = Eigen::SelfAdjointEigenSolver<Mat>(g1, Eigen::EigenvaluesOnly).eigenvalues()[0];
    r.h_ok = r.h_form_min_eig >= -1e-8 * (1.0 + r.norm);

    r.q_value = q_at_pair(a, v, w);
    r.trace_m1m2 = (m1 * m2).trace();
    r.sharper = r.q_value + r.trace_m1m2;
    double qtol = 1e-8 * r.norm * r.norm;
    r.q_ok = r.q_value <= qtol;
    r.sharper_ok = r.sharper <= qtol;
    return r;
}

Mat BlockInstance::g1() const {
    const int k = static_cast<int>(m1.rows());
    Mat g(2 * k, 2 * k);
    g << m1, n, n.transpose(), m2;
    return g;
}

Mat BlockInstance::g2() const {
    const int k = static_cast<int>(m1.rows());
    Mat g(2 * k, 2 * k);
    g << m2, -n.transpose(), -n, m1;
    return g;
}

std::vector<double> characteristic_polynomial(const Mat& m) {
    // expand prod (x - lambda_i); Faddeev-LeVerrier loses too many digits past 8x8
    const int d = static_cast<int>(m.rows());
    Eigen::VectorXcd lam = Eigen::EigenSolver<Mat>(m, false).eigenvalues();
    std::vector<std::complex<double>> c(d + 1, 0.0);
    c[0] = 1.0;
    for (int k = 0; k < d; ++k) {
        for (int i = k + 1; i > 0; --i) c[i] = c[i - 1] - lam[k] * c[i];
        c[0] = -lam[k] * c[0];
    }
    std::vector<double> out(d + 1);
    for (int i = 0; i <= d; ++i) out[i] = c[i].real();
    return out;
}

TraceLemmaResult trace_lemma(const BlockInstance& inst) {
    const int k = static_cast<int>(inst.m1.rows());
    if (inst.m2.rows() != k || inst.n.rows() != k || inst.n.cols() != k)
        throw BadParams("block sizes do not match");
    Mat g1 = inst.g1();
    double scale = 1.0 + g1.cwiseAbs().maxCoeff();
    double lmin = Eigen::SelfAdjointEigenSolver<Mat>(g1, Eigen::EigenvaluesOnly).eigenvalues()[0];
    if (lmin < -1e-12 * scale) throw NotPSD("G1 has eigenvalue " + format_double(lmin));
    TraceLemmaResult r;
    r.value = (inst.m1 * inst.m2 - inst.n * inst.n).trace();
    Mat g2 = inst.g2();
    Mat J = Mat::Zero(2 * k, 2 * k);
    J.topRightCorner(k, k) = Mat::Identity(k, k);
    J.bottomLeftCorner(k, k) = -Mat::Identity(k, k);
    r.similarity_gap = (J * g1 * J.transpose() - g2).cwiseAbs().maxCoeff();
    auto c1 = characteristic_polynomial(g1);
    auto c2 = characteristic_polynomial(g2);
    // coefficient c_i carries the scale rho^(m - i)
    const double rho = 1.0 + g1.cwiseAbs().rowwise().sum().maxCoeff();
    const int m = static_cast<int>(c1.size()) - 1;
    for (int i = 0; i <= m; ++i)
        r.charpoly_gap = std::max(r.charpoly_gap, std::abs(c1[i] - c2[i]) / std::pow(rho, m - i));
    return r;
}

BlockInstance random_block_instance(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> rank_pick(1, 2 * n);
    int rows = rank_pick(rng);  // fewer rows than 2n gives a singular G1
    Mat b(rows, 2 * n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < 2 * n; ++j) b(i, j) = u(rng);
    Mat g = b.transpose() * b;
    BlockInstance inst;
    inst.m1 = g.topLeftCorner(n, n);
    inst.n = g.topRightCorner(n, n);
    inst.m2 = g.bottomRightCorner(n, n);
    return inst;
}

Tensor4 random_negative_tensor(int n, std::mt19937_64& rng, uint64_t seed) {
    Tensor4 r = random_curvature(n, rng);
    Tensor4 a = negative_boundary(r, seed);
    double extra = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return a - extra * metric_square(n);
}

ProbeResult noab_probe(int n, uint64_t seed, long trials, Exec exec) {
    if (trials < 1) throw BadParams("noab probe needs at least one trial");
    if (n < 2) throw BadParams("orthogonal pairs need n >= 2");
    struct Trial {
        double q = 0.0;
        bool found = false;
        Tensor4 a;
        Vec v, w;
    };
    ProbeResult res;
    res.min_q = std::numeric_limits<double>::infinity();
    const long chunk = std::max<long>(16, 8L * max_threads());
    for (long start = 0; start < trials; start += chunk) {
        long count = std::min(chunk, trials - start);
        std::vector<Trial> out(count);
        for_each_index(exec, count, [&](std::ptrdiff_t i) {
            std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(start + i)));
            Tensor4 r = random_curvature(n, rng);
            PairExtremum mn = extremal_pair(r, ExtremalMode::MinOrthAbc);
            Tensor4 a = r - mn.value * metric_square(n);
            Trial& t = out[i];
            t.q = q_at_pair(a, mn.a, mn.b);
            if (t.q < -1e-6) {
                // the pair must really be a global minimum of the shifted tensor
                PairExtremum check = extremal_pair(a, ExtremalMode::MinOrthAbc, 1234567);
                if (check.value >= -band(a)) {
                    t.found = true;
                    t.a = a;
                    t.v = mn.a;
                    t.w = mn.b;
                }
            }
        });
        for (long i = 0; i < count; ++i) {
            res.min_q = std::min(res.min_q, out[i].q);
            res.trials_run = start + i + 1;
            if (out[i].found) {
                res.counterexample = out[i].a;
                res.v = out[i].v;
                res.w = out[i].w;
                res.q_value = out[i].q;
                return res;
            }
        }
    }
    return res;
}

namespace {

struct Constraint {
    std::vector<std::pair<int, double>> terms;  // orbit index, coefficient
    double rhs = 0.0;                            // sum c A <= rhs
};

}  // namespace

PolarizationReport polarization_bounds(const Tensor4& a, double h_lower, double o_lower, uint64_t seed) {
    const int n = a.dim();
    PairExtremum mx = extremal_pair(a, ExtremalMode::MaxAbc, seed);
    if (mx.value > band(a))
        throw NotNegativeABC("max A(v,w,v,w) = " + format_double(mx.value) + " is positive");
    const auto& orbits = curvature_orbits(n);
    const int no = static_cast<int>(orbits.size());
    std::vector<int> orbit_of(static_cast<size_t>(n) * n * n * n);
    for (int o = 0; o < no; ++o)
        for (int m : orbits[o]) orbit_of[m] = o;
    auto flat = [n](int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; };

    std::vector<Constraint> cons;
    const double ts[] = {-4, -2, -1, -0.5, -0.25, 0.25, 0.5, 1, 2, 4};
    auto add_quartic = [&](int p, double t, int r, int q, double s, int ss, bool diag) {
        // A(u,w,u,w) with u = e_p + t e_r and w = e_q + s e_ss (w = u when diag)
        std::map<int, double> c;
        int ui[2] = {p, r}, wi[2] = {q, ss};
        double uc[2] = {1.0, t}, wc[2] = {1.0, s};
        for (int b = 0; b < 16; ++b) {
            int s0 = b & 1, s1 = (b >> 1) & 1, s2 = (b >> 2) & 1, s3 = (b >> 3) & 1;
            c[orbit_of[flat(ui[s0], wi[s1], ui[s2], wi[s3])]] += uc[s0] * wc[s1] * uc[s2] * wc[s3];
        }
        Constraint up;
        for (auto [o, v] : c)
            if (v != 0.0) up.terms.push_back({o, v});
        if (up.terms.empty()) return;
        cons.push_back(up);  // A(u,w,u,w) <= 0
        if (diag) {
            double un2 = (p == r ? (1 + t) * (1 + t) : 1 + t * t);
            Constraint lo;
            for (auto [o, v] : up.terms) lo.terms.push_back({o, -v});
            lo.rhs = -h_lower * un2 * un2;
            cons.push_back(lo);
        }
    };
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r)
            for (double t : ts) {
                add_quartic(p, t, r, p, t, r, true);
                for (int q = 0; q < n; ++q)
                    for (int ss = 0; ss < n; ++ss)
                        for (double s : ts) add_quartic(p, t, r, q, s, ss, false);
            }
    for (int p = 0; p < n; ++p) add_quartic(p, 0.0, p, p, 0.0, p, true);
    if (n >= 2) {
        std::map<int, double> c;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) c[orbit_of[flat(i, j, i, j)]] -= 1.0;
        Constraint oc;
        for (auto [o, v] : c) oc.terms.push_back({o, v});
        oc.rhs = -o_lower;
        cons.push_back(oc);
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo(no, -inf), hi(no, inf);
    PolarizationReport rep;
    rep.h_lower = h_lower;
    rep.o_lower = o_lower;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool changed = false;
        for (const auto& c : cons) {
            // per-term lower bounds of c_o A_o and their finite sum
            double finite_sum = 0.0;
            int n_inf = 0, inf_at = -1;
            std::vector<double> low(c.terms.size());
            for (size_t k = 0; k < c.terms.size(); ++k) {
                auto [o, v] = c.terms[k];
                low[k] = v > 0 ? v * lo[o] : v * hi[o];
                if (std::isinf(low[k])) {
                    ++n_inf;
                    inf_at = static_cast<int>(k);
                } else {
                    finite_sum += low[k];
                }
            }
            if (n_inf > 1) continue;
            for (size_t k = 0; k < c.terms.size(); ++k) {
                if (n_inf == 1 && static_cast<int>(k) != inf_at) continue;
                auto [o, v] = c.terms[k];
                double rest = n_inf == 1 ? finite_sum : finite_sum - low[k];
                double bound = (c.rhs - rest) / v;
                if (v > 0) {
                    if (bound < hi[o] - 1e-15 * (1.0 + std::abs(bound))) {
                        hi[o] = bound;
                        changed = true;
                    }
                } else if (bound > lo[o] + 1e-15 * (1.0 + std::abs(bound))) {
                    lo[o] = bound;
                    changed = true;
                }
            }
        }
        rep.sweeps = sweep + 1;
        if (!changed) break;
    }

    double eps = band(a);
    rep.worst_excess = -inf;
    for (int o = 0; o < no; ++o) {
        ComponentBound b;
        b.index = unflat4(orbits[o].front(), n);
        b.lo = lo[o];
        b.hi = hi[o];
        b.value = a.data()[orbits[o].front()];
        double excess = std::max(b.value - b.hi, b.lo - b.value) - eps;
        b.inside = excess <= 0.0;
        rep.worst_excess = std::max(rep.worst_excess, excess);
        rep.bounds.push_back(b);
    }
    return rep;
}

}  // namespace tubeflow
