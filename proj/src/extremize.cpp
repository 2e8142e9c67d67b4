#include "tubeflow/extremize.hpp"

#include "tubeflow/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace tubeflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGrid = 720;

Vec unit(double t) {
    Vec v(2);
    v << std::cos(t), std::sin(t);
    return v;
}

// f(theta) = c0 + c1 cos2t + s1 sin2t + c2 cos4t + s2 sin4t, from 8 samples.
struct Trig1 {
    double c0, c1, s1, c2, s2;
    double f(double t) const {
        return c0 + c1 * std::cos(2 * t) + s1 * std::sin(2 * t) + c2 * std::cos(4 * t) + s2 * std::sin(4 * t);
    }
    double d1(double t) const {
        return -2 * c1 * std::sin(2 * t) + 2 * s1 * std::cos(2 * t) - 4 * c2 * std::sin(4 * t) + 4 * s2 * std::cos(4 * t);
    }
    double d2(double t) const {
        return -4 * c1 * std::cos(2 * t) - 4 * s1 * std::sin(2 * t) - 16 * c2 * std::cos(4 * t) - 16 * s2 * std::sin(4 * t);
    }
};

template <class F>
Trig1 fit1(F&& f) {
    const int m = 8;
    Trig1 t{0, 0, 0, 0, 0};
    for (int k = 0; k < m; ++k) {
        double th = kPi * k / m;
        double v = f(th);
        t.c0 += v / m;
        t.c1 += 2 * v * std::cos(2 * th) / m;
        t.s1 += 2 * v * std::sin(2 * th) / m;
        t.c2 += 2 * v * std::cos(4 * th) / m;
        t.s2 += 2 * v * std::sin(4 * th) / m;
    }
    return t;
}

// Maximizes sign * f on [0, pi): grid then safeguarded Newton on f'.
double refine1(const Trig1& tr, double sign) {
    int best = 0;
    double bv = -INFINITY;
    for (int k = 0; k < kGrid; ++k) {
        double v = sign * tr.f(kPi * k / kGrid);
        if (v > bv) bv = v, best = k;
    }
    const double step = kPi / kGrid;
    double lo = kPi * best / kGrid - step, hi = lo + 2 * step;
    double t = kPi * best / kGrid;
    double g_lo = sign * tr.d1(lo), g_hi = sign * tr.d1(hi);
    if (g_lo >= 0 && g_hi <= 0) {
        for (int it = 0; it < 100; ++it) {
            double g = sign * tr.d1(t), h = sign * tr.d2(t);
            double nt = (h < 0) ? t - g / h : 0.5 * (lo + hi);
            if (!(nt > lo && nt < hi)) nt = 0.5 * (lo + hi);
            if (g > 0) lo = t;
            else hi = t;
            if (std::abs(nt - t) < 1e-16) {
                t = nt;
                break;
            }
            t = nt;
        }
    }
    if (sign * tr.f(t) < bv) t = kPi * best / kGrid;
    return t;
}

// f(theta, phi) = sum_pq C[p][q] u_p(theta) u_q(phi), u = {1, cos2x, sin2x}.
struct Trig2 {
    double c[3][3];
    static void basis(double x, double u[3], double du[3], double ddu[3]) {
        double c2 = std::cos(2 * x), s2 = std::sin(2 * x);
        u[0] = 1, u[1] = c2, u[2] = s2;
        du[0] = 0, du[1] = -2 * s2, du[2] = 2 * c2;
        ddu[0] = 0, ddu[1] = -4 * c2, ddu[2] = -4 * s2;
    }
    void eval(double t, double p, double& f, double g[2], double h[2][2]) const {
        double ut[3], dut[3], ddut[3], up[3], dup[3], ddup[3];
        basis(t, ut, dut, ddut);
        basis(p, up, dup, ddup);
        f = 0;
        g[0] = g[1] = 0;
        h[0][0] = h[0][1] = h[1][1] = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double k = c[a][b];
                f += k * ut[a] * up[b];
                g[0] += k * dut[a] * up[b];
                g[1] += k * ut[a] * dup[b];
                h[0][0] += k * ddut[a] * up[b];
                h[0][1] += k * dut[a] * dup[b];
                h[1][1] += k * ut[a] * ddup[b];
            }
        h[1][0] = h[0][1];
    }
};

template <class F>
Trig2 fit2(F&& f) {
    const int m = 4;
    Trig2 t{};
    double w[3] = {1.0 / m, 2.0 / m, 2.0 / m};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double th = kPi * i / m, ph = kPi * j / m;
            double v = f(th, ph);
            double ut[3] = {1, std::cos(2 * th), std::sin(2 * th)};
            double up[3] = {1, std::cos(2 * ph), std::sin(2 * ph)};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) t.c[a][b] += w[a] * w[b] * v * ut[a] * up[b];
        }
    return t;
}

PairExtremum extremize_2d(const Tensor4& A, PairMode mode, bool maximize) {
    const double sign = maximize ? 1.0 : -1.0;
    PairExtremum r;
    if (mode == PairMode::Diag || mode == PairMode::Orth) {
        Trig1 tr = fit1([&](double t) {
            Vec a = unit(t);
            Vec b = mode == PairMode::Diag ? a : unit(t + kPi / 2);
            return A.abc(a, b);
        });
        double t = refine1(tr, sign);
        r.a = unit(t);
        r.b = mode == PairMode::Diag ? r.a : unit(t + kPi / 2);
        r.value = A.abc(r.a, r.b);
        return r;
    }
    Trig2 tr = fit2([&](double t, double p) { return A.abc(unit(t), unit(p)); });
    // Grid over theta with the inner angle solved in closed form.
    double bt = 0, bp = 0, bv = -INFINITY;
    for (int k = 0; k < kGrid; ++k) {
        double t = kPi * k / kGrid;
        double ut[3] = {1, std::cos(2 * t), std::sin(2 * t)};
        double al = 0, be = 0, ga = 0;
        for (int a = 0; a < 3; ++a) {
            al += tr.c[a][0] * ut[a];
            be += tr.c[a][1] * ut[a];
            ga += tr.c[a][2] * ut[a];
        }
        double v = sign * al + std::hypot(be, ga);
        if (v > bv) {
            bv = v;
            bt = t;
            bp = 0.5 * std::atan2(sign * ga, sign * be);
        }
    }
    // Damped Newton on (theta, phi) for sign * f.
    double t = bt, p = bp, f, g[2], h[2][2];
    tr.eval(t, p, f, g, h);
    double cur = sign * f;
    for (int it = 0; it < 100; ++it) {
        double G[2] = {sign * g[0], sign * g[1]};
        double H[2][2] = {{sign * h[0][0], sign * h[0][1]}, {sign * h[1][0], sign * h[1][1]}};
        double tr2 = H[0][0] + H[1][1], det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
        double lmax = 0.5 * tr2 + std::sqrt(std::max(0.0, 0.25 * tr2 * tr2 - det));
        double scale = 1e-12 * (1 + std::abs(H[0][0]) + std::abs(H[1][1]));
        double mu = lmax > -scale ? lmax + scale + 1e-9 * (std::abs(H[0][0]) + std::abs(H[1][1]) + 1) : 0.0;
        double a00 = H[0][0] - mu, a11 = H[1][1] - mu, a01 = H[0][1];
        double dd = a00 * a11 - a01 * a01;
        if (dd == 0) break;
        double dt = -(a11 * G[0] - a01 * G[1]) / dd;
        double dp = -(-a01 * G[0] + a00 * G[1]) / dd;
        double lam = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 30; ++ls) {
            double nf, ng[2], nh[2][2];
            tr.eval(t + lam * dt, p + lam * dp, nf, ng, nh);
            if (sign * nf >= cur) {
                t += lam * dt;
                p += lam * dp;
                f = nf;
                g[0] = ng[0], g[1] = ng[1];
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) h[a][b] = nh[a][b];
                moved = sign * nf > cur || lam * std::hypot(dt, dp) > 0;
                cur = sign * nf;
                break;
            }
            lam *= 0.5;
        }
        if (!moved || std::hypot(dt, dp) * lam < 1e-15) break;
    }
    r.a = unit(t);
    r.b = unit(p);
    r.value = A.abc(r.a, r.b);
    return r;
}

Vec random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    do {
        for (int i = 0; i < n; ++i) v[i] = nd(rng);
    } while (v.norm() < 1e-8);
    return v.normalized();
}

struct State {
    Vec a, b;
};

double objective(const Tensor4& A, PairMode mode, const State& s) {
    return mode == PairMode::Diag ? A.abc(s.a, s.a) : A.abc(s.a, s.b);
}

void tangent_gradient(const Tensor4& A, PairMode mode, const State& s, Vec& ga, Vec& gb) {
    if (mode == PairMode::Diag) {
        ga = A.diag_gradient(s.a);
        ga -= s.a * s.a.dot(ga);
        gb = Vec::Zero(s.a.size());
        return;
    }
    A.abc_gradient(s.a, s.b, ga, gb);
    if (mode == PairMode::Abc) {
        ga -= s.a * s.a.dot(ga);
        gb -= s.b * s.b.dot(gb);
    } else {
        double sym = 0.5 * (s.a.dot(gb) + s.b.dot(ga));
        Vec na = ga - s.a * s.a.dot(ga) - s.b * sym;
        Vec nb = gb - s.a * sym - s.b * s.b.dot(gb);
        ga = na;
        gb = nb;
    }
}

State retract(PairMode mode, const State& s, const Vec& da, const Vec& db, double t) {
    State r;
    r.a = (s.a + t * da).normalized();
    if (mode == PairMode::Diag) {
        r.b = r.a;
    } else if (mode == PairMode::Abc) {
        r.b = (s.b + t * db).normalized();
    } else {
        Vec b = s.b + t * db;
        b -= r.a * r.a.dot(b);
        r.b = b.normalized();
    }
    return r;
}

PairExtremum extremize_nd(const Tensor4& A, PairMode mode, bool maximize, uint64_t seed) {
    const int n = A.dim();
    const double sign = maximize ? 1.0 : -1.0;
    const double scale = 1.0 + A.max_abs();
    std::mt19937_64 rng(seed);
    PairExtremum best;
    best.value = -INFINITY;
    double best_signed = -INFINITY;
    for (int restart = 0; restart < 64; ++restart) {
        State s;
        s.a = random_unit(n, rng);
        s.b = random_unit(n, rng);
        if (mode == PairMode::Orth) {
            s.b -= s.a * s.a.dot(s.b);
            if (s.b.norm() < 1e-8) s.b = random_unit(n, rng) - s.a * s.a.dot(s.b);
            s.b.normalize();
        }
        if (mode == PairMode::Diag) s.b = s.a;
        double f = sign * objective(A, mode, s);
        double t = 1.0 / scale;
        for (int it = 0; it < 20000; ++it) {
            Vec ga, gb;
            tangent_gradient(A, mode, s, ga, gb);
            ga *= sign;
            gb *= sign;
            double g2 = ga.squaredNorm() + gb.squaredNorm();
            if (g2 < 1e-30 * scale * scale) break;
            t *= 2.0;
            State ns;
            double nf = f;
            bool ok = false;
            for (int ls = 0; ls < 60; ++ls) {
                ns = retract(mode, s, ga, gb, t);
                nf = sign * objective(A, mode, ns);
                if (nf >= f + 1e-4 * t * g2) {
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if (!ok) break;
            double moved = std::sqrt((ns.a - s.a).squaredNorm() + (ns.b - s.b).squaredNorm());
            s = ns;
            f = nf;
            if (moved < 1e-10) break;
        }
        if (f > best_signed) {
            best_signed = f;
            best.a = s.a;
            best.b = s.b;
        }
    }
    // Polish the winner with gradient tests only: near a flat maximum the
    // objective differences drown in rounding long before the gradient does.
    State s{best.a, best.b};
    double t = 1.0 / scale;
    for (int it = 0; it < 5000; ++it) {
        Vec ga, gb;
        tangent_gradient(A, mode, s, ga, gb);
        ga *= sign;
        gb *= sign;
        double g2 = ga.squaredNorm() + gb.squaredNorm();
        if (g2 < 1e-30 * scale * scale) break;
        double f0 = sign * objective(A, mode, s);
        t *= 2.0;
        bool ok = false;
        for (int ls = 0; ls < 60 && !ok; ++ls) {
            State ns = retract(mode, s, ga, gb, t);
            Vec na, nb;
            tangent_gradient(A, mode, ns, na, nb);
            double along = sign * (na.dot(ga) + nb.dot(gb));
            if (along >= 0 && sign * objective(A, mode, ns) >= f0 - 1e-14 * scale) {
                s = ns;
                ok = true;
            } else {
                t *= 0.5;
            }
        }
        if (!ok) break;
    }
    best.a = s.a;
    best.b = s.b;
    best.value = A.abc(best.a, best.b);
    return best;
}

}  // namespace

PairExtremum extremize_pairs(const Tensor4& A, PairMode mode, bool maximize, uint64_t seed) {
    const int n = A.dim();
    if (n == 1) {
        if (mode == PairMode::Orth) throw BadParams("no orthogonal pairs in dimension 1");
        PairExtremum r;
        r.a = r.b = Vec::Ones(1);
        r.value = A(0, 0, 0, 0);
        return r;
    }
    if (n == 2) return extremize_2d(A, mode, maximize);
    return extremize_nd(A, mode, maximize, seed);
}

}  // namespace tubeflow
