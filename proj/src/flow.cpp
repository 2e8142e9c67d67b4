#include "tubeflow/flow.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <ostream>

namespace tubeflow {

namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

PotentialHandle quadratic_part(const Mat& a) {
    const int n = static_cast<int>(a.rows());
    DomainSpec d;
    d.n = n;
    d.kind = DomainKind::FullSpace;
    d.params = {0.0};
    auto f = [a](const Vec& x) { return 0.5 * x.dot(a * x); };
    auto ft = [a, n](const std::vector<Taylor>& x) {
        Taylor s(x[0].basis(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0) s += (0.5 * a(i, j)) * (x[i] * x[j]);
        return s;
    };
    PotentialHandle h = PotentialHandle::closed_form("quadratic_part", d, f, ft);
    h.set_torus_quadratic(a);
    return h;
}

// log det of a PD matrix, or NaN when the Cholesky factorization fails.
double log_det_pd(const double* hm, int n) {
    if (n == 1) return hm[0] > 0 ? std::log(hm[0]) : std::numeric_limits<double>::quiet_NaN();
    if (n == 2) {
        double det = hm[0] * hm[3] - hm[1] * hm[2];
        if (!(hm[0] > 0) || !(det > 0)) return std::numeric_limits<double>::quiet_NaN();
        return std::log(det);
    }
    SmallMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = hm[i * n + j];
    Eigen::LLT<SmallMat> llt(m);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::log(llt.matrixLLT()(i, i));
    return 2.0 * s;
}

double min_eigenvalue(const double* hm, int n) {
    if (n == 1) return hm[0];
    if (n == 2) {
        double a = hm[0], b = 0.5 * (hm[1] + hm[2]), d = hm[3];
        return 0.5 * (a + d - std::sqrt((a - d) * (a - d) + 4 * b * b));
    }
    SmallMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = hm[i * n + j];
    return Eigen::SelfAdjointEigenSolver<SmallMat>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

}  // namespace

int FlowState::wrap(int i, int d) const {
    int m = grid.dims[d];
    return ((i % m) + m) % m;
}

size_t FlowState::neighbour(size_t id, const std::vector<int>& off) const {
    std::vector<int> idx = grid.unflat(id);
    for (int d = 0; d < grid.n; ++d) {
        idx[d] += off[d];
        if (mode == BoundaryMode::Periodic) idx[d] = wrap(idx[d], d);
    }
    return grid.flat(idx);
}

int FlowState::edge_distance(size_t id) const {
    if (mode == BoundaryMode::Periodic) return std::numeric_limits<int>::max();
    std::vector<int> idx = grid.unflat(id);
    int best = std::numeric_limits<int>::max();
    for (int d = 0; d < grid.n; ++d) best = std::min({best, idx[d], grid.dims[d] - 1 - idx[d]});
    return best;
}

Mat FlowState::node_hessian(size_t id) const {
    const int n = grid.n;
    Mat hm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) hm(i, j) = base_hess_[id * n * n + i * n + j];
    std::vector<int> off(n, 0);
    double h2 = grid.h * grid.h;
    for (int a = 0; a < n; ++a) {
        off[a] = 1;
        double up = u[neighbour(id, off)];
        off[a] = -1;
        double dn = u[neighbour(id, off)];
        off[a] = 0;
        hm(a, a) += (up - 2 * u[id] + dn) / h2;
        for (int b = a + 1; b < n; ++b) {
            double s = 0.0;
            for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                    off[a] = sa;
                    off[b] = sb;
                    s += sa * sb * u[neighbour(id, off)];
                }
            off[a] = off[b] = 0;
            hm(a, b) += s / (4 * h2);
            hm(b, a) = hm(a, b);
        }
    }
    return hm;
}

PotentialJet FlowState::node_jet(size_t id) const {
    Vec x = grid.node(id);
    PotentialJet j;
    if (base.torus_quadratic() && base.name == "quadratic_part") {
        const Mat& a = *base.torus_quadratic();
        const int n = grid.n;
        j.x = x;
        j.value = 0.5 * x.dot(a * x);
        j.gradient = a * x;
        j.hessian = a;
        j.third = Tensor3(n);
        j.fourth = Tensor4(n);
    } else {
        j = jet(base, x);
    }
    std::vector<int> center = grid.unflat(id);
    auto lookup = [&](const Vec& y) {
        std::vector<int> idx(grid.n);
        for (int d = 0; d < grid.n; ++d) {
            idx[d] = center[d] + static_cast<int>(std::lround((y[d] - x[d]) / grid.h));
            if (mode == BoundaryMode::Periodic) idx[d] = wrap(idx[d], d);
            else if (idx[d] < 0 || idx[d] >= grid.dims[d]) throw OutOfDomain("stencil leaves the window");
        }
        return u[grid.flat(idx)];
    };
    PotentialJet ju = fd_jet(lookup, x, grid.h);
    j.value += ju.value;
    j.gradient += ju.gradient;
    j.hessian += ju.hessian;
    j.third = [&] {
        Tensor3 t = j.third;
        for (size_t k = 0; k < t.data().size(); ++k) t.data()[k] += ju.third.data()[k];
        return t;
    }();
    j.fourth += ju.fourth;
    return j;
}

GridFile FlowState::checkpoint() const {
    GridFile g;
    g.spec = grid;
    g.values.resize(u.size());
    for (size_t i = 0; i < u.size(); ++i) g.values[i] = psi(i);
    g.t = t;
    return g;
}

FlowState init_flow(const PotentialHandle& handle, const FlowGrid& fg, double lambda) {
    const int n = handle.dim();
    if (fg.points < 5) throw BadParams("flow grids need at least 5 points per axis");
    FlowState s;
    s.mode = fg.mode;
    s.lambda = lambda;
    s.grid.n = n;
    s.grid.dims.assign(n, fg.points);
    bool periodic = fg.mode == BoundaryMode::Periodic;
    if (periodic) {
        if (!handle.torus_quadratic())
            throw IncompatibleMode(handle.name + " has no quadratic-plus-periodic split for a torus run");
        double period = handle.domain.kind == DomainKind::Torus ? handle.domain.params.at(0) : 1.0;
        s.grid.h = period / fg.points;
        s.grid.x0 = Vec::Zero(n);
        s.base = quadratic_part(*handle.torus_quadratic());
    } else {
        if (handle.domain.kind == DomainKind::Torus && !handle.torus_quadratic())
            throw IncompatibleMode(handle.name + " cannot be windowed");
        if (fg.lo.size() != n || fg.hi.size() != n) throw BadParams("window corners have the wrong dimension");
        double span = fg.hi[0] - fg.lo[0];
        for (int d = 1; d < n; ++d)
            if (std::abs((fg.hi[d] - fg.lo[d]) - span) > 1e-12 * (1 + std::abs(span)))
                throw BadParams("window must be a cube");
        if (!(span > 0)) throw BadParams("window must have positive width");
        s.grid.h = span / (fg.points - 1);
        s.grid.x0 = fg.lo;
        s.base = handle;
    }
    const size_t N = s.grid.size();
    s.u.assign(N, 0.0);
    s.base_value_.resize(N);
    s.base_hess_.resize(N * n * n);
    s.active_.assign(N, 1);
    s.ring_rate_.assign(N, 0.0);
    s.ring_source_.assign(N, -1);
    for (size_t id = 0; id < N; ++id) {
        Vec x = s.grid.node(id);
        if (periodic) {
            const Mat& a = *s.base.torus_quadratic();
            s.base_value_[id] = 0.5 * x.dot(a * x);
            s.u[id] = handle.value(x) - s.base_value_[id];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s.base_hess_[id * n * n + i * n + j] = a(i, j);
        } else {
            PotentialJet j = jet(handle, x);
            s.base_value_[id] = j.value;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) s.base_hess_[id * n * n + i * n + k] = j.hessian(i, k);
            s.active_[id] = s.edge_distance(id) >= s.frozen_width;
            if (!s.active_[id] && fg.ring == FlowGrid::Ring::Rate)
                s.ring_rate_[id] = 2.0 * log_det_pd(j.hessian.data(), n) - lambda * j.value;
            if (!s.active_[id] && fg.ring == FlowGrid::Ring::Extrapolate) {
                std::vector<int> idx = s.grid.unflat(id);
                for (int d = 0; d < n; ++d) idx[d] = std::clamp(idx[d], s.frozen_width, fg.points - 1 - s.frozen_width);
                s.ring_source_[id] = static_cast<int>(s.grid.flat(idx));
            }
        }
    }
    // neighbour table: +e_a, -e_a, then (+a+b, +a-b, -a+b, -a-b) for a < b
    s.nbr_count_ = 2 * n + 2 * n * (n - 1);
    s.nbr_.assign(N * s.nbr_count_, 0);
    for (size_t id = 0; id < N; ++id) {
        if (!s.active_[id]) continue;
        int k = 0;
        std::vector<int> off(n, 0);
        for (int a = 0; a < n; ++a) {
            off[a] = 1;
            s.nbr_[id * s.nbr_count_ + k++] = static_cast<int>(s.neighbour(id, off));
            off[a] = -1;
            s.nbr_[id * s.nbr_count_ + k++] = static_cast<int>(s.neighbour(id, off));
            off[a] = 0;
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int sa : {1, -1})
                    for (int sb : {1, -1}) {
                        off[a] = sa;
                        off[b] = sb;
                        s.nbr_[id * s.nbr_count_ + k++] = static_cast<int>(s.neighbour(id, off));
                        off[a] = off[b] = 0;
                    }
    }
    for (size_t id = 0; id < N; ++id)
        if (s.active_[id]) check_convex(s.node_hessian(id), s.grid.node(id));
    return s;
}

void FlowState::fd_hessian(size_t id, const std::vector<double>& w, double* hm) const {
    const int n = grid.n;
    const double h2 = grid.h * grid.h;
    const int* nb = &nbr_[id * nbr_count_];
    const double* bh = &base_hess_[id * n * n];
    for (int k = 0; k < n * n; ++k) hm[k] = bh[k];
    double c = w[id];
    for (int a = 0; a < n; ++a) hm[a * n + a] += (w[nb[2 * a]] - 2 * c + w[nb[2 * a + 1]]) / h2;
    int k = 2 * n;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double m = (w[nb[k]] - w[nb[k + 1]] - w[nb[k + 2]] + w[nb[k + 3]]) / (4 * h2);
            k += 4;
            hm[a * n + b] += m;
            hm[b * n + a] += m;
        }
}

std::vector<double> flow_rhs(const FlowState& s, const std::vector<double>& u, Exec exec) {
    const int n = s.grid.n;
    const size_t N = u.size();
    std::vector<double> r(N, 0.0);
    std::vector<char> bad(N, 0);
    for_each_index(exec, static_cast<std::ptrdiff_t>(N), [&](std::ptrdiff_t id) {
        double hm[64];
        if (!s.active_[id]) {
            int src = s.ring_source_[id];
            if (src < 0) {
                r[id] = s.ring_rate_[id];
                return;
            }
            s.fd_hessian(src, u, hm);
            const double* bs = &s.base_hess_[src * n * n];
            const double* bh = &s.base_hess_[id * n * n];
            for (int k = 0; k < n * n; ++k) hm[k] += bh[k] - bs[k];
        } else {
            s.fd_hessian(id, u, hm);
        }
        double v = 2.0 * log_det_pd(hm, n) - s.lambda * (s.base_value_[id] + u[id]);
        if (!std::isfinite(v)) bad[id] = 1;
        r[id] = v;
    });
    for (size_t id = 0; id < N; ++id)
        if (bad[id])
            throw StabilityFailure("Hessian lost positivity or became non-finite at node " +
                                   format_vec(s.grid.node(id)) + ", t = " + format_double(s.t));
    return r;
}

double adaptive_dt(const FlowState& s) {
    double worst = 0.0;
    const int n = s.grid.n;
    double hm[64];
    for (size_t id = 0; id < s.u.size(); ++id) {
        if (!s.active(id)) continue;
        s.fd_hessian(id, s.u, hm);
        double lmin = min_eigenvalue(hm, n);
        if (!(lmin > 0)) throw SingularHessian("Hessian is singular at node " + format_vec(s.grid.node(id)));
        worst = std::max(worst, 1.0 / lmin);
    }
    if (worst == 0.0) throw SingularHessian("no evolved nodes");
    return 0.25 * s.grid.h * s.grid.h / (2.0 * worst);
}

double flow_step(FlowState& s, double dt_cap, Exec exec) {
    double dt = std::min(adaptive_dt(s), dt_cap);
    const size_t N = s.u.size();
    std::vector<double> tmp(N);
    auto axpy = [&](const std::vector<double>& k, double c) {
        for (size_t i = 0; i < N; ++i) tmp[i] = s.u[i] + c * k[i];
        return tmp;
    };
    std::vector<double> k1 = flow_rhs(s, s.u, exec);
    std::vector<double> k2 = flow_rhs(s, axpy(k1, 0.5 * dt), exec);
    std::vector<double> k3 = flow_rhs(s, axpy(k2, 0.5 * dt), exec);
    std::vector<double> k4 = flow_rhs(s, axpy(k3, dt), exec);
    for (size_t i = 0; i < N; ++i) {
        s.u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(s.u[i]))
            throw StabilityFailure("non-finite value at node " + format_vec(s.grid.node(i)));
    }
    s.t += dt;
    return dt;
}

const std::vector<std::string>& MonitorSeries::csv_channels() {
    static const std::vector<std::string> c = {"S_min", "S_max", "ABC_max", "ORTH_ABC_min",
                                               "H_pol_min", "O_max", "chen_residual"};
    return c;
}

namespace {

struct NodeMonitor {
    double S = 0, abc_max = 0, orth_min = 0, hpol_min = 0, O = 0;
    Vec x, abc_v, abc_w, orth_v, orth_w;
};

bool record_epoch(const FlowState& s, int epoch, const MonitorSpec& spec, MonitorSeries& out, Exec exec) {
    const int n = s.dim();
    std::vector<size_t> nodes;
    int inset = s.frozen_width + 2 + 2 * epoch;
    for (size_t id = 0; id < s.u.size(); ++id) {
        if (s.mode == BoundaryMode::FrozenWindow && s.edge_distance(id) < inset) continue;
        std::vector<int> idx = s.grid.unflat(id);
        bool keep = true;
        for (int d = 0; d < n; ++d) keep = keep && idx[d] % spec.stride == 0;
        if (keep) nodes.push_back(id);
    }
    if (nodes.empty()) {
        out.notes.push_back("monitored set exhausted at t = " + format_double(s.t));
        return false;
    }
    std::vector<NodeMonitor> res(nodes.size());
    SearchSpec search{spec.seed};
    for_each_index(exec, static_cast<std::ptrdiff_t>(nodes.size()), [&](std::ptrdiff_t k) {
        CurvatureSample c = core_form(s.node_jet(nodes[k]));
        NodeMonitor& m = res[k];
        m.x = c.x;
        m.S = scalar(c);
        PointExtrema a = point_extrema(c, Quantity::Abc, search);
        m.abc_max = a.max_value;
        m.abc_v = a.max_v;
        m.abc_w = a.max_w;
        m.hpol_min = point_extrema(c, Quantity::HscPol, search).min_value;
        if (n >= 2) {
            PointExtrema o = point_extrema(c, Quantity::OrthAbc, search);
            m.orth_min = o.min_value;
            m.orth_v = o.min_v;
            m.orth_w = o.min_w;
            m.O = oab_trace(c);
        } else {
            m.orth_min = std::numeric_limits<double>::quiet_NaN();
        }
    });
    const double inf = std::numeric_limits<double>::infinity();
    double smin = inf, smax = -inf, amax = -inf, omin = inf, hmin = inf, Omax = -inf;
    size_t ia = 0, io = 0;
    for (size_t k = 0; k < res.size(); ++k) {
        const auto& m = res[k];
        smin = std::min(smin, m.S);
        smax = std::max(smax, m.S);
        if (m.abc_max > amax) {
            amax = m.abc_max;
            ia = k;
        }
        if (n >= 2 && m.orth_min < omin) {
            omin = m.orth_min;
            io = k;
        }
        hmin = std::min(hmin, m.hpol_min);
        Omax = std::max(Omax, m.O);
    }
    if (n < 2) omin = std::numeric_limits<double>::quiet_NaN();
    if (out.times.empty()) out.K = smin < 0 ? -smin : inf;
    double t = s.t;
    double chen_term = std::isinf(out.K) ? (t > 0 ? n / t : inf) : n / (t + n / out.K);
    out.times.push_back(t);
    out.channels["S_min"].push_back(smin);
    out.channels["S_max"].push_back(smax);
    out.channels["ABC_max"].push_back(amax);
    out.channels["ORTH_ABC_min"].push_back(omin);
    out.channels["H_pol_min"].push_back(hmin);
    out.channels["O_max"].push_back(Omax);
    out.channels["chen_residual"].push_back(smin + chen_term);
    out.channels["hpol_bound_residual"].push_back(hmin / (chen_term + 2 * Omax));
    out.abc_max_witness.push_back({res[ia].x, res[ia].abc_v, res[ia].abc_w, amax});
    if (n >= 2) out.orth_min_witness.push_back({res[io].x, res[io].orth_v, res[io].orth_w, omin});
    out.monitored.push_back(static_cast<long>(nodes.size()));
    return true;
}

}  // namespace

FlowRun run_flow(FlowState state, double T, const MonitorSpec& spec, Exec exec) {
    if (!(T > state.t)) throw BadParams("run end time must exceed the current time");
    if (spec.every < 1 || spec.stride < 1) throw BadParams("monitor spacing must be positive");
    FlowRun run{std::move(state), {}, 0, std::nullopt};
    MonitorSpec ms = spec;
    if (ms.epochs > 0) {
        double est = (T - run.state.t) / adaptive_dt(run.state);
        ms.every = std::max(1, static_cast<int>(std::ceil(est / ms.epochs)));
    }
    int epoch = 0;
    bool monitoring = spec.curvature;
    if (monitoring) monitoring = record_epoch(run.state, epoch++, ms, run.series, exec);
    if (run.state.mode == BoundaryMode::FrozenWindow)
        run.series.notes.push_back("frozen-window run: desk-scale surrogate, monitored set shrinks each epoch");
    try {
        while (run.state.t < T) {
            double remaining = T - run.state.t;
            flow_step(run.state, remaining, exec);
            if (T - run.state.t <= 1e-14 * std::max(1.0, T)) run.state.t = T;
            ++run.steps;
            bool at_end = run.state.t >= T;
            if (monitoring && (run.steps % ms.every == 0 || at_end))
                monitoring = record_epoch(run.state, epoch++, ms, run.series, exec);
        }
    } catch (const StabilityFailure& e) {
        run.failure = e.what();
    } catch (const SingularHessian& e) {
        run.failure = e.what();
    }
    return run;
}

double mode_amplitude(const FlowState& s, const Vec& k) {
    if (s.mode != BoundaryMode::Periodic) throw IncompatibleMode("mode amplitudes need a torus grid");
    double acc = 0.0;
    for (size_t id = 0; id < s.u.size(); ++id) acc += s.u[id] * std::cos(2 * std::numbers::pi * k.dot(s.grid.node(id)));
    return 2.0 * acc / static_cast<double>(s.u.size());
}

void write_monitor_csv(std::ostream& out, const MonitorSeries& s) {
    out << "t";
    for (const auto& c : MonitorSeries::csv_channels()) out << "," << c;
    out << "\n";
    for (size_t i = 0; i < s.times.size(); ++i) {
        out << format_double(s.times[i]);
        for (const auto& c : MonitorSeries::csv_channels()) out << "," << format_double(s.channels.at(c)[i]);
        out << "\n";
    }
}

std::string KrVerdict::label() const {
    if (weakly_regular) return "KR-WEAKLY-REGULAR(" + format_double(epsilon) + ")";
    return "KR-VIOLATION";
}

KrVerdict kr_probe(const PotentialHandle& handle, double epsilon, const FlowGrid& grid, const MonitorSpec& spec,
                   double tolerance, Exec exec) {
    if (!(epsilon > 0)) throw BadParams("kr probe needs epsilon > 0");
    if (handle.dim() < 2) throw BadParams("orthogonal pairs need n >= 2");
    FlowRun run = run_flow(init_flow(handle, grid), epsilon, spec, exec);
    if (run.failure) throw StabilityFailure(*run.failure);
    KrVerdict v;
    v.epsilon = epsilon;
    v.tolerance = tolerance;
    v.worst = std::numeric_limits<double>::infinity();
    const auto& orth = run.series.channels.at("ORTH_ABC_min");
    for (size_t i = 0; i < run.series.times.size(); ++i) {
        if (run.series.times[i] <= 0) continue;
        v.worst = std::min(v.worst, orth[i]);
        if (!v.first_violation_t && orth[i] < -tolerance) {
            v.first_violation_t = run.series.times[i];
            v.witness = run.series.orth_min_witness[i];
        }
    }
    v.weakly_regular = !v.first_violation_t;
    return v;
}

}  // namespace tubeflow
