#include "tubeflow/transport.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace tubeflow {

void DiscreteMeasure::validate() const {
    if (points.empty() || points.size() != weights.size()) throw BadParams("measure needs one weight per point");
    double s = 0.0;
    for (double w : weights) {
        if (!(w > 0)) throw BadParams("measure weights must be positive");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw BadParams("measure weights sum to " + format_double(s));
    for (size_t a = 0; a < points.size(); ++a)
        for (size_t b = a + 1; b < points.size(); ++b)
            if (points[a] == points[b]) throw BadParams("support points must be distinct");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Vec> pts) {
    DiscreteMeasure m;
    m.weights.assign(pts.size(), 1.0 / pts.size());
    m.points = std::move(pts);
    return m;
}

Mat cost_matrix(const PotentialHandle& handle, const std::vector<Vec>& X, const std::vector<Vec>& Y) {
    Mat C(X.size(), Y.size());
    for (size_t a = 0; a < X.size(); ++a)
        for (size_t b = 0; b < Y.size(); ++b) {
            Vec d = X[a] - Y[b];
            if (!handle.domain.contains(d))
                throw OutOfDomain(handle.name + ": x - y = " + format_vec(d) + " outside the domain");
            C(a, b) = handle.value(d);
        }
    return C;
}

Mat cost_matrix(const GridFile& checkpoint, const std::vector<Vec>& X, const std::vector<Vec>& Y) {
    CubicSpline sp(checkpoint.spec, checkpoint.values, false);
    Mat C(X.size(), Y.size());
    for (size_t a = 0; a < X.size(); ++a)
        for (size_t b = 0; b < Y.size(); ++b) {
            Vec d = X[a] - Y[b];
            if (!sp.covers(d)) throw OutOfDomain("x - y = " + format_vec(d) + " outside the checkpoint grid");
            C(a, b) = sp(d);
        }
    return C;
}

TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& C) {
    const int m = static_cast<int>(mu.weights.size()), k = static_cast<int>(nu.weights.size());
    if (C.rows() != m || C.cols() != k) throw BadParams("cost matrix does not match the measures");
    double sm = 0, sn = 0;
    for (double w : mu.weights) sm += w;
    for (double w : nu.weights) sn += w;
    if (std::abs(sm - sn) > 1e-12 * std::max(1.0, sm)) throw Infeasible("source and target masses differ");

    const double inf = std::numeric_limits<double>::infinity();
    const double eps = 1e-14 * std::max(1.0, sm);
    std::vector<double> supply(mu.weights), demand(nu.weights);
    Mat f = Mat::Zero(m, k);
    // potentials: p[0..m) for sources, p[m..m+k) for sinks
    std::vector<double> p(m + k, 0.0);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Cr = C;
    for (int j = 0; j < k; ++j) p[m + j] = C.col(j).minCoeff();
    std::vector<double> dist(m + k);
    std::vector<int> prev(m + k);
    std::vector<char> done(m + k);
    auto pending = [eps](const std::vector<double>& w) {
        return std::any_of(w.begin(), w.end(), [eps](double x) { return x > eps; });
    };
    while (pending(supply) && pending(demand)) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (int i = 0; i < m; ++i)
            if (supply[i] > eps) dist[i] = 0.0;
        int target = -1;
        while (true) {
            int x = -1;
            double best = inf;
            for (int y = 0; y < m + k; ++y)
                if (!done[y] && dist[y] < best) {
                    best = dist[y];
                    x = y;
                }
            if (x < 0) break;
            done[x] = 1;
            if (x >= m && demand[x - m] > eps) {
                target = x;
                break;
            }
            if (x < m) {
                for (int j = 0; j < k; ++j) {
                    double rc = Cr(x, j) + p[x] - p[m + j];
                    double nd = dist[x] + std::max(0.0, rc);
                    if (nd < dist[m + j]) {
                        dist[m + j] = nd;
                        prev[m + j] = x;
                    }
                }
            } else {
                int j = x - m;
                for (int i = 0; i < m; ++i) {
                    if (f(i, j) <= eps) continue;
                    double rc = -C(i, j) + p[x] - p[i];
                    double nd = dist[x] + std::max(0.0, rc);
                    if (nd < dist[i]) {
                        dist[i] = nd;
                        prev[i] = x;
                    }
                }
            }
        }
        if (target < 0) throw Infeasible("no augmenting path");
        double dt = dist[target];
        for (int y = 0; y < m + k; ++y) p[y] += std::min(dist[y], dt);
        // bottleneck along the path
        double amount = demand[target - m];
        int y = target;
        while (prev[y] >= 0) {
            int x = prev[y];
            if (x >= m) amount = std::min(amount, f(y, x - m));  // backward edge sink x -> source y
            y = x;
        }
        amount = std::min(amount, supply[y]);
        int src = y;
        y = target;
        while (prev[y] >= 0) {
            int x = prev[y];
            if (x < m) f(x, y - m) += amount;
            else f(y, x - m) -= amount;
            y = x;
        }
        supply[src] -= amount;
        demand[target - m] -= amount;
        if (!(amount > 0)) throw Infeasible("augmentation stalled");
    }

    TransportPlan plan;
    plan.coupling = f.cwiseMax(0.0);
    plan.u = Vec(m);
    plan.v = Vec(k);
    for (int i = 0; i < m; ++i) plan.u[i] = -p[i];
    for (int j = 0; j < k; ++j) plan.v[j] = p[m + j];
    plan.cost = (plan.coupling.array() * C.array()).sum();
    plan.dual_value = 0.0;
    for (int i = 0; i < m; ++i) plan.dual_value += mu.weights[i] * plan.u[i];
    for (int j = 0; j < k; ++j) plan.dual_value += nu.weights[j] * plan.v[j];
    for (int i = 0; i < m; ++i)
        plan.marginal_error = std::max(plan.marginal_error, std::abs(plan.coupling.row(i).sum() - mu.weights[i]));
    for (int j = 0; j < k; ++j)
        plan.marginal_error = std::max(plan.marginal_error, std::abs(plan.coupling.col(j).sum() - nu.weights[j]));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
            double r = C(i, j) - plan.u[i] - plan.v[j];
            plan.dual_infeasibility = std::max(plan.dual_infeasibility, -r);
            if (plan.coupling(i, j) > 0) plan.slackness = std::max(plan.slackness, std::abs(r));
        }
    return plan;
}

std::vector<Vec> transport_map(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const int m = static_cast<int>(plan.coupling.rows());
    double worst = 1.0;
    for (int a = 0; a < m; ++a) worst = std::min(worst, plan.coupling.row(a).maxCoeff() / mu.weights[a]);
    std::vector<Vec> T(m);
    if (worst >= 0.9) {
        for (int a = 0; a < m; ++a) {
            Eigen::Index b;
            plan.coupling.row(a).maxCoeff(&b);
            T[a] = nu.points[b];
        }
        return T;
    }
    if (worst < 0.5)
        throw NotDeterministic("a row keeps only " + format_double(worst) + " of its mass on one target");
    for (int a = 0; a < m; ++a) {
        Vec s = Vec::Zero(nu.points.front().size());
        for (int b = 0; b < plan.coupling.cols(); ++b) s += plan.coupling(a, b) * nu.points[b];
        T[a] = s / mu.weights[a];
    }
    return T;
}

double holder_modulus(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha,
                      const std::vector<int>& subset) {
    std::vector<Vec> T = transport_map(plan, mu, nu);
    std::vector<int> ids = subset;
    if (ids.empty())
        for (int a = 0; a < static_cast<int>(T.size()); ++a) ids.push_back(a);
    double best = 0.0;
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j) {
            int a = ids[i], b = ids[j];
            double dx = (mu.points[a] - mu.points[b]).norm();
            best = std::max(best, (T[a] - T[b]).norm() / std::pow(dx, alpha));
        }
    return best;
}

double plan_tv(const TransportPlan& a, const TransportPlan& b) {
    return 0.5 * (a.coupling - b.coupling).cwiseAbs().sum();
}

OtInstance read_instance(std::istream& in) {
    OtInstance inst;
    std::string line;
    int n = -1;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::string set;
        if (!(ls >> set)) continue;
        if (set == "set") continue;  // header
        if (set != "mu" && set != "nu") throw ParseError("instance rows start with mu or nu, got '" + set + "'");
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (vals.size() < 2) throw ParseError("instance row needs coordinates and a weight");
        int dim = static_cast<int>(vals.size()) - 1;
        if (n < 0) n = dim;
        if (dim != n) throw ParseError("instance rows have different dimensions");
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = vals[i];
        DiscreteMeasure& m = set == "mu" ? inst.mu : inst.nu;
        m.points.push_back(x);
        m.weights.push_back(vals.back());
    }
    if (inst.mu.points.empty() || inst.nu.points.empty()) throw ParseError("instance needs mu and nu rows");
    return inst;
}

void write_instance(std::ostream& out, const OtInstance& inst) {
    const int n = static_cast<int>(inst.mu.points.front().size());
    out << "set";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    out << ",weight\n";
    auto rows = [&](const char* name, const DiscreteMeasure& m) {
        for (size_t a = 0; a < m.points.size(); ++a) {
            out << name;
            for (int i = 0; i < n; ++i) out << "," << format_double(m.points[a][i]);
            out << "," << format_double(m.weights[a]) << "\n";
        }
    };
    rows("mu", inst.mu);
    rows("nu", inst.nu);
}

OtInstance random_instance(int count, const Vec& mu_lo, const Vec& mu_hi, const Vec& nu_lo, const Vec& nu_hi,
                           uint64_t seed) {
    if (count < 1) throw BadParams("instance needs at least one point");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&](const Vec& lo, const Vec& hi) {
        std::vector<Vec> pts;
        for (int a = 0; a < count; ++a) {
            Vec x(lo.size());
            for (int i = 0; i < lo.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
            pts.push_back(x);
        }
        return DiscreteMeasure::uniform(std::move(pts));
    };
    OtInstance inst;
    inst.mu = draw(mu_lo, mu_hi);
    inst.nu = draw(nu_lo, nu_hi);
    return inst;
}

std::vector<ContinuityRow> weak_continuity_experiment(const PotentialHandle& handle, const OtInstance& inst,
                                                      const std::vector<double>& times, double alpha,
                                                      const FlowGrid& grid, Exec exec) {
    inst.mu.validate();
    inst.nu.validate();
    if (times.empty()) throw BadParams("continuity experiment needs at least one time");
    for (size_t i = 0; i < times.size(); ++i)
        if (times[i] < 0 || (i > 0 && !(times[i] > times[i - 1])))
            throw BadParams("times must be non-negative and increasing");
    FlowState s = init_flow(handle, grid);
    std::vector<ContinuityRow> rows;
    std::optional<TransportPlan> first;
    for (double t : times) {
        while (s.t < t) {
            flow_step(s, t - s.t, exec);
            if (t - s.t <= 1e-14 * std::max(1.0, t)) s.t = t;
        }
        Mat C = cost_matrix(s.checkpoint(), inst.mu.points, inst.nu.points);
        TransportPlan plan = solve_exact(inst.mu, inst.nu, C);
        if (!first) first = plan;
        ContinuityRow r;
        r.t = t;
        r.cost = plan.cost;
        r.modulus = holder_modulus(plan, inst.mu, inst.nu, alpha);
        r.tv = plan_tv(plan, *first);
        r.certificate_residual =
            std::max({plan.marginal_error, plan.dual_infeasibility, plan.slackness, std::abs(plan.cost - plan.dual_value)});
        rows.push_back(r);
    }
    return rows;
}

void write_continuity_csv(std::ostream& out, const std::vector<ContinuityRow>& rows) {
    out << "t,cost,holder_modulus,plan_tv_to_t0\n";
    for (const auto& r : rows)
        out << format_double(r.t) << "," << format_double(r.cost) << "," << format_double(r.modulus) << ","
            << format_double(r.tv) << "\n";
}

}  // namespace tubeflow
