#include "tubeflow/potentials.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace tubeflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double base_distance(const DomainSpec& d, const Vec& y) {
    const auto& p = d.params;
    switch (d.kind) {
        case DomainKind::Box: {
            double m = kInf;
            for (int i = 0; i < d.n; ++i) m = std::min({m, y[i] - p[2 * i], p[2 * i + 1] - y[i]});
            return m;
        }
        case DomainKind::Ball: {
            double r = p[0], q = p.size() > 1 ? p[1] : 2.0;
            if (q == 1.0) return (r - y.lpNorm<1>()) / std::sqrt(static_cast<double>(d.n));
            return r - y.norm();
        }
        case DomainKind::HalfSpace: {
            Vec a = Eigen::Map<const Vec>(p.data(), d.n);
            return (a.dot(y) - p[d.n]) / a.norm();
        }
        case DomainKind::Cone: {
            int variant = p.empty() ? 0 : static_cast<int>(p[0]);
            if (variant == 0) return y.minCoeff();
            return (std::abs(y[0]) - std::abs(y[1])) / std::sqrt(2.0);
        }
        case DomainKind::FullSpace:
            if (!p.empty() && p[0] != 0.0) return y.norm();
            return kInf;
        case DomainKind::Torus:
            return kInf;
    }
    return kInf;
}

template <class V>
auto sq_norm(const V& x, int n) {
    auto s = x[0] * x[0];
    for (int i = 1; i < n; ++i) s = s + x[i] * x[i];
    return s;
}

}  // namespace

double DomainSpec::boundary_distance(const Vec& x) const {
    if (x.size() != n) throw BadParams("point dimension does not match the domain");
    if (pullback_L.size() == 0) return base_distance(*this, x);
    Vec y = pullback_L * x + pullback_b;
    double s = pullback_L.jacobiSvd().singularValues()(0);
    return base_distance(*this, y) / s;
}

std::pair<Vec, Vec> DomainSpec::sampling_box() const {
    Vec lo = Vec::Constant(n, -2.0), hi = Vec::Constant(n, 2.0);
    const auto& p = params;
    switch (kind) {
        case DomainKind::Box:
            for (int i = 0; i < n; ++i) lo[i] = p[2 * i], hi[i] = p[2 * i + 1];
            break;
        case DomainKind::Ball:
            lo.setConstant(-p[0]);
            hi.setConstant(p[0]);
            break;
        case DomainKind::Cone:
            if (p.empty() || p[0] == 0.0) lo.setZero();
            break;
        case DomainKind::Torus:
            lo.setZero();
            hi.setConstant(p.empty() ? 1.0 : p[0]);
            break;
        default:
            break;
    }
    if (pullback_L.size() != 0) {
        // Bounding box of the preimage of the base box corners.
        Mat inv = pullback_L.inverse();
        Vec nlo = Vec::Constant(n, kInf), nhi = Vec::Constant(n, -kInf);
        for (int mask = 0; mask < (1 << n); ++mask) {
            Vec c(n);
            for (int i = 0; i < n; ++i) c[i] = (mask >> i & 1) ? hi[i] : lo[i];
            Vec x = inv * (c - pullback_b);
            nlo = nlo.cwiseMin(x);
            nhi = nhi.cwiseMax(x);
        }
        return {nlo, nhi};
    }
    return {lo, hi};
}

std::string DomainSpec::describe() const {
    std::ostringstream s;
    const auto& p = params;
    switch (kind) {
        case DomainKind::Box: s << "box"; break;
        case DomainKind::Ball:
            s << "ball |x|_" << (p.size() > 1 ? p[1] : 2.0) << " < " << p[0];
            break;
        case DomainKind::HalfSpace: s << "half-space a.x > b"; break;
        case DomainKind::Cone:
            s << ((p.empty() || p[0] == 0.0) ? "cone x_i > 0 (orthant)" : "cone |x1| > |x2|");
            break;
        case DomainKind::FullSpace:
            s << ((!p.empty() && p[0] != 0.0) ? "R^n minus the origin" : "R^n");
            break;
        case DomainKind::Torus: s << "torus R^n/Z^n"; break;
    }
    s << ", n=" << n;
    if (margin > 0) s << ", margin " << margin;
    return s.str();
}

Params::Params(std::initializer_list<std::pair<const std::string, double>> init) {
    for (const auto& [k, v] : init) set(k, v);
}

Params& Params::set(const std::string& k, double v) {
    v_[k] = format_double(v);
    return *this;
}

Params& Params::set(const std::string& k, const std::string& v) {
    v_[k] = v;
    return *this;
}

double Params::get(const std::string& k, double dflt) const {
    auto it = v_.find(k);
    if (it == v_.end()) return dflt;
    try {
        size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(k);
        return v;
    } catch (const std::exception&) {
        throw BadParams("parameter '" + k + "' is not a number: " + it->second);
    }
}

std::string Params::get_string(const std::string& k, const std::string& dflt) const {
    auto it = v_.find(k);
    return it == v_.end() ? dflt : it->second;
}

PotentialHandle PotentialHandle::closed_form(std::string name, DomainSpec domain, ScalarFn f,
                                             TaylorFn ft, Params params) {
    PotentialHandle h;
    h.name = std::move(name);
    h.domain = std::move(domain);
    h.mode = EvalMode::ClosedForm;
    h.params = std::move(params);
    h.f_ = std::move(f);
    h.ft_ = std::move(ft);
    return h;
}

PotentialHandle PotentialHandle::from_grid(std::string name, const GridFile& grid, bool periodic,
                                           Params params) {
    PotentialHandle h;
    h.name = std::move(name);
    h.mode = EvalMode::GridInterpolated;
    h.params = std::move(params);
    auto spline = std::make_shared<const CubicSpline>(grid.spec, grid.values, periodic);
    h.spline_ = spline;
    h.f_ = [spline](const Vec& x) { return (*spline)(x); };
    const GridSpec& g = grid.spec;
    h.domain.n = g.n;
    if (periodic) {
        h.domain.kind = DomainKind::Torus;
        h.domain.params = {g.h * g.dims[0]};
    } else {
        h.domain.kind = DomainKind::Box;
        for (int d = 0; d < g.n; ++d) {
            h.domain.params.push_back(g.x0[d]);
            h.domain.params.push_back(g.x0[d] + g.h * (g.dims[d] - 1));
        }
        h.domain.margin = 2.0 * h.fd_spacing();
    }
    return h;
}

double PotentialHandle::fd_spacing() const {
    if (!spline_) return 1e-3;
    return std::max(1e-3, 2.0 * spline_->spec().h);
}

double PotentialHandle::value(const Vec& x) const { return f_(x); }

Taylor PotentialHandle::expand(const std::vector<Taylor>& x) const {
    if (!ft_) throw BadParams("handle '" + name + "' has no closed-form expansion");
    return ft_(x);
}

PotentialHandle PotentialHandle::scaled(double c) const {
    if (!(c > 0)) throw BadParams("scale must be positive");
    PotentialHandle h = *this;
    auto f = f_;
    h.f_ = [f, c](const Vec& x) { return c * f(x); };
    if (ft_) {
        auto ft = ft_;
        h.ft_ = [ft, c](const std::vector<Taylor>& x) { return ft(x) * c; };
    }
    if (torus_quadratic_) h.torus_quadratic_ = c * *torus_quadratic_;
    return h;
}

PotentialHandle PotentialHandle::affine(const Mat& L, const Vec& b) const {
    const int n = dim();
    if (L.rows() != n || L.cols() != n || b.size() != n) throw BadParams("affine map has wrong shape");
    if (std::abs(L.determinant()) < 1e-14) throw BadParams("affine map must be invertible");
    PotentialHandle h = *this;
    auto f = f_;
    h.f_ = [f, L, b](const Vec& x) { return f(L * x + b); };
    if (ft_) {
        auto ft = ft_;
        h.ft_ = [ft, L, b, n](const std::vector<Taylor>& x) {
            std::vector<Taylor> y;
            for (int i = 0; i < n; ++i) {
                Taylor s(x[0].basis(), b[i]);
                for (int j = 0; j < n; ++j) s += x[j] * L(i, j);
                y.push_back(s);
            }
            return ft(y);
        };
    }
    if (domain.pullback_L.size() == 0) {
        h.domain.pullback_L = L;
        h.domain.pullback_b = b;
    } else {
        h.domain.pullback_L = domain.pullback_L * L;
        h.domain.pullback_b = domain.pullback_L * b + domain.pullback_b;
    }
    h.torus_quadratic_.reset();
    return h;
}

double pd_tolerance(const Mat& hessian) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hessian, Eigen::EigenvaluesOnly);
    return 1e-10 * (1.0 + std::max(0.0, es.eigenvalues().maxCoeff()));
}

void check_convex(const Mat& hessian, const Vec& x) {
    if (!hessian.allFinite()) throw NotConvexHere("non-finite hessian at " + format_vec(x));
    Eigen::SelfAdjointEigenSolver<Mat> es(hessian, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-10 * (1.0 + std::max(0.0, hi))))
        throw NotConvexHere("hessian min eigenvalue " + format_double(lo) + " at " + format_vec(x));
}

namespace {

PotentialJet jet_from_taylor(const Taylor& t, const Vec& x) {
    const int n = static_cast<int>(x.size());
    PotentialJet j;
    j.x = x;
    j.value = t.value();
    j.gradient = Vec(n);
    j.hessian = Mat(n, n);
    j.third = Tensor3(n);
    j.fourth = Tensor4(n);
    for (int a = 0; a < n; ++a) {
        j.gradient[a] = t.derivative({a});
        for (int b = a; b < n; ++b) {
            j.hessian(a, b) = j.hessian(b, a) = t.derivative({a, b});
            for (int c = b; c < n; ++c) {
                j.third(a, b, c) = t.derivative({a, b, c});
                for (int d = c; d < n; ++d) j.fourth(a, b, c, d) = t.derivative({a, b, c, d});
            }
        }
    }
    symmetrize_full(j.third);
    symmetrize_full(j.fourth);
    return j;
}

// 1-D central stencils of second order, offsets -2..2.
const double kStencil[5][5] = {
    {0, 0, 1, 0, 0},
    {0, -0.5, 0, 0.5, 0},
    {0, 1, -2, 1, 0},
    {-0.5, 1, 0, -1, 0.5},
    {1, -4, 6, -4, 1},
};

}  // namespace

PotentialJet fd_jet(const ScalarFn& f, const Vec& x, double h) {
    const int n = static_cast<int>(x.size());
    // Sample the full 5^n stencil block once.
    size_t total = 1;
    for (int d = 0; d < n; ++d) total *= 5;
    std::vector<double> vals(total);
    std::vector<int> off(n, 0);
    for (size_t id = 0; id < total; ++id) {
        size_t r = id;
        Vec y = x;
        for (int d = n - 1; d >= 0; --d) {
            off[d] = static_cast<int>(r % 5) - 2;
            r /= 5;
            y[d] += off[d] * h;
        }
        vals[id] = f(y);
    }
    auto deriv = [&](const std::vector<int>& order) {
        int total_order = 0;
        for (int o : order) total_order += o;
        double s = 0.0;
        for (size_t id = 0; id < total; ++id) {
            size_t r = id;
            double w = 1.0;
            for (int d = n - 1; d >= 0 && w != 0.0; --d) {
                w *= kStencil[order[d]][r % 5];
                r /= 5;
            }
            if (w != 0.0) s += w * vals[id];
        }
        return s / std::pow(h, total_order);
    };
    PotentialJet j;
    j.x = x;
    j.value = f(x);
    j.gradient = Vec(n);
    j.hessian = Mat(n, n);
    j.third = Tensor3(n);
    j.fourth = Tensor4(n);
    std::vector<int> order(n);
    auto ord = [&](std::initializer_list<int> ids) {
        std::fill(order.begin(), order.end(), 0);
        for (int i : ids) ++order[i];
        return deriv(order);
    };
    for (int a = 0; a < n; ++a) {
        j.gradient[a] = ord({a});
        for (int b = a; b < n; ++b) {
            j.hessian(a, b) = j.hessian(b, a) = ord({a, b});
            for (int c = b; c < n; ++c) {
                j.third(a, b, c) = ord({a, b, c});
                for (int d = c; d < n; ++d) j.fourth(a, b, c, d) = ord({a, b, c, d});
            }
        }
    }
    symmetrize_full(j.third);
    symmetrize_full(j.fourth);
    return j;
}

PotentialJet jet(const PotentialHandle& handle, const Vec& x) {
    if (x.size() != handle.dim()) throw BadParams("point dimension does not match the potential");
    if (!x.allFinite() || !handle.domain.contains(x))
        throw OutOfDomain(handle.name + ": point " + format_vec(x) + " violates " +
                          handle.domain.describe());
    PotentialJet j;
    if (handle.mode == EvalMode::ClosedForm) {
        const auto& basis = TaylorBasis::get(handle.dim());
        std::vector<Taylor> vars;
        for (int i = 0; i < handle.dim(); ++i) vars.push_back(Taylor::variable(basis, i, x[i]));
        j = jet_from_taylor(handle.expand(vars), x);
    } else {
        j = fd_jet([&](const Vec& y) { return handle.value(y); }, x, handle.fd_spacing());
    }
    check_convex(j.hessian, x);
    return j;
}

// ---------------------------------------------------------------- catalog

namespace {

using std::cos;
using std::log;
using std::sqrt;

DomainSpec make_domain(int n, DomainKind kind, std::vector<double> params, double margin) {
    DomainSpec d;
    d.n = n;
    d.kind = kind;
    d.params = std::move(params);
    d.margin = margin;
    return d;
}

template <class V>
auto log_barrier_fn(const V& x, int n) {
    auto s = -log(x[0]);
    for (int i = 1; i < n; ++i) s = s - log(x[i]);
    return s;
}

template <class V>
auto calabi_fn(const V& x, int n) {
    return -log(1.0 - sq_norm(x, n));
}

template <class V>
auto cone_fn(const V& x) {
    return -log(x[0] * x[0] - x[1] * x[1]);
}

template <class V>
auto trig_fn(const V& x) {
    return -log(cos(x[0]) + cos(x[1]));
}

template <class V>
auto radial_fn(const V& x, int n, double c) {
    auto r = sqrt(sq_norm(x, n));
    return r - log(r + c) * c;
}

template <class V>
auto quadratic_fn(const V& x, int n, double c) {
    return sq_norm(x, n) * (0.5 * c);
}

struct Mode {
    std::vector<double> k;
    double weight;  // coefficient of cos(2 pi k.x)
};

template <class V>
auto periodic_fn(const V& x, int n, const std::vector<Mode>& modes) {
    auto s = sq_norm(x, n) * 0.5;
    for (const auto& m : modes) {
        auto arg = x[0] * (2 * kPi * m.k[0]);
        for (int i = 1; i < n; ++i) arg = arg + x[i] * (2 * kPi * m.k[i]);
        s = s + cos(arg) * m.weight;
    }
    return s;
}

template <class G>
PotentialHandle wrap(std::string name, DomainSpec d, G g, Params p) {
    ScalarFn f = [g](const Vec& x) { return g(x); };
    TaylorFn ft = [g](const std::vector<Taylor>& x) { return g(x); };
    return PotentialHandle::closed_form(std::move(name), std::move(d), f, ft, std::move(p));
}

int get_dim(const Params& p, int dflt) {
    double v = p.get("n", dflt);
    if (v < 1 || v > 6 || v != std::floor(v)) throw BadParams("dimension n must be an integer in 1..6");
    return static_cast<int>(v);
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"log_barrier", "half-line x > 0 (orthant for n > 1)", "-sum log x_i", "one-dimensional hyperbolic example"},
        {"bidisk_product", "quadrant x1, x2 > 0", "-log x1 - log x2", "bidisk, product potential"},
        {"bidisk_trig", "diamond |x1| + |x2| < pi/2", "-log(cos x1 + cos x2)", "bidisk, trigonometric potential"},
        {"calabi_ball", "unit ball |x| < 1", "-log(1 - |x|^2)", "Calabi's tube over the ball"},
        {"cone2d", "cone |x1| > |x2|", "-log(x1^2 - x2^2)", "cone in R^2"},
        {"radial_sym", "R^n minus a ball of radius margin around 0", "|x| - C log(|x| + C), C > 0", "O(n)-symmetric example with non-negative orthogonal curvature"},
        {"quadratic_plus_periodic", "torus R^n/Z^n", "|x|^2/2 + sum_k a_k cos(2 pi k.x)", "compact Hessian testbed"},
        {"quadratic", "R^n", "c |x|^2 / 2", "flat reference"},
        {"grid", "box covered by the grid (or torus)", "cubic spline of sampled values", "grid file given by 'path'"},
    };
    return entries;
}

PotentialHandle catalog(const std::string& name, const Params& p) {
    if (name == "log_barrier") {
        int n = get_dim(p, 1);
        double margin = p.get("margin", 1e-9);
        DomainSpec d = n == 1 ? make_domain(1, DomainKind::HalfSpace, {1.0, 0.0}, margin)
                              : make_domain(n, DomainKind::Cone, {0.0}, margin);
        return wrap(name, d, [n](const auto& x) { return log_barrier_fn(x, n); }, p);
    }
    if (name == "bidisk_product") {
        DomainSpec d = make_domain(2, DomainKind::Cone, {0.0}, p.get("margin", 1e-9));
        return wrap(name, d, [](const auto& x) { return log_barrier_fn(x, 2); }, p);
    }
    if (name == "bidisk_trig") {
        DomainSpec d = make_domain(2, DomainKind::Ball, {kPi / 2, 1.0}, p.get("margin", 1e-9));
        return wrap(name, d, [](const auto& x) { return trig_fn(x); }, p);
    }
    if (name == "calabi_ball") {
        int n = get_dim(p, 2);
        DomainSpec d = make_domain(n, DomainKind::Ball, {1.0, 2.0}, p.get("margin", 1e-9));
        return wrap(name, d, [n](const auto& x) { return calabi_fn(x, n); }, p);
    }
    if (name == "cone2d") {
        DomainSpec d = make_domain(2, DomainKind::Cone, {1.0}, p.get("margin", 1e-9));
        return wrap(name, d, [](const auto& x) { return cone_fn(x); }, p);
    }
    if (name == "radial_sym") {
        int n = get_dim(p, 2);
        double c = p.get("C", 1.0);
        if (!(c > 0)) throw BadParams("radial_sym requires C > 0");
        DomainSpec d = make_domain(n, DomainKind::FullSpace, {1.0}, p.get("margin", 1e-2));
        return wrap(name, d, [n, c](const auto& x) { return radial_fn(x, n, c); }, p);
    }
    if (name == "quadratic_plus_periodic") {
        int n = get_dim(p, 2);
        double a = p.get("amplitude", 0.05);
        if (!(a >= 0 && a < 1)) throw BadParams("amplitude must lie in [0, 1) to keep the hessian PD");
        int m = static_cast<int>(p.get("modes", 1));
        if (m < 1 || m > 4) throw BadParams("modes must be 1..4");
        std::vector<Mode> modes;
        for (int q = 0; q < m; ++q) {
            Mode md;
            double k2 = 0.0;
            for (int i = 0; i < n; ++i) {
                double dflt = (i == (q % n)) ? 1.0 : 0.0;
                double k = p.get("k" + std::to_string(q + 1) + "_" + std::to_string(i + 1), dflt);
                if (k != std::floor(k)) throw BadParams("wave vectors must be integer");
                md.k.push_back(k);
                k2 += k * k;
            }
            if (k2 == 0) throw BadParams("wave vector must be nonzero");
            // Hessian perturbation amplitude a/m along each wave direction.
            md.weight = (a / m) / (4 * kPi * kPi * k2);
            modes.push_back(md);
        }
        DomainSpec d = make_domain(n, DomainKind::Torus, {1.0}, 0.0);
        PotentialHandle h = wrap(name, d, [n, modes](const auto& x) { return periodic_fn(x, n, modes); }, p);
        h.set_torus_quadratic(Mat::Identity(n, n));
        return h;
    }
    if (name == "quadratic") {
        int n = get_dim(p, 2);
        double c = p.get("c", 1.0);
        if (!(c > 0)) throw BadParams("quadratic requires c > 0");
        DomainSpec d = make_domain(n, DomainKind::FullSpace, {}, 0.0);
        PotentialHandle h = wrap(name, d, [n, c](const auto& x) { return quadratic_fn(x, n, c); }, p);
        h.set_torus_quadratic(c * Mat::Identity(n, n));
        return h;
    }
    if (name == "grid") {
        std::string path = p.get_string("path", "");
        if (path.empty()) throw BadParams("grid potential requires 'path'");
        GridFile g = load_grid_file(path);
        bool periodic = p.get("periodic", 0.0) != 0.0;
        return PotentialHandle::from_grid(name, g, periodic, p);
    }
    throw UnknownName("no catalog potential named '" + name + "'");
}

// ---------------------------------------------------------------- sampling

std::vector<Vec> generate_samples(const SampleSpec& s, const DomainSpec& domain) {
    const int n = domain.n;
    std::vector<Vec> out;
    auto box = domain.sampling_box();
    Vec lo = s.lo.size() == n ? s.lo : box.first;
    Vec hi = s.hi.size() == n ? s.hi : box.second;
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (s.kind) {
        case SampleSpec::Kind::Explicit:
            for (const Vec& p : s.points) {
                if (!domain.contains(p)) throw OutOfDomain("sample point " + format_vec(p) + " outside domain");
                out.push_back(p);
            }
            break;
        case SampleSpec::Kind::RandomBox: {
            long attempts = 0;
            while (static_cast<int>(out.size()) < s.count) {
                if (++attempts > 1000L * s.count + 10000)
                    throw OutOfDomain("sampling box barely meets the domain");
                Vec p(n);
                for (int i = 0; i < n; ++i) p[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
                if (domain.contains(p)) out.push_back(p);
            }
            break;
        }
        case SampleSpec::Kind::GridBox: {
            std::vector<int> idx(n, 0);
            const int m = std::max(1, s.per_dim);
            while (true) {
                Vec p(n);
                for (int i = 0; i < n; ++i)
                    p[i] = m == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * idx[i] / (m - 1);
                if (domain.contains(p)) out.push_back(p);
                int q = n - 1;
                while (q >= 0 && ++idx[q] == m) idx[q--] = 0;
                if (q < 0) break;
            }
            break;
        }
        case SampleSpec::Kind::Shell: {
            std::normal_distribution<double> nd(0.0, 1.0);
            while (static_cast<int>(out.size()) < s.count) {
                Vec dir(n);
                for (int i = 0; i < n; ++i) dir[i] = nd(rng);
                if (dir.norm() < 1e-12) continue;
                double sv = s.s_lo + (s.s_hi - s.s_lo) * u(rng);
                Vec p = dir.normalized() * std::sqrt(sv);
                if (domain.contains(p)) out.push_back(p);
            }
            break;
        }
    }
    return out;
}

SignCertificate convexity_certify(const PotentialHandle& handle, const SampleSpec& region, Exec exec) {
    auto pts = generate_samples(region, handle.domain);
    if (pts.empty()) throw BadParams("empty sample region");
    std::vector<double> lo(pts.size()), tol(pts.size());
    std::vector<Vec> vec(pts.size());
    for_each_index(exec, static_cast<std::ptrdiff_t>(pts.size()), [&](std::ptrdiff_t i) {
        PotentialJet j = jet(handle, pts[i]);
        Eigen::SelfAdjointEigenSolver<Mat> es(j.hessian);
        lo[i] = es.eigenvalues()(0);
        vec[i] = es.eigenvectors().col(0);
        tol[i] = pd_tolerance(j.hessian);
    });
    SignCertificate c;
    c.quantity = "HESSIAN_MIN_EIGENVALUE";
    c.samples = static_cast<long>(pts.size());
    size_t best = 0;
    bool pass = true;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (lo[i] < lo[best]) best = i;
        if (!(lo[i] > tol[i])) pass = false;
    }
    c.extremal_value = c.min_value = c.max_value = lo[best];
    c.witness_x = c.min_x = pts[best];
    c.witness_v = c.witness_w = vec[best];
    c.tolerance = tol[best];
    c.verdict = pass ? Verdict::Pass : Verdict::Fail;
    return c;
}

SignCertificate convexity_certify(const PotentialHandle& handle, int sample_count, uint64_t seed, Exec exec) {
    if (sample_count < 1) throw BadParams("sample_count must be >= 1");
    SampleSpec s;
    s.kind = SampleSpec::Kind::RandomBox;
    s.count = sample_count;
    s.seed = seed;
    return convexity_certify(handle, s, exec);
}

}  // namespace tubeflow
