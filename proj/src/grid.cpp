#include "tubeflow/grid.hpp"

#include "tubeflow/errors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace tubeflow {

size_t GridSpec::size() const {
    size_t s = 1;
    for (int d : dims) s *= static_cast<size_t>(d);
    return s;
}

size_t GridSpec::flat(const std::vector<int>& idx) const {
    size_t id = 0;
    for (int d = 0; d < n; ++d) id = id * dims[d] + idx[d];
    return id;
}

std::vector<int> GridSpec::unflat(size_t id) const {
    std::vector<int> idx(n);
    for (int d = n - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(id % dims[d]);
        id /= dims[d];
    }
    return idx;
}

Vec GridSpec::node(const std::vector<int>& idx) const {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = x0[d] + h * idx[d];
    return x;
}

namespace {

// Solves (c[i-1] + 4 c[i] + c[i+1]) / 6 = v[i] for interior i with c[0] = v[0],
// c[m-1] = v[m-1] (natural ends, ghost c[-1] = 2c[0] - c[1]).
void prefilter_natural(std::vector<double>& v) {
    const int m = static_cast<int>(v.size());
    if (m < 3) return;
    std::vector<double> cp(m, 0.0), dp(m, 0.0);
    // rows 1..m-2: (1/6) c[i-1] + (4/6) c[i] + (1/6) c[i+1] = v[i]
    cp[0] = 0.0;
    dp[0] = v[0];
    for (int i = 1; i < m - 1; ++i) {
        double a = 1.0 / 6, b = 4.0 / 6, c = 1.0 / 6;
        double denom = b - a * cp[i - 1];
        cp[i] = c / denom;
        dp[i] = (v[i] - a * dp[i - 1]) / denom;
    }
    std::vector<double> c(m);
    c[m - 1] = v[m - 1];
    for (int i = m - 2; i >= 1; --i) c[i] = dp[i] - cp[i] * c[i + 1];
    c[0] = v[0];
    v = c;
}

// Cyclic version via Sherman-Morrison.
void prefilter_periodic(std::vector<double>& v) {
    const int m = static_cast<int>(v.size());
    if (m < 3) return;
    const double a = 1.0 / 6, b = 4.0 / 6, c = 1.0 / 6;
    auto thomas = [&](std::vector<double> diag, std::vector<double> rhs) {
        std::vector<double> cp(m), dp(m);
        cp[0] = c / diag[0];
        dp[0] = rhs[0] / diag[0];
        for (int i = 1; i < m; ++i) {
            double den = diag[i] - a * cp[i - 1];
            cp[i] = c / den;
            dp[i] = (rhs[i] - a * dp[i - 1]) / den;
        }
        std::vector<double> x(m);
        x[m - 1] = dp[m - 1];
        for (int i = m - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    };
    const double gamma = -b;
    std::vector<double> diag(m, b);
    diag[0] = b - gamma;
    diag[m - 1] = b - c * a / gamma;
    std::vector<double> u(m, 0.0);
    u[0] = gamma;
    u[m - 1] = c;
    auto x = thomas(diag, v);
    auto z = thomas(diag, u);
    double fact = (x[0] + a * x[m - 1] / gamma) / (1.0 + z[0] + a * z[m - 1] / gamma);
    for (int i = 0; i < m; ++i) v[i] = x[i] - fact * z[i];
}

void bspline_weights(double u, double w[4]) {
    double u2 = u * u, u3 = u2 * u;
    w[0] = (1 - u) * (1 - u) * (1 - u) / 6.0;
    w[1] = (3 * u3 - 6 * u2 + 4) / 6.0;
    w[2] = (-3 * u3 + 3 * u2 + 3 * u + 1) / 6.0;
    w[3] = u3 / 6.0;
}

}  // namespace

CubicSpline::CubicSpline(const GridSpec& spec, const std::vector<double>& values, bool periodic)
    : spec_(spec), periodic_(periodic), coef_(values) {
    if (values.size() != spec.size()) throw BadParams("grid value count does not match the grid");
    for (int d : spec.dims)
        if (d < 4) throw BadParams("spline interpolation needs at least 4 nodes per axis");
    // Separable prefilter: one 1-D solve along each axis line.
    for (int axis = 0; axis < spec.n; ++axis) {
        size_t stride = 1;
        for (int d = axis + 1; d < spec.n; ++d) stride *= spec.dims[d];
        const int m = spec.dims[axis];
        const size_t total = spec.size();
        std::vector<double> line(m);
        for (size_t base = 0; base < total; ++base) {
            if ((base / stride) % m != 0) continue;
            for (int i = 0; i < m; ++i) line[i] = coef_[base + i * stride];
            if (periodic) prefilter_periodic(line);
            else prefilter_natural(line);
            for (int i = 0; i < m; ++i) coef_[base + i * stride] = line[i];
        }
    }
}

bool CubicSpline::covers(const Vec& x) const {
    if (periodic_) return true;
    for (int d = 0; d < spec_.n; ++d) {
        double t = (x[d] - spec_.x0[d]) / spec_.h;
        if (t < -1e-12 || t > spec_.dims[d] - 1 + 1e-12) return false;
    }
    return true;
}

double CubicSpline::coefficient(std::vector<int>& idx) const {
    // Natural ghosts are linear extrapolations of the coefficient sequence.
    for (int d = 0; d < spec_.n; ++d) {
        int m = spec_.dims[d];
        if (periodic_) {
            idx[d] = ((idx[d] % m) + m) % m;
        } else if (idx[d] < 0 || idx[d] >= m) {
            int saved = idx[d];
            int edge = saved < 0 ? 0 : m - 1;
            int inner = saved < 0 ? 1 : m - 2;
            idx[d] = edge;
            double ce = coefficient(idx);
            idx[d] = inner;
            double ci = coefficient(idx);
            idx[d] = saved;
            return 2 * ce - ci;
        }
    }
    return coef_[spec_.flat(idx)];
}

double CubicSpline::operator()(const Vec& x) const {
    if (!covers(x)) throw OutOfDomain("point outside the interpolation grid");
    const int n = spec_.n;
    std::vector<int> base(n);
    std::vector<std::array<double, 4>> w(n);
    for (int d = 0; d < n; ++d) {
        double t = (x[d] - spec_.x0[d]) / spec_.h;
        int i = static_cast<int>(std::floor(t));
        if (!periodic_) i = std::min(std::max(i, 0), spec_.dims[d] - 2);
        double u = t - i;
        bspline_weights(u, w[d].data());
        base[d] = i - 1;
    }
    double s = 0.0;
    std::vector<int> off(n, 0), idx(n);
    while (true) {
        double wt = 1.0;
        for (int d = 0; d < n; ++d) {
            wt *= w[d][off[d]];
            idx[d] = base[d] + off[d];
        }
        s += wt * coefficient(idx);
        int p = n - 1;
        while (p >= 0 && ++off[p] == 4) off[p--] = 0;
        if (p < 0) break;
    }
    return s;
}

GridFile read_grid(std::istream& in) {
    GridFile g;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',') c = ' ';
        size_t p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        if (line.compare(p, 2, "t=") == 0) {
            g.t = std::stod(line.substr(p + 2));
            continue;
        }
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (!ss.eof()) throw ParseError("non-numeric token in grid file: " + line);
        if (!have_header) {
            if (vals.empty()) throw ParseError("empty grid header");
            int n = static_cast<int>(vals[0]);
            if (n < 1 || vals[0] != n || static_cast<int>(vals.size()) != n + 2)
                throw ParseError("grid header must be 'n h x0_1 .. x0_n'");
            g.spec.n = n;
            g.spec.h = vals[1];
            if (!(g.spec.h > 0)) throw ParseError("grid spacing must be positive");
            g.spec.x0 = Vec(n);
            for (int d = 0; d < n; ++d) g.spec.x0[d] = vals[2 + d];
            have_header = true;
            continue;
        }
        rows.push_back(std::move(vals));
    }
    if (!have_header) throw ParseError("missing grid header");
    if (rows.empty()) throw ParseError("grid has no values");
    const int n = g.spec.n;
    const size_t last = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != last) throw ParseError("ragged grid rows");
        g.values.insert(g.values.end(), r.begin(), r.end());
    }
    g.spec.dims.assign(n, 0);
    g.spec.dims[n - 1] = static_cast<int>(last);
    if (n == 1) {
        g.spec.dims[0] = static_cast<int>(g.values.size());
    } else {
        // Leading axes are taken to have equal length.
        double m = std::pow(static_cast<double>(rows.size()), 1.0 / (n - 1));
        int mi = static_cast<int>(std::lround(m));
        size_t prod = 1;
        for (int d = 0; d < n - 1; ++d) prod *= mi;
        if (prod != rows.size()) throw ParseError("row count does not form a square leading grid");
        for (int d = 0; d < n - 1; ++d) g.spec.dims[d] = mi;
    }
    return g;
}

void write_grid(std::ostream& out, const GridFile& g) {
    if (g.t) out << "t=" << format_double(*g.t) << "\n";
    out << g.spec.n << " " << format_double(g.spec.h);
    for (int d = 0; d < g.spec.n; ++d) out << " " << format_double(g.spec.x0[d]);
    out << "\n";
    const int last = g.spec.dims[g.spec.n - 1];
    for (size_t i = 0; i < g.values.size(); ++i) {
        out << format_double(g.values[i]);
        out << (((i + 1) % last == 0) ? "\n" : " ");
    }
}

GridFile load_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file " + path);
    return read_grid(in);
}

void save_grid_file(const std::string& path, const GridFile& g) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write grid file " + path);
    write_grid(out, g);
}

}  // namespace tubeflow
