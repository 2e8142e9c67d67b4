#include "tubeflow/tensor.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace tubeflow {

namespace {

using Idx = std::array<int, 4>;

Idx gen_ik(const Idx& a) { return {a[2], a[1], a[0], a[3]}; }
Idx gen_jl(const Idx& a) { return {a[0], a[3], a[2], a[1]}; }
Idx gen_pair(const Idx& a) { return {a[1], a[0], a[3], a[2]}; }

int flat(const Idx& a, int n) { return ((a[0] * n + a[1]) * n + a[2]) * n + a[3]; }

std::vector<std::vector<int>> build_orbits(int n) {
    std::vector<std::vector<int>> orbits;
    std::vector<char> seen(static_cast<size_t>(n) * n * n * n, 0);
    Idx a;
    for (a[0] = 0; a[0] < n; ++a[0])
        for (a[1] = 0; a[1] < n; ++a[1])
            for (a[2] = 0; a[2] < n; ++a[2])
                for (a[3] = 0; a[3] < n; ++a[3]) {
                    if (seen[flat(a, n)]) continue;
                    std::set<Idx> orbit{a};
                    std::vector<Idx> todo{a};
                    while (!todo.empty()) {
                        Idx c = todo.back();
                        todo.pop_back();
                        for (const Idx& d : {gen_ik(c), gen_jl(c), gen_pair(c)})
                            if (orbit.insert(d).second) todo.push_back(d);
                    }
                    std::vector<int> ids;
                    for (const Idx& c : orbit) {
                        ids.push_back(flat(c, n));
                        seen[flat(c, n)] = 1;
                    }
                    std::sort(ids.begin(), ids.end());
                    orbits.push_back(std::move(ids));
                }
    return orbits;
}

template <class F>
void for_tuples(int n, int order, F&& f) {
    std::vector<int> idx(order, 0);
    while (true) {
        f(idx);
        int p = order - 1;
        while (p >= 0 && ++idx[p] == n) idx[p--] = 0;
        if (p < 0) break;
    }
}

}  // namespace

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor4::eval(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const {
    double s = 0.0;
    const double* p = a_.data();
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            double ab = a[i] * b[j];
            for (int k = 0; k < n_; ++k) {
                double abc = ab * c[k];
                double t = 0.0;
                for (int l = 0; l < n_; ++l) t += p[l] * d[l];
                s += abc * t;
                p += n_;
            }
        }
    return s;
}

void Tensor4::abc_gradient(const Vec& v, const Vec& w, Vec& gv, Vec& gw) const {
    gv = Vec::Zero(n_);
    gw = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l) {
                    double a = (*this)(i, j, k, l);
                    gv[i] += a * w[j] * v[k] * w[l];
                    gv[k] += a * v[i] * w[j] * w[l];
                    gw[j] += a * v[i] * v[k] * w[l];
                    gw[l] += a * v[i] * w[j] * v[k];
                }
}

Vec Tensor4::diag_gradient(const Vec& v) const {
    Vec g = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l) {
                    double a = (*this)(i, j, k, l);
                    g[i] += a * v[j] * v[k] * v[l];
                    g[j] += a * v[i] * v[k] * v[l];
                    g[k] += a * v[i] * v[j] * v[l];
                    g[l] += a * v[i] * v[j] * v[k];
                }
    return g;
}

double Tensor4::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor4::norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

Tensor4& Tensor4::operator+=(const Tensor4& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Tensor4& Tensor4::operator-=(const Tensor4& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Tensor4& Tensor4::operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
}

const std::vector<std::vector<int>>& curvature_orbits(int n) {
    static std::mutex mu;
    static std::map<int, std::vector<std::vector<int>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_orbits(n)).first;
    return it->second;
}

void symmetrize_curvature(Tensor4& t) {
    auto& d = t.data();
    for (const auto& orbit : curvature_orbits(t.dim())) {
        double s = 0.0;
        for (int id : orbit) s += d[id];
        s /= static_cast<double>(orbit.size());
        for (int id : orbit) d[id] = s;
    }
}

double curvature_symmetry_defect(const Tensor4& t) {
    int n = t.dim();
    double m = 0.0;
    Idx a;
    for (a[0] = 0; a[0] < n; ++a[0])
        for (a[1] = 0; a[1] < n; ++a[1])
            for (a[2] = 0; a[2] < n; ++a[2])
                for (a[3] = 0; a[3] < n; ++a[3]) {
                    double v = t.data()[flat(a, n)];
                    for (const Idx& b : {gen_ik(a), gen_jl(a), gen_pair(a)})
                        m = std::max(m, std::abs(v - t.data()[flat(b, n)]));
                }
    return m;
}

void symmetrize_full(Tensor3& t) {
    int n = t.dim();
    for_tuples(n, 3, [&](const std::vector<int>& id) {
        std::array<int, 3> s{id[0], id[1], id[2]};
        std::sort(s.begin(), s.end());
        t(id[0], id[1], id[2]) = t(s[0], s[1], s[2]);
    });
}

void symmetrize_full(Tensor4& t) {
    int n = t.dim();
    for_tuples(n, 4, [&](const std::vector<int>& id) {
        std::array<int, 4> s{id[0], id[1], id[2], id[3]};
        std::sort(s.begin(), s.end());
        t(id[0], id[1], id[2], id[3]) = t(s[0], s[1], s[2], s[3]);
    });
}

double full_symmetry_defect(const Tensor3& t) {
    double m = 0.0;
    for_tuples(t.dim(), 3, [&](const std::vector<int>& id) {
        std::array<int, 3> s{id[0], id[1], id[2]};
        std::sort(s.begin(), s.end());
        do {
            m = std::max(m, std::abs(t(id[0], id[1], id[2]) - t(s[0], s[1], s[2])));
        } while (std::next_permutation(s.begin(), s.end()));
    });
    return m;
}

double full_symmetry_defect(const Tensor4& t) {
    double m = 0.0;
    for_tuples(t.dim(), 4, [&](const std::vector<int>& id) {
        std::array<int, 4> s{id[0], id[1], id[2], id[3]};
        std::sort(s.begin(), s.end());
        do {
            m = std::max(m, std::abs(t(id[0], id[1], id[2], id[3]) - t(s[0], s[1], s[2], s[3])));
        } while (std::next_permutation(s.begin(), s.end()));
    });
    return m;
}

Tensor4 change_basis(const Tensor4& t, const Mat& m) {
    const int n = t.dim();
    Tensor4 a = t, b(n);
    // Contract one slot at a time; slot s is rotated to the front after each pass.
    for (int pass = 0; pass < 4; ++pass) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double s = 0.0;
                        for (int p = 0; p < n; ++p) s += a(p, j, k, l) * m(p, i);
                        b(j, k, l, i) = s;
                    }
        std::swap(a, b);
    }
    return a;
}

Tensor3 change_basis(const Tensor3& t, const Mat& m) {
    const int n = t.dim();
    Tensor3 a = t, b(n);
    for (int pass = 0; pass < 3; ++pass) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int p = 0; p < n; ++p) s += a(p, j, k) * m(p, i);
                    b(j, k, i) = s;
                }
        std::swap(a, b);
    }
    return a;
}

Tensor4 metric_square(int n) {
    Tensor4 g(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j, i, j) = 1.0;
    return g;
}

Tensor4 random_curvature(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Tensor4 t(n);
    for (const auto& orbit : curvature_orbits(n)) {
        double v = nd(rng);
        for (int id : orbit) t.data()[id] = v;
    }
    return t;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_curvature(std::ostream& out, const Tensor4& t) {
    int n = t.dim();
    out << n << "\n";
    for (const auto& orbit : curvature_orbits(n)) {
        int id = orbit.front();
        int l = id % n, k = (id / n) % n, j = (id / n / n) % n, i = id / n / n / n;
        out << i << " " << j << " " << k << " " << l << " " << format_double(t.data()[id]) << "\n";
    }
}

Tensor4 read_curvature(std::istream& in) {
    int n = 0;
    if (!(in >> n) || n < 1) throw ParseError("tensor header must be a positive dimension");
    Tensor4 t(n);
    const auto& orbits = curvature_orbits(n);
    std::map<int, const std::vector<int>*> by_rep;
    for (const auto& o : orbits) by_rep[o.front()] = &o;
    for (size_t c = 0; c < orbits.size(); ++c) {
        int i, j, k, l;
        double v;
        if (!(in >> i >> j >> k >> l >> v)) throw ParseError("truncated tensor component list");
        if (i < 0 || j < 0 || k < 0 || l < 0 || i >= n || j >= n || k >= n || l >= n)
            throw ParseError("tensor index out of range");
        int id = ((i * n + j) * n + k) * n + l;
        auto it = by_rep.find(id);
        if (it == by_rep.end()) throw ParseError("component is not an orbit representative");
        for (int m : *it->second) t.data()[m] = v;
    }
    return t;
}

}  // namespace tubeflow
