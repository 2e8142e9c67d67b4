#include "tubeflow/taylor.hpp"

#include "tubeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace tubeflow {

namespace {

void enumerate(int nvars, int var, int remaining, TaylorBasis::Exponent& e,
               std::vector<TaylorBasis::Exponent>& out) {
    if (var == nvars) {
        out.push_back(e);
        return;
    }
    for (int p = 0; p <= remaining; ++p) {
        e[var] = static_cast<uint8_t>(p);
        enumerate(nvars, var + 1, remaining - p, e, out);
    }
    e[var] = 0;
}

}  // namespace

TaylorBasis::TaylorBasis(int nvars) : nvars_(nvars) {
    if (nvars < 1 || nvars > kMaxVars) throw BadParams("Taylor basis supports 1..8 variables");
    Exponent e{};
    enumerate(nvars, 0, kOrder, e, exps_);
    auto deg = [](const Exponent& x) {
        int d = 0;
        for (uint8_t v : x) d += v;
        return d;
    };
    std::stable_sort(exps_.begin(), exps_.end(),
                     [&](const Exponent& a, const Exponent& b) { return deg(a) < deg(b); });
    for (const auto& x : exps_) {
        degree_.push_back(deg(x));
        double f = 1.0;
        for (uint8_t v : x)
            for (int q = 2; q <= v; ++q) f *= q;
        fact_.push_back(f);
    }
    products_.resize(exps_.size());
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j) {
            if (degree_[i] + degree_[j] > kOrder) continue;
            Exponent s{};
            for (int v = 0; v < kMaxVars; ++v) s[v] = exps_[i][v] + exps_[j][v];
            products_[index_of(s)].emplace_back(i, j);
        }
}

int TaylorBasis::index_of(const Exponent& e) const {
    auto it = std::find(exps_.begin(), exps_.end(), e);
    if (it == exps_.end()) throw BadParams("monomial exceeds Taylor order");
    return static_cast<int>(it - exps_.begin());
}

const TaylorBasis& TaylorBasis::get(int nvars) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<TaylorBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[nvars];
    if (!slot) slot.reset(new TaylorBasis(nvars));
    return *slot;
}

Taylor::Taylor(const TaylorBasis& b, double constant) : basis_(&b), c_(b.size(), 0.0) {
    c_[0] = constant;
}

Taylor Taylor::variable(const TaylorBasis& b, int var, double at) {
    Taylor t(b, at);
    TaylorBasis::Exponent e{};
    e[var] = 1;
    t.c_[b.index_of(e)] = 1.0;
    return t;
}

double Taylor::derivative(const int* vars, int count) const {
    TaylorBasis::Exponent e{};
    for (int q = 0; q < count; ++q) e[vars[q]] += 1;
    int k = basis_->index_of(e);
    return c_[k] * basis_->factorial_factor(k);
}

double Taylor::derivative(std::initializer_list<int> vars) const {
    return derivative(vars.begin(), static_cast<int>(vars.size()));
}

Taylor& Taylor::operator+=(const Taylor& o) {
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

Taylor& Taylor::operator-=(const Taylor& o) {
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

Taylor& Taylor::operator*=(double v) {
    for (double& x : c_) x *= v;
    return *this;
}

Taylor Taylor::operator-() const {
    Taylor r = *this;
    return r *= -1.0;
}

Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r(*a.basis_, 0.0);
    const int m = a.basis_->size();
    for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (const auto& [i, j] : a.basis_->products(k)) s += a.c_[i] * b.c_[j];
        r.c_[k] = s;
    }
    return r;
}

Taylor Taylor::compose(const std::array<double, 5>& d) const {
    Taylor delta = *this;
    delta.c_[0] = 0.0;
    Taylor r(*basis_, d[0]);
    Taylor power = delta;
    double fact = 1.0;
    for (int m = 1; m <= TaylorBasis::kOrder; ++m) {
        fact *= m;
        Taylor term = power;
        term *= d[m] / fact;
        r += term;
        if (m < TaylorBasis::kOrder) power = power * delta;
    }
    return r;
}

Taylor reciprocal(const Taylor& a) {
    double x = a.value();
    return a.compose({1 / x, -1 / (x * x), 2 / (x * x * x), -6 / (x * x * x * x),
                      24 / (x * x * x * x * x)});
}

Taylor log(const Taylor& a) {
    double x = a.value();
    return a.compose({std::log(x), 1 / x, -1 / (x * x), 2 / (x * x * x), -6 / (x * x * x * x)});
}

Taylor exp(const Taylor& a) {
    double e = std::exp(a.value());
    return a.compose({e, e, e, e, e});
}

Taylor sqrt(const Taylor& a) {
    double x = a.value();
    double r = std::sqrt(x);
    return a.compose({r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x), -0.9375 / (r * x * x * x)});
}

Taylor cos(const Taylor& a) {
    double c = std::cos(a.value()), s = std::sin(a.value());
    return a.compose({c, -s, -c, s, c});
}

Taylor sin(const Taylor& a) {
    double c = std::cos(a.value()), s = std::sin(a.value());
    return a.compose({s, c, -s, -c, s});
}

Taylor pow(const Taylor& a, double p) {
    double x = a.value();
    double v = std::pow(x, p);
    return a.compose({v, p * v / x, p * (p - 1) * v / (x * x), p * (p - 1) * (p - 2) * v / (x * x * x),
                      p * (p - 1) * (p - 2) * (p - 3) * v / (x * x * x * x)});
}

}  // namespace tubeflow
