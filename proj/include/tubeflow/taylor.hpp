#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace tubeflow {

// Monomial basis for multivariate Taylor polynomials truncated at degree 4.
class TaylorBasis {
public:
    static constexpr int kOrder = 4;
    static constexpr int kMaxVars = 8;
    using Exponent = std::array<uint8_t, kMaxVars>;

    static const TaylorBasis& get(int nvars);

    int nvars() const { return nvars_; }
    int size() const { return static_cast<int>(exps_.size()); }
    const Exponent& exponent(int k) const { return exps_[k]; }
    int degree(int k) const { return degree_[k]; }
    int index_of(const Exponent& e) const;
    // ordered pairs (i, j) with exponent(i) + exponent(j) = exponent(k)
    const std::vector<std::pair<int, int>>& products(int k) const { return products_[k]; }
    // prod of factorials of the exponent: derivative = coefficient * factor
    double factorial_factor(int k) const { return fact_[k]; }

private:
    explicit TaylorBasis(int nvars);
    int nvars_;
    std::vector<Exponent> exps_;
    std::vector<int> degree_;
    std::vector<std::vector<std::pair<int, int>>> products_;
    std::vector<double> fact_;
};

// Truncated Taylor expansion around a base point; coefficient 0 is the value.
class Taylor {
public:
    Taylor() = default;
    Taylor(const TaylorBasis& b, double constant);
    static Taylor variable(const TaylorBasis& b, int var, double at);

    const TaylorBasis& basis() const { return *basis_; }
    double value() const { return c_[0]; }
    double coeff(int k) const { return c_[k]; }
    double& coeff(int k) { return c_[k]; }
    // Partial derivative for the listed variable indices (repetition allowed).
    double derivative(std::initializer_list<int> vars) const;
    double derivative(const int* vars, int count) const;

    Taylor& operator+=(const Taylor& o);
    Taylor& operator-=(const Taylor& o);
    Taylor& operator+=(double v) { c_[0] += v; return *this; }
    Taylor& operator-=(double v) { c_[0] -= v; return *this; }
    Taylor& operator*=(double v);
    Taylor operator-() const;

    friend Taylor operator*(const Taylor& a, const Taylor& b);
    // f(a) given f and its first four derivatives at a.value()
    Taylor compose(const std::array<double, 5>& d) const;

private:
    const TaylorBasis* basis_ = nullptr;
    std::vector<double> c_;
};

inline Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
inline Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
inline Taylor operator+(Taylor a, double b) { return a += b; }
inline Taylor operator+(double b, Taylor a) { return a += b; }
inline Taylor operator-(Taylor a, double b) { return a -= b; }
inline Taylor operator-(double b, const Taylor& a) { Taylor r = -a; return r += b; }
inline Taylor operator*(Taylor a, double b) { return a *= b; }
inline Taylor operator*(double b, Taylor a) { return a *= b; }

Taylor reciprocal(const Taylor& a);
inline Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
inline Taylor operator/(Taylor a, double b) { return a *= 1.0 / b; }
inline Taylor operator/(double a, const Taylor& b) { return reciprocal(b) * a; }

Taylor log(const Taylor& a);
Taylor exp(const Taylor& a);
Taylor sqrt(const Taylor& a);
Taylor cos(const Taylor& a);
Taylor sin(const Taylor& a);
Taylor pow(const Taylor& a, double p);

}  // namespace tubeflow
