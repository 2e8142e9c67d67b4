#pragma once

// Test-only reference computations. None of these share code with the library.

#include "tubeflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using tubeflow::Mat;
using tubeflow::Vec;
using Fn = std::function<double(const Vec&)>;

inline Vec unit(int n, int i) {
    Vec e = Vec::Zero(n);
    e[i] = 1;
    return e;
}

// Fourth-order central differences built from values only.
inline double d1(const Fn& f, const Vec& x, int i, double h) {
    Vec e = unit(x.size(), i) * h;
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h);
}

inline double d2(const Fn& f, const Vec& x, int i, int j, double h) {
    Fn fi = [&](const Vec& y) { return d1(f, y, i, h); };
    return d1(fi, x, j, h);
}

inline double d3(const Fn& f, const Vec& x, int i, int j, int k, double h) {
    Fn fij = [&](const Vec& y) { return d2(f, y, i, j, h); };
    return d1(fij, x, k, h);
}

// Brute-force minimum over bijections of the mean cost.
inline double assignment_min(const Mat& C) {
    const int m = static_cast<int>(C.rows());
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    double best = 1e300;
    do {
        double s = 0;
        for (int a = 0; a < m; ++a) s += C(a, p[a]);
        best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    return best / m;
}

// Plain loop version of Q(A)_ijkl = 2 (A_ijpq A_qpkl + A_ilpq A_qpkj - A_ipkq A_pjql).
inline tubeflow::Tensor4 q_naive(const tubeflow::Tensor4& a) {
    const int n = a.dim();
    tubeflow::Tensor4 q(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0;
                    for (int p = 0; p < n; ++p)
                        for (int r = 0; r < n; ++r)
                            s += a(i, j, p, r) * a(r, p, k, l) + a(i, l, p, r) * a(r, p, k, j) -
                                 a(i, p, k, r) * a(p, j, r, l);
                    q(i, j, k, l) = 2 * s;
                }
    return q;
}

}  // namespace oracle
