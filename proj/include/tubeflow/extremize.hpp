#pragma once

#include "tubeflow/tensor.hpp"

#include <cstdint>

namespace tubeflow {

// Which unit-vector pairs (a, b) enter A(a, b, a, b):
//   Abc   any pair, Orth   a orthogonal to b, Diag   b = a.
enum class PairMode { Abc, Orth, Diag };

struct PairExtremum {
    double value = 0.0;
    Vec a, b;
};

// Global extremum of A(a,b,a,b) over unit vectors in an orthonormal basis.
// n = 2: the objective is a trigonometric polynomial in the angles; a 720-point
// grid (inner angle solved exactly for Abc) is refined by damped Newton.
// n >= 3: 64 seeded restarts of projected gradient ascent with Armijo steps,
// stopped when the step falls below 1e-10.
PairExtremum extremize_pairs(const Tensor4& a, PairMode mode, bool maximize, uint64_t seed = 7);

}  // namespace tubeflow
