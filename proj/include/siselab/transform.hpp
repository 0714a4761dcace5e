#pragma once

#include "siselab/linear_system.hpp"

namespace siselab {

// Output (and, with feedthrough, disturbance) coordinates in which the
// measurement splits into a channel that carries the disturbance and one
// that does not, with block-diagonal measurement-noise covariance.
//
// Zero feedthrough:  new output = T * y,  [C1; C2] = T * C,  C2 G = 0,
//                    C1 G invertible, cov(T v) = diag(R1, R2).
// Feedthrough:       additionally d is rotated by V from the SVD of H so the
//                    transformed feedthrough is [[Hbar, 0], [0, 0]] with Hbar
//                    the r x r invertible singular-value block; G V = [G1 G2].
struct TransformedSystem {
    int r = 0;       // rank of H (= m for the zero-feedthrough transform)
    Matrix T;        // p x p, invertible
    Matrix C1;       // r x n (m x n in the zero-feedthrough case)
    Matrix C2;       // (p-r) x n
    Matrix G1;       // n x r columns of G*V (feedthrough case; = G otherwise)
    Matrix G2;       // n x (m-r) columns of G*V
    Matrix Hbar;     // r x r invertible (empty when H = 0)
    Matrix V;        // m x m disturbance rotation (identity when H = 0)
    Matrix R1;       // r x r
    Matrix R2;       // (p-r) x (p-r)
};

// Transformation of Eqs.-style output coordinates for H = 0 plants.
// Requires p >= m and rank CG = m.
TransformedSystem transform_zero_feedthrough(const LinearSystem& sys);

// SVD-based transformation for H != 0 plants; r may be any 0 < r <= min(p,m).
TransformedSystem transform_feedthrough(const LinearSystem& sys);

}  // namespace siselab
