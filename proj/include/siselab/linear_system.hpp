#pragma once

#include "siselab/numerics.hpp"

namespace siselab {

// Discrete-time plant
//   x_{t+1} = A x_t + B u_t + G d_t + w_t,   cov(w) = Q
//   y_t     = C x_t + D u_t + H d_t + v_t,   cov(v) = R
// with unknown disturbance d (m channels), measurement y (p channels) and an
// optional known input u (q channels, absent by default).
struct LinearSystem {
    int n = 0;  // states
    int m = 0;  // disturbance channels
    int p = 0;  // measurements
    int q = 0;  // known-input channels (0 when B/D absent)

    Matrix A;   // n x n
    Matrix G;   // n x m
    Matrix C;   // p x n
    Matrix H;   // p x m, all-zero allowed
    Matrix Q;   // n x n, symmetric PSD
    Matrix R;   // p x p, symmetric PD
    Matrix B;   // n x q (0 columns when absent)
    Matrix D;   // p x q (0 columns when absent)

    bool has_feedthrough() const { return H.size() > 0 && H.cwiseAbs().maxCoeff() > 0.0; }
    bool is_square() const { return p == m; }
    bool has_known_input() const { return q > 0; }
};

// Builds a LinearSystem, checking shape consistency and symmetry of Q and R.
// Asymmetry beyond 1e-10 relative is rejected; smaller asymmetry is averaged
// away. Positive (semi)definiteness is NOT enforced here -- validate()
// reports it as assumption data.
LinearSystem make_system(const Matrix& A, const Matrix& G, const Matrix& C,
                         const Matrix& H, const Matrix& Q, const Matrix& R,
                         const Matrix& B = Matrix(), const Matrix& D = Matrix());

// Convenience: zero-feedthrough system (H = 0).
LinearSystem make_system_zero_feedthrough(const Matrix& A, const Matrix& G,
                                          const Matrix& C, const Matrix& Q,
                                          const Matrix& R);

}  // namespace siselab
