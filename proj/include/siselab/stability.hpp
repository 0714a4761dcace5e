#pragma once

#include "siselab/linear_system.hpp"
#include "siselab/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace siselab {

struct DetectabilityResult {
    bool detectable = false;
    std::vector<Complex> failing_modes;  // |lambda| >= 1 with PBH rank drop
};

// PBH detectability of (A, C): every eigenvalue with |lambda| >= 1 keeps
// rank [A - lambda I; C] = n. C may have zero rows.
DetectabilityResult detectable(const Matrix& A, const Matrix& C);

// Dual test: (A, B) stabilizable.
DetectabilityResult stabilizable(const Matrix& A, const Matrix& B);

struct RdeOptions {
    double tol = 1e-12;
    int max_iter = 100000;
    double divergence_threshold = 1e12;
};

struct RdeResult {
    bool converged = false;
    bool diverged = false;
    Matrix X;                 // last iterate (the fixed point when converged)
    int iterations = 0;
    double final_delta = 0.0;
    std::vector<Complex> closed_loop_eigs;  // of Abar - L*C2 at the last iterate
};

// One step of the generalized Riccati recursion
//   X+ = A X A' - (A X C' + S)(C X C' + R)^{-1}(A X C' + S)' + Q.
// Every Riccati in the toolkit (stability, time-varying, spectral
// factorization) goes through this kernel.
Matrix riccati_step(const Matrix& X, const Matrix& A, const Matrix& C,
                    const Matrix& Q, const Matrix& R,
                    const Matrix& S = Matrix());

// Riccati data for the zero-feedthrough case:
//   Abar = A(I - G(C1 G)^{-1} C1),
//   Qbar = A G (C1 G)^{-1} R1 (G (C1 G)^{-1})' A' + Q.
struct ZfRiccatiData {
    Matrix Abar;
    Matrix Qbar;
    Matrix C2;
    Matrix R2;
};
ZfRiccatiData zf_riccati_data(const LinearSystem& sys, const TransformedSystem& tf);

// Feedthrough analogue: Ahat = A - G1 Hbar^{-1} C1bar,
// Qhat = Q + G1 Hbar^{-1} R1bar Hbar^{-T} G1'.
struct FtRiccatiData {
    Matrix Ahat;
    Matrix Qhat;
    Matrix C2;
    Matrix R2;
};
FtRiccatiData ft_riccati_data(const LinearSystem& sys, const TransformedSystem& tf);

// Iterates the zero-feedthrough RDE from X0 until the max-norm step drop is
// below tol. Convergence additionally requires the closed loop at the fixed
// point to be Schur; divergence is declared when ||X|| passes the threshold
// or max_iter is hit while the step size is no longer contracting.
RdeResult rde_zf(const LinearSystem& sys, const TransformedSystem& tf,
                 const Matrix& X0, const RdeOptions& opts = {});

RdeResult rde_ft(const LinearSystem& sys, const TransformedSystem& tf,
                 const Matrix& X0, const RdeOptions& opts = {});

// Single time-varying RDE step, zero-feedthrough shape. Note the transition
// matrices A_t, Q_t pair with the previous step's G.
Matrix rde_tv_step_zf(const Matrix& X, const Matrix& A_t, const Matrix& G_prev,
                      const Matrix& C1_t, const Matrix& C2_t,
                      const Matrix& R1_t, const Matrix& R2_t, const Matrix& Q_t);

Matrix rde_tv_step_ft(const Matrix& X, const Matrix& A_t, const Matrix& G1_t,
                      const Matrix& Hbar_t, const Matrix& C1_t, const Matrix& C2_t,
                      const Matrix& R1_t, const Matrix& R2_t, const Matrix& Q_t);

// Closed-form estimator system matrices for the square cases.
Matrix sise_matrix_square_zf(const LinearSystem& sys);  // (I - G(CG)^{-1}C) A
Matrix sise_matrix_square_ft(const LinearSystem& sys);  // A - G H^{-1} C

// Transmission zeros of the square d->y map: eigenvalues of the matching
// estimator system matrix (all n of them; >= m at zero when H = 0).
std::vector<Complex> transmission_zeros_square(const LinearSystem& sys);

enum class StabilityVerdict { Stable, Unstable, Marginal };

enum class SiseVariantTag {
    SquareZeroFeedthrough,
    NonsquareZeroFeedthrough,
    SquareFeedthrough,
    NonsquareFeedthrough,
    RankDeficientFeedthrough,  // detectability prediction only
};

struct StabilityReport {
    SiseVariantTag variant;
    StabilityVerdict verdict = StabilityVerdict::Unstable;
    Matrix sise_system_matrix;                 // n x n
    std::vector<Complex> eigenvalues;          // of sise_system_matrix
    std::vector<Complex> transmission_zeros;   // square cases
    DetectabilityResult detectability;         // non-square / rank-deficient
    bool detectability_applicable = false;
    DetectabilityResult stabilizability;       // of [Abar, Qbar^(1/2)] (zf path)
    bool stabilizability_applicable = false;
    std::optional<Matrix> rde_limit;           // X_inf
    int rde_iterations = 0;
    bool rde_diverged = false;
    // Limiting closed loop (I - K_inf C)(I - G M_inf C) A resp. A - L_inf C,
    // available when the RDE converged (or in closed form for square cases).
    std::optional<Matrix> limiting_closed_loop;
    std::vector<Complex> closed_loop_eigenvalues;
    std::string note;
};

// A-priori stability decision: dispatches on shape and rank per the
// applicable theorem. Throws AssumptionError when no variant applies.
StabilityReport verdict(const LinearSystem& sys, const RdeOptions& opts = {});

const char* to_string(StabilityVerdict v);
const char* to_string(SiseVariantTag v);

}  // namespace siselab
