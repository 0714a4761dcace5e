#pragma once

#include "siselab/sise.hpp"
#include "siselab/stability.hpp"

#include <string>
#include <vector>

namespace siselab {

// Plain state-space quadruple for the inner factor (no noise model).
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    int order() const { return static_cast<int>(A.rows()); }
};

// Evaluates D + C (zI - A)^{-1} B at z.
ComplexMatrix evaluate_transfer(const StateSpace& ss, Complex z);

// T = T_o * T_i for the d -> y map. The outer factor keeps the plant's A and
// C exactly and swaps (G, H) for (Gcheck, Hcheck); the inner factor is a
// Schur-stable m x m all-pass in dcheck = T_i d.
struct Factorization {
    LinearSystem outer;          // same A, C, Q, R as the source plant
    StateSpace inner;            // m x m all-pass
    double allpass_deviation = 0.0;   // max |T_i* T_i - I| over the grid
    double product_mismatch = 0.0;    // max |T - T_o T_i| over the grid
    int are_iterations = 0;
    std::vector<Complex> outer_zeros;  // all strictly inside the unit circle
    std::string note;            // records the zero-feedthrough delay handling
};

struct FactorizationOptions {
    double tol = 1e-14;
    int max_iter = 1000000;
    int grid_size = 256;
};

// Discrete-time (co-)inner-outer factorization computed from the stabilizing
// solution of the spectral-factorization Riccati equation (the riccati_step
// kernel). For H = 0 plants the biproper object z T(z) is factored and the
// one-step delay stays with the estimator dispatch: the returned outer
// system again has zero feedthrough. Throws MarginalError on unit-circle
// zeros and NumericError when the iteration fails.
Factorization inner_outer(const LinearSystem& sys,
                          const FactorizationOptions& opts = {});

// Max over the frequency grid of the spectral norm of T(e^jw)* T(e^jw) - I.
double allpass_deviation(const StateSpace& ss, int grid_size);

struct OuterEstimates {
    Estimates estimates;   // x^ refers to the original plant state
    Factorization factorization;
    bool used_akf_engine = false;
};

// Factor, then run the applicable SISE variant (or, if none applies, the
// augmented Kalman filter) on the outer system. Stable whenever the plant's
// d -> y map has no unit-circle zeros, including plants where plain SISE
// diverges.
OuterEstimates estimate_via_outer(const LinearSystem& sys, const std::vector<Vector>& ys,
                                  const FilterInit& init);

enum class RecoverMode { FixedInterval };

struct RecoverResult {
    std::vector<Vector> d;   // same length as dcheck
    int edge_effect_len = 0; // trailing samples affected by the reverse transient
};

// Recovers d from dcheck = T_i d by running the adjoint (conjugate) system in
// reverse time over the whole interval. Offline only.
RecoverResult recover_d(const std::vector<Vector>& dcheck, const StateSpace& inner,
                        RecoverMode mode = RecoverMode::FixedInterval);

}  // namespace siselab
