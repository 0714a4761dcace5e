#pragma once

#include "siselab/linear_system.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace siselab {

// State of the zero-feedthrough filter after absorbing y_t. Emits the
// smoothed pair (xhat = x^_{t|t}, dhat = d^_{t-1|t}).
struct ZfFilterState {
    Vector xhat;   // x^_{t|t}
    Vector dhat;   // d^_{t-1|t} (zero before the first step)
    Matrix P;      // filtered covariance P_t
    Matrix X;      // predicted covariance X_t = A P_{t-1} A' + Q
    Matrix K;      // n x p gain
    Matrix M;      // m x p gain
    int t = 0;
};

// State of the full-rank-feedthrough filter after absorbing y_t. Emits the
// filtered pair (xhat = x^_{t|t}, dhat = d^_{t|t}).
struct FtFilterState {
    Vector xhat_pred;  // x^_{t|t-1}
    Vector xhat;       // x^_{t|t}
    Vector dhat;       // d^_{t|t}
    Matrix Px;         // cov of x^_{t|t}
    Matrix Pd;         // cov of d^_{t|t}
    Matrix Pxd;        // cross block, Pxd = Pdx'
    Matrix Rtilde;     // innovation covariance C Px_pred C' + R
    Matrix K;          // n x p
    Matrix M;          // m x p
    int t = 0;
};

ZfFilterState zf_init(const LinearSystem& sys, const Vector& x0, const Matrix& P0);

// One step of Eqs.-style recursion: consumes y_{t+1}, returns the state at
// t+1. u_prev/u_now feed the optional known-input channel (empty -> zero).
ZfFilterState zf_step(const ZfFilterState& state, const LinearSystem& sys,
                      const Vector& y, const Vector& u_prev = Vector(),
                      const Vector& u_now = Vector());

// Square fast path (p = m): gain-independent estimate update through
// (CG)^{-1}; covariances still maintained for reporting. Estimates agree
// with zf_step to roundoff.
ZfFilterState zf_square_step(const ZfFilterState& state, const LinearSystem& sys,
                             const Vector& y, const Vector& u_prev = Vector(),
                             const Vector& u_now = Vector());

FtFilterState ft_init(const LinearSystem& sys, const Vector& x0, const Matrix& P0,
                      const Vector& d0, const Matrix& Pd0);

FtFilterState ft_step(const FtFilterState& state, const LinearSystem& sys,
                      const Vector& y, const Vector& u_prev = Vector(),
                      const Vector& u_now = Vector());

// Square fast path (p = m, H invertible).
FtFilterState ft_square_step(const FtFilterState& state, const LinearSystem& sys,
                             const Vector& y, const Vector& u_prev = Vector(),
                             const Vector& u_now = Vector());

// Initial conditions shared by every engine. Defaults are diffuse:
// x0 = 0, P0 = 1e3 I, d0 = 0, Pd0 = 1e3 I.
struct FilterInit {
    Vector x0;
    Matrix P0;
    Vector d0;
    Matrix Pd0;
};

FilterInit default_init(const LinearSystem& sys);

enum class FilterVariant { Auto, ZeroFeedthrough, Feedthrough };

struct RunOptions {
    FilterVariant variant = FilterVariant::Auto;
    bool prefer_square_fast_path = false;
    bool record_gains = false;
};

// Full estimate history. Row t covers t = 0..T where T = ys.size(); row 0 is
// the initialization. dhat[t] is d^_{t-1|t} (zero feedthrough) or d^_{t|t}
// (feedthrough). innovations[t-1] is the residual absorbed at step t.
struct Estimates {
    FilterVariant variant = FilterVariant::ZeroFeedthrough;
    std::vector<Vector> xhat;
    std::vector<Vector> dhat;
    std::vector<double> trace_P;
    std::vector<Vector> innovations;
    std::vector<Matrix> K_gains;  // populated when record_gains
    std::vector<Matrix> M_gains;
    Matrix P_final;
    Matrix X_final;  // zero-feedthrough only
};

// Per-step plant source for the uniformly time-varying runner. step(t) must
// return the system whose A, G, Q drive the transition into t and whose C,
// H, R produce y_t. A constant provider reproduces the LTI run bitwise.
using SystemProvider = std::function<LinearSystem(int t)>;

// Runs the selected variant over ys = (y_1, ..., y_T) from the given init.
// Per-step assumption failures surface as exceptions naming the step.
Estimates run_filter(const LinearSystem& sys, const std::vector<Vector>& ys,
                     const FilterInit& init, const RunOptions& opts = {},
                     const std::vector<Vector>& us = {});

Estimates run_filter(const SystemProvider& provider, const std::vector<Vector>& ys,
                     const FilterInit& init, const RunOptions& opts = {},
                     const std::vector<Vector>& us = {});

// Maps a predicted covariance X onto the per-step gains and filtered
// covariance of the zero-feedthrough recursion (Eqs. (4)-(6) shape).
struct ZfGains {
    Matrix K;
    Matrix M;
    Matrix P;
};
ZfGains zf_gains_from_X(const LinearSystem& sys, const Matrix& X);

}  // namespace siselab
