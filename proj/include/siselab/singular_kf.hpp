#pragma once

#include "siselab/simulate.hpp"
#include "siselab/sise.hpp"

namespace siselab {

// Disturbance-augmented model: state (x_t, d_t) with
//   F = [[A, G], [0, 0]],  process cov diag(Q, D I_m),  output [C, H], cov R.
// D is the finite stand-in for the unbounded disturbance variance.
struct AugmentedModel {
    int n = 0;
    int m = 0;
    int p = 0;
    Matrix F;       // (n+m) x (n+m)
    Matrix W;       // process covariance diag(Q, D I_m)
    Matrix Cout;    // p x (n+m)
    Matrix R;       // p x p
    double D = 0.0;
};

// D = 0 is allowed (degenerate, for testing: reduces to a KF with known d = 0).
AugmentedModel augment(const LinearSystem& sys, double D);

struct AkfState {
    Vector xaug;   // filtered (x^, d^)
    Matrix P;      // filtered covariance
    int t = 0;
};

AkfState akf_init(const AugmentedModel& model, const Vector& x0, const Matrix& P0x);

// Standard predict/update with Joseph-form covariance. Throws NumericError
// when the covariance passes 1e14 * max(D, 1).
AkfState akf_step(const AkfState& state, const AugmentedModel& model, const Vector& y);

// Runs the augmented filter over ys = (y_1..y_T); same timing convention as
// run_filter so the state blocks are directly comparable.
Estimates run_akf(const LinearSystem& sys, double D, const std::vector<Vector>& ys,
                  const FilterInit& init);

// Max over t >= burn_in of |x^_SISE - x^_AKF|_inf / (1 + |x^_SISE|_inf) on the
// trajectory's measurements. Refuses (UnstableError) when the SISE verdict is
// not stable. burn_in < 0 selects horizon / 10.
double equivalence_gap(const LinearSystem& sys, const Trajectory& traj, double D,
                       int horizon, int burn_in = -1);

}  // namespace siselab
