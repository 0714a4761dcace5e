#include "siselab/singular_kf.hpp"

#include "siselab/errors.hpp"
#include "siselab/stability.hpp"

#include <algorithm>
#include <cmath>

namespace siselab {

AugmentedModel augment(const LinearSystem& sys, double D) {
    if (D < 0.0) throw ShapeError("augment: D must be nonnegative");
    AugmentedModel model;
    model.n = sys.n;
    model.m = sys.m;
    model.p = sys.p;
    model.D = D;
    const int na = sys.n + sys.m;
    model.F = Matrix::Zero(na, na);
    model.F.topLeftCorner(sys.n, sys.n) = sys.A;
    model.F.topRightCorner(sys.n, sys.m) = sys.G;
    model.W = Matrix::Zero(na, na);
    model.W.topLeftCorner(sys.n, sys.n) = sys.Q;
    model.W.bottomRightCorner(sys.m, sys.m) = D * Matrix::Identity(sys.m, sys.m);
    model.Cout = Matrix::Zero(sys.p, na);
    model.Cout.leftCols(sys.n) = sys.C;
    model.Cout.rightCols(sys.m) = sys.H;
    model.R = sys.R;
    return model;
}

AkfState akf_init(const AugmentedModel& model, const Vector& x0, const Matrix& P0x) {
    if (x0.size() != model.n) throw ShapeError("akf_init: x0 must have n entries");
    if (P0x.rows() != model.n || P0x.cols() != model.n)
        throw ShapeError("akf_init: P0 must be n x n");
    if (!is_psd(P0x)) throw ShapeError("akf_init: P0 must be PSD");
    AkfState st;
    st.xaug = Vector::Zero(model.n + model.m);
    st.xaug.head(model.n) = x0;
    st.P = Matrix::Zero(model.n + model.m, model.n + model.m);
    st.P.topLeftCorner(model.n, model.n) = symmetrize(P0x);
    st.P.bottomRightCorner(model.m, model.m) =
        model.D * Matrix::Identity(model.m, model.m);
    st.t = 0;
    return st;
}

AkfState akf_step(const AkfState& state, const AugmentedModel& model, const Vector& y) {
    if (y.size() != model.p) throw ShapeError("akf_step: y must have p entries");

    const Vector xp = model.F * state.xaug;
    const Matrix Pp = symmetrize(model.F * state.P * model.F.transpose() + model.W);

    const Matrix S = symmetrize(model.Cout * Pp * model.Cout.transpose() + model.R);
    const Matrix K = chol_solve(S, model.Cout * Pp, "akf innovation covariance").transpose();

    AkfState next;
    next.xaug = xp + K * (y - model.Cout * xp);
    const Matrix IKC =
        Matrix::Identity(Pp.rows(), Pp.cols()) - K * model.Cout;
    next.P = symmetrize(IKC * Pp * IKC.transpose() + K * model.R * K.transpose());
    next.t = state.t + 1;

    const double limit = 1e14 * std::max(model.D, 1.0);
    if (!next.P.allFinite() || next.P.cwiseAbs().maxCoeff() > limit)
        throw NumericError(
            "akf_step: augmented covariance exceeded 1e14 * D; reduce the "
            "pseudo-variance or switch to the sise engine");
    return next;
}

Estimates run_akf(const LinearSystem& sys, double D, const std::vector<Vector>& ys,
                  const FilterInit& init) {
    const AugmentedModel model = augment(sys, D);
    AkfState st = akf_init(model, init.x0, init.P0);

    Estimates est;
    est.variant = sys.has_feedthrough() ? FilterVariant::Feedthrough
                                        : FilterVariant::ZeroFeedthrough;
    est.xhat.push_back(init.x0);
    est.dhat.push_back(Vector::Zero(sys.m));
    est.trace_P.push_back(init.P0.trace());
    for (const Vector& y : ys) {
        const Vector innov = y - model.Cout * (model.F * st.xaug);
        st = akf_step(st, model, y);
        est.xhat.push_back(st.xaug.head(sys.n));
        est.dhat.push_back(st.xaug.tail(sys.m));
        est.trace_P.push_back(st.P.topLeftCorner(sys.n, sys.n).trace());
        est.innovations.push_back(innov);
        est.P_final = st.P.topLeftCorner(sys.n, sys.n);
    }
    return est;
}

double equivalence_gap(const LinearSystem& sys, const Trajectory& traj, double D,
                       int horizon, int burn_in) {
    const StabilityReport rep = verdict(sys);
    if (rep.verdict != StabilityVerdict::Stable)
        throw UnstableError(
            "equivalence_gap: SISE is not stable for this plant (verdict " +
            std::string(to_string(rep.verdict)) +
            "); use factorization::estimate_via_outer instead");

    horizon = std::min(horizon, traj.horizon);
    if (horizon < 2) throw ShapeError("equivalence_gap: horizon too short");
    if (burn_in < 0) burn_in = horizon / 10;

    std::vector<Vector> ys(traj.measurements.begin() + 1,
                           traj.measurements.begin() + 1 + horizon);
    const FilterInit init = default_init(sys);
    const Estimates sise = run_filter(sys, ys, init);
    const Estimates akf = run_akf(sys, D, ys, init);

    double gap = 0.0;
    for (int t = burn_in; t <= horizon; ++t) {
        const double num = (sise.xhat[t] - akf.xhat[t]).cwiseAbs().maxCoeff();
        const double den = 1.0 + sise.xhat[t].cwiseAbs().maxCoeff();
        gap = std::max(gap, num / den);
    }
    return gap;
}

}  // namespace siselab
