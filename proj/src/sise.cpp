#include "siselab/sise.hpp"

#include "siselab/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <limits>
#include <string>
#include <type_traits>
#include <utility>

namespace siselab {

namespace {

Vector input_or_zero(const Vector& u, int q, const char* what) {
    if (u.size() == 0) return Vector::Zero(q);
    if (u.size() != q) throw ShapeError(std::string(what) + ": known-input size != q");
    return u;
}

void check_init_cov(const Matrix& P0, int dim, const char* name) {
    if (P0.rows() != dim || P0.cols() != dim)
        throw ShapeError(std::string(name) + " has wrong dimensions");
    if (!is_psd(P0))
        throw ShapeError(std::string(name) + " must be symmetric positive semidefinite");
}

struct ZfCore {
    Matrix K;
    Matrix M;
    Matrix P;
};

// Gains and filtered covariance from the predicted covariance X. Both
// innovation-covariance inverses go through Cholesky; a failed factorization
// of G'C'(CXC'+R)^{-1}CG is the runtime signature of a violated rank CG = m.
ZfCore zf_core(const LinearSystem& sys, const Matrix& X) {
    ZfCore out;
    const Matrix CG = sys.C * sys.G;
    const Matrix S = symmetrize(sys.C * X * sys.C.transpose() + sys.R);
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
        throw SingularityError("zf_step: C X C' + R not positive definite",
                               std::numeric_limits<double>::infinity());

    out.K = llt.solve(sys.C * X).transpose();  // X C' S^{-1}

    const Matrix W = llt.solve(CG);            // S^{-1} C G
    const Matrix F = symmetrize(CG.transpose() * W);
    Eigen::LLT<Matrix> lltF(F);
    if (lltF.info() != Eigen::Success) {
        const RankInfo info = numerical_rank(F);
        throw SingularityError(
            "zf_step: G'C'(C X C' + R)^{-1} C G singular (rank CG < m at runtime); "
            "condition estimate " +
                std::to_string(info.condition),
            info.condition);
    }
    out.M = lltF.solve(W.transpose());         // F^{-1} G'C'S^{-1}

    const Matrix IGMC = Matrix::Identity(sys.n, sys.n) - sys.G * out.M * sys.C;
    const Matrix inner = IGMC * X * IGMC.transpose() +
                         sys.G * out.M * sys.R * out.M.transpose() * sys.G.transpose();
    const Matrix IKC = Matrix::Identity(sys.n, sys.n) - out.K * sys.C;
    out.P = symmetrize(IKC * inner +
                       out.K * sys.R * out.M.transpose() * sys.G.transpose());
    return out;
}

}  // namespace

ZfGains zf_gains_from_X(const LinearSystem& sys, const Matrix& X) {
    const ZfCore core = zf_core(sys, X);
    return ZfGains{core.K, core.M, core.P};
}

ZfFilterState zf_init(const LinearSystem& sys, const Vector& x0, const Matrix& P0) {
    if (x0.size() != sys.n) throw ShapeError("zf_init: x0 must have n entries");
    check_init_cov(P0, sys.n, "zf_init: P0");
    ZfFilterState st;
    st.xhat = x0;
    st.dhat = Vector::Zero(sys.m);
    st.P = symmetrize(P0);
    st.X = Matrix::Zero(sys.n, sys.n);
    st.K = Matrix::Zero(sys.n, sys.p);
    st.M = Matrix::Zero(sys.m, sys.p);
    st.t = 0;
    return st;
}

ZfFilterState zf_step(const ZfFilterState& state, const LinearSystem& sys,
                      const Vector& y, const Vector& u_prev, const Vector& u_now) {
    if (y.size() != sys.p) throw ShapeError("zf_step: y must have p entries");

    ZfFilterState next;
    next.X = symmetrize(sys.A * state.P * sys.A.transpose() + sys.Q);
    const ZfCore core = zf_core(sys, next.X);

    Vector pred = sys.A * state.xhat;
    Vector ybase = y;
    if (sys.q > 0) {
        pred += sys.B * input_or_zero(u_prev, sys.q, "zf_step");
        ybase -= sys.D * input_or_zero(u_now, sys.q, "zf_step");
    }
    const Vector resid = ybase - sys.C * pred;
    next.dhat = core.M * resid;
    const Vector innovation = resid - sys.C * sys.G * next.dhat;
    next.xhat = pred + sys.G * next.dhat + core.K * innovation;
    next.K = core.K;
    next.M = core.M;
    next.P = core.P;
    next.t = state.t + 1;
    return next;
}

ZfFilterState zf_square_step(const ZfFilterState& state, const LinearSystem& sys,
                             const Vector& y, const Vector& u_prev, const Vector& u_now) {
    if (sys.p != sys.m) throw ShapeError("zf_square_step requires p = m");
    if (y.size() != sys.p) throw ShapeError("zf_square_step: y must have p entries");

    const Matrix CG = sys.C * sys.G;
    Eigen::FullPivLU<Matrix> lu(CG);
    if (!lu.isInvertible()) {
        const RankInfo info = numerical_rank(CG);
        throw SingularityError("zf_square_step: CG singular; condition estimate " +
                                   std::to_string(info.condition),
                               info.condition);
    }

    ZfFilterState next;
    next.X = symmetrize(sys.A * state.P * sys.A.transpose() + sys.Q);
    const ZfCore core = zf_core(sys, next.X);  // covariances kept for reporting

    Vector pred = sys.A * state.xhat;
    Vector ybase = y;
    if (sys.q > 0) {
        pred += sys.B * input_or_zero(u_prev, sys.q, "zf_square_step");
        ybase -= sys.D * input_or_zero(u_now, sys.q, "zf_square_step");
    }
    next.dhat = lu.solve(ybase - sys.C * pred);
    next.xhat = pred + sys.G * next.dhat;  // the innovation is identically zero
    next.K = core.K;
    next.M = core.M;
    next.P = core.P;
    next.t = state.t + 1;
    return next;
}

FtFilterState ft_init(const LinearSystem& sys, const Vector& x0, const Matrix& P0,
                      const Vector& d0, const Matrix& Pd0) {
    if (x0.size() != sys.n) throw ShapeError("ft_init: x0 must have n entries");
    if (d0.size() != sys.m) throw ShapeError("ft_init: d0 must have m entries");
    check_init_cov(P0, sys.n, "ft_init: P0");
    check_init_cov(Pd0, sys.m, "ft_init: Pd0");
    FtFilterState st;
    st.xhat_pred = x0;
    st.xhat = x0;
    st.dhat = d0;
    st.Px = symmetrize(P0);
    st.Pd = symmetrize(Pd0);
    st.Pxd = Matrix::Zero(sys.n, sys.m);
    st.Rtilde = Matrix::Zero(sys.p, sys.p);
    st.K = Matrix::Zero(sys.n, sys.p);
    st.M = Matrix::Zero(sys.m, sys.p);
    st.t = 0;
    return st;
}

namespace {

struct FtCore {
    Matrix Rtilde;
    Matrix K;
    Matrix M;
    Matrix Pd;
    Matrix Px;
    Matrix Pxd;
};

FtCore ft_core(const LinearSystem& sys, const Matrix& Px_pred) {
    FtCore out;
    out.Rtilde = symmetrize(sys.C * Px_pred * sys.C.transpose() + sys.R);
    Eigen::LLT<Matrix> llt(out.Rtilde);
    if (llt.info() != Eigen::Success)
        throw SingularityError("ft_step: C P C' + R not positive definite",
                               std::numeric_limits<double>::infinity());

    const Matrix W = llt.solve(sys.H);  // Rtilde^{-1} H
    const Matrix F = symmetrize(sys.H.transpose() * W);
    Eigen::LLT<Matrix> lltF(F);
    if (lltF.info() != Eigen::Success) {
        const RankInfo info = numerical_rank(F);
        throw SingularityError(
            "ft_step: H' Rtilde^{-1} H singular (rank H < m at runtime); condition estimate " +
                std::to_string(info.condition),
            info.condition);
    }
    out.M = lltF.solve(W.transpose());
    out.Pd = symmetrize(lltF.solve(Matrix::Identity(sys.m, sys.m)));
    out.K = llt.solve(sys.C * Px_pred).transpose();  // P C' Rtilde^{-1}
    out.Px = symmetrize(
        Px_pred -
        out.K * (out.Rtilde - sys.H * out.Pd * sys.H.transpose()) * out.K.transpose());
    out.Pxd = -out.K * sys.H * out.Pd;
    return out;
}

Matrix ft_joint_prediction(const LinearSystem& sys, const FtFilterState& state) {
    Matrix J(sys.n + sys.m, sys.n + sys.m);
    J.topLeftCorner(sys.n, sys.n) = state.Px;
    J.topRightCorner(sys.n, sys.m) = state.Pxd;
    J.bottomLeftCorner(sys.m, sys.n) = state.Pxd.transpose();
    J.bottomRightCorner(sys.m, sys.m) = state.Pd;
    Matrix T(sys.n, sys.n + sys.m);
    T.leftCols(sys.n) = sys.A;
    T.rightCols(sys.m) = sys.G;
    return symmetrize(T * J * T.transpose() + sys.Q);
}

}  // namespace

FtFilterState ft_step(const FtFilterState& state, const LinearSystem& sys,
                      const Vector& y, const Vector& u_prev, const Vector& u_now) {
    if (y.size() != sys.p) throw ShapeError("ft_step: y must have p entries");

    FtFilterState next;
    next.xhat_pred = sys.A * state.xhat + sys.G * state.dhat;
    if (sys.q > 0) next.xhat_pred += sys.B * input_or_zero(u_prev, sys.q, "ft_step");
    const Matrix Px_pred = ft_joint_prediction(sys, state);

    const FtCore core = ft_core(sys, Px_pred);

    Vector ybase = y;
    if (sys.q > 0) ybase -= sys.D * input_or_zero(u_now, sys.q, "ft_step");
    const Vector resid = ybase - sys.C * next.xhat_pred;
    next.dhat = core.M * resid;
    next.xhat = next.xhat_pred + core.K * (resid - sys.H * next.dhat);
    next.Rtilde = core.Rtilde;
    next.K = core.K;
    next.M = core.M;
    next.Pd = core.Pd;
    next.Px = core.Px;
    next.Pxd = core.Pxd;
    next.t = state.t + 1;
    return next;
}

FtFilterState ft_square_step(const FtFilterState& state, const LinearSystem& sys,
                             const Vector& y, const Vector& u_prev, const Vector& u_now) {
    if (sys.p != sys.m) throw ShapeError("ft_square_step requires p = m");
    if (y.size() != sys.p) throw ShapeError("ft_square_step: y must have p entries");

    Eigen::FullPivLU<Matrix> lu(sys.H);
    if (!lu.isInvertible()) {
        const RankInfo info = numerical_rank(sys.H);
        throw SingularityError("ft_square_step: H singular; condition estimate " +
                                   std::to_string(info.condition),
                               info.condition);
    }

    FtFilterState next;
    next.xhat_pred = sys.A * state.xhat + sys.G * state.dhat;
    if (sys.q > 0) next.xhat_pred += sys.B * input_or_zero(u_prev, sys.q, "ft_square_step");
    const Matrix Px_pred = ft_joint_prediction(sys, state);
    const FtCore core = ft_core(sys, Px_pred);  // covariances kept for reporting

    Vector ybase = y;
    if (sys.q > 0) ybase -= sys.D * input_or_zero(u_now, sys.q, "ft_square_step");
    next.dhat = lu.solve(ybase - sys.C * next.xhat_pred);
    next.xhat = next.xhat_pred;  // zero innovation in the square case
    next.Rtilde = core.Rtilde;
    next.K = core.K;
    next.M = core.M;
    next.Pd = core.Pd;
    next.Px = core.Px;
    next.Pxd = core.Pxd;
    next.t = state.t + 1;
    return next;
}

FilterInit default_init(const LinearSystem& sys) {
    FilterInit init;
    init.x0 = Vector::Zero(sys.n);
    init.P0 = 1e3 * Matrix::Identity(sys.n, sys.n);
    init.d0 = Vector::Zero(sys.m);
    init.Pd0 = 1e3 * Matrix::Identity(sys.m, sys.m);
    return init;
}

namespace {

// A, B, G, Q drive the transition into step t; C, D, H, R produce y_t.
LinearSystem blend_step_system(const LinearSystem& prev, const LinearSystem& now) {
    LinearSystem s = now;
    s.A = prev.A;
    s.G = prev.G;
    s.B = prev.B;
    s.Q = prev.Q;
    return s;
}

template <typename State, typename StepFn>
Estimates run_loop(const SystemProvider& provider, const std::vector<Vector>& ys,
                   State state, StepFn step, const RunOptions& opts,
                   const std::vector<Vector>& us, FilterVariant variant,
                   const Vector& d0) {
    Estimates est;
    est.variant = variant;
    const int T = static_cast<int>(ys.size());
    est.xhat.reserve(T + 1);
    est.dhat.reserve(T + 1);
    est.trace_P.reserve(T + 1);
    est.innovations.reserve(T);

    LinearSystem prev_sys = provider(0);
    est.xhat.push_back(state.xhat);
    est.dhat.push_back(d0);
    if constexpr (std::is_same_v<State, ZfFilterState>)
        est.trace_P.push_back(state.P.trace());
    else
        est.trace_P.push_back(state.Px.trace());

    for (int t = 1; t <= T; ++t) {
        LinearSystem now_sys = provider(t);
        LinearSystem step_sys = blend_step_system(prev_sys, now_sys);
        const Vector& y = ys[t - 1];
        Vector u_prev, u_now;
        if (!us.empty()) {
            if (t - 1 < static_cast<int>(us.size())) u_prev = us[t - 1];
            if (t < static_cast<int>(us.size())) u_now = us[t];
        }
        try {
            state = step(state, step_sys, y, u_prev, u_now);
        } catch (const SingularityError& e) {
            throw SingularityError("step " + std::to_string(t) + ": " + e.what(),
                                   e.condition);
        } catch (const ShapeError& e) {
            throw ShapeError("step " + std::to_string(t) + ": " + e.what());
        }

        est.xhat.push_back(state.xhat);
        est.dhat.push_back(state.dhat);
        Vector resid;
        if constexpr (std::is_same_v<State, ZfFilterState>) {
            Vector pred = step_sys.A * est.xhat[t - 1];
            if (step_sys.q > 0 && u_prev.size() > 0) pred += step_sys.B * u_prev;
            resid = y - step_sys.C * pred - step_sys.C * step_sys.G * state.dhat;
        } else {
            resid = y - step_sys.C * state.xhat_pred - step_sys.H * state.dhat;
        }
        if (step_sys.q > 0 && u_now.size() > 0) resid -= step_sys.D * u_now;
        est.innovations.push_back(resid);

        if constexpr (std::is_same_v<State, ZfFilterState>) {
            est.trace_P.push_back(state.P.trace());
            est.P_final = state.P;
            est.X_final = state.X;
        } else {
            est.trace_P.push_back(state.Px.trace());
            est.P_final = state.Px;
        }
        if (opts.record_gains) {
            est.K_gains.push_back(state.K);
            est.M_gains.push_back(state.M);
        }
        prev_sys = std::move(now_sys);
    }
    return est;
}

}  // namespace

Estimates run_filter(const SystemProvider& provider, const std::vector<Vector>& ys,
                     const FilterInit& init, const RunOptions& opts,
                     const std::vector<Vector>& us) {
    const LinearSystem sys0 = provider(0);
    FilterVariant variant = opts.variant;
    if (variant == FilterVariant::Auto)
        variant = sys0.has_feedthrough() ? FilterVariant::Feedthrough
                                         : FilterVariant::ZeroFeedthrough;

    if (variant == FilterVariant::ZeroFeedthrough) {
        ZfFilterState st = zf_init(sys0, init.x0, init.P0);
        const bool fast = opts.prefer_square_fast_path && sys0.is_square();
        auto step = [fast](const ZfFilterState& s, const LinearSystem& sys,
                           const Vector& y, const Vector& up, const Vector& un) {
            return fast ? zf_square_step(s, sys, y, up, un) : zf_step(s, sys, y, up, un);
        };
        return run_loop(provider, ys, st, step, opts, us,
                        FilterVariant::ZeroFeedthrough, Vector::Zero(sys0.m));
    }

    FtFilterState st = ft_init(sys0, init.x0, init.P0, init.d0, init.Pd0);
    const bool fast = opts.prefer_square_fast_path && sys0.is_square();
    auto step = [fast](const FtFilterState& s, const LinearSystem& sys, const Vector& y,
                       const Vector& up, const Vector& un) {
        return fast ? ft_square_step(s, sys, y, up, un) : ft_step(s, sys, y, up, un);
    };
    return run_loop(provider, ys, st, step, opts, us, FilterVariant::Feedthrough,
                    init.d0);
}

Estimates run_filter(const LinearSystem& sys, const std::vector<Vector>& ys,
                     const FilterInit& init, const RunOptions& opts,
                     const std::vector<Vector>& us) {
    return run_filter([&sys](int) { return sys; }, ys, init, opts, us);
}

}  // namespace siselab
