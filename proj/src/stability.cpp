#include "siselab/stability.hpp"

#include "siselab/assumptions.hpp"
#include "siselab/errors.hpp"
#include "siselab/sise.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>

namespace siselab {

namespace {

int complex_rank(const ComplexMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    const auto& s = svd.singularValues();
    const double thresh =
        static_cast<double>(std::max(M.rows(), M.cols())) * s(0) * kRankRelTol;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > thresh) rank = i + 1;
    return rank;
}

// Right-multiplication by the inverse: X * Minv, via LU of M'.
Matrix solve_right(const Matrix& X, const Matrix& M, const char* label) {
    Eigen::FullPivLU<Matrix> lu(M.transpose());
    if (!lu.isInvertible()) {
        const RankInfo info = numerical_rank(M);
        throw SingularityError(std::string(label) + " singular; condition estimate " +
                                   std::to_string(info.condition),
                               info.condition);
    }
    return lu.solve(X.transpose()).transpose();
}

}  // namespace

DetectabilityResult detectable(const Matrix& A, const Matrix& C) {
    const int n = static_cast<int>(A.rows());
    DetectabilityResult res;
    for (const Complex& lam : eigenvalues(A)) {
        if (std::abs(lam) < 1.0) continue;
        ComplexMatrix M(n + C.rows(), n);
        M.topRows(n) = A.cast<Complex>();
        M.topRows(n).diagonal().array() -= lam;
        if (C.rows() > 0) M.bottomRows(C.rows()) = C.cast<Complex>();
        if (complex_rank(M) < n) res.failing_modes.push_back(lam);
    }
    res.detectable = res.failing_modes.empty();
    return res;
}

DetectabilityResult stabilizable(const Matrix& A, const Matrix& B) {
    return detectable(A.transpose(), B.transpose());
}

Matrix riccati_step(const Matrix& X, const Matrix& A, const Matrix& C,
                    const Matrix& Q, const Matrix& R, const Matrix& S) {
    if (C.rows() == 0) return symmetrize(A * X * A.transpose() + Q);
    Matrix L = A * X * C.transpose();
    if (S.size() > 0) L += S;
    const Matrix Sx = symmetrize(C * X * C.transpose() + R);
    const Matrix Z = chol_solve(Sx, L.transpose(), "riccati innovation covariance");
    return symmetrize(A * X * A.transpose() - L * Z + Q);
}

ZfRiccatiData zf_riccati_data(const LinearSystem& sys, const TransformedSystem& tf) {
    ZfRiccatiData data;
    const Matrix C1G = tf.C1 * sys.G;
    const Matrix Gci = solve_right(sys.G, C1G, "C1 G");  // G (C1 G)^{-1}
    data.Abar = sys.A * (Matrix::Identity(sys.n, sys.n) - Gci * tf.C1);
    data.Qbar = symmetrize(sys.A * Gci * tf.R1 * Gci.transpose() * sys.A.transpose() +
                           sys.Q);
    data.C2 = tf.C2;
    data.R2 = tf.R2;
    return data;
}

FtRiccatiData ft_riccati_data(const LinearSystem& sys, const TransformedSystem& tf) {
    FtRiccatiData data;
    const Matrix GHi = solve_right(tf.G1, tf.Hbar, "Hbar");  // G1 Hbar^{-1}
    data.Ahat = sys.A - GHi * tf.C1;
    data.Qhat = symmetrize(sys.Q + GHi * tf.R1 * GHi.transpose());
    data.C2 = tf.C2;
    data.R2 = tf.R2;
    return data;
}

namespace {

RdeResult iterate_rde(const Matrix& A, const Matrix& C2, const Matrix& Q,
                      const Matrix& R2, const Matrix& X0, const RdeOptions& opts) {
    if (!is_psd(X0))
        throw AssumptionError("rde: X0 must be symmetric positive semidefinite");

    RdeResult res;
    Matrix X = symmetrize(X0);
    std::deque<double> deltas;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Matrix Xn = riccati_step(X, A, C2, Q, R2);
        const double delta = (Xn - X).cwiseAbs().maxCoeff();
        X = Xn;
        res.iterations = it;
        res.final_delta = delta;
        if (!X.allFinite() || X.cwiseAbs().maxCoeff() > opts.divergence_threshold) {
            res.diverged = true;
            res.X = X;
            return res;
        }
        deltas.push_back(delta);
        if (deltas.size() > 100) deltas.pop_front();
        if (delta < opts.tol) {
            res.X = X;
            Matrix Acl = A;
            if (C2.rows() > 0) {
                const Matrix L = A * X * C2.transpose();
                const Matrix Sx = symmetrize(C2 * X * C2.transpose() + R2);
                const Matrix Z = chol_solve(Sx, L.transpose(), "rde gain");
                Acl = A - Z.transpose() * C2;
            }
            res.closed_loop_eigs = eigenvalues(Acl);
            res.converged = max_modulus(res.closed_loop_eigs) < 1.0;
            return res;
        }
    }
    // max_iter exhausted: call it divergence unless the step size is still
    // clearly contracting.
    res.X = X;
    res.diverged = !(deltas.size() >= 2 && deltas.back() < 0.9 * deltas.front());
    return res;
}

}  // namespace

RdeResult rde_zf(const LinearSystem& sys, const TransformedSystem& tf,
                 const Matrix& X0, const RdeOptions& opts) {
    const ZfRiccatiData d = zf_riccati_data(sys, tf);
    return iterate_rde(d.Abar, d.C2, d.Qbar, d.R2, X0, opts);
}

RdeResult rde_ft(const LinearSystem& sys, const TransformedSystem& tf,
                 const Matrix& X0, const RdeOptions& opts) {
    const FtRiccatiData d = ft_riccati_data(sys, tf);
    return iterate_rde(d.Ahat, d.C2, d.Qhat, d.R2, X0, opts);
}

Matrix rde_tv_step_zf(const Matrix& X, const Matrix& A_t, const Matrix& G_prev,
                      const Matrix& C1_t, const Matrix& C2_t,
                      const Matrix& R1_t, const Matrix& R2_t, const Matrix& Q_t) {
    const Matrix C1G = C1_t * G_prev;
    const Matrix Gci = solve_right(G_prev, C1G, "C1_t G_{t-1}");
    const int n = static_cast<int>(A_t.rows());
    const Matrix Abar = A_t * (Matrix::Identity(n, n) - Gci * C1_t);
    const Matrix Qbar =
        symmetrize(A_t * Gci * R1_t * Gci.transpose() * A_t.transpose() + Q_t);
    return riccati_step(X, Abar, C2_t, Qbar, R2_t);
}

Matrix rde_tv_step_ft(const Matrix& X, const Matrix& A_t, const Matrix& G1_t,
                      const Matrix& Hbar_t, const Matrix& C1_t, const Matrix& C2_t,
                      const Matrix& R1_t, const Matrix& R2_t, const Matrix& Q_t) {
    const Matrix GHi = solve_right(G1_t, Hbar_t, "Hbar_t");
    const Matrix Ahat = A_t - GHi * C1_t;
    const Matrix Qhat = symmetrize(Q_t + GHi * R1_t * GHi.transpose());
    return riccati_step(X, Ahat, C2_t, Qhat, R2_t);
}

Matrix sise_matrix_square_zf(const LinearSystem& sys) {
    if (sys.p != sys.m) throw ShapeError("sise_matrix_square_zf requires p = m");
    const Matrix CG = sys.C * sys.G;
    const Matrix Gci = solve_right(sys.G, CG, "CG");
    return (Matrix::Identity(sys.n, sys.n) - Gci * sys.C) * sys.A;
}

Matrix sise_matrix_square_ft(const LinearSystem& sys) {
    if (sys.p != sys.m) throw ShapeError("sise_matrix_square_ft requires p = m");
    const Matrix GHi = solve_right(sys.G, sys.H, "H");
    return sys.A - GHi * sys.C;
}

std::vector<Complex> transmission_zeros_square(const LinearSystem& sys) {
    if (sys.p != sys.m) throw ShapeError("transmission_zeros_square requires p = m");
    if (!sys.has_feedthrough()) return eigenvalues(sise_matrix_square_zf(sys));
    if (numerical_rank(sys.H).rank < sys.m)
        throw AssumptionError(
            "transmission_zeros_square: H is rank deficient; no square formula applies");
    return eigenvalues(sise_matrix_square_ft(sys));
}

namespace {

StabilityVerdict verdict_from_eigs(const std::vector<Complex>& eigs) {
    const double rho = max_modulus(eigs);
    if (rho > 1.0 + kUnitCircleTol) return StabilityVerdict::Unstable;
    if (rho >= 1.0 - kUnitCircleTol) return StabilityVerdict::Marginal;
    return StabilityVerdict::Stable;
}

// Limiting feedthrough-case closed loop A - L C with
// L = A K + (G - A K H) M at the RDE fixed point X.
Matrix ft_closed_loop_from_X(const LinearSystem& sys, const Matrix& X) {
    const Matrix Rt = symmetrize(sys.C * X * sys.C.transpose() + sys.R);
    const Matrix W = chol_solve(Rt, sys.H, "Rtilde");
    const Matrix F = symmetrize(sys.H.transpose() * W);
    const Matrix M = chol_solve(F, W.transpose(), "H' Rtilde^{-1} H");
    const Matrix K = chol_solve(Rt, sys.C * X, "Rtilde").transpose();
    const Matrix L = sys.A * K + (sys.G - sys.A * K * sys.H) * M;
    return sys.A - L * sys.C;
}

}  // namespace

StabilityReport verdict(const LinearSystem& sys, const RdeOptions& opts) {
    const AssumptionReport as = validate(sys);
    StabilityReport rep;

    if (!sys.has_feedthrough()) {
        if (!as.assumption2)
            throw AssumptionError(
                "verdict: H = 0 and rank CG < m; no SISE variant applies");
        const TransformedSystem tf = transform_zero_feedthrough(sys);
        const ZfRiccatiData data = zf_riccati_data(sys, tf);
        rep.stabilizability = stabilizable(data.Abar, psd_sqrt(data.Qbar));
        rep.stabilizability_applicable = true;

        if (sys.is_square()) {
            rep.variant = SiseVariantTag::SquareZeroFeedthrough;
            rep.sise_system_matrix = sise_matrix_square_zf(sys);
            rep.eigenvalues = eigenvalues(rep.sise_system_matrix);
            rep.transmission_zeros = rep.eigenvalues;
            rep.limiting_closed_loop = rep.sise_system_matrix;
            rep.closed_loop_eigenvalues = rep.eigenvalues;
            rep.verdict = verdict_from_eigs(rep.eigenvalues);
            if (rep.verdict == StabilityVerdict::Stable) {
                const RdeResult rde =
                    rde_zf(sys, tf, Matrix::Identity(sys.n, sys.n), opts);
                if (rde.converged) {
                    rep.rde_limit = rde.X;
                    rep.rde_iterations = rde.iterations;
                }
            }
            return rep;
        }

        rep.variant = SiseVariantTag::NonsquareZeroFeedthrough;
        rep.detectability = detectable(data.Abar, data.C2);
        rep.detectability_applicable = true;
        const RdeResult rde = rde_zf(sys, tf, Matrix::Identity(sys.n, sys.n), opts);
        rep.rde_iterations = rde.iterations;
        rep.rde_diverged = rde.diverged;
        if (rde.converged) {
            rep.rde_limit = rde.X;
            const ZfGains g = zf_gains_from_X(sys, rde.X);
            const Matrix Hcal =
                sys.G * g.M - g.K * sys.C * sys.G * g.M + g.K;
            rep.limiting_closed_loop =
                (Matrix::Identity(sys.n, sys.n) - Hcal * sys.C) * sys.A;
            rep.closed_loop_eigenvalues = eigenvalues(*rep.limiting_closed_loop);
            rep.sise_system_matrix = *rep.limiting_closed_loop;
            rep.eigenvalues = rep.closed_loop_eigenvalues;
            rep.verdict = verdict_from_eigs(rep.closed_loop_eigenvalues);
        } else {
            rep.sise_system_matrix = data.Abar;
            rep.eigenvalues = eigenvalues(data.Abar);
            rep.verdict =
                rde.diverged ? StabilityVerdict::Unstable : StabilityVerdict::Marginal;
            rep.note = rde.diverged
                           ? "RDE diverged; the matrix shown is the open-loop Abar"
                           : "RDE did not settle within max_iter";
        }
        return rep;
    }

    // H != 0
    if (as.assumption3) {
        if (sys.is_square()) {
            rep.variant = SiseVariantTag::SquareFeedthrough;
            rep.sise_system_matrix = sise_matrix_square_ft(sys);
            rep.eigenvalues = eigenvalues(rep.sise_system_matrix);
            rep.transmission_zeros = rep.eigenvalues;
            rep.limiting_closed_loop = rep.sise_system_matrix;
            rep.closed_loop_eigenvalues = rep.eigenvalues;
            rep.verdict = verdict_from_eigs(rep.eigenvalues);
            if (rep.verdict == StabilityVerdict::Stable) {
                const TransformedSystem tf = transform_feedthrough(sys);
                const RdeResult rde =
                    rde_ft(sys, tf, Matrix::Identity(sys.n, sys.n), opts);
                if (rde.converged) {
                    rep.rde_limit = rde.X;
                    rep.rde_iterations = rde.iterations;
                }
            }
            return rep;
        }

        rep.variant = SiseVariantTag::NonsquareFeedthrough;
        const TransformedSystem tf = transform_feedthrough(sys);
        const FtRiccatiData data = ft_riccati_data(sys, tf);
        rep.detectability = detectable(data.Ahat, data.C2);
        rep.detectability_applicable = true;
        const RdeResult rde = rde_ft(sys, tf, Matrix::Identity(sys.n, sys.n), opts);
        rep.rde_iterations = rde.iterations;
        rep.rde_diverged = rde.diverged;
        if (rde.converged) {
            rep.rde_limit = rde.X;
            rep.limiting_closed_loop = ft_closed_loop_from_X(sys, rde.X);
            rep.closed_loop_eigenvalues = eigenvalues(*rep.limiting_closed_loop);
            rep.sise_system_matrix = *rep.limiting_closed_loop;
            rep.eigenvalues = rep.closed_loop_eigenvalues;
            rep.verdict = verdict_from_eigs(rep.closed_loop_eigenvalues);
        } else {
            rep.sise_system_matrix = data.Ahat;
            rep.eigenvalues = eigenvalues(data.Ahat);
            rep.verdict =
                rde.diverged ? StabilityVerdict::Unstable : StabilityVerdict::Marginal;
            rep.note = rde.diverged
                           ? "RDE diverged; the matrix shown is the open-loop Ahat"
                           : "RDE did not settle within max_iter";
        }
        return rep;
    }

    // rank H < m: detectability prediction for the rank-deficient recursion.
    if (!as.assumption4)
        throw AssumptionError(
            "verdict: rank H < m and rank C2bar G2 != m - rank Hbar; no variant applies");
    rep.variant = SiseVariantTag::RankDeficientFeedthrough;
    const TransformedSystem tf = transform_feedthrough(sys);
    const Matrix GHi = solve_right(tf.G1, tf.Hbar, "Hbar");
    rep.sise_system_matrix = sys.A - GHi * tf.C1;
    rep.eigenvalues = eigenvalues(rep.sise_system_matrix);
    rep.detectability = detectable(rep.sise_system_matrix, tf.C2);
    rep.detectability_applicable = true;
    rep.verdict = rep.detectability.detectable ? StabilityVerdict::Stable
                                               : StabilityVerdict::Unstable;
    rep.note =
        "stability prediction for the rank-deficient feedthrough recursion; the "
        "corresponding filter is outside this toolkit";
    return rep;
}

const char* to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::Stable: return "stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Marginal: return "marginal";
    }
    return "?";
}

const char* to_string(SiseVariantTag v) {
    switch (v) {
        case SiseVariantTag::SquareZeroFeedthrough: return "square-zero-feedthrough";
        case SiseVariantTag::NonsquareZeroFeedthrough: return "nonsquare-zero-feedthrough";
        case SiseVariantTag::SquareFeedthrough: return "square-feedthrough";
        case SiseVariantTag::NonsquareFeedthrough: return "nonsquare-feedthrough";
        case SiseVariantTag::RankDeficientFeedthrough: return "rank-deficient-feedthrough";
    }
    return "?";
}

}  // namespace siselab
