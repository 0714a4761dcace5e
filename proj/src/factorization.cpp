#include "siselab/factorization.hpp"

#include "siselab/assumptions.hpp"
#include "siselab/errors.hpp"
#include "siselab/singular_kf.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace siselab {

ComplexMatrix evaluate_transfer(const StateSpace& ss, Complex z) {
    if (ss.order() == 0) return ss.D.cast<Complex>();
    ComplexMatrix zIA = -ss.A.cast<Complex>();
    zIA.diagonal().array() += z;
    const ComplexMatrix X = zIA.partialPivLu().solve(ss.B.cast<Complex>());
    return ss.D.cast<Complex>() + ss.C.cast<Complex>() * X;
}

namespace {

StateSpace plant_transfer(const LinearSystem& sys) {
    return StateSpace{sys.A, sys.G, sys.C, sys.H};
}

// Left inverse feedthrough: Hcheck^+ = (Hcheck' Hcheck)^{-1} Hcheck'
// (plain inverse in the square case).
Matrix left_pinv(const Matrix& M, const char* label) {
    const Matrix F = M.transpose() * M;
    Eigen::FullPivLU<Matrix> lu(F);
    if (!lu.isInvertible()) {
        const RankInfo info = numerical_rank(M);
        throw SingularityError(std::string(label) + " has no left inverse",
                               info.condition);
    }
    return lu.solve(M.transpose());
}

// Moore-Penrose inverse of a symmetric PSD matrix.
Matrix pinv_psd(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double thresh = std::max(1.0, lmax) * 1e-13 * S.rows();
    Vector inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i)
        inv(i) = (inv(i) > thresh) ? 1.0 / inv(i) : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Rank-revealing p x m factor of a PSD matrix: Re = Hc Hc'. Columns are
// oriented so the leading entries are positive; in the square full-rank case
// the symmetric PSD square root is used so the result has positive definite
// symmetric part.
Matrix innovation_factor(const Matrix& Re, int m) {
    const int p = static_cast<int>(Re.rows());
    if (p == m) return psd_sqrt(Re);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(Re));
    Matrix Hc(p, m);
    // eigenvalues ascend: take the top m
    for (int j = 0; j < m; ++j) {
        const int idx = p - 1 - j;
        const double lam = std::max(es.eigenvalues()(idx), 0.0);
        Vector col = std::sqrt(lam) * es.eigenvectors().col(idx);
        for (int i = 0; i < p; ++i) {
            if (std::abs(col(i)) > 1e-12) {
                if (col(i) < 0.0) col = -col;
                break;
            }
        }
        Hc.col(j) = col;
    }
    return Hc;
}

struct AreOutcome {
    Matrix X;
    int iterations = 0;
};

AreOutcome solve_spectral_are(const Matrix& A, const Matrix& C, const Matrix& Q,
                              const Matrix& R, const Matrix& S,
                              const Matrix& X0, const FactorizationOptions& opts) {
    Matrix X = symmetrize(X0);
    for (int it = 1; it <= opts.max_iter; ++it) {
        Matrix Xn;
        try {
            Xn = riccati_step(X, A, C, Q, R, S);
        } catch (const SingularityError& e) {
            throw NumericError(std::string("inner_outer: spectral Riccati iteration "
                                           "broke down: ") +
                               e.what());
        }
        const double delta = (Xn - X).cwiseAbs().maxCoeff();
        X = Xn;
        if (!X.allFinite())
            throw NumericError("inner_outer: spectral Riccati iteration left the "
                               "representable range");
        if (delta < opts.tol) return {X, it};
    }
    throw NumericError("inner_outer: spectral Riccati iteration did not converge");
}

void check_no_unit_circle_zeros(const LinearSystem& sys) {
    if (!sys.is_square()) return;  // non-square: the iteration itself decides
    std::vector<Complex> zeros;
    try {
        zeros = transmission_zeros_square(sys);
    } catch (const AssumptionError&) {
        return;
    } catch (const SingularityError&) {
        return;
    }
    for (const Complex& z : zeros) {
        const double a = std::abs(z);
        if (a >= 1.0 - kUnitCircleTol && a <= 1.0 + kUnitCircleTol)
            throw MarginalError(
                "inner_outer: transmission zero on the unit circle; no inner-outer "
                "factorization with a stable invertible outer factor exists");
    }
}

}  // namespace

double allpass_deviation(const StateSpace& ss, int grid_size) {
    if (ss.D.rows() != ss.D.cols())
        throw ShapeError("allpass_deviation requires a square realization");
    const int m = static_cast<int>(ss.D.rows());
    double dev = 0.0;
    for (int k = 0; k < grid_size; ++k) {
        const double w = 2.0 * M_PI * k / grid_size;
        const ComplexMatrix Ti = evaluate_transfer(ss, Complex(std::cos(w), std::sin(w)));
        const ComplexMatrix E =
            Ti.adjoint() * Ti - ComplexMatrix::Identity(m, m);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(E);
        dev = std::max(dev, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return dev;
}

Factorization inner_outer(const LinearSystem& sys, const FactorizationOptions& opts) {
    const double rhoA = spectral_radius(sys.A);
    if (rhoA >= 1.0 - kUnitCircleTol)
        throw AssumptionError(
            "inner_outer: plant A must be Schur (provide a stabilized realization)");
    check_no_unit_circle_zeros(sys);

    Factorization fact;
    Matrix Gcheck, Hcheck;
    StateSpace inner;

    if (sys.has_feedthrough()) {
        // Biproper branch: factor T = H + C(zI-A)^{-1}G directly.
        const Matrix Qs = sys.G * sys.G.transpose();
        const Matrix Rs = sys.H * sys.H.transpose();
        const Matrix Ss = sys.G * sys.H.transpose();
        const AreOutcome are = solve_spectral_are(
            sys.A, sys.C, Qs, Rs, Ss, Matrix::Identity(sys.n, sys.n), opts);
        fact.are_iterations = are.iterations;

        const Matrix Re =
            symmetrize(sys.C * are.X * sys.C.transpose() + Rs);
        Hcheck = innovation_factor(Re, sys.m);
        const Matrix L = sys.A * are.X * sys.C.transpose() + Ss;
        Matrix K;  // L Re^{-1} (pseudo-inverse when Re is rank deficient)
        if (sys.p == sys.m) {
            K = chol_solve(Re, L.transpose(), "factorization Re").transpose();
        } else {
            K = L * pinv_psd(Re);
        }
        Gcheck = K * Hcheck;

        const Matrix Hp = left_pinv(Hcheck, "Hcheck");
        inner.A = sys.A - Gcheck * Hp * sys.C;
        inner.B = sys.G - Gcheck * Hp * sys.H;
        inner.C = Hp * sys.C;
        inner.D = Hp * sys.H;
        fact.note = "feedthrough plant: biproper spectral factor";
    } else {
        // Zero-feedthrough branch: factor the biproper z-shifted map; the
        // outer factor keeps H = 0 and the one-step delay stays with the
        // estimator dispatch.
        const Matrix Qs = sys.G * sys.G.transpose();
        const Matrix Rs = Matrix::Zero(sys.p, sys.p);
        const AreOutcome are = solve_spectral_are(
            sys.A, sys.C, Qs, Rs, Matrix(),
            Matrix(Qs + Matrix::Identity(sys.n, sys.n)), opts);
        fact.are_iterations = are.iterations;

        const Matrix Re = symmetrize(sys.C * are.X * sys.C.transpose());
        Hcheck = innovation_factor(Re, sys.m);  // feedthrough of z T_o
        Matrix Z;
        if (sys.p == sys.m) {
            Z = chol_solve(Re, Hcheck, "factorization Re");
        } else {
            Z = pinv_psd(Re) * Hcheck;
        }
        Gcheck = are.X * sys.C.transpose() * Z;

        const Matrix N = sys.C * Gcheck;  // = Hcheck by construction
        const Matrix Np = left_pinv(N, "C Gcheck");
        inner.A = sys.A - Gcheck * Np * sys.C * sys.A;
        inner.B = sys.G - Gcheck * Np * sys.C * sys.G;
        inner.C = Np * sys.C * sys.A;
        inner.D = Np * sys.C * sys.G;
        fact.note =
            "zero-feedthrough plant: the one-step-delayed biproper map was factored; "
            "the outer factor keeps zero feedthrough and the estimator dispatch "
            "carries the delay";
        Hcheck = Matrix::Zero(sys.p, sys.m);
    }

    fact.outer = make_system(sys.A, Gcheck, sys.C, Hcheck, sys.Q, sys.R, sys.B, sys.D);
    fact.inner = inner;

    // Outer transmission zeros via the square-case formulas.
    if (sys.p == sys.m) {
        fact.outer_zeros = transmission_zeros_square(fact.outer);
    } else {
        fact.outer_zeros = eigenvalues(inner.A);
    }
    for (const Complex& z : fact.outer_zeros) {
        if (std::abs(z) >= 1.0 - kUnitCircleTol)
            throw MarginalError(
                "inner_outer: outer factor has a zero within tolerance of the unit "
                "circle");
    }

    const StateSpace T = plant_transfer(sys);
    const StateSpace To = plant_transfer(fact.outer);
    const int grid = std::max(opts.grid_size, 128);
    double mismatch = 0.0;
    for (int k = 0; k < grid; ++k) {
        const double w = 2.0 * M_PI * k / grid;
        const Complex z(std::cos(w), std::sin(w));
        const ComplexMatrix lhs = evaluate_transfer(T, z);
        const ComplexMatrix rhs =
            evaluate_transfer(To, z) * evaluate_transfer(inner, z);
        mismatch = std::max(mismatch, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    fact.product_mismatch = mismatch;
    fact.allpass_deviation = allpass_deviation(inner, grid);
    return fact;
}

OuterEstimates estimate_via_outer(const LinearSystem& sys, const std::vector<Vector>& ys,
                                  const FilterInit& init) {
    OuterEstimates out;
    out.factorization = inner_outer(sys);
    const LinearSystem& outer = out.factorization.outer;
    const AssumptionReport as = validate(outer);

    const bool zf_ok = !outer.has_feedthrough() && as.assumption2;
    const bool ft_ok = outer.has_feedthrough() && as.assumption3;
    if (zf_ok || ft_ok) {
        out.estimates = run_filter(outer, ys, init);
    } else {
        out.estimates = run_akf(outer, 1e8, ys, init);
        out.used_akf_engine = true;
    }
    return out;
}

RecoverResult recover_d(const std::vector<Vector>& dcheck, const StateSpace& inner,
                        RecoverMode mode) {
    if (mode != RecoverMode::FixedInterval)
        throw NumericError("recover_d: only offline fixed-interval recovery is supported");

    const int T = static_cast<int>(dcheck.size());
    const int m = static_cast<int>(inner.D.rows());
    RecoverResult res;
    res.d.assign(T, Vector::Zero(m));
    if (T == 0) return res;

    // d = Ti~ dcheck: the adjoint system (A', C', B', D') run causally over
    // the reversed sequence.
    Vector xi = Vector::Zero(inner.order());
    for (int tau = 0; tau < T; ++tau) {
        const Vector& r = dcheck[T - 1 - tau];
        res.d[T - 1 - tau] = inner.D.transpose() * r +
                             (inner.order() > 0 ? Vector(inner.B.transpose() * xi)
                                                : Vector::Zero(m));
        if (inner.order() > 0)
            xi = inner.A.transpose() * xi + inner.C.transpose() * r;
    }

    const bool has_dynamics =
        inner.order() > 0 && inner.B.cwiseAbs().maxCoeff() > 1e-14;
    if (has_dynamics) {
        const double rho = spectral_radius(inner.A);
        if (rho > 0.0 && rho < 1.0) {
            res.edge_effect_len = std::min<int>(
                T, static_cast<int>(std::ceil(std::log(1e-8) / std::log(rho))));
        } else {
            res.edge_effect_len = (rho <= 0.0) ? inner.order() : T;
        }
    }
    return res;
}

}  // namespace siselab
