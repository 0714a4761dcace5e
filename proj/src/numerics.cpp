#include "siselab/numerics.hpp"

#include "siselab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace siselab {

RankInfo numerical_rank(const Matrix& M) {
    RankInfo info;
    if (M.rows() == 0 || M.cols() == 0) return info;
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    info.sigma_max = s(0);
    info.sigma_min = s(s.size() - 1);
    const double thresh =
        static_cast<double>(std::max(M.rows(), M.cols())) * info.sigma_max * kRankRelTol;
    for (int i = 0; i < s.size(); ++i) {
        if (s(i) > thresh) info.rank = i + 1;
    }
    if (info.rank > 0) {
        info.condition = info.sigma_max / s(info.rank - 1);
    } else {
        info.condition = std::numeric_limits<double>::infinity();
    }
    return info;
}

bool is_psd(const Matrix& S, double tol) {
    if (S.rows() != S.cols()) return false;
    if (S.rows() == 0) return true;
    if ((S - S.transpose()).cwiseAbs().maxCoeff() >
        tol * std::max(1.0, S.cwiseAbs().maxCoeff()))
        return false;
    return min_symmetric_eigenvalue(symmetrize(S)) >=
           -tol * std::max(1.0, S.cwiseAbs().maxCoeff());
}

double min_symmetric_eigenvalue(const Matrix& S) {
    if (S.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix psd_sqrt(const Matrix& S) {
    if (S.rows() == 0) return S;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
    Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Matrix chol_solve(const Matrix& S, const Matrix& B, const char* label) {
    Eigen::LLT<Matrix> llt(symmetrize(S));
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        const double cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
        throw SingularityError(std::string(label) +
                                   ": Cholesky factorization failed (matrix not positive "
                                   "definite); condition estimate " +
                                   std::to_string(cond),
                               cond);
    }
    return llt.solve(B);
}

std::vector<Complex> eigenvalues(const Matrix& A) {
    std::vector<Complex> out;
    if (A.rows() == 0) return out;
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    for (int i = 0; i < A.rows(); ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

double spectral_radius(const Matrix& A) {
    return max_modulus(eigenvalues(A));
}

double max_modulus(const std::vector<Complex>& eigs) {
    double r = 0.0;
    for (const auto& z : eigs) r = std::max(r, std::abs(z));
    return r;
}

}  // namespace siselab
