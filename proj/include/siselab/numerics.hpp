#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace siselab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Numerical-rank tolerance: sigma_i counts toward rank when
// sigma_i > max(rows, cols) * sigma_max * kRankRelTol.
inline constexpr double kRankRelTol = 1e-12;

// Eigenvalues within this distance of the unit circle are treated as
// marginal, never stable.
inline constexpr double kUnitCircleTol = 1e-9;

struct RankInfo {
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;   // smallest singular value overall
    double condition = 0.0;   // sigma_max / smallest sigma counted in rank (inf-ish when rank 0)
};

RankInfo numerical_rank(const Matrix& M);

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// True when S is symmetric with eigenvalues >= -tol * scale.
bool is_psd(const Matrix& S, double tol = 1e-10);

// Smallest eigenvalue of a symmetric matrix.
double min_symmetric_eigenvalue(const Matrix& S);

// Symmetric PSD square root via eigendecomposition; negative eigenvalues
// (roundoff) are clamped to zero. Rank-revealing: works for singular S.
Matrix psd_sqrt(const Matrix& S);

// Solve S * X = B for symmetric positive definite S via Cholesky.
// Throws SingularityError (with a condition estimate) when the
// factorization fails.
Matrix chol_solve(const Matrix& S, const Matrix& B, const char* label);

std::vector<Complex> eigenvalues(const Matrix& A);

double spectral_radius(const Matrix& A);

// Largest |lambda| over the given set; 0 for an empty set.
double max_modulus(const std::vector<Complex>& eigs);

}  // namespace siselab
