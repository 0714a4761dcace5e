#include "siselab/transform.hpp"

#include "siselab/errors.hpp"

#include <Eigen/SVD>

namespace siselab {

namespace {

// Deterministic SVD orientation: the first entry of each left singular
// vector with magnitude above 1e-12 is made positive. V columns paired with
// a nonzero singular value flip along to keep the product unchanged; the
// remaining V columns are normalized independently.
void fix_svd_signs(Matrix& U, Matrix& V, int rank) {
    auto first_significant = [](const Vector& col) {
        for (int i = 0; i < col.size(); ++i)
            if (std::abs(col(i)) > 1e-12) return col(i);
        return 0.0;
    };
    for (int j = 0; j < U.cols(); ++j) {
        if (first_significant(U.col(j)) < 0.0) {
            U.col(j) = -U.col(j);
            if (j < rank && j < V.cols()) V.col(j) = -V.col(j);
        }
    }
    for (int j = rank; j < V.cols(); ++j) {
        if (first_significant(V.col(j)) < 0.0) V.col(j) = -V.col(j);
    }
}

// Builds the p x p transformation from the leading/trailing left singular
// blocks and the measurement covariance:
//   T = [Ua' - Ua' R Ub (Ub' R Ub)^{-1} Ub';
//        Ub'].
Matrix build_T(const Matrix& Ua, const Matrix& Ub, const Matrix& R) {
    const int p = static_cast<int>(Ua.rows());
    Matrix T(p, p);
    if (Ub.cols() == 0) {
        T = Ua.transpose();
        return T;
    }
    const Matrix RUb = R * Ub;
    const Matrix W = Ub.transpose() * RUb;  // PD since R > 0
    const Matrix cross = chol_solve(W, RUb.transpose() * Ua, "Ub' R Ub");
    T.topRows(Ua.cols()) = Ua.transpose() - cross.transpose() * Ub.transpose();
    T.bottomRows(Ub.cols()) = Ub.transpose();
    return T;
}

}  // namespace

TransformedSystem transform_zero_feedthrough(const LinearSystem& sys) {
    if (sys.has_feedthrough())
        throw AssumptionError("transform_zero_feedthrough requires H = 0");
    if (sys.p < sys.m) throw ShapeError("transform requires p >= m");

    const Matrix CG = sys.C * sys.G;
    Eigen::JacobiSVD<Matrix> svd(CG, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix U = svd.matrixU();
    Matrix V = svd.matrixV();
    const Vector sigma = svd.singularValues();

    const double thresh =
        static_cast<double>(std::max(CG.rows(), CG.cols())) * sigma(0) * kRankRelTol;
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > thresh) rank = i + 1;
    if (rank < sys.m)
        throw AssumptionError("rank CG < m: the zero-feedthrough transform does not exist");

    fix_svd_signs(U, V, rank);

    TransformedSystem tf;
    tf.r = sys.m;
    const Matrix Um = U.leftCols(sys.m);
    const Matrix Ub = U.rightCols(sys.p - sys.m);
    tf.T = build_T(Um, Ub, sys.R);
    const Matrix TC = tf.T * sys.C;
    tf.C1 = TC.topRows(sys.m);
    tf.C2 = TC.bottomRows(sys.p - sys.m);
    tf.G1 = sys.G;
    tf.G2 = Matrix::Zero(sys.n, 0);
    tf.Hbar = Matrix();
    tf.V = Matrix::Identity(sys.m, sys.m);
    const Matrix TRT = tf.T * sys.R * tf.T.transpose();
    tf.R1 = symmetrize(TRT.topLeftCorner(sys.m, sys.m));
    tf.R2 = symmetrize(TRT.bottomRightCorner(sys.p - sys.m, sys.p - sys.m));
    return tf;
}

TransformedSystem transform_feedthrough(const LinearSystem& sys) {
    if (!sys.has_feedthrough())
        throw AssumptionError("transform_feedthrough requires H != 0");

    Eigen::JacobiSVD<Matrix> svd(sys.H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix U = svd.matrixU();
    Matrix V = svd.matrixV();
    const Vector sigma = svd.singularValues();

    const double thresh =
        static_cast<double>(std::max(sys.H.rows(), sys.H.cols())) * sigma(0) * kRankRelTol;
    int r = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > thresh) r = i + 1;
    if (r == 0) throw AssumptionError("H is numerically zero");

    fix_svd_signs(U, V, r);

    TransformedSystem tf;
    tf.r = r;
    const Matrix Ur = U.leftCols(r);
    const Matrix Ub = U.rightCols(sys.p - r);
    tf.T = build_T(Ur, Ub, sys.R);
    const Matrix TC = tf.T * sys.C;
    tf.C1 = TC.topRows(r);
    tf.C2 = TC.bottomRows(sys.p - r);
    tf.Hbar = Matrix(sigma.head(r).asDiagonal());
    tf.V = V;
    const Matrix GV = sys.G * V;
    tf.G1 = GV.leftCols(r);
    tf.G2 = GV.rightCols(sys.m - r);
    const Matrix TRT = tf.T * sys.R * tf.T.transpose();
    tf.R1 = symmetrize(TRT.topLeftCorner(r, r));
    tf.R2 = symmetrize(TRT.bottomRightCorner(sys.p - r, sys.p - r));
    return tf;
}

}  // namespace siselab
