#include "siselab/linear_system.hpp"

#include "siselab/errors.hpp"

#include <string>

namespace siselab {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

Matrix check_symmetric(const Matrix& S, const char* name) {
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ShapeError(std::string(name) + " must be symmetric");
    }
    return symmetrize(S);
}

}  // namespace

LinearSystem make_system(const Matrix& A, const Matrix& G, const Matrix& C,
                         const Matrix& H, const Matrix& Q, const Matrix& R,
                         const Matrix& B, const Matrix& D) {
    LinearSystem sys;
    sys.n = static_cast<int>(A.rows());
    sys.m = static_cast<int>(G.cols());
    sys.p = static_cast<int>(C.rows());

    require(sys.n > 0, "A must be nonempty");
    require(A.cols() == sys.n, "A must be square");
    require(sys.m > 0, "G must have at least one column");
    require(G.rows() == sys.n, "G must have n rows");
    require(sys.p > 0, "C must have at least one row");
    require(C.cols() == sys.n, "C must have n columns");

    Matrix Hfull = H;
    if (Hfull.size() == 0) Hfull = Matrix::Zero(sys.p, sys.m);
    require(Hfull.rows() == sys.p && Hfull.cols() == sys.m, "H must be p x m");

    require(Q.rows() == sys.n && Q.cols() == sys.n, "Q must be n x n");
    require(R.rows() == sys.p && R.cols() == sys.p, "R must be p x p");

    sys.A = A;
    sys.G = G;
    sys.C = C;
    sys.H = Hfull;
    sys.Q = check_symmetric(Q, "Q");
    sys.R = check_symmetric(R, "R");

    if (B.size() > 0 || D.size() > 0) {
        require(B.size() > 0, "D given without B");
        sys.q = static_cast<int>(B.cols());
        require(B.rows() == sys.n, "B must have n rows");
        Matrix Dfull = D;
        if (Dfull.size() == 0) Dfull = Matrix::Zero(sys.p, sys.q);
        require(Dfull.rows() == sys.p && Dfull.cols() == sys.q, "D must be p x q");
        sys.B = B;
        sys.D = Dfull;
    } else {
        sys.q = 0;
        sys.B = Matrix::Zero(sys.n, 0);
        sys.D = Matrix::Zero(sys.p, 0);
    }
    return sys;
}

LinearSystem make_system_zero_feedthrough(const Matrix& A, const Matrix& G,
                                          const Matrix& C, const Matrix& Q,
                                          const Matrix& R) {
    return make_system(A, G, C, Matrix::Zero(C.rows(), G.cols()), Q, R);
}

}  // namespace siselab
