#include "siselab/assumptions.hpp"

#include "siselab/errors.hpp"
#include "siselab/transform.hpp"

#include <Eigen/SVD>

#include <algorithm>

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

}  // namespace

std::vector<Complex> pbh_unobservable_modes(const Matrix& A, const Matrix& C) {
    const int n = static_cast<int>(A.rows());
    std::vector<Complex> failing;
    for (const Complex& lam : eigenvalues(A)) {
        ComplexMatrix M(n + C.rows(), n);
        M.topRows(n) = A.cast<Complex>();
        M.topRows(n).diagonal().array() -= lam;
        M.bottomRows(C.rows()) = C.cast<Complex>();
        if (complex_rank(M) < n) failing.push_back(lam);
    }
    return failing;
}

std::vector<Complex> pbh_unreachable_modes(const Matrix& A, const Matrix& B) {
    const int n = static_cast<int>(A.rows());
    std::vector<Complex> failing;
    for (const Complex& lam : eigenvalues(A)) {
        ComplexMatrix M(n, n + B.cols());
        M.leftCols(n) = A.cast<Complex>();
        M.leftCols(n).diagonal().array() -= lam;
        M.rightCols(B.cols()) = B.cast<Complex>();
        if (complex_rank(M) < n) failing.push_back(lam);
    }
    return failing;
}

AssumptionReport validate(const LinearSystem& sys) {
    AssumptionReport rep;

    rep.unobservable_modes = pbh_unobservable_modes(sys.A, sys.C);
    rep.observable = rep.unobservable_modes.empty();

    const RankInfo gi = numerical_rank(sys.G);
    rep.rank_G = gi.rank;
    rep.cond_G = gi.condition;
    rep.rank_G_full = (gi.rank == sys.m);

    rep.unreachable_modes = pbh_unreachable_modes(sys.A, psd_sqrt(sys.Q));
    rep.reachable = rep.unreachable_modes.empty();

    rep.min_eig_R = min_symmetric_eigenvalue(sys.R);
    rep.R_positive_definite = rep.min_eig_R > 0.0;

    rep.assumption1 =
        rep.observable && rep.rank_G_full && rep.reachable && rep.R_positive_definite;

    const RankInfo cgi = numerical_rank(sys.C * sys.G);
    rep.rank_CG = cgi.rank;
    rep.cond_CG = cgi.condition;
    rep.assumption2 = (cgi.rank == sys.m);

    const RankInfo hi = numerical_rank(sys.H);
    rep.rank_H = hi.rank;
    rep.cond_H = hi.condition;
    rep.assumption3 = (hi.rank == sys.m);

    if (!sys.has_feedthrough()) {
        // H = 0: the SVD structure degenerates to the identity transform and
        // the mixed-rank condition coincides with rank CG = m.
        rep.rank_Hbar = 0;
        rep.rank_C2bar_G2 = rep.rank_CG;
        rep.assumption4 = rep.assumption2;
    } else {
        const TransformedSystem tf = transform_feedthrough(sys);
        rep.rank_Hbar = tf.r;
        rep.rank_C2bar_G2 = numerical_rank(tf.C2 * tf.G2).rank;
        rep.assumption4 = (rep.rank_C2bar_G2 == sys.m - tf.r);
    }

    if (rep.assumption2)
        rep.invertibility_notes.push_back(
            "rank CG = m: the strictly proper d->y map is left invertible with delay one");
    if (rep.assumption3)
        rep.invertibility_notes.push_back(
            "rank H = m: the d->y map is left invertible with delay zero");
    if (rep.assumption4)
        rep.invertibility_notes.push_back(
            "rank C2bar G2 = m - rank Hbar: the d->y map is left invertible with delay one");

    return rep;
}

}  // namespace siselab
