#pragma once

#include "siselab/linear_system.hpp"

#include <string>
#include <vector>

namespace siselab {

// Result of the four structural checks. Failure is data, not an exception:
// every verdict is reproducible from the stored ranks and mode lists.
struct AssumptionReport {
    // Assumption 1 pieces: [A,C] observable, rank G = m, [A,Q] reachable, R > 0.
    bool observable = false;
    bool rank_G_full = false;
    bool reachable = false;
    bool R_positive_definite = false;
    bool assumption1 = false;

    bool assumption2 = false;  // rank CG = m
    bool assumption3 = false;  // rank H = m
    bool assumption4 = false;  // rank C2bar*G2 = m - rank Hbar

    // Diagnostics backing the verdicts.
    int rank_G = 0;
    int rank_CG = 0;
    int rank_H = 0;
    int rank_Hbar = 0;          // = rank_H (rank of the invertible SVD block)
    int rank_C2bar_G2 = 0;
    double cond_G = 0.0;
    double cond_CG = 0.0;
    double cond_H = 0.0;        // over the counted singular values
    double min_eig_R = 0.0;
    std::vector<Complex> unobservable_modes;   // PBH failures of [A, C]
    std::vector<Complex> unreachable_modes;    // PBH failures of [A, Q^(1/2)]

    // Left-invertibility meaning of each satisfied structural assumption
    // (delay with which d can be reconstructed from outputs).
    std::vector<std::string> invertibility_notes;
};

// Runs every check; never throws on a failed assumption. Shape problems
// (inconsistent dimensions) still raise ShapeError via make_system upstream.
AssumptionReport validate(const LinearSystem& sys);

// PBH observability of the pair (A, C): rank [A - lambda I; C] = n at every
// eigenvalue lambda of A. Returns the failing modes.
std::vector<Complex> pbh_unobservable_modes(const Matrix& A, const Matrix& C);

// PBH reachability of (A, B): rank [A - lambda I, B] = n at every eigenvalue.
std::vector<Complex> pbh_unreachable_modes(const Matrix& A, const Matrix& B);

}  // namespace siselab
