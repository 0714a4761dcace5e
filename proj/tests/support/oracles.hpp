#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include "siselab/linear_system.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace siselab::test {

// Roots of c_0 + c_1 z + ... + c_d z^d via the companion matrix.
inline std::vector<Complex> polynomial_roots(std::vector<Complex> coeffs) {
    // strip negligible leading coefficients
    double maxc = 0.0;
    for (const auto& c : coeffs) maxc = std::max(maxc, std::abs(c));
    while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-9 * maxc) coeffs.pop_back();
    const int d = static_cast<int>(coeffs.size()) - 1;
    std::vector<Complex> roots;
    if (d < 1) return roots;
    ComplexMatrix comp = ComplexMatrix::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -coeffs[i] / coeffs[d];
    Eigen::ComplexEigenSolver<ComplexMatrix> es(comp);
    for (int i = 0; i < d; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

// det of the Rosenbrock-style pencil evaluated at z:
//   H = 0 case:  [[zI - A, -G], [zC, 0]]
//   H != 0 case: [[zI - A, -G], [C,  H]]
inline Complex pencil_det(const LinearSystem& sys, Complex z) {
    const int n = sys.n, m = sys.m;
    ComplexMatrix P(n + m, n + m);
    P.topLeftCorner(n, n) = -sys.A.cast<Complex>();
    P.topLeftCorner(n, n).diagonal().array() += z;
    P.topRightCorner(n, m) = -sys.G.cast<Complex>();
    if (sys.has_feedthrough()) {
        P.bottomLeftCorner(m, n) = sys.C.cast<Complex>();
        P.bottomRightCorner(m, m) = sys.H.cast<Complex>();
    } else {
        P.bottomLeftCorner(m, n) = z * sys.C.cast<Complex>();
        P.bottomRightCorner(m, m) = ComplexMatrix::Zero(m, m);
    }
    return P.determinant();
}

// Transmission zeros of the square d->y map by determinant-polynomial
// interpolation: evaluate det P(z) on a circle, recover the coefficients by
// an inverse DFT, and take companion-matrix roots. Fully independent of the
// closed-form system-matrix eigenvalue route.
inline std::vector<Complex> rosenbrock_zeros_oracle(const LinearSystem& sys) {
    const int deg_bound = sys.n + sys.m;  // entries are degree <= 1 per row
    const int K = deg_bound + 8;
    const double rho = 1.37;
    std::vector<Complex> vals(K);
    for (int k = 0; k < K; ++k) {
        const double w = 2.0 * M_PI * k / K;
        vals[k] = pencil_det(sys, rho * Complex(std::cos(w), std::sin(w)));
    }
    std::vector<Complex> coeffs(deg_bound + 1);
    for (int j = 0; j <= deg_bound; ++j) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k < K; ++k) {
            const double w = -2.0 * M_PI * j * k / K;
            acc += vals[k] * Complex(std::cos(w), std::sin(w));
        }
        coeffs[j] = acc / (static_cast<double>(K) * std::pow(rho, j));
    }
    return polynomial_roots(std::move(coeffs));
}

// Minimal-sum bipartite matching on |a_i - b_j| (enumeration; n <= ~9).
// Returns the largest matched distance under the optimal assignment.
inline double matched_max_distance(const std::vector<Complex>& a,
                                   const std::vector<Complex>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(a.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    double best_max = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0, mx = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = std::abs(a[i] - b[perm[i]]);
            cost += d;
            mx = std::max(mx, d);
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_max = mx;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_max;
}

}  // namespace siselab::test
