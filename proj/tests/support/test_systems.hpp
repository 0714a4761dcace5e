#pragma once

// Shared fixture plants and randomized generators for the test suites.

#include "siselab/assumptions.hpp"
#include "siselab/linear_system.hpp"
#include "siselab/simulate.hpp"
#include "siselab/stability.hpp"

#include <random>

namespace siselab::test {

// 2-state square zero-feedthrough, zeros {0, -0.7}: stable.
inline LinearSystem s1() {
    Matrix A(2, 2), G(2, 1), C(1, 2);
    A << 0.5, 1.0, 0.0, 0.3;
    G << 1.0, 1.0;
    C << 1.0, 0.0;
    return make_system_zero_feedthrough(A, G, C, 0.01 * Matrix::Identity(2, 2),
                                        0.01 * Matrix::Identity(1, 1));
}

// Same plant with G = [1;2], zeros {0, -1.7}: unstable SISE.
inline LinearSystem s2() {
    Matrix A(2, 2), G(2, 1), C(1, 2);
    A << 0.5, 1.0, 0.0, 0.3;
    G << 1.0, 2.0;
    C << 1.0, 0.0;
    return make_system_zero_feedthrough(A, G, C, 0.01 * Matrix::Identity(2, 2),
                                        0.01 * Matrix::Identity(1, 1));
}

// Non-square zero-feedthrough (p=2, m=1) with unstable A; detectable.
inline LinearSystem s4() {
    Matrix A(2, 2), G(2, 1);
    A << 0.5, 1.0, 0.0, 1.4;
    G << 1.0, 0.0;
    return make_system_zero_feedthrough(A, G, Matrix::Identity(2, 2),
                                        0.01 * Matrix::Identity(2, 2),
                                        0.01 * Matrix::Identity(2, 2));
}

// Scalar stable square zero-feedthrough.
inline LinearSystem scalar_zf(double a = 0.9, double q = 0.01, double r = 0.01) {
    Matrix A(1, 1), G(1, 1), C(1, 1);
    A << a;
    G << 1.0;
    C << 1.0;
    Matrix Q(1, 1), R(1, 1);
    Q << q;
    R << r;
    return make_system_zero_feedthrough(A, G, C, Q, R);
}

// Scalar square feedthrough; h = 2 gives estimator matrix 0, h = 1 gives -0.5.
inline LinearSystem scalar_ft(double h, double a = 0.5, double q = 0.01, double r = 0.01) {
    Matrix A(1, 1), G(1, 1), C(1, 1), H(1, 1), Q(1, 1), R(1, 1);
    A << a;
    G << 1.0;
    C << 1.0;
    H << h;
    Q << q;
    R << r;
    return make_system(A, G, C, H, Q, R);
}

// Maximum-phase scalar feedthrough plant, T = (z+2)/(z-0.5).
inline LinearSystem maxphase_scalar() {
    Matrix A(1, 1), G(1, 1), C(1, 1), H(1, 1), Q(1, 1), R(1, 1);
    A << 0.5;
    G << 2.5;
    C << 1.0;
    H << 1.0;
    Q << 0.01;
    R << 0.01;
    return make_system(A, G, C, H, Q, R);
}

// 2-state stable square feedthrough (zeros at modulus ~0.707).
inline LinearSystem stable_ft_2d() {
    Matrix A(2, 2), G(2, 1), C(1, 2), H(1, 1);
    A << 0.5, 1.0, 0.0, 0.3;
    G << 1.0, 1.0;
    C << 1.0, 0.0;
    H << 2.0;
    return make_system(A, G, C, H, 0.01 * Matrix::Identity(2, 2),
                       0.01 * Matrix::Identity(1, 1));
}

// 2-state stable square zero-feedthrough (zeros {0, ~0.467}).
inline LinearSystem stable_zf_2d() {
    Matrix A(2, 2), G(2, 1), C(1, 2);
    A << 0.8, 0.2, 0.1, 0.5;
    G << 1.0, 0.5;
    C << 1.0, 1.0;
    return make_system_zero_feedthrough(A, G, C, 0.01 * Matrix::Identity(2, 2),
                                        0.01 * Matrix::Identity(1, 1));
}

// The square configurations with stable SISE (criteria 2/3 test set).
inline std::vector<LinearSystem> stable_square_set() {
    return {s1(), scalar_zf(), stable_zf_2d(), scalar_ft(2.0), scalar_ft(1.0),
            stable_ft_2d()};
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double normal() {
        // explicit Box-Muller (keeps generated systems platform-stable)
        const double u1 =
            static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

inline Matrix random_matrix(Rng& rng, int rows, int cols) {
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

inline Matrix random_spd(Rng& rng, int n, double floor_eig = 0.01) {
    const Matrix L = random_matrix(rng, n, n);
    return Matrix(L * L.transpose() / n + floor_eig * Matrix::Identity(n, n));
}

inline Matrix scale_to_radius(const Matrix& A, double target) {
    const double rho = spectral_radius(A);
    return rho > 0 ? Matrix(A * (target / rho)) : A;
}

inline Matrix random_orthogonal(Rng& rng, int n) {
    const Matrix M = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(M);
    Matrix Q = qr.householderQ();
    return Q;
}

// Random minimal square plant, validated, with SISE zeros kept away from the
// unit circle (|z| outside [0.98, 1.02]) so eigenvalue/oracle comparisons are
// never run on a near-marginal pencil.
inline LinearSystem random_square_system(Rng& rng, int n, bool feedthrough) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const int m = 1 + (n > 2 ? rng.uniform_int(0, 1) : 0);
        const Matrix A = scale_to_radius(random_matrix(rng, n, n), rng.uniform(0.3, 0.95));
        const Matrix G = random_matrix(rng, n, m);
        const Matrix C = random_matrix(rng, m, n);
        Matrix H = Matrix::Zero(m, m);
        if (feedthrough) H = random_matrix(rng, m, m);
        const LinearSystem sys = make_system(A, G, C, H, random_spd(rng, n),
                                             random_spd(rng, m));
        const AssumptionReport as = validate(sys);
        if (!as.assumption1) continue;
        if (feedthrough && !as.assumption3) continue;
        if (!feedthrough && !as.assumption2) continue;
        bool marginal = false;
        try {
            for (const Complex& z : transmission_zeros_square(sys)) {
                const double az = std::abs(z);
                if (az > 0.98 && az < 1.02) marginal = true;
            }
        } catch (const std::exception&) {
            continue;
        }
        if (marginal) continue;
        return sys;
    }
    throw std::runtime_error("random_square_system: generation failed");
}

// Random non-square plant (p = m + extra). With make_detectable false the
// extra output rows are a rotated zero block, so the transformed C2 carries
// no information and the square-core zeros are forced unstable: the paper
// pair is undetectable by construction.
inline LinearSystem random_nonsquare_system(Rng& rng, int n, int extra,
                                            bool feedthrough, bool make_detectable) {
    for (int attempt = 0; attempt < 500; ++attempt) {
        const int m_max = std::max(1, std::min(n - 1, 2));
        const int m = rng.uniform_int(1, m_max);
        const int p = m + extra;
        const Matrix A = scale_to_radius(random_matrix(rng, n, n), rng.uniform(0.4, 1.3));
        const Matrix G = random_matrix(rng, n, m);
        const Matrix C1 = random_matrix(rng, m, n);
        Matrix H1 = Matrix::Zero(m, m);
        if (feedthrough) H1 = random_matrix(rng, m, m);

        if (!make_detectable) {
            // Force the square core to have an unstable zero, safely off the
            // unit circle.
            Matrix core;
            try {
                const LinearSystem sq = make_system(A, G, C1, H1,
                                                    Matrix::Identity(n, n),
                                                    Matrix::Identity(m, m));
                core = feedthrough ? sise_matrix_square_ft(sq)
                                   : sise_matrix_square_zf(sq);
            } catch (const std::exception&) {
                continue;
            }
            const double rho = spectral_radius(core);
            if (rho < 1.07 || rho > 6.0) continue;
        }

        Matrix C(p, n), H(p, m);
        C.topRows(m) = C1;
        H.topRows(m) = H1;
        if (make_detectable) {
            C.bottomRows(extra) = random_matrix(rng, extra, n);
        } else {
            C.bottomRows(extra).setZero();
        }
        H.bottomRows(extra).setZero();

        const Matrix Theta = random_orthogonal(rng, p);
        const Matrix R = random_spd(rng, p);
        LinearSystem sys;
        try {
            sys = make_system(Matrix(A), Matrix(G), Matrix(Theta * C),
                              Matrix(Theta * H), random_spd(rng, n), R);
        } catch (const std::exception&) {
            continue;
        }
        const AssumptionReport as = validate(sys);
        if (!as.assumption1) continue;
        if (feedthrough && !as.assumption3) continue;
        if (!feedthrough && !as.assumption2) continue;
        return sys;
    }
    throw std::runtime_error("random_nonsquare_system: generation failed");
}

}  // namespace siselab::test
