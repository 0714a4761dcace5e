#pragma once

#include "siselab/linear_system.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace siselab {

// A realized sample path of the plant. states/measurements run t = 0..horizon;
// disturbances are stored with the same length (d_horizon only affects
// y_horizon through H and defaults to zero when the caller supplied fewer).
struct Trajectory {
    int horizon = 0;
    std::vector<Vector> states;         // length horizon + 1
    std::vector<Vector> disturbances;   // length horizon + 1
    std::vector<Vector> measurements;   // length horizon + 1
    std::uint64_t seed = 0;
};

// Simulates the plant recursions from x0 under the given disturbance
// sequence (length >= horizon). Noise is Gaussian through rank-revealing
// factors of Q and R; with noise_on false, w = v = 0 exactly. The same seed
// always reproduces the same trajectory. `us` optionally supplies the known
// input (length >= horizon when present).
Trajectory simulate(const LinearSystem& sys, const std::vector<Vector>& d,
                    const Vector& x0, int horizon, std::uint64_t seed,
                    bool noise_on, const std::vector<Vector>& us = {});

// Deterministic standard-normal stream: mt19937_64 (engine is pinned by the
// standard) plus an explicit Box-Muller, so trajectories do not depend on the
// standard library's distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed);
    double next();
    Vector next_vector(int size);

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double uniform01();
};

}  // namespace siselab
