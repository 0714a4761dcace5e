#include "siselab/simulate.hpp"

#include "siselab/errors.hpp"

#include <cmath>

namespace siselab {

GaussianStream::GaussianStream(std::uint64_t seed) : rng_(seed) {}

double GaussianStream::uniform01() {
    // 53-bit mantissa in (0, 1].
    return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Vector GaussianStream::next_vector(int size) {
    Vector v(size);
    for (int i = 0; i < size; ++i) v(i) = next();
    return v;
}

Trajectory simulate(const LinearSystem& sys, const std::vector<Vector>& d,
                    const Vector& x0, int horizon, std::uint64_t seed,
                    bool noise_on, const std::vector<Vector>& us) {
    if (horizon < 1) throw ShapeError("simulate: horizon must be >= 1");
    if (static_cast<int>(d.size()) < horizon)
        throw ShapeError("simulate: disturbance sequence shorter than horizon");
    if (x0.size() != sys.n) throw ShapeError("simulate: x0 must have n entries");
    if (!us.empty() && static_cast<int>(us.size()) < horizon)
        throw ShapeError("simulate: known-input sequence shorter than horizon");

    auto dist_at = [&](int t) -> Vector {
        if (t < static_cast<int>(d.size())) {
            if (d[t].size() != sys.m) throw ShapeError("simulate: disturbance entry size != m");
            return d[t];
        }
        return Vector::Zero(sys.m);
    };
    auto input_at = [&](int t) -> Vector {
        if (!us.empty() && t < static_cast<int>(us.size())) {
            if (us[t].size() != sys.q) throw ShapeError("simulate: known-input entry size != q");
            return us[t];
        }
        return Vector::Zero(sys.q);
    };

    const Matrix Lq = psd_sqrt(sys.Q);
    const Matrix Lr = psd_sqrt(sys.R);
    GaussianStream stream(seed);

    Trajectory traj;
    traj.horizon = horizon;
    traj.seed = seed;
    traj.states.reserve(horizon + 1);
    traj.disturbances.reserve(horizon + 1);
    traj.measurements.reserve(horizon + 1);

    Vector x = x0;
    traj.states.push_back(x);
    {
        Vector y = sys.C * x + sys.H * dist_at(0);
        if (sys.q > 0) y += sys.D * input_at(0);
        if (noise_on) y += Lr * stream.next_vector(sys.p);
        traj.measurements.push_back(y);
        traj.disturbances.push_back(dist_at(0));
    }

    for (int t = 0; t < horizon; ++t) {
        Vector xn = sys.A * x + sys.G * dist_at(t);
        if (sys.q > 0) xn += sys.B * input_at(t);
        if (noise_on) xn += Lq * stream.next_vector(sys.n);
        x = xn;
        traj.states.push_back(x);

        const int tn = t + 1;
        Vector y = sys.C * x + sys.H * dist_at(tn);
        if (sys.q > 0) y += sys.D * input_at(tn);
        if (noise_on) y += Lr * stream.next_vector(sys.p);
        traj.measurements.push_back(y);
        if (tn <= horizon) traj.disturbances.push_back(dist_at(tn));
    }
    return traj;
}

}  // namespace siselab
