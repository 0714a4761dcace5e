#pragma once

#include <stdexcept>
#include <string>

namespace siselab {

// Matrix dimensions do not line up (or a required block is missing).
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// A structural assumption (rank CG = m, rank H = m, ...) required by the
// selected algorithm does not hold for the given system.
class AssumptionError : public std::runtime_error {
public:
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// A matrix that must be invertible for the recursion turned out singular at
// runtime. Carries a condition estimate of the offending factor.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition(condition_estimate) {}
    double condition;
};

// An iteration failed to converge or left the representable range.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// The requested operation sits exactly on a stability boundary
// (eigenvalues/zeros within tolerance of the unit circle).
class MarginalError : public std::runtime_error {
public:
    explicit MarginalError(const std::string& what) : std::runtime_error(what) {}
};

// The estimator predicted unstable for this plant; the caller asked for an
// operation that is only meaningful for stable configurations.
class UnstableError : public std::runtime_error {
public:
    explicit UnstableError(const std::string& what) : std::runtime_error(what) {}
};

// File / parse problems on the CLI surface.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace siselab
