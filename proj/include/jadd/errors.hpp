#pragma once

#include <stdexcept>
#include <string>

namespace jadd {

/// Invalid scenario, detector or CLI configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (dimension mismatch, bad range).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A detector or state-evolution run produced non-finite state.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, int iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

class SingularEstimateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateSupportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace jadd
