#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ksigma {

/// Invalid argument, shape or range for a mathematical operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A characterization was requested outside the regime where it holds
/// (e.g. the two-inequality radial cone test with k <= n/2).
class UnsupportedRegime : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed problem / configuration input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterate left the admissible cone.
class AdmissibilityError : public std::runtime_error {
public:
    AdmissibilityError(const std::string& what, std::size_t worst_node, double worst_value)
        : std::runtime_error(what), worst_node_(worst_node), worst_value_(worst_value) {}

    std::size_t worst_node() const noexcept { return worst_node_; }
    double worst_value() const noexcept { return worst_value_; }

private:
    std::size_t worst_node_;
    double worst_value_;
};

/// Newton / continuation failed; carries the residual history.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace ksigma
