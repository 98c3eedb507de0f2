#pragma once

#include <stdexcept>
#include <string>

namespace hall {

/// Invalid user-facing configuration (geometry, ranges, config files).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A spectral cut falls on (or within tie tolerance of) an eigenvalue.
class AmbiguousCutError : public std::runtime_error {
public:
    AmbiguousCutError(double eigenvalue, double cut);
    double eigenvalue() const { return eigenvalue_; }
    double cut() const { return cut_; }

private:
    double eigenvalue_;
    double cut_;
};

}  // namespace hall
