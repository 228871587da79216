#pragma once

#include <stdexcept>
#include <string>

namespace ringdec {

// Base of every error thrown by the library. The CLI maps the subclasses
// onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or an argument outside an operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// A series, root scan or quadrature failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_estimate, double error_bound, int iterations)
        : Error(what), best_estimate_(best_estimate), error_bound_(error_bound), iterations_(iterations) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }
    int iterations() const noexcept { return iterations_; }

private:
    double best_estimate_;
    double error_bound_;
    int iterations_;
};

// Numerical result that violates an internal consistency check.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// A downstream operation asked for data the spectrum table does not hold.
class CoverageError : public Error {
public:
    using Error::Error;
};

} // namespace ringdec
