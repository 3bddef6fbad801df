#pragma once

#include <stdexcept>
#include <string>

namespace covar {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Root finder was given an interval whose endpoints do not bracket the target.
class BracketError : public std::runtime_error {
public:
    BracketError(double lo, double hi, double f_lo, double f_hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double f_lo() const noexcept { return f_lo_; }
    double f_hi() const noexcept { return f_hi_; }

private:
    double lo_, hi_, f_lo_, f_hi_;
};

/// A non-finite value appeared during a numeric evaluation.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double abscissa);
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

/// Requested level lies outside the range a tail model can reach (q >= b_inf).
class OutOfRange : public std::out_of_range {
public:
    OutOfRange(const std::string& what, double b_inf);
    double b_inf() const noexcept { return b_inf_; }

private:
    double b_inf_;
};

/// Operation is not defined for the regime of the supplied tail model.
class WrongRegime : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Parameter sits exactly on a boundary between two asymptotic branches.
class BranchBoundary : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Every start of a multi-start optimization failed.
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data is malformed, non-finite or too short.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace covar
