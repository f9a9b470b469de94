#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evostab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidOperator : public Error {
public:
    using Error::Error;
};

class SingularOperator : public Error {
public:
    SingularOperator(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class QuadratureFailure : public Error {
public:
    QuadratureFailure(const std::string& what, double estimate, double error_bound)
        : Error(what), estimate_(estimate), error_bound_(error_bound) {}
    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double location)
        : Error(what), location_(location) {}
    /// Time at which the step size underflowed.
    double location() const noexcept { return location_; }

private:
    double location_;
};

class DomainViolation : public Error {
public:
    using Error::Error;
};

class ApproximationFailure : public Error {
public:
    ApproximationFailure(const std::string& what, int degree, double achieved)
        : Error(what), degree_(degree), achieved_(achieved) {}
    int degree() const noexcept { return degree_; }
    double achieved_error() const noexcept { return achieved_; }

private:
    int degree_;
    double achieved_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> fields);
    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

} // namespace evostab
