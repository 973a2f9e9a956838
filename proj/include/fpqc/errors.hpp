#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fpqc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (shape, Hermiticity, sign of a rate...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Conjugate-paired slots disagree, or a quantity that must be real is not.
class StructuralError : public Error {
public:
    using Error::Error;
};

class NumericConsistencyError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class EquilibriumNotFound : public Error {
public:
    using Error::Error;
};

class CurvatureError : public Error {
public:
    using Error::Error;
};

class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate)
        : Error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fpqc
