#pragma once

#include <stdexcept>
#include <string>

namespace w2lab {

/// Invalid construction inputs (bad betas, non-monotone times, malformed JSON, ...).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A bound evaluator was called on inputs that violate the hypotheses of the
/// inequality it evaluates. The message names the violated condition.
class HypothesisViolation : public std::runtime_error {
public:
    explicit HypothesisViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime (non-finite score, quadrature blow-up, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace w2lab
