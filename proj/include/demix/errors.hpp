#pragma once

#include <stdexcept>
#include <string>

namespace demix {

//! Bad input: violated precondition, malformed file, unknown key. CLI exit 2.
struct ValidationError : std::invalid_argument
{
  using std::invalid_argument::invalid_argument;
};

//! Computation failed at run time. CLI exit 1.
struct NumericalError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct ConditioningError : NumericalError
{
  ConditioningError(const std::string& what, double cond)
    : NumericalError(what)
    , condition(cond)
  {}
  double condition;
};

//! Requested degree exceeds the precision ceiling.
struct PrecisionError : NumericalError
{
  using NumericalError::NumericalError;
};

} // namespace demix
