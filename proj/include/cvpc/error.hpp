#pragma once

#include <stdexcept>
#include <string>

namespace cvpc {

/// Dimension of an input does not match the object it is applied to.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The model contains structure the Galerkin projection cannot represent.
class UnsupportedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The low-fidelity surrogate has zero variance; a control variate built on it
/// carries no information.
class DegenerateSurrogate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Budget cannot pay for one high-fidelity sample plus the cheapest expansion.
class InfeasibleBudget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two estimators were combined although they were not built on the same samples.
class BatchMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CacheConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvpc
