#pragma once

#include <stdexcept>
#include <string>

namespace vanish {

/// Input data (a game spec, a problem file, a config) breaks an invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap before meeting its stopping rule.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vanish
