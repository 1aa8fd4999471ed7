#pragma once

#include <stdexcept>

namespace skewifs {

// Iteration failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested enumeration or period exceeds its configured cap.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace skewifs
