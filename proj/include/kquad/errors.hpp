#pragma once

#include <stdexcept>
#include <string>

namespace kquad {

/// Malformed or inconsistent user input (dimensions, ranges, file contents).
/// The command line tool maps it to exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left its numerically valid regime (indefinite Gram matrix,
/// failed factorization, large negative squared error). Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kquad
