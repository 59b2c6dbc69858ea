#pragma once

#include <stdexcept>
#include <string>

namespace spancb {

// Every library failure derives from Error so callers can catch one type
// and still branch on the specific condition when they need to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cached determinant vanished or an update would make it vanish.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Action embeddings do not span the ambient space.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// A local-search loop exceeded its iteration budget.
class NonterminationError : public Error {
 public:
  using Error::Error;
};

// A root finder or solve failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad user-facing configuration: files, flags, parameter ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A runtime contract was violated (negative gap, bad distribution, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace spancb
