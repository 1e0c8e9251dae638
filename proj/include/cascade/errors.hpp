#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (schema files, CSVs, model files).
struct DataError : Error {
  using Error::Error;
};

// A combinatorial guard tripped: the requested computation would explode
// (domain too large to enumerate, antecedent universe too big, ...).
struct GuardError : Error {
  using Error::Error;
};

// Invariant violation inside the library; indicates a bug in caller or lib.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace cascade
