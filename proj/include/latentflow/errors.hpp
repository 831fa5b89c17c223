#pragma once

#include <stdexcept>
#include <string>

namespace latentflow {

/// Root of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct InfeasibleGeometry : Error {
  using Error::Error;
};
struct InfeasibleMix : Error {
  using Error::Error;
};
struct ResolutionTooCoarse : Error {
  using Error::Error;
};
/// Non-finite values, failed factorizations, solver stalls, diverged training.
struct NumericFailure : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace latentflow
