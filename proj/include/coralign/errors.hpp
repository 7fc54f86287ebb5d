#pragma once

#include <stdexcept>
#include <string>

namespace coralign {

/// Base type for every error raised by the library. Subclasses identify the
/// failure mode so callers and tests can catch precisely.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct DegenerateBatch : Error { using Error::Error; };
struct LabelError : Error { using Error::Error; };
struct EmptyPartition : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct EmptyCorpus : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DanglingReference : Error { using Error::Error; };
struct EmptyTraining : Error { using Error::Error; };
struct DegenerateVector : Error { using Error::Error; };
struct NoRelevantItems : Error { using Error::Error; };
struct NoEvaluableQueries : Error { using Error::Error; };
struct UnknownQueryId : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace coralign
