#pragma once

#include <stdexcept>

namespace emrec {

// Base class for every library error. The CLI maps these to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };          // malformed input file
struct OrderingError : Error { using Error::Error; };       // timestamps not strictly increasing
struct SyncError : Error { using Error::Error; };           // streams cannot be aligned
struct GapError : Error { using Error::Error; };            // recording gap exceeds tolerance
struct IdentityError : Error { using Error::Error; };       // patient id mismatch
struct WindowError : Error { using Error::Error; };         // invalid segmentation window
struct LengthError : Error { using Error::Error; };         // sequence too short for the operation
struct ParameterError : Error { using Error::Error; };      // invalid configuration value
struct DataError : Error { using Error::Error; };           // dataset unusable
struct CompatibilityError : Error { using Error::Error; };  // model/feature layout mismatch
struct IoError : Error { using Error::Error; };             // filesystem failure

}  // namespace emrec
