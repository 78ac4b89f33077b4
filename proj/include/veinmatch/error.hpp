#pragma once

#include <stdexcept>
#include <string>

namespace veinmatch {

enum class ErrorKind {
  kParameter,
  kDegenerateHistogram,
  kDegenerateGeometry,
  kSegmentation,
  kValleyDetection,
  kGeometry,
  kEmptyInput,
  kProtocol,
  kEnrollment,
  kEvaluation,
  kConsistency,
  kConfig,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// Every domain failure in the toolkit is reported through this type. The
// kind lets callers (and the CLI exit-code mapping) branch without string
// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void Fail(ErrorKind kind, const std::string& what);

}  // namespace veinmatch
