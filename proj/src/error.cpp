#include "veinmatch/error.hpp"

namespace veinmatch {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kDegenerateHistogram: return "degenerate-histogram";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kSegmentation: return "segmentation";
    case ErrorKind::kValleyDetection: return "valley-detection";
    case ErrorKind::kGeometry: return "geometry";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kEnrollment: return "enrollment";
    case ErrorKind::kEvaluation: return "evaluation";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(ErrorKindName(kind)) + " error: " + what);
}

}  // namespace veinmatch
