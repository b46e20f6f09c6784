#include "ocmc/errors.hpp"

namespace ocmc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kDomain: return "domain-error";
    case ErrorKind::kEvaluation: return "evaluation-error";
    case ErrorKind::kInconsistency: return "inconsistency-error";
    case ErrorKind::kBoundary: return "boundary-error";
    case ErrorKind::kDegenerateS0: return "degenerate-s0";
    case ErrorKind::kConstructionFailure: return "construction-failure";
    case ErrorKind::kMetricDegenerate: return "metric-degenerate";
    case ErrorKind::kGeometry: return "geometry-error";
    case ErrorKind::kSolverFailure: return "solver-failure";
    case ErrorKind::kIllConditioned: return "ill-conditioned";
    case ErrorKind::kIo: return "io-error";
  }
  return "error";
}

}  // namespace ocmc
