#pragma once

#include <stdexcept>
#include <string>

namespace ocmc {

enum class ErrorKind {
  kInvalidArgument,
  kDomain,
  kEvaluation,
  kInconsistency,
  kBoundary,
  kDegenerateS0,
  kConstructionFailure,
  kMetricDegenerate,
  kGeometry,
  kSolverFailure,
  kIllConditioned,
  kIo,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ocmc
