#pragma once

#include <stdexcept>
#include <string>

namespace hh {

enum class Errc {
  InvalidOperation,
  HeuristicFault,
  BudgetExceeded,
  IncompleteSolution,
  InfeasibleSolution,
  NoAlternative,
  UnknownTarget,
  NoCandidates,
  AdvisorUnavailable,
  AdvisorParseError,
  Timeout,
  HttpError,
  BudgetExhausted,
  TranscriptMiss,
  GroupTooSmall,
  UnsupportedEdgeWeightType,
  MalformedSection,
  TruncatedFile,
  CountMismatch,
  IndexOutOfRange,
  EdgeCountMismatch,
  ZeroReference,
  InvalidInstance,
  ConfigError,
};

const char* to_string(Errc code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hh
