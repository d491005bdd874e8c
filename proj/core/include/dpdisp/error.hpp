#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dpdisp {

/// Base class for every error raised by the library. The CLI maps each
/// subclass onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid camera or algorithm configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable files.
class IoError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class MatchError : public Error {
 public:
  using Error::Error;
};

/// Error-model fitting failures (degenerate sweeps, non-convergence).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Linear solver failures in the refinement stage.
class SolverError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpdisp

namespace dpdisp {

/// Coarse error families; the CLI turns each into a distinct exit code.
enum class ErrorFamily {
  kInternal = 1,
  kConfig = 2,
  kIo = 3,
  kSimulation = 4,
  kMatch = 5,
  kFit = 6,
  kSolver = 7,
  kEval = 8,
};

/// A pipeline stage failure: names the stage and the artifacts involved,
/// keeps the family of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorFamily family, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)), family_(family) {}

  const std::string& stage() const { return stage_; }
  ErrorFamily family() const { return family_; }

 private:
  std::string stage_;
  ErrorFamily family_;
};

inline ErrorFamily family_of(const std::exception& e) {
  if (auto* s = dynamic_cast<const StageError*>(&e)) return s->family();
  if (dynamic_cast<const ConfigError*>(&e)) return ErrorFamily::kConfig;
  if (dynamic_cast<const IoError*>(&e)) return ErrorFamily::kIo;
  if (dynamic_cast<const SimulationError*>(&e)) return ErrorFamily::kSimulation;
  if (dynamic_cast<const MatchError*>(&e)) return ErrorFamily::kMatch;
  if (dynamic_cast<const FitError*>(&e)) return ErrorFamily::kFit;
  if (dynamic_cast<const SolverError*>(&e)) return ErrorFamily::kSolver;
  if (dynamic_cast<const EvalError*>(&e)) return ErrorFamily::kEval;
  return ErrorFamily::kInternal;
}

}  // namespace dpdisp
