#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shockrom {

enum class ErrorCategory {
  parameter_domain,
  step_rejected,
  hull_degenerate,
  shock_formed,
  non_invertible_data,
  resolution,
  shock_degenerate,
  shock_vanished,
  assembly,
  degenerate_data,
  overflow_guard,
  pod_diverged,
  observable_assembly,
  reconstruction,
  lookup,
  config,
  io,
};

std::string_view to_string(ErrorCategory category) noexcept;

/// Base class of every error raised by the library. The category is stable
/// and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Raised by an explicit step whose CFL number exceeds one.
class StepRejected : public Error {
 public:
  StepRejected(double requested_dt, double admissible_dt);

  double requested_dt() const noexcept { return requested_dt_; }
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double requested_dt_;
  double admissible_dt_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

}  // namespace shockrom
