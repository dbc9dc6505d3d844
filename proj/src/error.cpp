#include "shockrom/error.hpp"

#include <sstream>

namespace shockrom {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::parameter_domain: return "parameter_domain";
    case ErrorCategory::step_rejected: return "step_rejected";
    case ErrorCategory::hull_degenerate: return "hull_degenerate";
    case ErrorCategory::shock_formed: return "shock_formed";
    case ErrorCategory::non_invertible_data: return "non_invertible_data";
    case ErrorCategory::resolution: return "resolution";
    case ErrorCategory::shock_degenerate: return "shock_degenerate";
    case ErrorCategory::shock_vanished: return "shock_vanished";
    case ErrorCategory::assembly: return "assembly";
    case ErrorCategory::degenerate_data: return "degenerate_data";
    case ErrorCategory::overflow_guard: return "overflow_guard";
    case ErrorCategory::pod_diverged: return "pod_diverged";
    case ErrorCategory::observable_assembly: return "observable_assembly";
    case ErrorCategory::reconstruction: return "reconstruction";
    case ErrorCategory::lookup: return "lookup";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

namespace {

std::string step_message(double requested, double admissible) {
  std::ostringstream os;
  os << "CFL violated: dt = " << requested << " exceeds admissible dt = " << admissible;
  return os.str();
}

}  // namespace

StepRejected::StepRejected(double requested_dt, double admissible_dt)
    : Error(ErrorCategory::step_rejected, step_message(requested_dt, admissible_dt)),
      requested_dt_(requested_dt),
      admissible_dt_(admissible_dt) {}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace shockrom
