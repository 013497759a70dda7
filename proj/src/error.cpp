#include "monostab/error.hpp"

namespace monostab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "DomainError";
    case ErrorKind::invalid_reaction: return "InvalidReaction";
    case ErrorKind::slope_out_of_range: return "SlopeOutOfRange";
    case ErrorKind::no_bracketing: return "NoBracketing";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::disconnected_mask: return "DisconnectedMask";
    case ErrorKind::monotonicity_violation: return "MonotonicityViolation";
    case ErrorKind::not_found: return "NotFound";
    case ErrorKind::newton_divergence: return "NewtonDivergence";
    case ErrorKind::amplitude_collapse: return "AmplitudeCollapse";
    case ErrorKind::not_star_shaped: return "NotStarShaped";
    case ErrorKind::sweep_exhausted: return "SweepExhausted";
    case ErrorKind::predicate_never_true: return "PredicateNeverTrue";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::io: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace monostab
