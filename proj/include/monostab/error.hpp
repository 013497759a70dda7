#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monostab {

enum class ErrorKind {
  domain,
  invalid_reaction,
  slope_out_of_range,
  no_bracketing,
  non_convergence,
  disconnected_mask,
  monotonicity_violation,
  not_found,
  newton_divergence,
  amplitude_collapse,
  not_star_shaped,
  sweep_exhausted,
  predicate_never_true,
  invalid_argument,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace monostab
