#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpdhnf {

enum class ErrorCode {
  invalid_argument,
  shape_mismatch,
  zero_tensor,
  overflow,
  parse_error,
  rank_out_of_range,
  no_feasible_grouping,
  flattening_rank_mismatch,
  corank_mismatch,
  basis_deficient,
  defective_eigenvectors,
  ambiguous_kernel,
  singular_jacobian,
  rank_deficient_kr,
  config_not_in_w,
};

[[nodiscard]] std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

  // Same error tagged with the pipeline stage it surfaced from.
  [[nodiscard]] Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

// Numerical consistency checks: throw by default, or downgrade to warnings for noisy input.
struct Checks {
  bool lenient = false;
  std::vector<std::string>* warnings = nullptr;

  void fail(ErrorCode code, const std::string& message) const;
  void warn(const std::string& message) const {
    if (warnings != nullptr) warnings->push_back(message);
  }
};

}  // namespace cpdhnf
