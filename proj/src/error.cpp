#include "cpdhnf/error.hpp"

namespace cpdhnf {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::zero_tensor: return "ZeroTensor";
    case ErrorCode::overflow: return "Overflow";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::rank_out_of_range: return "RankOutOfRange";
    case ErrorCode::no_feasible_grouping: return "NoFeasibleGrouping";
    case ErrorCode::flattening_rank_mismatch: return "FlatteningRankMismatch";
    case ErrorCode::corank_mismatch: return "CorankMismatch";
    case ErrorCode::basis_deficient: return "BasisDeficient";
    case ErrorCode::defective_eigenvectors: return "DefectiveEigenvectors";
    case ErrorCode::ambiguous_kernel: return "AmbiguousKernel";
    case ErrorCode::singular_jacobian: return "SingularJacobian";
    case ErrorCode::rank_deficient_kr: return "RankDeficientKR";
    case ErrorCode::config_not_in_w: return "ConfigNotInW";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(error_name(code)) + ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(code_, detail_, std::move(stage));
}

void Checks::fail(ErrorCode code, const std::string& message) const {
  if (!lenient) throw Error(code, message);
  warn(std::string(error_name(code)) + ": " + message);
}

}  // namespace cpdhnf
