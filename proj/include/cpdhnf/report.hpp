#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpdhnf/recovery.hpp"
#include "cpdhnf/regcert.hpp"

namespace cpdhnf {

using Json = nlohmann::ordered_json;

inline constexpr const char* result_schema = "cpdhnf-result v1";
inline constexpr const char* cert_schema = "cpdhnf-cert v1";

// Field-agnostic view of a decomposition result, as written to disk.
struct ResultRecord {
  std::string field = "real";
  std::vector<Index> shape;
  Index rank = 0;
  Bidegree degree_used;
  std::string path;
  std::string kernel;
  std::string grouping;
  double backward_error = 0.0;
  double backward_error_pre_newton = 0.0;
  bool newton_reverted = false;
  std::vector<std::pair<std::string, double>> stage_timings_ms;
  std::vector<MatC> factors;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const ResultRecord& a, const ResultRecord& b);
};

template <class Scalar>
[[nodiscard]] ResultRecord make_record(const DecomposeResult<Scalar>& result);

[[nodiscard]] Json to_json(const ResultRecord& rec);
[[nodiscard]] ResultRecord record_from_json(const Json& j);

[[nodiscard]] Json to_json(const Certificate& cert);
[[nodiscard]] Certificate certificate_from_json(const Json& j);

template <class Scalar>
[[nodiscard]] Json truth_json(const CPDecomposition<Scalar>& cpd);

}  // namespace cpdhnf
