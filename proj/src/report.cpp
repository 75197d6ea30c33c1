#include "cpdhnf/report.hpp"

#include "cpdhnf/error.hpp"

namespace cpdhnf {

namespace {

template <class Scalar>
Json matrix_json(const Mat<Scalar>& m, bool complex) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (complex) {
        const cdouble z(m(i, j));
        data.push_back(Json::array({z.real(), z.imag()}));
      } else {
        data.push_back(std::real(m(i, j)));
      }
    }
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatC matrix_from_json(const Json& j, bool complex) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols) throw Error(ErrorCode::parse_error, "factor data length mismatch");
  MatC m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) {
      const Json& v = data.at(static_cast<std::size_t>(i * cols + k));
      m(i, k) = complex ? cdouble(v.at(0).get<double>(), v.at(1).get<double>()) : cdouble(v.get<double>(), 0.0);
    }
  }
  return m;
}

}  // namespace

bool operator==(const ResultRecord& a, const ResultRecord& b) {
  if (a.factors.size() != b.factors.size()) return false;
  for (std::size_t k = 0; k < a.factors.size(); ++k) {
    if (a.factors[k].rows() != b.factors[k].rows() || a.factors[k].cols() != b.factors[k].cols()) return false;
    if (a.factors[k] != b.factors[k]) return false;
  }
  return a.field == b.field && a.shape == b.shape && a.rank == b.rank && a.degree_used == b.degree_used && a.path == b.path &&
         a.kernel == b.kernel && a.grouping == b.grouping && a.backward_error == b.backward_error &&
         a.backward_error_pre_newton == b.backward_error_pre_newton && a.newton_reverted == b.newton_reverted && a.stage_timings_ms == b.stage_timings_ms &&
         a.seed == b.seed && a.warnings == b.warnings;
}

template <class Scalar>
ResultRecord make_record(const DecomposeResult<Scalar>& result) {
  ResultRecord rec;
  rec.field = is_complex_v<Scalar> ? "complex" : "real";
  rec.shape = result.shape;
  rec.rank = result.rank;
  rec.degree_used = result.degree_used;
  rec.path = path_name(result.path);
  rec.kernel = result.path == SolvePath::pencil ? "none" : method_name(result.kernel_used);
  rec.grouping = result.grouping.to_string();
  rec.backward_error = result.backward_error;
  rec.backward_error_pre_newton = result.backward_error_pre_newton;
  rec.newton_reverted = result.newton_reverted;
  rec.stage_timings_ms = result.stage_ms;
  for (const auto& f : result.cpd.factors) rec.factors.push_back(f.template cast<cdouble>());
  rec.seed = result.seed;
  rec.warnings = result.warnings;
  return rec;
}

Json to_json(const ResultRecord& rec) {
  const bool complex = rec.field == "complex";
  Json timings = Json::object();
  for (const auto& [stage, ms] : rec.stage_timings_ms) timings[stage] = ms;
  Json factors = Json::array();
  for (const auto& f : rec.factors) factors.push_back(matrix_json<cdouble>(f, complex));
  return Json{{"schema", result_schema},
              {"field", rec.field},
              {"shape", rec.shape},
              {"rank", rec.rank},
              {"degree_used", Json::array({rec.degree_used.d, rec.degree_used.e})},
              {"path", rec.path},
              {"kernel", rec.kernel},
              {"grouping", rec.grouping},
              {"backward_error", rec.backward_error},
              {"backward_error_pre_newton", rec.backward_error_pre_newton},
              {"newton_reverted", rec.newton_reverted},
              {"stage_timings_ms", std::move(timings)},
              {"factors", std::move(factors)},
              {"seed", rec.seed},
              {"warnings", rec.warnings}};
}

ResultRecord record_from_json(const Json& j) {
  if (j.value("schema", std::string()) != result_schema) throw Error(ErrorCode::parse_error, "not a cpdhnf-result v1 document");
  ResultRecord rec;
  rec.field = j.at("field").get<std::string>();
  rec.shape = j.at("shape").get<std::vector<Index>>();
  rec.rank = j.at("rank").get<Index>();
  rec.degree_used = {j.at("degree_used").at(0).get<int>(), j.at("degree_used").at(1).get<int>()};
  rec.path = j.at("path").get<std::string>();
  rec.kernel = j.at("kernel").get<std::string>();
  rec.grouping = j.at("grouping").get<std::string>();
  rec.backward_error = j.at("backward_error").get<double>();
  rec.backward_error_pre_newton = j.at("backward_error_pre_newton").get<double>();
  rec.newton_reverted = j.value("newton_reverted", false);
  for (const auto& [stage, ms] : j.at("stage_timings_ms").items()) rec.stage_timings_ms.emplace_back(stage, ms.get<double>());
  for (const auto& f : j.at("factors")) rec.factors.push_back(matrix_from_json(f, rec.field == "complex"));
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.warnings = j.at("warnings").get<std::vector<std::string>>();
  return rec;
}

Json to_json(const Certificate& cert) {
  return Json{{"schema", cert_schema}, {"m", cert.m},       {"n", cert.n},           {"d", cert.d},
              {"r", cert.r},           {"p", cert.p},       {"seed", cert.seed},     {"rankN", cert.rank_n},
              {"hf", cert.hf},         {"success", cert.success}, {"trials", cert.trials_used}};
}

Certificate certificate_from_json(const Json& j) {
  if (j.value("schema", std::string()) != cert_schema) throw Error(ErrorCode::parse_error, "not a cpdhnf-cert v1 document");
  Certificate cert;
  cert.m = j.at("m").get<int>();
  cert.n = j.at("n").get<int>();
  cert.d = j.at("d").get<int>();
  cert.r = j.at("r").get<int>();
  cert.p = j.at("p").get<std::uint32_t>();
  cert.seed = j.at("seed").get<std::uint64_t>();
  cert.rank_n = j.at("rankN").get<Index>();
  cert.hf = j.at("hf").get<Index>();
  cert.success = j.at("success").get<bool>();
  cert.trials_used = j.value("trials", 0);
  return cert;
}

template <class Scalar>
Json truth_json(const CPDecomposition<Scalar>& cpd) {
  Json factors = Json::array();
  for (const auto& f : cpd.factors) factors.push_back(matrix_json<Scalar>(f, is_complex_v<Scalar>));
  return Json{{"field", is_complex_v<Scalar> ? "complex" : "real"}, {"rank", cpd.rank()}, {"factors", std::move(factors)}};
}

template ResultRecord make_record(const DecomposeResult<double>&);
template ResultRecord make_record(const DecomposeResult<cdouble>&);
template Json truth_json(const CPDecomposition<double>&);
template Json truth_json(const CPDecomposition<cdouble>&);

}  // namespace cpdhnf
