#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "cpdhnf/error.hpp"
#include "cpdhnf/recovery.hpp"
#include "cpdhnf/regcert.hpp"
#include "cpdhnf/report.hpp"
#include "cpdhnf/tensor_io.hpp"

namespace cpdhnf::cli {

namespace {

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      const long long v = std::stoll(tok);
      if (v < 1) throw std::invalid_argument("nonpositive");
      dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "bad dimension list '" + text + "'");
    }
  }
  if (dims.empty()) throw Error(ErrorCode::invalid_argument, "empty dimension list");
  return dims;
}

std::optional<Bidegree> parse_degree(const std::string& text) {
  if (text == "auto") return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::invalid_argument, "degree must be 'auto' or 'D,E'");
  try {
    return Bidegree{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "degree must be 'auto' or 'D,E'");
  }
}

NullspaceMethod parse_kernel(const std::string& text) {
  if (text == "svd") return NullspaceMethod::svd;
  if (text == "eigs") return NullspaceMethod::eigs;
  if (text == "auto") return NullspaceMethod::automatic;
  throw Error(ErrorCode::invalid_argument, "kernel must be svd, eigs or auto");
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const int a = std::stoi(text.substr(0, colon));
      const int b = std::stoi(text.substr(colon + 1));
      const int step = a <= b ? 1 : -1;
      for (int e = a;; e += step) {
        levels.push_back(e);
        if (e == b) break;
      }
    } else {
      std::stringstream ss(text);
      std::string tok;
      while (std::getline(ss, tok, ',')) levels.push_back(std::stoi(tok));
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "levels must be 'A:B' or a comma list");
  }
  return levels;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::invalid_argument, "cannot write '" + path + "'");
  file << text;
}

struct DecomposeFlags {
  std::string input;
  long long rank = 0;
  std::string degree = "auto";
  std::string kernel = "auto";
  int newton = 3;
  std::uint64_t seed = 0;
  std::string output;
  bool noise_tolerant = false;
  std::string dump;
};

int cmd_decompose(const DecomposeFlags& f, std::ostream& out) {
  DecomposeOptions opt;
  opt.rank = static_cast<Index>(f.rank);
  opt.degree = parse_degree(f.degree);
  opt.kernel = parse_kernel(f.kernel);
  opt.newton_iters = f.newton;
  opt.seed = f.seed;
  opt.noise_tolerant = f.noise_tolerant;
  opt.dump_resultant = f.dump;
  const AnyTensor tensor = read_tensor_file(f.input);
  const ResultRecord rec = std::visit([&](const auto& t) { return make_record(decompose(t, opt)); }, tensor);
  emit(f.output, to_json(rec).dump(2) + "\n", out);
  return 0;
}

struct GenerateFlags {
  std::string dims;
  long long rank = 0;
  std::uint64_t seed = 0;
  std::string field = "real";
  std::string output;
  std::string truth;
};

template <class Scalar>
void generate_as(const GenerateFlags& f, std::ostream& out) {
  const RandomInstance<Scalar> inst = random_cpd<Scalar>(parse_dims(f.dims), static_cast<Index>(f.rank), f.seed);
  std::ostringstream text;
  write_tensor(text, inst.tensor);
  emit(f.output, text.str(), out);
  if (!f.truth.empty()) emit(f.truth, truth_json(inst.truth).dump(2) + "\n", out);
}

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  if (f.field == "real") {
    generate_as<double>(f, out);
  } else if (f.field == "complex") {
    generate_as<cdouble>(f, out);
  } else {
    throw Error(ErrorCode::invalid_argument, "field must be real or complex");
  }
  return 0;
}

struct SweepFlags {
  std::string dims;
  long long rank = 0;
  std::string levels = "-1:-15";
  int trials = 5;
  std::uint64_t seed = 0;
  std::string kernel = "auto";
  std::string output;
};

int cmd_noise_sweep(const SweepFlags& f, std::ostream& out) {
  const std::vector<Index> dims = parse_dims(f.dims);
  const std::vector<int> levels = parse_levels(f.levels);
  std::ostringstream csv;
  csv << "e,trial,backward_error,runtime,status\n" << std::setprecision(17);
  for (int trial = 0; trial < f.trials; ++trial) {
    const auto inst = random_cpd<double>(dims, static_cast<Index>(f.rank), derive_seed(f.seed, static_cast<std::uint64_t>(trial)));
    for (int e : levels) {
      const TensorR noisy = add_noise(inst.tensor, e, derive_seed(f.seed, 1000003ULL * static_cast<std::uint64_t>(trial + 1) + static_cast<std::uint64_t>(e + 1000)));
      DecomposeOptions opt;
      opt.rank = static_cast<Index>(f.rank);
      opt.kernel = parse_kernel(f.kernel);
      opt.seed = f.seed;
      opt.noise_tolerant = true;
      const auto start = std::chrono::steady_clock::now();
      std::string status = "ok";
      double be = std::nan("");
      try {
        be = decompose(noisy, opt).backward_error;
      } catch (const Error& err) {
        status = std::string(error_name(err.code()));
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      csv << e << ',' << trial << ',' << be << ',' << secs << ',' << status << '\n';
    }
  }
  emit(f.output, csv.str(), out);
  return 0;
}

struct CertifyFlags {
  int m = -1;
  int n = -1;
  int d = 2;
  std::string r = "auto";
  std::uint32_t p = default_prime;
  int trials = 3;
  std::uint64_t seed = 0;
  std::string sweep;
  std::string output;
};

Json certify_cell(const CertifyFlags& f, int m, int n) {
  int r = 0;
  try {
    r = f.r == "auto" ? auto_rank(m, n, f.d) : std::stoi(f.r);
    return to_json(certify_conjecture(m, n, f.d, r, f.p, f.trials, f.seed));
  } catch (const Error& err) {
    return Json{{"schema", cert_schema}, {"m", m},           {"n", n},
                {"d", f.d},              {"r", r},           {"p", f.p},
                {"seed", f.seed},        {"success", false}, {"error", std::string(error_name(err.code())) + ": " + err.detail()}};
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "r must be an integer or 'auto'");
  }
}

int cmd_certify(const CertifyFlags& f, std::ostream& out) {
  if (!is_prime(f.p) || f.p >= (1u << 15)) throw Error(ErrorCode::invalid_argument, "p must be a prime below 2^15");
  std::ostringstream stream;
  bool all = true;
  auto run_cell = [&](int m, int n) {
    const Json cert = certify_cell(f, m, n);
    all = all && cert.at("success").get<bool>();
    stream << cert.dump() << '\n';
  };
  if (!f.sweep.empty()) {
    const std::vector<Index> bounds = parse_dims(f.sweep);
    if (bounds.size() != 2) throw Error(ErrorCode::invalid_argument, "sweep expects mmax,nmax");
    // Bounds are on the dimensions m+1 and n+1.
    for (Index m1 = 2; m1 <= bounds[0]; ++m1) {
      for (Index n1 = 2; n1 <= bounds[1]; ++n1) run_cell(static_cast<int>(m1 - 1), static_cast<int>(n1 - 1));
    }
  } else {
    if (f.m < 0 || f.n < 0) throw Error(ErrorCode::invalid_argument, "--m and --n are required without --sweep");
    run_cell(f.m, f.n);
  }
  emit(f.output, stream.str(), out);
  return all ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact-rank canonical polyadic decompositions via homogeneous normal forms"};
  app.require_subcommand(1);

  DecomposeFlags df;
  auto* dec = app.add_subcommand("decompose", "Decompose a tensor file");
  dec->add_option("--input", df.input, "Tensor file (cpdhnf-tensor v1)")->required();
  dec->add_option("--rank", df.rank, "Rank r")->required();
  dec->add_option("--degree", df.degree, "auto or D,E");
  dec->add_option("--kernel", df.kernel, "svd, eigs or auto");
  dec->add_option("--newton", df.newton, "Newton steps per point");
  dec->add_option("--seed", df.seed, "Random seed");
  dec->add_option("--output", df.output, "Result JSON path (stdout if omitted)");
  dec->add_flag("--noise-tolerant", df.noise_tolerant, "Report numerical consistency failures as warnings");
  dec->add_option("--dump-resultant", df.dump, "Write the resultant matrix in MatrixMarket format");

  GenerateFlags gf;
  auto* gen = app.add_subcommand("generate", "Write a seeded random rank-r tensor");
  gen->add_option("--dims", gf.dims, "Comma-separated dimensions")->required();
  gen->add_option("--rank", gf.rank, "Rank r")->required();
  gen->add_option("--seed", gf.seed, "Random seed");
  gen->add_option("--field", gf.field, "real or complex");
  gen->add_option("--output", gf.output, "Tensor file path")->required();
  gen->add_option("--truth", gf.truth, "Ground-truth factor JSON path");

  SweepFlags sf;
  auto* sweep = app.add_subcommand("noise-sweep", "Backward error under additive Gaussian noise");
  sweep->add_option("--dims", sf.dims, "Comma-separated dimensions")->required();
  sweep->add_option("--rank", sf.rank, "Rank r")->required();
  sweep->add_option("--levels", sf.levels, "Noise exponents A:B or a comma list");
  sweep->add_option("--trials", sf.trials, "Trials per level");
  sweep->add_option("--seed", sf.seed, "Random seed");
  sweep->add_option("--kernel", sf.kernel, "svd, eigs or auto");
  sweep->add_option("--output", sf.output, "CSV path (stdout if omitted)");

  CertifyFlags cf;
  auto* cert = app.add_subcommand("certify", "Certify regularity over a finite field");
  cert->add_option("--m", cf.m, "m (dimension m+1)");
  cert->add_option("--n", cf.n, "n (dimension n+1)");
  cert->add_option("--d", cf.d, "Degree d of (d,1)");
  cert->add_option("--r", cf.r, "Rank or 'auto'");
  cert->add_option("--p", cf.p, "Prime below 2^15");
  cert->add_option("--trials", cf.trials, "Random configurations per cell");
  cert->add_option("--seed", cf.seed, "Random seed");
  cert->add_option("--sweep", cf.sweep, "Sweep 2 <= m+1 <= mmax, 2 <= n+1 <= nmax");
  cert->add_option("--output", cf.output, "JSON lines path (stdout if omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (dec->parsed()) return cmd_decompose(df, out);
    if (gen->parsed()) return cmd_generate(gf, out);
    if (sweep->parsed()) return cmd_noise_sweep(sf, out);
    if (cert->parsed()) return cmd_certify(cf, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cpdhnf::cli
