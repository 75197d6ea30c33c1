#include "cpdhnf/tensor_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "cpdhnf/error.hpp"

namespace cpdhnf {

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
  }
  throw Error(ErrorCode::parse_error, std::string("unexpected end of file while reading ") + what);
}

double read_number(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw Error(ErrorCode::parse_error, "tensor file ends before all values were read");
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse_error, "not a number: '" + tok + "'");
  }
  if (used != tok.size()) throw Error(ErrorCode::parse_error, "not a number: '" + tok + "'");
  return value;
}

void expect_end(std::istream& in) {
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::parse_error, "unexpected trailing value '" + extra + "'");
}

}  // namespace

AnyTensor read_tensor(std::istream& in) {
  const std::string magic = next_line(in, "header");
  if (magic != tensor_magic) throw Error(ErrorCode::parse_error, "bad magic line '" + magic + "'");
  const std::string field = next_line(in, "field tag");
  if (field != "real" && field != "complex") throw Error(ErrorCode::parse_error, "field tag must be real or complex");
  std::istringstream order_line(next_line(in, "order"));
  long long order = 0;
  if (!(order_line >> order) || order < 1) throw Error(ErrorCode::parse_error, "invalid tensor order");
  std::istringstream dims_line(next_line(in, "dimensions"));
  std::vector<Index> shape;
  long long dim = 0;
  while (dims_line >> dim) {
    if (dim < 1) throw Error(ErrorCode::parse_error, "dimensions must be positive");
    shape.push_back(static_cast<Index>(dim));
  }
  if (static_cast<long long>(shape.size()) != order) throw Error(ErrorCode::parse_error, "dimension count does not match order");
  Index count = 1;
  for (Index s : shape) count *= s;
  if (field == "real") {
    std::vector<double> data(static_cast<std::size_t>(count));
    for (auto& x : data) x = read_number(in);
    expect_end(in);
    return TensorR(std::move(shape), std::move(data));
  }
  std::vector<cdouble> data(static_cast<std::size_t>(count));
  for (auto& x : data) {
    const double re = read_number(in);
    const double im = read_number(in);
    x = cdouble(re, im);
  }
  expect_end(in);
  return TensorC(std::move(shape), std::move(data));
}

AnyTensor read_tensor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  return read_tensor(in);
}

template <class Scalar>
void write_tensor(std::ostream& out, const DenseTensor<Scalar>& t) {
  out << tensor_magic << '\n' << (is_complex_v<Scalar> ? "complex" : "real") << '\n' << t.order() << '\n';
  for (Index k = 0; k < t.order(); ++k) out << (k ? " " : "") << t.dim(k);
  out << '\n' << std::setprecision(17);
  const Index per_line = t.order() > 0 ? t.dim(t.order() - 1) : 1;
  for (Index i = 0; i < t.size(); ++i) {
    if constexpr (is_complex_v<Scalar>) {
      out << t[i].real() << ' ' << t[i].imag();
    } else {
      out << t[i];
    }
    out << ((i + 1) % per_line == 0 ? '\n' : ' ');
  }
}

template <class Scalar>
void write_tensor_file(const std::string& path, const DenseTensor<Scalar>& t) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write '" + path + "'");
  write_tensor(out, t);
}

template void write_tensor(std::ostream&, const TensorR&);
template void write_tensor(std::ostream&, const TensorC&);
template void write_tensor_file(const std::string&, const TensorR&);
template void write_tensor_file(const std::string&, const TensorC&);

}  // namespace cpdhnf
