#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpdhnf/types.hpp"

namespace cpdhnf {

struct Bidegree {
  int d = 0;
  int e = 0;
  friend bool operator==(const Bidegree&, const Bidegree&) = default;
};

// Exact rational with an explicit +infinity state.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den);
  static Rational infinity();

  [[nodiscard]] bool is_infinite() const noexcept { return infinite_; }
  [[nodiscard]] std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] double to_double() const noexcept;
  [[nodiscard]] std::int64_t floor() const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Rational& a, const Rational& b) noexcept;
  friend bool operator<(const Rational& a, const Rational& b) noexcept;
  friend bool operator>=(const Rational& a, std::int64_t b) noexcept { return !(a < Rational(b, 1)); }
  friend bool operator<(const Rational& a, std::int64_t b) noexcept { return a < Rational(b, 1); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  bool infinite_ = false;
};

// Binomial coefficient; throws Error(overflow) instead of wrapping.
[[nodiscard]] std::int64_t binomial(std::int64_t n, std::int64_t k);

// Hilbert function of S = C[x_0..x_m, y_0..y_n] in degree (d,e).
[[nodiscard]] std::int64_t hf_s(int m, int n, int d, int e);

// R(m,n,(d,e)); +infinity at (1,1).
[[nodiscard]] Rational rank_bound(int m, int n, Bidegree degree);

enum class SolvePath { pencil, normal_form };

struct DegreePlan {
  Bidegree degree;
  SolvePath path = SolvePath::normal_form;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
};

[[nodiscard]] const char* path_name(SolvePath path) noexcept;

// Resultant size for a system of s forms at the given degree.
[[nodiscard]] DegreePlan plan_for(int m, int n, int r, Bidegree degree);

[[nodiscard]] DegreePlan select_degree(int m, int n, int r, int l, bool beta_independent);

// Exponent vectors of total degree `degree` in `vars` variables, lexicographic with variable 0 greatest.
[[nodiscard]] std::vector<std::vector<int>> compositions(int vars, int degree);

// Position of `a` within compositions(a.size(), |a|).
[[nodiscard]] Index composition_rank(const std::vector<int>& a);

struct MonomialBasis {
  int m = 0;
  int n = 0;
  Bidegree degree;
  std::vector<std::vector<int>> x_parts;
  std::vector<std::vector<int>> y_parts;

  [[nodiscard]] Index size() const noexcept {
    return static_cast<Index>(x_parts.size() * y_parts.size());
  }
  [[nodiscard]] std::vector<int> x_exponent(Index i) const { return x_parts[static_cast<std::size_t>(i) / y_parts.size()]; }
  [[nodiscard]] std::vector<int> y_exponent(Index i) const { return y_parts[static_cast<std::size_t>(i) % y_parts.size()]; }
  // Human-readable name such as "x0^2*y1".
  [[nodiscard]] std::string name(Index i) const;
};

[[nodiscard]] MonomialBasis monomial_basis(int m, int n, Bidegree degree);
[[nodiscard]] Index index_of(const MonomialBasis& basis, const std::vector<int>& a, const std::vector<int>& b);

// Row positions of x^{a'+e_k} y^{b'+e_l} in S_(d,e), for every shift (a',b') of
// degree (d-1,e-1) and every (k,l). Entry [shift * (m+1)(n+1) + k*(n+1) + l].
struct ShiftTable {
  int m = 0;
  int n = 0;
  Bidegree degree;
  Index shifts = 0;
  Index rows = 0;
  std::vector<Index> row;

  [[nodiscard]] Index at(Index shift, int k, int l) const noexcept {
    return row[static_cast<std::size_t>(shift * (m + 1) * (n + 1) + k * (n + 1) + l)];
  }
};

[[nodiscard]] ShiftTable shift_table(int m, int n, Bidegree degree);

}  // namespace cpdhnf
