#include "cpdhnf/bigraded.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cpdhnf/error.hpp"

namespace cpdhnf {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::overflow, "integer product overflows 64 bits");
  return out;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(a, b, &out)) throw Error(ErrorCode::overflow, "integer difference overflows 64 bits");
  return out;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::invalid_argument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

Rational Rational::infinity() {
  Rational out;
  out.infinite_ = true;
  return out;
}

double Rational::to_double() const noexcept {
  if (infinite_) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::int64_t Rational::floor() const {
  if (infinite_) throw Error(ErrorCode::invalid_argument, "floor of infinity");
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::string Rational::to_string() const {
  if (infinite_) return "inf";
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

bool operator==(const Rational& a, const Rational& b) noexcept {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.num_ == b.num_ && a.den_ == b.den_;
}

bool operator<(const Rational& a, const Rational& b) noexcept {
  if (a.infinite_) return false;
  if (b.infinite_) return true;
  return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 c = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::int64_t>::max()) throw Error(ErrorCode::overflow, "binomial coefficient overflows 64 bits");
  }
  return static_cast<std::int64_t>(c);
}

std::int64_t hf_s(int m, int n, int d, int e) {
  if (m < 0 || n < 0 || d < 0 || e < 0) throw Error(ErrorCode::invalid_argument, "hf_s arguments must be nonnegative");
  return checked_mul(binomial(m + d, d), binomial(n + e, e));
}

Rational rank_bound(int m, int n, Bidegree degree) {
  if (degree.d < 1 || degree.e < 1) throw Error(ErrorCode::invalid_argument, "rank_bound needs (d,e) >= (1,1)");
  if (degree.d == 1 && degree.e == 1) return Rational::infinity();
  const std::int64_t shifted = hf_s(m, n, degree.d - 1, degree.e - 1);
  const std::int64_t den = shifted - 1;
  if (den == 0) return Rational::infinity();
  const std::int64_t num = checked_sub(checked_mul(hf_s(m, n, 1, 1), shifted), hf_s(m, n, degree.d, degree.e));
  return Rational(num, den);
}

const char* path_name(SolvePath path) noexcept {
  return path == SolvePath::pencil ? "pencil" : "normalform";
}

DegreePlan plan_for(int m, int n, int r, Bidegree degree) {
  DegreePlan plan;
  plan.degree = degree;
  plan.path = SolvePath::normal_form;
  const std::int64_t s = hf_s(m, n, 1, 1) - r;
  plan.rows = hf_s(m, n, degree.d, degree.e);
  plan.cols = checked_mul(s, hf_s(m, n, std::max(degree.d - 1, 0), std::max(degree.e - 1, 0)));
  return plan;
}

namespace {

// Smallest t >= 2 with R(m,n,(t,1)) >= r when `x_side`, else with R(m,n,(1,t)) >= r.
std::optional<int> smallest_valid(int m, int n, int r, bool x_side) {
  const int limit = (x_side ? n : m) + 1;
  for (int t = 2; t <= limit + 4; ++t) {
    try {
      const Bidegree deg = x_side ? Bidegree{t, 1} : Bidegree{1, t};
      if (rank_bound(m, n, deg) >= r) return t;
    } catch (const Error& err) {
      if (err.code() == ErrorCode::overflow) return std::nullopt;
      throw;
    }
  }
  return std::nullopt;
}

}  // namespace

DegreePlan select_degree(int m, int n, int r, int l, bool beta_independent) {
  if (r < 1 || m < 0 || n < 0 || l < 0) throw Error(ErrorCode::invalid_argument, "select_degree arguments out of range");
  const std::int64_t mn = static_cast<std::int64_t>(m) * n;
  if (r > std::min<std::int64_t>(l + 1, mn)) {
    throw Error(ErrorCode::rank_out_of_range,
                "rank " + std::to_string(r) + " exceeds min{l+1, mn} = " + std::to_string(std::min<std::int64_t>(l + 1, mn)));
  }
  if (r <= m + 1 && beta_independent) {
    DegreePlan plan = plan_for(m, n, r, {1, 1});
    plan.path = SolvePath::pencil;
    return plan;
  }
  std::optional<DegreePlan> best;
  auto consider = [&](Bidegree deg) {
    DegreePlan cand = plan_for(m, n, r, deg);
    if (!best) {
      best = cand;
      return;
    }
    // Lower total degree first, then the smaller resultant; (d,1) is considered first and wins ties.
    const int tc = deg.d + deg.e;
    const int tb = best->degree.d + best->degree.e;
    const long double cc = static_cast<long double>(cand.rows) * cand.cols;
    const long double cb = static_cast<long double>(best->rows) * best->cols;
    if (tc < tb || (tc == tb && cc < cb)) best = cand;
  };
  if (auto d = smallest_valid(m, n, r, true)) consider({*d, 1});
  if (auto e = smallest_valid(m, n, r, false)) consider({1, *e});
  if (!best) throw Error(ErrorCode::rank_out_of_range, "no degree (d,1) or (1,e) reaches the rank bound");
  return *best;
}

std::vector<std::vector<int>> compositions(int vars, int degree) {
  std::vector<std::vector<int>> out;
  if (vars <= 0) {
    if (degree == 0) out.emplace_back();
    return out;
  }
  std::vector<int> a(static_cast<std::size_t>(vars), 0);
  // Recursive fill: first variable takes the largest share first.
  auto fill = [&](auto&& self, int pos, int rem) -> void {
    if (pos == vars - 1) {
      a[static_cast<std::size_t>(pos)] = rem;
      out.push_back(a);
      return;
    }
    for (int v = rem; v >= 0; --v) {
      a[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, rem - v);
    }
  };
  fill(fill, 0, degree);
  return out;
}

Index composition_rank(const std::vector<int>& a) {
  const int vars = static_cast<int>(a.size());
  int rem = 0;
  for (int v : a) rem += v;
  Index rank = 0;
  for (int i = 0; i + 1 < vars; ++i) {
    const int ai = a[static_cast<std::size_t>(i)];
    if (rem - ai >= 1) rank += binomial(rem - ai - 1 + vars - 1 - i, vars - 1 - i);
    rem -= ai;
  }
  return rank;
}

MonomialBasis monomial_basis(int m, int n, Bidegree degree) {
  if (m < 0 || n < 0 || degree.d < 0 || degree.e < 0) throw Error(ErrorCode::invalid_argument, "invalid monomial basis request");
  MonomialBasis basis;
  basis.m = m;
  basis.n = n;
  basis.degree = degree;
  basis.x_parts = compositions(m + 1, degree.d);
  basis.y_parts = compositions(n + 1, degree.e);
  return basis;
}

std::string MonomialBasis::name(Index i) const {
  std::string out;
  auto append = [&](const std::vector<int>& part, char var) {
    for (std::size_t k = 0; k < part.size(); ++k) {
      if (part[k] == 0) continue;
      if (!out.empty()) out += "*";
      out += var + std::to_string(k);
      if (part[k] > 1) out += "^" + std::to_string(part[k]);
    }
  };
  append(x_exponent(i), 'x');
  append(y_exponent(i), 'y');
  return out.empty() ? "1" : out;
}

Index index_of(const MonomialBasis& basis, const std::vector<int>& a, const std::vector<int>& b) {
  auto total = [](const std::vector<int>& v) {
    int t = 0;
    for (int x : v) {
      if (x < 0) return -1;
      t += x;
    }
    return t;
  };
  if (static_cast<int>(a.size()) != basis.m + 1 || static_cast<int>(b.size()) != basis.n + 1 ||
      total(a) != basis.degree.d || total(b) != basis.degree.e) {
    throw Error(ErrorCode::invalid_argument, "exponent does not belong to this graded piece");
  }
  return composition_rank(a) * static_cast<Index>(basis.y_parts.size()) + composition_rank(b);
}

ShiftTable shift_table(int m, int n, Bidegree degree) {
  if (degree.d < 1 || degree.e < 1) throw Error(ErrorCode::invalid_argument, "shift table needs (d,e) >= (1,1)");
  ShiftTable table;
  table.m = m;
  table.n = n;
  table.degree = degree;
  const auto xs = compositions(m + 1, degree.d - 1);
  const auto ys = compositions(n + 1, degree.e - 1);
  const Index ny_target = binomial(n + degree.e, degree.e);
  table.rows = hf_s(m, n, degree.d, degree.e);
  table.shifts = static_cast<Index>(xs.size() * ys.size());
  // Rank of every x shift times every x_k, and likewise for y.
  std::vector<Index> xrank(xs.size() * static_cast<std::size_t>(m + 1));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto a = xs[i];
    for (int k = 0; k <= m; ++k) {
      ++a[static_cast<std::size_t>(k)];
      xrank[i * static_cast<std::size_t>(m + 1) + static_cast<std::size_t>(k)] = composition_rank(a);
      --a[static_cast<std::size_t>(k)];
    }
  }
  std::vector<Index> yrank(ys.size() * static_cast<std::size_t>(n + 1));
  for (std::size_t j = 0; j < ys.size(); ++j) {
    auto b = ys[j];
    for (int l = 0; l <= n; ++l) {
      ++b[static_cast<std::size_t>(l)];
      yrank[j * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(l)] = composition_rank(b);
      --b[static_cast<std::size_t>(l)];
    }
  }
  const std::size_t block = static_cast<std::size_t>((m + 1) * (n + 1));
  table.row.resize(static_cast<std::size_t>(table.shifts) * block);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const std::size_t shift = i * ys.size() + j;
      for (int k = 0; k <= m; ++k) {
        for (int l = 0; l <= n; ++l) {
          table.row[shift * block + static_cast<std::size_t>(k * (n + 1) + l)] =
              xrank[i * static_cast<std::size_t>(m + 1) + static_cast<std::size_t>(k)] * ny_target +
              yrank[j * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(l)];
        }
      }
    }
  }
  return table;
}

}  // namespace cpdhnf
