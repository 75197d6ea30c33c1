#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/error.hpp"
#include "cpdhnf/regcert.hpp"

using namespace cpdhnf;
using boost::multiprecision::cpp_int;

namespace {

// Fraction-free elimination over the integers.
Index bareiss_rank(std::vector<std::vector<cpp_int>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  cpp_int prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return static_cast<Index>(rank);
}

FpMatrix to_fp(const std::vector<std::vector<cpp_int>>& a, std::uint32_t p) {
  FpMatrix m(p, static_cast<Index>(a.size()), static_cast<Index>(a[0].size()));
  for (Index i = 0; i < m.rows; ++i) {
    for (Index j = 0; j < m.cols; ++j) {
      cpp_int v = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] % p;
      if (v < 0) v += p;
      m(i, j) = static_cast<std::uint32_t>(v);
    }
  }
  return m;
}

std::vector<std::vector<cpp_int>> random_int(std::size_t r, std::size_t c, int lo, int hi, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<std::vector<cpp_int>> a(r, std::vector<cpp_int>(c));
  for (auto& row : a) {
    for (auto& x : row) x = dist(gen);
  }
  return a;
}

std::vector<std::vector<cpp_int>> multiply(const std::vector<std::vector<cpp_int>>& a, const std::vector<std::vector<cpp_int>>& b) {
  std::vector<std::vector<cpp_int>> out(a.size(), std::vector<cpp_int>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

}  // namespace

TEST(FpRank, TrivialMatrices) {
  FpMatrix id(8191, 5, 5);
  for (Index i = 0; i < 5; ++i) id(i, i) = 1;
  EXPECT_EQ(fp_rank(id), 5);
  FpMatrix dup(8191, 4, 6);
  std::mt19937_64 gen(1);
  for (auto& x : dup.data) x = static_cast<std::uint32_t>(gen() % 8191);
  for (Index j = 0; j < 6; ++j) dup(3, j) = dup(1, j);
  EXPECT_LE(fp_rank(dup), 3);
  EXPECT_EQ(fp_rank(FpMatrix(8191, 3, 3)), 0);
  // 2 * 4096 = 1 mod 8191 while 2 * 4096 - 1 is not zero over the integers.
  FpMatrix sing(8191, 2, 2);
  sing(0, 0) = 2;
  sing(0, 1) = 1;
  sing(1, 0) = 1;
  sing(1, 1) = 4096;
  EXPECT_EQ(fp_rank(sing), 1);
}

TEST(FpRank, AgreesWithIntegerElimination) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto full = random_int(20, 30, 0, 8190, gen);
    EXPECT_EQ(fp_rank(to_fp(full, 8191)), bareiss_rank(full));
    const auto low = multiply(random_int(20, 12, -50, 50, gen), random_int(12, 30, -50, 50, gen));
    EXPECT_EQ(bareiss_rank(low), 12);
    EXPECT_EQ(fp_rank(to_fp(low, 8191)), 12);
  }
}

TEST(FpKernel, RowsSpanTheRightKernel) {
  std::mt19937_64 gen(3);
  const auto low = multiply(random_int(9, 5, -9, 9, gen), random_int(5, 14, -9, 9, gen));
  const FpMatrix m = to_fp(low, 8191);
  const FpMatrix k = fp_kernel(m);
  EXPECT_EQ(k.rows, 14 - 5);
  EXPECT_EQ(k.cols, 14);
  EXPECT_EQ(fp_rank(k), k.rows);
  for (Index i = 0; i < m.rows; ++i) {
    for (Index j = 0; j < k.rows; ++j) {
      std::uint64_t acc = 0;
      for (Index c = 0; c < 14; ++c) acc = (acc + static_cast<std::uint64_t>(m(i, c)) * k(j, c)) % 8191;
      EXPECT_EQ(acc, 0u);
    }
  }
}

TEST(IsPrime, SmallValues) {
  EXPECT_TRUE(is_prime(8191));
  EXPECT_TRUE(is_prime(2));
  EXPECT_FALSE(is_prime(1));
  EXPECT_FALSE(is_prime(8193));
  EXPECT_THROW((void)random_config(2, 2, 3, 8192, 1), Error);
  EXPECT_THROW((void)random_config(2, 2, 3, 65537, 1), Error);
}

TEST(HilbertSJ, KnownTableValues) {
  const auto z = random_config(6, 2, 12, default_prime, 3);
  EXPECT_EQ(hilbert_sj(z, {2, 1}), 21);
  EXPECT_EQ(hilbert_sj(z, {3, 1}), 12);
  EXPECT_EQ(hilbert_sj(z, {1, 5}), 12);
  const auto small = random_config(2, 2, 4, default_prime, 4);
  for (Bidegree deg : {Bidegree{2, 1}, Bidegree{1, 2}, Bidegree{2, 2}}) EXPECT_EQ(hilbert_sj(small, deg), 4);
}

TEST(HilbertSJ, DegreeOneOneGivesRank) {
  for (int r = 1; r <= 6; ++r) EXPECT_EQ(hilbert_sj(random_config(3, 2, r, default_prime, 10 + r), {1, 1}), r);
}

TEST(HilbertSJ, RepeatedPointIsNotInW) {
  auto z = random_config(3, 2, 4, default_prime, 5);
  for (Index k = 0; k <= 3; ++k) z.beta(k, 1) = z.beta(k, 0);
  for (Index l = 0; l <= 2; ++l) z.gamma(l, 1) = z.gamma(l, 0);
  try {
    (void)hilbert_sj(z, {2, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_not_in_w);
  }
}

TEST(HilbertSJ, LowerBoundsHold) {
  std::mt19937_64 pick(23);
  for (int cell = 0; cell < 40; ++cell) {
    const int m = 1 + static_cast<int>(pick() % 4);
    const int n = 1 + static_cast<int>(pick() % 3);
    const int d = 1 + static_cast<int>(pick() % 3);
    const int e = 1 + static_cast<int>(pick() % 2);
    const int r = 1 + static_cast<int>(pick() % static_cast<unsigned>(m * n));
    const Index hf = hilbert_sj(random_config(m, n, r, default_prime, 900 + cell), {d, e});
    const std::int64_t shifts = hf_s(m, n, d - 1, e - 1);
    const std::int64_t counted = hf_s(m, n, d, e) + r * shifts - hf_s(m, n, 1, 1) * shifts;
    EXPECT_GE(hf, std::max<std::int64_t>(r, counted)) << m << n << d << e << r;
  }
}

TEST(HilbertSJ, AboveTheBoundTheFunctionExceedsRank) {
  for (int m = 2; m <= 5; ++m) {
    for (int n = 1; n <= 3; ++n) {
      for (int r = 1; r <= m * n; ++r) {
        if (!(rank_bound(m, n, {2, 1}) < r)) continue;
        EXPECT_GT(hilbert_sj(random_config(m, n, r, default_prime, 40 + r), {2, 1}), r) << m << n << r;
      }
    }
  }
}

TEST(AzCorank, GenericValueAndAgreement) {
  EXPECT_EQ(az_corank(random_config(3, 2, 6, default_prime, 1)), 6);
  std::mt19937_64 pick(31);
  for (int cell = 0; cell < 20; ++cell) {
    const int m = 1 + static_cast<int>(pick() % 5);
    const int n = 1 + static_cast<int>(pick() % 3);
    const int r = 1 + static_cast<int>(pick() % static_cast<unsigned>(m * n));
    const auto z = random_config(m, n, r, default_prime, 300 + cell);
    const Index c = az_corank(z);
    EXPECT_EQ(c, hilbert_sj(z, {2, 1})) << m << n << r;
    EXPECT_GE(c, r);
  }
}

TEST(AzCorank, RealPoints) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  const MatR beta = MatR::NullaryExpr(4, 6, [&] { return nd(gen); });
  const MatR gamma = MatR::NullaryExpr(3, 6, [&] { return nd(gen); });
  EXPECT_EQ(az_corank(beta, gamma), 6);
}

TEST(Certify, KnownCases) {
  const Certificate a = certify_conjecture(2, 2, 2, 4, default_prime, 3, 1);
  EXPECT_TRUE(a.success);
  EXPECT_EQ(a.hf, 4);
  EXPECT_EQ(a.rank_n, 4);
  EXPECT_TRUE(certify_conjecture(3, 2, 2, 6, default_prime, 3, 1).success);
  try {
    (void)certify_conjecture(6, 2, 2, 12, default_prime, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::rank_out_of_range);
  }
  EXPECT_EQ(auto_rank(6, 2, 2), 10);
  EXPECT_EQ(auto_rank(2, 2, 2), 4);
}

TEST(Certify, DeterministicWitness) {
  const Certificate a = certify_conjecture(5, 3, 3, auto_rank(5, 3, 3), default_prime, 3, 99);
  const Certificate b = certify_conjecture(5, 3, 3, auto_rank(5, 3, 3), default_prime, 3, 99);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.hf, b.hf);
  EXPECT_TRUE(a.success);
}
