#include "cpdhnf/regcert.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "cpdhnf/error.hpp"

namespace cpdhnf {

namespace {

std::vector<std::uint32_t> inverse_table(std::uint32_t p) {
  std::vector<std::uint32_t> inv(p, 0);
  inv[1] = 1;
  for (std::uint32_t i = 2; i < p; ++i) inv[i] = static_cast<std::uint32_t>((p - static_cast<std::uint64_t>(p / i) * inv[p % i] % p) % p);
  return inv;
}

// Forward elimination in place; returns the pivot columns.
std::vector<Index> echelon(FpMatrix& a, bool reduce) {
  const std::uint32_t p = a.p;
  const auto inv = inverse_table(p);
  std::vector<Index> pivots;
  Index row = 0;
  for (Index col = 0; col < a.cols && row < a.rows; ++col) {
    Index piv = -1;
    for (Index i = row; i < a.rows; ++i) {
      if (a(i, col) != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != row) {
      for (Index j = col; j < a.cols; ++j) std::swap(a(piv, j), a(row, j));
    }
    const std::uint64_t scale = inv[a(row, col)];
    for (Index j = col; j < a.cols; ++j) a(row, j) = static_cast<std::uint32_t>(a(row, j) * scale % p);
    const std::uint32_t* prow = &a.data[static_cast<std::size_t>(row * a.cols)];
    for (Index i = reduce ? 0 : row + 1; i < a.rows; ++i) {
      if (i == row) continue;
      const std::uint32_t f = a(i, col);
      if (f == 0) continue;
      const std::uint64_t nf = p - f;
      std::uint32_t* irow = &a.data[static_cast<std::size_t>(i * a.cols)];
      for (Index j = col; j < a.cols; ++j) {
        if (prow[j] != 0) irow[j] = static_cast<std::uint32_t>((irow[j] + nf * prow[j]) % p);
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

bool is_prime(std::uint32_t p) noexcept {
  if (p < 2) return false;
  for (std::uint32_t q = 2; q * q <= p; ++q) {
    if (p % q == 0) return false;
  }
  return true;
}

Index fp_rank(FpMatrix m) {
  if (m.rows > m.cols) {
    FpMatrix t(m.p, m.cols, m.rows);
    for (Index i = 0; i < m.rows; ++i) {
      for (Index j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    }
    m = std::move(t);
  }
  return static_cast<Index>(echelon(m, false).size());
}

FpMatrix fp_kernel(FpMatrix m) {
  const std::uint32_t p = m.p;
  const std::vector<Index> pivots = echelon(m, true);
  std::vector<char> is_pivot(static_cast<std::size_t>(m.cols), 0);
  for (Index c : pivots) is_pivot[static_cast<std::size_t>(c)] = 1;
  FpMatrix out(p, m.cols - static_cast<Index>(pivots.size()), m.cols);
  Index k = 0;
  for (Index free = 0; free < m.cols; ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    out(k, free) = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      const std::uint32_t v = m(static_cast<Index>(i), free);
      out(k, pivots[i]) = v == 0 ? 0 : p - v;
    }
    ++k;
  }
  return out;
}

PointConfigFp random_config(int m, int n, int r, std::uint32_t p, std::uint64_t seed) {
  if (!is_prime(p) || p >= (1u << 15)) throw Error(ErrorCode::invalid_argument, "p must be a prime below 2^15");
  if (m < 0 || n < 0 || r < 1) throw Error(ErrorCode::invalid_argument, "invalid configuration size");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::uint32_t> dist(0, p - 1);
  PointConfigFp z;
  z.p = p;
  z.m = m;
  z.n = n;
  z.r = r;
  z.beta = FpMatrix(p, m + 1, r);
  z.gamma = FpMatrix(p, n + 1, r);
  for (auto& x : z.beta.data) x = dist(gen);
  for (auto& x : z.gamma.data) x = dist(gen);
  return z;
}

FpMatrix w_matrix(const PointConfigFp& z) {
  FpMatrix w(z.p, z.r, static_cast<Index>(z.m + 1) * (z.n + 1));
  for (int i = 0; i < z.r; ++i) {
    for (int k = 0; k <= z.m; ++k) {
      for (int l = 0; l <= z.n; ++l) {
        w(i, k * (z.n + 1) + l) = static_cast<std::uint32_t>(static_cast<std::uint64_t>(z.beta(k, i)) * z.gamma(l, i) % z.p);
      }
    }
  }
  return w;
}

Index hilbert_sj(const PointConfigFp& z, Bidegree degree) {
  const FpMatrix w = w_matrix(z);
  const Index rank_n = fp_rank(w);
  if (rank_n < z.r) throw Error(ErrorCode::config_not_in_w, "w-matrix has rank " + std::to_string(rank_n) + " < r");
  const Index total = hf_s(z.m, z.n, degree.d, degree.e);
  if (degree.d == 0 || degree.e == 0) return total;
  const FpMatrix kernel = fp_kernel(w);
  const ShiftTable table = shift_table(z.m, z.n, degree);
  const Index block = static_cast<Index>(z.m + 1) * (z.n + 1);
  // Transposed resultant: one row per (form, shift); rank is the same.
  FpMatrix rt(z.p, kernel.rows * table.shifts, total);
  for (Index j = 0; j < kernel.rows; ++j) {
    for (Index s = 0; s < table.shifts; ++s) {
      const Index row = j * table.shifts + s;
      for (Index kl = 0; kl < block; ++kl) {
        rt(row, table.row[static_cast<std::size_t>(s * block + kl)]) = kernel(j, kl);
      }
    }
  }
  return total - fp_rank(std::move(rt));
}

FpMatrix az_matrix(const PointConfigFp& z) {
  const Index nb = z.n + 1;
  const Index pairs = static_cast<Index>(z.m + 1) * z.m / 2;
  FpMatrix a(z.p, pairs * nb, static_cast<Index>(z.m + 1) * z.r);
  Index blk = 0;
  for (int p0 = 0; p0 <= z.m; ++p0) {
    for (int q = p0 + 1; q <= z.m; ++q) {
      for (Index l = 0; l < nb; ++l) {
        for (int i = 0; i < z.r; ++i) {
          const std::uint64_t g = z.gamma(l, i);
          a(blk * nb + l, p0 * z.r + i) = static_cast<std::uint32_t>(g * z.beta(q, i) % z.p);
          const std::uint32_t v = static_cast<std::uint32_t>(g * z.beta(p0, i) % z.p);
          a(blk * nb + l, q * z.r + i) = v == 0 ? 0 : z.p - v;
        }
      }
      ++blk;
    }
  }
  return a;
}

Index az_corank(const PointConfigFp& z) {
  FpMatrix a = az_matrix(z);
  return a.cols - fp_rank(std::move(a));
}

Index az_corank(const MatR& beta, const MatR& gamma, double tol) {
  const Index m1 = beta.rows();
  const Index n1 = gamma.rows();
  const Index r = beta.cols();
  const Index pairs = m1 * (m1 - 1) / 2;
  MatR a = MatR::Zero(pairs * n1, m1 * r);
  Index blk = 0;
  for (Index p0 = 0; p0 < m1; ++p0) {
    for (Index q = p0 + 1; q < m1; ++q) {
      for (Index l = 0; l < n1; ++l) {
        for (Index i = 0; i < r; ++i) {
          a(blk * n1 + l, p0 * r + i) = gamma(l, i) * beta(q, i);
          a(blk * n1 + l, q * r + i) = -gamma(l, i) * beta(p0, i);
        }
      }
      ++blk;
    }
  }
  if (a.rows() == 0) return a.cols();
  Eigen::JacobiSVD<MatR> svd(a);
  const VecR& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return a.cols() - rank;
}

int auto_rank(int m, int n, int d) {
  const std::int64_t mn = static_cast<std::int64_t>(m) * n;
  const Rational bound = rank_bound(m, n, {d, 1});
  if (bound.is_infinite()) return static_cast<int>(mn);
  return static_cast<int>(std::min<std::int64_t>(bound.floor(), mn));
}

Certificate certify_conjecture(int m, int n, int d, int r, std::uint32_t p, int trials, std::uint64_t seed) {
  const Rational bound = rank_bound(m, n, {d, 1});
  const std::int64_t mn = static_cast<std::int64_t>(m) * n;
  if (r < 1 || r > mn || bound < r) {
    throw Error(ErrorCode::rank_out_of_range, "r = " + std::to_string(r) + " is outside 1..min{" + bound.to_string() + ", " +
                                                  std::to_string(mn) + "}");
  }
  Certificate cert;
  cert.m = m;
  cert.n = n;
  cert.d = d;
  cert.r = r;
  cert.p = p;
  cert.seed = seed;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial));
    const PointConfigFp z = random_config(m, n, r, p, s);
    cert.seed = s;
    cert.trials_used = trial + 1;
    cert.rank_n = fp_rank(w_matrix(z));
    if (cert.rank_n < r) continue;
    cert.hf = hilbert_sj(z, {d, 1});
    if (cert.hf == r) {
      cert.success = true;
      break;
    }
  }
  return cert;
}

}  // namespace cpdhnf
