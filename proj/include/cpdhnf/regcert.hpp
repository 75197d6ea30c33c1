#pragma once

#include <cstdint>
#include <vector>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/types.hpp"

namespace cpdhnf {

// Dense row-major matrix over Z_p.
struct FpMatrix {
  std::uint32_t p = 8191;
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint32_t> data;

  FpMatrix() = default;
  FpMatrix(std::uint32_t prime, Index r, Index c) : p(prime), rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0) {}
  [[nodiscard]] std::uint32_t& operator()(Index i, Index j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  [[nodiscard]] std::uint32_t operator()(Index i, Index j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

inline constexpr std::uint32_t default_prime = 8191;

[[nodiscard]] bool is_prime(std::uint32_t p) noexcept;

[[nodiscard]] Index fp_rank(FpMatrix m);

// Rows form a basis of the right kernel.
[[nodiscard]] FpMatrix fp_kernel(FpMatrix m);

struct PointConfigFp {
  std::uint32_t p = default_prime;
  int m = 0;
  int n = 0;
  int r = 0;
  FpMatrix beta;
  FpMatrix gamma;
};

[[nodiscard]] PointConfigFp random_config(int m, int n, int r, std::uint32_t p, std::uint64_t seed);

// Rows beta_i (x) gamma_i.
[[nodiscard]] FpMatrix w_matrix(const PointConfigFp& z);

[[nodiscard]] Index hilbert_sj(const PointConfigFp& z, Bidegree degree);

[[nodiscard]] FpMatrix az_matrix(const PointConfigFp& z);
[[nodiscard]] Index az_corank(const PointConfigFp& z);
// Real points: numerical corank with relative singular value threshold.
[[nodiscard]] Index az_corank(const MatR& beta, const MatR& gamma, double tol = 1e-10);

struct Certificate {
  int m = 0;
  int n = 0;
  int d = 0;
  int r = 0;
  std::uint32_t p = default_prime;
  std::uint64_t seed = 0;
  Index rank_n = 0;
  Index hf = 0;
  bool success = false;
  int trials_used = 0;
};

// floor(min{R(m,n,(d,1)), mn}).
[[nodiscard]] int auto_rank(int m, int n, int d);

[[nodiscard]] Certificate certify_conjecture(int m, int n, int d, int r, std::uint32_t p, int trials, std::uint64_t seed);

}  // namespace cpdhnf
