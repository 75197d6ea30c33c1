#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <type_traits>

namespace cpdhnf {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

enum class Field { real, complex };

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatR = Mat<double>;
using MatC = Mat<cdouble>;
using VecR = Vec<double>;
using VecC = Vec<cdouble>;

template <class Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, double>;

template <class Scalar>
inline constexpr Field field_of_v = is_complex_v<Scalar> ? Field::complex : Field::real;

// Tolerances shared by the numerical pipeline.
struct Tolerances {
  double rank = 1e-8;
  double gap = 1e-6;
  double null = 1e-8;
  double sep = 1e3;
  double comm = 1e-6;
  double diag = 1e-6;
  double pivot = 1e-10;
  double eigs = 1e-6;
  int eigs_maxiter = 25;
  int diag_retries = 3;
};

// Derives an independent stream seed from a base seed and a stage tag.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cpdhnf
