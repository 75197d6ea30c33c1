#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/error.hpp"
#include "cpdhnf/polysys.hpp"
#include "cpdhnf/tensor.hpp"

namespace cpdhnf {

template <class Scalar>
struct GammaSolution {
  Vec<Scalar> gamma;
  // Smallest over second-smallest singular value of the stacked system.
  double ratio = 0.0;
};

template <class Scalar>
[[nodiscard]] GammaSolution<Scalar> solve_gamma(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta,
                                                const Tolerances& tol = {}, const Checks& checks = {});

template <class Scalar>
struct NewtonResult {
  Vec<Scalar> beta;
  Vec<Scalar> gamma;
  double residual_before = 0.0;
  double residual_after = 0.0;
  int accepted = 0;
};

// Relative cutoff for the Jacobian pseudoinverse and smallest admissible singular value ratio.
inline constexpr double newton_cutoff = 1e-12;
inline constexpr double newton_singular = 1e-10;

template <class Scalar>
[[nodiscard]] NewtonResult<Scalar> newton_refine(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta,
                                                 const Vec<Scalar>& gamma, int iters = 3, const Checks& checks = {});

template <class Scalar>
struct AlphaSolution {
  Mat<Scalar> alpha;
  double residual = 0.0;
};

template <class Scalar>
[[nodiscard]] AlphaSolution<Scalar> solve_alpha(const Mat<Scalar>& flat, const Mat<Scalar>& betas, const Mat<Scalar>& gammas);

struct DecomposeOptions {
  Index rank = 0;
  // (1,1) selects the pencil path; unset means automatic.
  std::optional<Bidegree> degree;
  NullspaceMethod kernel = NullspaceMethod::automatic;
  int newton_iters = 3;
  std::uint64_t seed = 0;
  std::optional<Grouping> grouping;
  bool compress = true;
  // Downgrade numerical consistency checks to warnings (noisy input).
  bool noise_tolerant = false;
  Tolerances tol;
  // MatrixMarket dump of the resultant matrix when nonempty.
  std::string dump_resultant;
};

template <class Scalar>
struct DecomposeResult {
  CPDecomposition<Scalar> cpd;
  std::vector<Index> shape;
  Index rank = 0;
  Bidegree degree_used;
  SolvePath path = SolvePath::normal_form;
  NullspaceMethod kernel_used = NullspaceMethod::svd;
  Grouping grouping;
  bool swapped = false;
  double backward_error = 0.0;
  double backward_error_pre_newton = 0.0;
  bool newton_reverted = false;
  double basis_condition = 0.0;
  double diag_residual = 0.0;
  double commutation = 0.0;
  std::vector<std::pair<std::string, double>> stage_ms;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

template <class Scalar>
[[nodiscard]] DecomposeResult<Scalar> decompose(const DenseTensor<Scalar>& a, const DecomposeOptions& options);

// A + 10^e (|A|/|E|) E with standard normal E; no noise when e is unset.
template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> add_noise(const DenseTensor<Scalar>& a, std::optional<int> e, std::uint64_t seed);

}  // namespace cpdhnf
