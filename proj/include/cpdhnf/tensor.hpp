#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpdhnf/types.hpp"

namespace cpdhnf {

template <class Scalar>
class DenseTensor {
 public:
  using scalar_type = Scalar;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> shape);
  DenseTensor(std::vector<Index> shape, std::vector<Scalar> data);

  [[nodiscard]] const std::vector<Index>& shape() const noexcept { return shape_; }
  [[nodiscard]] Index order() const noexcept { return static_cast<Index>(shape_.size()); }
  [[nodiscard]] Index dim(Index k) const { return shape_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(data_.size()); }
  [[nodiscard]] const std::vector<Scalar>& data() const noexcept { return data_; }
  [[nodiscard]] std::vector<Scalar>& data() noexcept { return data_; }
  [[nodiscard]] Scalar& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const Scalar& operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] Scalar& at(const std::vector<Index>& idx);
  [[nodiscard]] const Scalar& at(const std::vector<Index>& idx) const;
  [[nodiscard]] double frobenius_norm() const;
  [[nodiscard]] static constexpr Field field() noexcept { return field_of_v<Scalar>; }

 private:
  [[nodiscard]] Index offset(const std::vector<Index>& idx) const;

  std::vector<Index> shape_;
  std::vector<Scalar> data_;
};

using TensorR = DenseTensor<double>;
using TensorC = DenseTensor<cdouble>;

template <class Scalar>
struct CPDecomposition {
  std::vector<Mat<Scalar>> factors;
  bool normalized = false;

  [[nodiscard]] Index rank() const noexcept { return factors.empty() ? 0 : factors.front().cols(); }
  [[nodiscard]] Index order() const noexcept { return static_cast<Index>(factors.size()); }
  [[nodiscard]] std::vector<Index> shape() const;
  // Unit-norm non-first modes with a real positive dominant entry; scale moves to mode 1.
  void normalize();
  [[nodiscard]] bool is_normalized(double tol = 1e-12) const;
};

// Partition of modes (0-based) into three groups; grouped dims are products over each group.
struct Grouping {
  std::array<std::vector<int>, 3> groups;

  [[nodiscard]] std::array<Index, 3> grouped_shape(const std::vector<Index>& shape) const;
  // Throws unless the groups partition 0..order-1 with none empty.
  void validate(Index order) const;
  // One-based display, e.g. [[4,6,7,8],[1,2,3],[5]].
  [[nodiscard]] std::string to_string() const;
  friend bool operator==(const Grouping&, const Grouping&) = default;
};

[[nodiscard]] Grouping identity_grouping();

template <class Scalar>
[[nodiscard]] Mat<Scalar> flatten_mode1(const DenseTensor<Scalar>& a);

template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> unflatten_mode1(const Mat<Scalar>& m, const std::vector<Index>& shape);

// Row-major Khatri-Rao product: column i is kron(F_1[:,i], ..., F_k[:,i]).
template <class Scalar>
[[nodiscard]] Mat<Scalar> khatri_rao(const std::vector<Mat<Scalar>>& factors);

template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> cpd_eval(const CPDecomposition<Scalar>& cpd);
template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> cpd_eval(const CPDecomposition<Scalar>& cpd, const std::vector<Index>& shape);

template <class Scalar>
[[nodiscard]] double backward_error(const DenseTensor<Scalar>& a, const CPDecomposition<Scalar>& cpd);

template <class Scalar>
struct RandomInstance {
  DenseTensor<Scalar> tensor;
  CPDecomposition<Scalar> truth;
};

template <class Scalar>
[[nodiscard]] RandomInstance<Scalar> random_cpd(const std::vector<Index>& shape, Index r, std::uint64_t seed);

// Reorders the modes: output mode i is input mode perm[i].
template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> permute_modes(const DenseTensor<Scalar>& a, const std::vector<int>& perm);

template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> reshape_group(const DenseTensor<Scalar>& a, const Grouping& g);

template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> ungroup(const DenseTensor<Scalar>& t, const std::vector<Index>& shape, const Grouping& g);

// Multilinear sizes actually used after compression of a grouped tensor of dims (l+1, m+1, n+1).
[[nodiscard]] std::array<Index, 3> compression_targets(const std::array<Index, 3>& dims, Index r);

[[nodiscard]] Grouping choose_grouping(const std::vector<Index>& shape, Index r);

template <class Scalar>
struct Hosvd {
  DenseTensor<Scalar> core;
  std::array<Mat<Scalar>, 3> factors;
};

template <class Scalar>
[[nodiscard]] Hosvd<Scalar> st_hosvd_compress(const DenseTensor<Scalar>& a, const std::array<Index, 3>& targets);

// Multiplies mode k of `a` by `u` (rows of u become the new mode size).
template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& a, int k, const Mat<Scalar>& u);

template <class Scalar>
[[nodiscard]] DenseTensor<Scalar> hosvd_expand(const Hosvd<Scalar>& h);

// Mode-k unfolding: rows indexed by mode k, columns by the remaining modes in row-major order.
template <class Scalar>
[[nodiscard]] Mat<Scalar> unfold(const DenseTensor<Scalar>& a, int k);

template <class Scalar>
struct Rank1Factors {
  std::vector<Vec<Scalar>> vectors;
  Scalar scale{};
};

template <class Scalar>
[[nodiscard]] Rank1Factors<Scalar> rank1_factorization(const Vec<Scalar>& v, const std::vector<Index>& shape);

}  // namespace cpdhnf
