#pragma once

#include <Eigen/Sparse>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/error.hpp"
#include "cpdhnf/types.hpp"

namespace cpdhnf {

// Forms f_j(x,y) = x^T F_j y with F_j of size (m+1)x(n+1).
template <class Scalar>
struct BilinearSystem {
  int m = 0;
  int n = 0;
  std::vector<Mat<Scalar>> forms;

  [[nodiscard]] Index s() const noexcept { return static_cast<Index>(forms.size()); }
  // The same system with the roles of x and y exchanged.
  [[nodiscard]] BilinearSystem transposed() const;
};

template <class Scalar>
struct FlatteningKernel {
  BilinearSystem<Scalar> system;
  VecR singular_values;
};

template <class Scalar>
[[nodiscard]] FlatteningKernel<Scalar> kernel_flattening(const Mat<Scalar>& flat, int m, int n, Index r,
                                                         const Tolerances& tol = {}, const Checks& checks = {});

template <class Scalar>
struct ResultantMatrix {
  int m = 0;
  int n = 0;
  Bidegree degree;
  Index forms = 0;
  Eigen::SparseMatrix<Scalar> matrix;

  [[nodiscard]] Index rows() const noexcept { return matrix.rows(); }
  [[nodiscard]] Index cols() const noexcept { return matrix.cols(); }
};

// Column j*HF_S(d-1,e-1) + shift holds x^{a'} y^{b'} f_j in the monomial basis of S_(d,e).
template <class Scalar>
[[nodiscard]] ResultantMatrix<Scalar> build_resultant(const BilinearSystem<Scalar>& sys, Bidegree degree);

enum class NullspaceMethod { automatic, svd, eigs };

[[nodiscard]] const char* method_name(NullspaceMethod method) noexcept;

// Dense SVD below this many entries when the method is automatic.
inline constexpr Index eigs_entry_threshold = 10000;

template <class Scalar>
struct Nullspace {
  Mat<Scalar> basis;
  NullspaceMethod method = NullspaceMethod::svd;
  double separation = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

template <class Scalar>
[[nodiscard]] Nullspace<Scalar> left_nullspace(const ResultantMatrix<Scalar>& res, Index r, NullspaceMethod method,
                                               const Tolerances& tol = {}, const Checks& checks = {},
                                               std::uint64_t seed = 0);

template <class Scalar>
struct Eigenpairs {
  VecR values;
  Mat<Scalar> vectors;
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenpairs of a Hermitian positive semidefinite matrix by shift-invert subspace iteration.
template <class Scalar>
[[nodiscard]] Eigenpairs<Scalar> smallest_eigenpairs(const Mat<Scalar>& g, Index count, Index block, double tol,
                                                     int maxiter, std::uint64_t seed);

template <class Scalar>
[[nodiscard]] Vec<Scalar> evaluate(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Vec<Scalar>& gamma);

template <class Scalar>
[[nodiscard]] Mat<Scalar> jacobian(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Vec<Scalar>& gamma);

template <class Scalar>
void write_matrix_market(std::ostream& out, const ResultantMatrix<Scalar>& res);

}  // namespace cpdhnf
