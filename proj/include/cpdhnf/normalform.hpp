#pragma once

#include <cstdint>
#include <vector>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/error.hpp"
#include "cpdhnf/types.hpp"

namespace cpdhnf {

// Columns of N at x^{a'+e_k} y^{b'+e_l}, (k,l) row-major; `shift` indexes the basis of S_(d-1,e-1).
template <class Scalar>
[[nodiscard]] Mat<Scalar> shifted_submatrix(const Mat<Scalar>& nullspace, const ShiftTable& table, Index shift);

template <class Scalar>
[[nodiscard]] Mat<Scalar> shifted_submatrix(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree,
                                            const std::vector<int>& a, const std::vector<int>& b);

template <class Scalar>
struct H0Choice {
  Vec<Scalar> coeffs;
  Mat<Scalar> n_h0;
};

// Random Gaussian h0 over the basis of S_(d-1,e-1).
template <class Scalar>
[[nodiscard]] H0Choice<Scalar> make_h0(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree, std::uint64_t seed);

template <class Scalar>
[[nodiscard]] H0Choice<Scalar> assemble_h0(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree,
                                           const Vec<Scalar>& coeffs);

template <class Scalar>
struct BasisChoice {
  Mat<Scalar> q;
  // Upper-trapezoidal factor in pivoted column order.
  Mat<Scalar> r_factor;
  std::vector<Index> pivots;
  std::vector<Index> basis;
  double condition = 0.0;
};

template <class Scalar>
[[nodiscard]] BasisChoice<Scalar> choose_basis(const Mat<Scalar>& n_h0, Index r, const Tolerances& tol = {});

// Coefficients of h over the basis of S_(d-2,e-1); a single 1 when that space is the constants.
template <class Scalar>
[[nodiscard]] Vec<Scalar> random_h(int m, int n, Bidegree degree, std::uint64_t seed);

// N_{h x_k} for k = 0..m.
template <class Scalar>
[[nodiscard]] std::vector<Mat<Scalar>> shifted_family(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree,
                                                      const Vec<Scalar>& h_coeffs);

// M_k = (N_h0|B)^{-1} Q^H N_k[:, B].
template <class Scalar>
[[nodiscard]] std::vector<Mat<Scalar>> multiplication_matrices(const BasisChoice<Scalar>& basis,
                                                               const std::vector<Mat<Scalar>>& n_k);

template <class Scalar>
[[nodiscard]] double commutation_defect(const std::vector<Mat<Scalar>>& family);

template <class Scalar>
struct Diagonalization {
  // Row k, column i: eigenvalue of M_k on the i-th common eigenvector, columns unit norm.
  Mat<Scalar> coords;
  Mat<Scalar> raw;
  MatC eigenvectors;
  double residual = 0.0;
  int attempts = 0;
};

template <class Scalar>
[[nodiscard]] Diagonalization<Scalar> simultaneous_diagonalize(const std::vector<Mat<Scalar>>& family, std::uint64_t seed,
                                                               const Tolerances& tol = {}, const Checks& checks = {});

template <class Scalar>
struct PencilForm {
  Mat<Scalar> nullspace;
  Vec<Scalar> h0;
  Mat<Scalar> n_h0;
  std::vector<Mat<Scalar>> n_k;
};

// Row space of the flattening; N_k are the columns indexed by (k, 0..n).
template <class Scalar>
[[nodiscard]] PencilForm<Scalar> pencil_prenormal(const Mat<Scalar>& flat, int m, int n, Index r, std::uint64_t seed);

}  // namespace cpdhnf
