#include "cpdhnf/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cpdhnf {

namespace {

constexpr double eigenvector_rcond_floor = 1e-12;

template <class Scalar>
Vec<Scalar> gaussian(Index size, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Vec<Scalar> out(size);
  for (Index i = 0; i < size; ++i) {
    if constexpr (is_complex_v<Scalar>) {
      const double re = dist(gen);
      out(i) = Scalar(re, dist(gen));
    } else {
      out(i) = dist(gen);
    }
  }
  return out;
}

template <class Scalar>
void normalize_columns(Mat<Scalar>& m) {
  for (Index i = 0; i < m.cols(); ++i) {
    auto col = m.col(i);
    const double nrm = col.norm();
    if (nrm == 0.0) continue;
    Index lead = 0;
    col.cwiseAbs().maxCoeff(&lead);
    col /= (col(lead) / std::abs(col(lead))) * nrm;
  }
}

}  // namespace

template <class Scalar>
Mat<Scalar> shifted_submatrix(const Mat<Scalar>& nullspace, const ShiftTable& table, Index shift) {
  if (shift < 0 || shift >= table.shifts) throw Error(ErrorCode::invalid_argument, "shift index out of range");
  if (nullspace.cols() != table.rows) throw Error(ErrorCode::shape_mismatch, "nullspace width does not match the degree");
  const Index block = static_cast<Index>(table.m + 1) * (table.n + 1);
  Mat<Scalar> out(nullspace.rows(), block);
  for (int k = 0; k <= table.m; ++k) {
    for (int l = 0; l <= table.n; ++l) out.col(k * (table.n + 1) + l) = nullspace.col(table.at(shift, k, l));
  }
  return out;
}

template <class Scalar>
Mat<Scalar> shifted_submatrix(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree, const std::vector<int>& a,
                              const std::vector<int>& b) {
  const MonomialBasis shifts = monomial_basis(m, n, {degree.d - 1, degree.e - 1});
  const Index idx = index_of(shifts, a, b);
  return shifted_submatrix(nullspace, shift_table(m, n, degree), idx);
}

template <class Scalar>
H0Choice<Scalar> assemble_h0(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree, const Vec<Scalar>& coeffs) {
  const ShiftTable table = shift_table(m, n, degree);
  if (coeffs.size() != table.shifts) throw Error(ErrorCode::shape_mismatch, "h0 coefficient count mismatch");
  H0Choice<Scalar> out;
  out.coeffs = coeffs;
  out.n_h0 = Mat<Scalar>::Zero(nullspace.rows(), static_cast<Index>(m + 1) * (n + 1));
  for (Index s = 0; s < table.shifts; ++s) out.n_h0 += coeffs(s) * shifted_submatrix(nullspace, table, s);
  return out;
}

template <class Scalar>
H0Choice<Scalar> make_h0(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree, std::uint64_t seed) {
  const Index count = hf_s(m, n, degree.d - 1, degree.e - 1);
  if (count == 1) return assemble_h0<Scalar>(nullspace, m, n, degree, Vec<Scalar>::Ones(1));
  return assemble_h0(nullspace, m, n, degree, gaussian<Scalar>(count, seed));
}

template <class Scalar>
BasisChoice<Scalar> choose_basis(const Mat<Scalar>& n_h0, Index r, const Tolerances& tol) {
  if (n_h0.rows() != r || n_h0.cols() < r) {
    throw Error(ErrorCode::basis_deficient, "N_h0 must have r rows and at least r columns");
  }
  Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(n_h0);
  BasisChoice<Scalar> out;
  out.q = qr.householderQ() * Mat<Scalar>::Identity(r, r);
  out.r_factor = qr.matrixQR().template triangularView<Eigen::Upper>();
  const auto& perm = qr.colsPermutation().indices();
  for (Index i = 0; i < perm.size(); ++i) out.pivots.push_back(perm(i));
  out.basis.assign(out.pivots.begin(), out.pivots.begin() + r);
  const double first = std::abs(out.r_factor(0, 0));
  const double last = std::abs(out.r_factor(r - 1, r - 1));
  if (first == 0.0 || last / first < tol.pivot) {
    throw Error(ErrorCode::basis_deficient, "pivoted QR of N_h0 is rank deficient (ratio " + std::to_string(first == 0.0 ? 0.0 : last / first) + ")");
  }
  Eigen::JacobiSVD<Mat<Scalar>> svd(Mat<Scalar>(out.r_factor.leftCols(r)));
  const VecR& sv = svd.singularValues();
  out.condition = sv(0) / sv(sv.size() - 1);
  return out;
}

template <class Scalar>
Vec<Scalar> random_h(int m, int n, Bidegree degree, std::uint64_t seed) {
  if (degree.d < 2 || degree.e < 1) throw Error(ErrorCode::invalid_argument, "h is defined for d >= 2 and e >= 1");
  const Index count = hf_s(m, n, degree.d - 2, degree.e - 1);
  if (count == 1) return Vec<Scalar>::Ones(1);
  return gaussian<Scalar>(count, seed);
}

template <class Scalar>
std::vector<Mat<Scalar>> shifted_family(const Mat<Scalar>& nullspace, int m, int n, Bidegree degree,
                                        const Vec<Scalar>& h_coeffs) {
  const ShiftTable table = shift_table(m, n, degree);
  const auto hx = compositions(m + 1, degree.d - 2);
  const auto hy = compositions(n + 1, degree.e - 1);
  if (h_coeffs.size() != static_cast<Index>(hx.size() * hy.size())) throw Error(ErrorCode::shape_mismatch, "h coefficient count mismatch");
  const Index ny = static_cast<Index>(hy.size());
  std::vector<Mat<Scalar>> out;
  for (int k = 0; k <= m; ++k) {
    Mat<Scalar> acc = Mat<Scalar>::Zero(nullspace.rows(), static_cast<Index>(m + 1) * (n + 1));
    for (std::size_t i = 0; i < hx.size(); ++i) {
      auto a = hx[i];
      ++a[static_cast<std::size_t>(k)];
      const Index xr = composition_rank(a);
      for (std::size_t j = 0; j < hy.size(); ++j) {
        const Scalar c = h_coeffs(static_cast<Index>(i) * ny + static_cast<Index>(j));
        acc += c * shifted_submatrix(nullspace, table, xr * ny + composition_rank(hy[j]));
      }
    }
    out.push_back(std::move(acc));
  }
  return out;
}

template <class Scalar>
std::vector<Mat<Scalar>> multiplication_matrices(const BasisChoice<Scalar>& basis, const std::vector<Mat<Scalar>>& n_k) {
  const Index r = static_cast<Index>(basis.basis.size());
  const auto tri = basis.r_factor.leftCols(r).template triangularView<Eigen::Upper>();
  std::vector<Mat<Scalar>> out;
  for (const auto& nk : n_k) {
    Mat<Scalar> cols(r, r);
    for (Index i = 0; i < r; ++i) cols.col(i) = nk.col(basis.basis[static_cast<std::size_t>(i)]);
    Mat<Scalar> rhs = basis.q.adjoint() * cols;
    tri.solveInPlace(rhs);
    out.push_back(std::move(rhs));
  }
  return out;
}

template <class Scalar>
double commutation_defect(const std::vector<Mat<Scalar>>& family) {
  double worst = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const double scale = family[i].norm() * family[j].norm();
      if (scale == 0.0) continue;
      worst = std::max(worst, (family[i] * family[j] - family[j] * family[i]).norm() / scale);
    }
  }
  return worst;
}

template <class Scalar>
Diagonalization<Scalar> simultaneous_diagonalize(const std::vector<Mat<Scalar>>& family, std::uint64_t seed,
                                                 const Tolerances& tol, const Checks& checks) {
  if (family.empty()) throw Error(ErrorCode::invalid_argument, "empty multiplication family");
  const Index r = family.front().rows();
  const double comm = commutation_defect(family);
  if (comm > tol.comm) {
    checks.fail(ErrorCode::defective_eigenvectors, "multiplication matrices do not commute (defect " + std::to_string(comm) + ")");
  }
  std::vector<MatC> fam;
  for (const auto& m : family) fam.push_back(m.template cast<cdouble>());
  Diagonalization<Scalar> best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= tol.diag_retries; ++attempt) {
    const VecR t = gaussian<double>(static_cast<Index>(fam.size()), derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    MatC combo = MatC::Zero(r, r);
    for (std::size_t k = 0; k < fam.size(); ++k) combo += t(static_cast<Index>(k)) * fam[k];
    Eigen::ComplexEigenSolver<MatC> es(combo);
    const MatC v = es.eigenvectors();
    Eigen::PartialPivLU<MatC> lu(v);
    MatC raw(static_cast<Index>(fam.size()), r);
    double worst = 0.0;
    for (std::size_t k = 0; k < fam.size(); ++k) {
      const MatC dk = lu.solve(fam[k] * v);
      raw.row(static_cast<Index>(k)) = dk.diagonal().transpose();
      const double total = dk.norm();
      if (total == 0.0) continue;
      MatC off = dk;
      off.diagonal().setZero();
      worst = std::max(worst, off.norm() / total);
    }
    // Nearly parallel eigenvectors mean a defective combination, whatever the off-diagonal mass says.
    if (!std::isfinite(worst) || !raw.allFinite() || lu.rcond() < eigenvector_rcond_floor) {
      worst = std::numeric_limits<double>::infinity();
    }
    if (worst < best.residual) {
      best.residual = worst;
      best.attempts = attempt + 1;
      best.eigenvectors = v;
      if constexpr (is_complex_v<Scalar>) {
        best.raw = raw;
      } else {
        best.raw = raw.real();
      }
    }
    if (worst <= tol.diag) break;
  }
  if (best.residual > tol.diag) {
    checks.fail(ErrorCode::defective_eigenvectors,
                "off-diagonal residual " + std::to_string(best.residual) + " after " + std::to_string(tol.diag_retries + 1) + " attempts");
  }
  best.coords = best.raw;
  normalize_columns(best.coords);
  return best;
}

template <class Scalar>
PencilForm<Scalar> pencil_prenormal(const Mat<Scalar>& flat, int m, int n, Index r, std::uint64_t seed) {
  const Index cols = static_cast<Index>(m + 1) * (n + 1);
  if (flat.cols() != cols) throw Error(ErrorCode::shape_mismatch, "flattening width is not (m+1)(n+1)");
  if (r < 1 || r > n + 1) throw Error(ErrorCode::basis_deficient, "pencil path needs r <= n+1 for the basis space");
  Eigen::JacobiSVD<Mat<Scalar>> svd(flat, Eigen::ComputeThinV);
  PencilForm<Scalar> out;
  out.nullspace = svd.matrixV().leftCols(r).adjoint();
  out.h0 = m == 0 ? Vec<Scalar>::Ones(1) : gaussian<Scalar>(m + 1, seed);
  out.n_h0 = Mat<Scalar>::Zero(r, n + 1);
  for (int k = 0; k <= m; ++k) {
    out.n_k.push_back(out.nullspace.middleCols(static_cast<Index>(k) * (n + 1), n + 1));
    out.n_h0 += out.h0(k) * out.n_k.back();
  }
  return out;
}

#define CPDHNF_INSTANTIATE(S)                                                                                          \
  template Mat<S> shifted_submatrix(const Mat<S>&, const ShiftTable&, Index);                                          \
  template Mat<S> shifted_submatrix(const Mat<S>&, int, int, Bidegree, const std::vector<int>&, const std::vector<int>&); \
  template H0Choice<S> make_h0(const Mat<S>&, int, int, Bidegree, std::uint64_t);                                      \
  template H0Choice<S> assemble_h0(const Mat<S>&, int, int, Bidegree, const Vec<S>&);                                  \
  template BasisChoice<S> choose_basis(const Mat<S>&, Index, const Tolerances&);                                       \
  template Vec<S> random_h<S>(int, int, Bidegree, std::uint64_t);                                                      \
  template std::vector<Mat<S>> shifted_family(const Mat<S>&, int, int, Bidegree, const Vec<S>&);                       \
  template std::vector<Mat<S>> multiplication_matrices(const BasisChoice<S>&, const std::vector<Mat<S>>&);             \
  template double commutation_defect(const std::vector<Mat<S>>&);                                                      \
  template Diagonalization<S> simultaneous_diagonalize(const std::vector<Mat<S>>&, std::uint64_t, const Tolerances&,   \
                                                       const Checks&);                                                 \
  template PencilForm<S> pencil_prenormal(const Mat<S>&, int, int, Index, std::uint64_t);

CPDHNF_INSTANTIATE(double)
CPDHNF_INSTANTIATE(cdouble)

#undef CPDHNF_INSTANTIATE

}  // namespace cpdhnf
