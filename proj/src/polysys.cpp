#include "cpdhnf/polysys.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace cpdhnf {

template <class Scalar>
BilinearSystem<Scalar> BilinearSystem<Scalar>::transposed() const {
  BilinearSystem out;
  out.m = n;
  out.n = m;
  out.forms.reserve(forms.size());
  for (const auto& f : forms) out.forms.push_back(f.transpose());
  return out;
}

template <class Scalar>
FlatteningKernel<Scalar> kernel_flattening(const Mat<Scalar>& flat, int m, int n, Index r, const Tolerances& tol,
                                           const Checks& checks) {
  const Index cols = static_cast<Index>(m + 1) * (n + 1);
  if (flat.cols() != cols) throw Error(ErrorCode::shape_mismatch, "flattening width is not (m+1)(n+1)");
  if (r < 1 || r > std::min(flat.rows(), cols)) throw Error(ErrorCode::rank_out_of_range, "rank exceeds the flattening size");
  Eigen::JacobiSVD<Mat<Scalar>> svd(flat, Eigen::ComputeFullV);
  const VecR& sv = svd.singularValues();
  const double s1 = sv(0);
  if (s1 == 0.0) throw Error(ErrorCode::zero_tensor, "flattening is zero");
  const double sr = sv(r - 1);
  const double next = r < sv.size() ? sv(r) : 0.0;
  if (sr / s1 < tol.rank) {
    throw Error(ErrorCode::flattening_rank_mismatch,
                "sigma_r/sigma_1 = " + std::to_string(sr / s1) + " is below the rank floor; the flattening has rank < r");
  }
  if (next / s1 > tol.gap) {
    checks.fail(ErrorCode::flattening_rank_mismatch,
                "sigma_{r+1}/sigma_1 = " + std::to_string(next / s1) + " exceeds the gap tolerance; the flattening has rank > r");
  }
  FlatteningKernel<Scalar> out;
  out.singular_values = sv;
  out.system.m = m;
  out.system.n = n;
  const auto& v = svd.matrixV();
  for (Index j = r; j < cols; ++j) {
    Mat<Scalar> f(m + 1, n + 1);
    for (int k = 0; k <= m; ++k) {
      for (int l = 0; l <= n; ++l) f(k, l) = v(k * (n + 1) + l, j);
    }
    out.system.forms.push_back(std::move(f));
  }
  return out;
}

template <class Scalar>
ResultantMatrix<Scalar> build_resultant(const BilinearSystem<Scalar>& sys, Bidegree degree) {
  const ShiftTable table = shift_table(sys.m, sys.n, degree);
  ResultantMatrix<Scalar> out;
  out.m = sys.m;
  out.n = sys.n;
  out.degree = degree;
  out.forms = sys.s();
  const Index block = static_cast<Index>(sys.m + 1) * (sys.n + 1);
  const Index cols = sys.s() * table.shifts;
  out.matrix.resize(table.rows, cols);
  out.matrix.reserve(Eigen::VectorXi::Constant(cols, static_cast<int>(block)));
  for (Index j = 0; j < sys.s(); ++j) {
    const Mat<Scalar>& f = sys.forms[static_cast<std::size_t>(j)];
    for (Index shift = 0; shift < table.shifts; ++shift) {
      const Index col = j * table.shifts + shift;
      for (int k = 0; k <= sys.m; ++k) {
        for (int l = 0; l <= sys.n; ++l) out.matrix.insert(table.at(shift, k, l), col) = f(k, l);
      }
    }
  }
  out.matrix.makeCompressed();
  return out;
}

const char* method_name(NullspaceMethod method) noexcept {
  switch (method) {
    case NullspaceMethod::automatic: return "auto";
    case NullspaceMethod::svd: return "svd";
    case NullspaceMethod::eigs: return "eigs";
  }
  return "unknown";
}

template <class Scalar>
Eigenpairs<Scalar> smallest_eigenpairs(const Mat<Scalar>& g, Index count, Index block, double tol, int maxiter,
                                       std::uint64_t seed) {
  const Index n = g.rows();
  const Index p = std::min(n, std::max(block, count));
  Eigenpairs<Scalar> out;
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.values = VecR::Zero(p);
    out.vectors = Mat<Scalar>::Identity(n, p);
    out.converged = true;
    return out;
  }
  Eigen::LLT<Mat<Scalar>> llt;
  double shift = 1e-11 * gnorm;
  for (int attempt = 0; attempt < 5; ++attempt) {
    llt.compute(g + Mat<Scalar>::Identity(n, n) * Scalar(shift));
    if (llt.info() == Eigen::Success) break;
    shift *= 100.0;
  }
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::corank_mismatch, "Gram matrix factorization failed");

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Mat<Scalar> x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = Scalar(dist(gen));
  }
  auto orthonormalize = [&](const Mat<Scalar>& y) {
    Eigen::HouseholderQR<Mat<Scalar>> qr(y);
    return Mat<Scalar>(qr.householderQ() * Mat<Scalar>::Identity(n, p));
  };
  x = orthonormalize(x);
  // The residual test alone passes long before the vectors are accurate when the
  // gap is small, so keep going while the gap-scaled residual still improves.
  double prev_angle = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= maxiter; ++it) {
    x = orthonormalize(llt.solve(x));
    const Mat<Scalar> gx = g * x;
    Mat<Scalar> h = x.adjoint() * gx;
    h = (h + h.adjoint()).eval() * Scalar(0.5);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(h);
    x = x * es.eigenvectors();
    const Mat<Scalar> rx = gx * es.eigenvectors();
    out.values = es.eigenvalues();
    out.iterations = it;
    const Index k = std::min(count, p);
    const double gap = k < p ? out.values(k) - out.values(k - 1) : gnorm;
    double worst = 0.0;
    for (Index i = 0; i < k; ++i) worst = std::max(worst, (rx.col(i) - out.values(i) * x.col(i)).norm());
    out.converged = worst / gnorm <= tol;
    const double angle = gap > 0.0 ? worst / gap : std::numeric_limits<double>::infinity();
    if (out.converged && (angle <= 1e2 * std::numeric_limits<double>::epsilon() || angle > 0.1 * prev_angle)) break;
    prev_angle = angle;
  }
  out.vectors = std::move(x);
  return out;
}

template <class Scalar>
Nullspace<Scalar> left_nullspace(const ResultantMatrix<Scalar>& res, Index r, NullspaceMethod method,
                                 const Tolerances& tol, const Checks& checks, std::uint64_t seed) {
  const Index rows = res.rows();
  const Index cols = res.cols();
  if (r < 1 || r > rows) throw Error(ErrorCode::invalid_argument, "nullspace dimension out of range");
  if (cols == 0) throw Error(ErrorCode::invalid_argument, "resultant matrix has no columns");
  if (method == NullspaceMethod::automatic) {
    method = rows * cols < eigs_entry_threshold ? NullspaceMethod::svd : NullspaceMethod::eigs;
  }
  Nullspace<Scalar> out;
  out.method = method;
  const double eps = std::numeric_limits<double>::epsilon();
  if (method == NullspaceMethod::svd) {
    const Mat<Scalar> dense = Mat<Scalar>(res.matrix);
    // Jacobi rather than divide-and-conquer: the latter can return wrong trailing vectors.
    Eigen::JacobiSVD<Mat<Scalar>> svd(dense, Eigen::ComputeFullU);
    const VecR& sv = svd.singularValues();
    // Singular values padded with zeros to one per row, descending.
    auto padded = [&](Index i) { return i < sv.size() ? sv(i) : 0.0; };
    const double floor = eps * static_cast<double>(std::max(rows, cols)) * sv(0);
    const double small = padded(rows - r);
    const double big = rows - r - 1 >= 0 ? padded(rows - r - 1) : std::numeric_limits<double>::infinity();
    out.separation = big / std::max(small, floor);
    out.basis = svd.matrixU().rightCols(r).adjoint();
  } else {
    const Eigen::SparseMatrix<Scalar> gs = res.matrix * Eigen::SparseMatrix<Scalar>(res.matrix.adjoint());
    const Mat<Scalar> g = Mat<Scalar>(gs);
    const Index block = std::min(rows, r + std::max<Index>(4, r / 5));
    const Eigenpairs<Scalar> ep = smallest_eigenpairs(g, r, block, tol.eigs, tol.eigs_maxiter, seed);
    out.iterations = ep.iterations;
    if (!ep.converged) {
      checks.fail(ErrorCode::corank_mismatch, "eigs did not reach tolerance within the iteration limit");
    }
    // Measured on |R^H x_i| so the ratio is on the singular-value scale of the svd path.
    const Index k = std::min<Index>(r + 1, ep.vectors.cols());
    const Mat<Scalar> rx = Eigen::SparseMatrix<Scalar>(res.matrix.adjoint()) * ep.vectors.leftCols(k);
    const double floor = eps * static_cast<double>(std::max(rows, cols)) * std::sqrt(g.norm());
    double small = 0.0;
    for (Index i = 0; i < r; ++i) small = std::max(small, rx.col(i).norm());
    const double big = k > r ? rx.col(r).norm() : std::numeric_limits<double>::infinity();
    out.separation = big / std::max(small, floor);
    out.basis = ep.vectors.leftCols(r).adjoint();
  }
  if (out.separation < tol.sep) {
    checks.fail(ErrorCode::corank_mismatch,
                "corank at degree (" + std::to_string(res.degree.d) + "," + std::to_string(res.degree.e) +
                    ") is not separated at r = " + std::to_string(r) + " (ratio " + std::to_string(out.separation) + ")");
  }
  const double rnorm = Mat<Scalar>(res.matrix).norm();
  out.residual = (out.basis * res.matrix).norm() / rnorm;
  if (out.residual > tol.null) {
    checks.fail(ErrorCode::corank_mismatch, "left nullspace residual " + std::to_string(out.residual) + " exceeds tolerance");
  }
  return out;
}

template <class Scalar>
Vec<Scalar> evaluate(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Vec<Scalar>& gamma) {
  Vec<Scalar> out(sys.s());
  for (Index j = 0; j < sys.s(); ++j) out(j) = beta.transpose() * sys.forms[static_cast<std::size_t>(j)] * gamma;
  return out;
}

template <class Scalar>
Mat<Scalar> jacobian(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Vec<Scalar>& gamma) {
  Mat<Scalar> out(sys.s(), sys.m + sys.n + 2);
  for (Index j = 0; j < sys.s(); ++j) {
    const Mat<Scalar>& f = sys.forms[static_cast<std::size_t>(j)];
    out.row(j).head(sys.m + 1) = (f * gamma).transpose();
    out.row(j).tail(sys.n + 1) = (f.transpose() * beta).transpose();
  }
  return out;
}

template <class Scalar>
void write_matrix_market(std::ostream& out, const ResultantMatrix<Scalar>& res) {
  out << "%%MatrixMarket matrix coordinate " << (is_complex_v<Scalar> ? "complex" : "real") << " general\n";
  out << "% resultant matrix at degree (" << res.degree.d << "," << res.degree.e << ")\n";
  out << res.rows() << ' ' << res.cols() << ' ' << res.matrix.nonZeros() << '\n' << std::setprecision(17);
  for (Index c = 0; c < res.matrix.outerSize(); ++c) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(res.matrix, c); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ';
      if constexpr (is_complex_v<Scalar>) {
        out << it.value().real() << ' ' << it.value().imag() << '\n';
      } else {
        out << it.value() << '\n';
      }
    }
  }
}

#define CPDHNF_INSTANTIATE(S)                                                                                         \
  template struct BilinearSystem<S>;                                                                                  \
  template FlatteningKernel<S> kernel_flattening(const Mat<S>&, int, int, Index, const Tolerances&, const Checks&);   \
  template ResultantMatrix<S> build_resultant(const BilinearSystem<S>&, Bidegree);                                    \
  template Eigenpairs<S> smallest_eigenpairs(const Mat<S>&, Index, Index, double, int, std::uint64_t);                \
  template Nullspace<S> left_nullspace(const ResultantMatrix<S>&, Index, NullspaceMethod, const Tolerances&,          \
                                       const Checks&, std::uint64_t);                                                 \
  template Vec<S> evaluate(const BilinearSystem<S>&, const Vec<S>&, const Vec<S>&);                                   \
  template Mat<S> jacobian(const BilinearSystem<S>&, const Vec<S>&, const Vec<S>&);                                   \
  template void write_matrix_market(std::ostream&, const ResultantMatrix<S>&);

CPDHNF_INSTANTIATE(double)
CPDHNF_INSTANTIATE(cdouble)

#undef CPDHNF_INSTANTIATE

}  // namespace cpdhnf
