#include "cpdhnf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cpdhnf/bigraded.hpp"
#include "cpdhnf/error.hpp"

namespace cpdhnf {

namespace {

Index product(const std::vector<Index>& shape) {
  Index p = 1;
  for (Index s : shape) p *= s;
  return p;
}

template <class Scalar>
Scalar draw(std::mt19937_64& gen, std::normal_distribution<double>& dist) {
  if constexpr (is_complex_v<Scalar>) {
    const double re = dist(gen);
    const double im = dist(gen);
    return Scalar(re, im) / std::sqrt(2.0);
  } else {
    return dist(gen);
  }
}

std::vector<int> inverse_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

template <class Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

template <class Scalar>
DenseTensor<Scalar>::DenseTensor(std::vector<Index> shape) : shape_(std::move(shape)) {
  for (Index s : shape_) {
    if (s < 1) throw Error(ErrorCode::invalid_argument, "tensor dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(product(shape_)), Scalar(0));
}

template <class Scalar>
DenseTensor<Scalar>::DenseTensor(std::vector<Index> shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (Index s : shape_) {
    if (s < 1) throw Error(ErrorCode::invalid_argument, "tensor dimensions must be positive");
  }
  if (static_cast<Index>(data_.size()) != product(shape_)) {
    throw Error(ErrorCode::shape_mismatch, "data length " + std::to_string(data_.size()) + " does not match shape");
  }
  for (const Scalar& x : data_) {
    if (!std::isfinite(std::abs(x))) throw Error(ErrorCode::invalid_argument, "tensor contains NaN or Inf");
  }
}

template <class Scalar>
Index DenseTensor<Scalar>::offset(const std::vector<Index>& idx) const {
  if (idx.size() != shape_.size()) throw Error(ErrorCode::shape_mismatch, "index order mismatch");
  Index off = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= shape_[k]) throw Error(ErrorCode::invalid_argument, "index out of range");
    off = off * shape_[k] + idx[k];
  }
  return off;
}

template <class Scalar>
Scalar& DenseTensor<Scalar>::at(const std::vector<Index>& idx) {
  return data_[static_cast<std::size_t>(offset(idx))];
}

template <class Scalar>
const Scalar& DenseTensor<Scalar>::at(const std::vector<Index>& idx) const {
  return data_[static_cast<std::size_t>(offset(idx))];
}

template <class Scalar>
double DenseTensor<Scalar>::frobenius_norm() const {
  double scale = 0.0;
  for (const Scalar& x : data_) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (const Scalar& x : data_) acc += std::norm(x / scale);
  return scale * std::sqrt(acc);
}

template <class Scalar>
std::vector<Index> CPDecomposition<Scalar>::shape() const {
  std::vector<Index> out;
  for (const auto& f : factors) out.push_back(f.rows());
  return out;
}

template <class Scalar>
void CPDecomposition<Scalar>::normalize() {
  if (factors.empty()) return;
  const Index r = rank();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    for (Index i = 0; i < r; ++i) {
      auto col = factors[k].col(i);
      const double nrm = col.norm();
      if (nrm == 0.0) continue;
      Index lead = 0;
      col.cwiseAbs().maxCoeff(&lead);
      const Scalar phase = col(lead) / std::abs(col(lead));
      col /= (phase * nrm);
      factors[0].col(i) *= (phase * nrm);
    }
  }
  normalized = true;
}

template <class Scalar>
bool CPDecomposition<Scalar>::is_normalized(double tol) const {
  for (std::size_t k = 1; k < factors.size(); ++k) {
    for (Index i = 0; i < factors[k].cols(); ++i) {
      if (std::abs(factors[k].col(i).norm() - 1.0) > tol) return false;
    }
  }
  return true;
}

std::array<Index, 3> Grouping::grouped_shape(const std::vector<Index>& shape) const {
  std::array<Index, 3> out{1, 1, 1};
  for (int g = 0; g < 3; ++g) {
    for (int mode : groups[static_cast<std::size_t>(g)]) out[static_cast<std::size_t>(g)] *= shape.at(static_cast<std::size_t>(mode));
  }
  return out;
}

void Grouping::validate(Index order) const {
  std::vector<int> seen(static_cast<std::size_t>(order), 0);
  for (const auto& grp : groups) {
    if (grp.empty()) throw Error(ErrorCode::invalid_argument, "grouping has an empty part");
    for (int mode : grp) {
      if (mode < 0 || mode >= order) throw Error(ErrorCode::invalid_argument, "grouping refers to a missing mode");
      if (seen[static_cast<std::size_t>(mode)]++) throw Error(ErrorCode::invalid_argument, "grouping repeats a mode");
    }
  }
  for (int s : seen) {
    if (s == 0) throw Error(ErrorCode::invalid_argument, "grouping does not cover every mode");
  }
}

std::string Grouping::to_string() const {
  std::ostringstream out;
  out << "[";
  for (int g = 0; g < 3; ++g) {
    out << (g ? ",[" : "[");
    const auto& grp = groups[static_cast<std::size_t>(g)];
    for (std::size_t i = 0; i < grp.size(); ++i) out << (i ? "," : "") << grp[i] + 1;
    out << "]";
  }
  out << "]";
  return out.str();
}

Grouping identity_grouping() { return Grouping{{std::vector<int>{0}, std::vector<int>{1}, std::vector<int>{2}}}; }

template <class Scalar>
Mat<Scalar> flatten_mode1(const DenseTensor<Scalar>& a) {
  if (a.order() != 3) throw Error(ErrorCode::shape_mismatch, "mode-1 flattening needs an order-3 tensor");
  const Index rows = a.dim(0);
  const Index cols = a.dim(1) * a.dim(2);
  return Eigen::Map<const RowMat<Scalar>>(a.data().data(), rows, cols);
}

template <class Scalar>
DenseTensor<Scalar> unflatten_mode1(const Mat<Scalar>& m, const std::vector<Index>& shape) {
  if (shape.empty() || m.rows() != shape[0] || m.size() != product(shape)) {
    throw Error(ErrorCode::shape_mismatch, "flattening does not match shape");
  }
  std::vector<Scalar> data(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMat<Scalar>>(data.data(), m.rows(), m.cols()) = m;
  return DenseTensor<Scalar>(shape, std::move(data));
}

template <class Scalar>
Mat<Scalar> khatri_rao(const std::vector<Mat<Scalar>>& factors) {
  if (factors.empty()) throw Error(ErrorCode::invalid_argument, "Khatri-Rao product of nothing");
  const Index r = factors.front().cols();
  Mat<Scalar> out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const Mat<Scalar>& f = factors[k];
    if (f.cols() != r) throw Error(ErrorCode::shape_mismatch, "factor column counts differ");
    Mat<Scalar> next(out.rows() * f.rows(), r);
    for (Index i = 0; i < r; ++i) {
      for (Index p = 0; p < out.rows(); ++p) next.col(i).segment(p * f.rows(), f.rows()) = out(p, i) * f.col(i);
    }
    out = std::move(next);
  }
  return out;
}

template <class Scalar>
DenseTensor<Scalar> cpd_eval(const CPDecomposition<Scalar>& cpd) {
  if (cpd.factors.empty()) throw Error(ErrorCode::invalid_argument, "empty decomposition");
  const Index r = cpd.rank();
  std::vector<Index> shape = cpd.shape();
  Mat<Scalar> flat;
  if (cpd.factors.size() == 1) {
    flat = cpd.factors[0] * Vec<Scalar>::Ones(r);
  } else {
    std::vector<Mat<Scalar>> rest(cpd.factors.begin() + 1, cpd.factors.end());
    flat = cpd.factors[0] * khatri_rao(rest).transpose();
  }
  std::vector<Scalar> data(static_cast<std::size_t>(product(shape)));
  Eigen::Map<RowMat<Scalar>>(data.data(), shape[0], product(shape) / shape[0]) = flat;
  return DenseTensor<Scalar>(std::move(shape), std::move(data));
}

template <class Scalar>
DenseTensor<Scalar> cpd_eval(const CPDecomposition<Scalar>& cpd, const std::vector<Index>& shape) {
  if (cpd.shape() != shape) throw Error(ErrorCode::shape_mismatch, "factor sizes do not match the tensor shape");
  return cpd_eval(cpd);
}

template <class Scalar>
double backward_error(const DenseTensor<Scalar>& a, const CPDecomposition<Scalar>& cpd) {
  const double nrm = a.frobenius_norm();
  if (nrm == 0.0) throw Error(ErrorCode::zero_tensor, "backward error of the zero tensor is undefined");
  const DenseTensor<Scalar> b = cpd_eval(cpd, a.shape());
  double scale = 0.0;
  for (Index i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i] - b[i]));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < a.size(); ++i) acc += std::norm((a[i] - b[i]) / scale);
  return scale * std::sqrt(acc) / nrm;
}

template <class Scalar>
RandomInstance<Scalar> random_cpd(const std::vector<Index>& shape, Index r, std::uint64_t seed) {
  if (r < 1) throw Error(ErrorCode::invalid_argument, "rank must be positive");
  if (shape.empty()) throw Error(ErrorCode::invalid_argument, "shape must be nonempty");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  RandomInstance<Scalar> out;
  for (Index dim : shape) {
    if (dim < 1) throw Error(ErrorCode::invalid_argument, "tensor dimensions must be positive");
    Mat<Scalar> f(dim, r);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < r; ++j) f(i, j) = draw<Scalar>(gen, dist);
    }
    out.truth.factors.push_back(std::move(f));
  }
  out.tensor = cpd_eval(out.truth);
  return out;
}

template <class Scalar>
DenseTensor<Scalar> permute_modes(const DenseTensor<Scalar>& a, const std::vector<int>& perm) {
  const std::size_t d = static_cast<std::size_t>(a.order());
  if (perm.size() != d) throw Error(ErrorCode::invalid_argument, "permutation length mismatch");
  std::vector<Index> in_stride(d, 1);
  for (std::size_t k = d; k-- > 1;) in_stride[k - 1] = in_stride[k] * a.shape()[k];
  std::vector<Index> shape(d);
  std::vector<Index> stride(d);
  for (std::size_t i = 0; i < d; ++i) {
    shape[i] = a.shape().at(static_cast<std::size_t>(perm[i]));
    stride[i] = in_stride[static_cast<std::size_t>(perm[i])];
  }
  std::vector<Scalar> data(static_cast<std::size_t>(a.size()));
  std::vector<Index> idx(d, 0);
  Index src = 0;
  for (std::size_t out = 0; out < data.size(); ++out) {
    data[out] = a[src];
    for (std::size_t k = d; k-- > 0;) {
      ++idx[k];
      src += stride[k];
      if (idx[k] < shape[k]) break;
      src -= stride[k] * shape[k];
      idx[k] = 0;
    }
  }
  return DenseTensor<Scalar>(std::move(shape), std::move(data));
}

template <class Scalar>
DenseTensor<Scalar> reshape_group(const DenseTensor<Scalar>& a, const Grouping& g) {
  g.validate(a.order());
  std::vector<int> perm;
  for (const auto& grp : g.groups) perm.insert(perm.end(), grp.begin(), grp.end());
  DenseTensor<Scalar> p = permute_modes(a, perm);
  const auto dims = g.grouped_shape(a.shape());
  return DenseTensor<Scalar>({dims[0], dims[1], dims[2]}, std::move(p.data()));
}

template <class Scalar>
DenseTensor<Scalar> ungroup(const DenseTensor<Scalar>& t, const std::vector<Index>& shape, const Grouping& g) {
  g.validate(static_cast<Index>(shape.size()));
  const auto dims = g.grouped_shape(shape);
  if (t.order() != 3 || t.dim(0) != dims[0] || t.dim(1) != dims[1] || t.dim(2) != dims[2]) {
    throw Error(ErrorCode::shape_mismatch, "grouped tensor does not match the grouping");
  }
  std::vector<int> perm;
  for (const auto& grp : g.groups) perm.insert(perm.end(), grp.begin(), grp.end());
  std::vector<Index> permuted;
  for (int mode : perm) permuted.push_back(shape[static_cast<std::size_t>(mode)]);
  DenseTensor<Scalar> p(std::move(permuted), t.data());
  return permute_modes(p, inverse_permutation(perm));
}

std::array<Index, 3> compression_targets(const std::array<Index, 3>& dims, Index r) {
  std::array<Index, 3> t{std::min(dims[0], r), std::min(dims[1], r), std::min(dims[2], r)};
  if (r > (t[1] - 1) * (t[2] - 1)) {
    t[1] = dims[1];
    t[2] = dims[2];
  }
  return t;
}

Grouping choose_grouping(const std::vector<Index>& shape, Index r) {
  const int d = static_cast<int>(shape.size());
  if (d < 3) throw Error(ErrorCode::invalid_argument, "choose_grouping expects an order of at least 3");
  if (d > 12) throw Error(ErrorCode::invalid_argument, "exhaustive grouping search supports order <= 12");
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  bool found = false;
  long double best_cost = 0;
  Grouping best;
  std::vector<int> label(static_cast<std::size_t>(d));
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t c = code;
    for (int i = 0; i < d; ++i) {
      label[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
    }
    Grouping g;
    for (int i = 0; i < d; ++i) g.groups[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
    if (g.groups[0].empty() || g.groups[1].empty() || g.groups[2].empty()) continue;
    auto dims = g.grouped_shape(shape);
    // The other two groups are kept in canonical order.
    if (dims[1] < dims[2] || (dims[1] == dims[2] && g.groups[1].front() > g.groups[2].front())) continue;
    auto feasible = [&](int q) {
      const Index a = dims[static_cast<std::size_t>((q + 1) % 3)];
      const Index b = dims[static_cast<std::size_t>((q + 2) % 3)];
      return r <= std::min<Index>(dims[static_cast<std::size_t>(q)], (a - 1) * (b - 1));
    };
    if (!feasible(0)) continue;
    // The largest group plays the first mode unless that orientation is infeasible.
    bool larger_feasible = false;
    for (int q = 1; q < 3; ++q) {
      const auto qs = static_cast<std::size_t>(q);
      const bool larger = dims[qs] > dims[0] || (dims[qs] == dims[0] && g.groups[qs].front() < g.groups[0].front());
      larger_feasible = larger_feasible || (larger && feasible(q));
    }
    if (larger_feasible) continue;
    const auto t = compression_targets(dims, r);
    long double cost = 0;
    try {
      const DegreePlan plan = select_degree(static_cast<int>(t[1] - 1), static_cast<int>(t[2] - 1), static_cast<int>(r),
                                            static_cast<int>(t[0] - 1), true);
      const long double rows = static_cast<long double>(plan.rows);
      cost = rows * rows * static_cast<long double>(plan.cols);
    } catch (const Error&) {
      continue;
    }
    if (!found || cost < best_cost) {
      found = true;
      best_cost = cost;
      best = g;
    }
  }
  if (!found) {
    throw Error(ErrorCode::no_feasible_grouping, "no partition of the modes satisfies r <= min{l+1, mn} for r = " + std::to_string(r));
  }
  return best;
}

template <class Scalar>
Mat<Scalar> unfold(const DenseTensor<Scalar>& a, int k) {
  std::vector<int> perm{k};
  for (int i = 0; i < a.order(); ++i) {
    if (i != k) perm.push_back(i);
  }
  const DenseTensor<Scalar> p = permute_modes(a, perm);
  return Eigen::Map<const RowMat<Scalar>>(p.data().data(), a.dim(k), a.size() / a.dim(k));
}

template <class Scalar>
DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& a, int k, const Mat<Scalar>& u) {
  if (u.cols() != a.dim(k)) throw Error(ErrorCode::shape_mismatch, "mode product size mismatch");
  const Mat<Scalar> prod = u * unfold(a, k);
  std::vector<int> perm{k};
  std::vector<Index> pshape{u.rows()};
  for (int i = 0; i < a.order(); ++i) {
    if (i == k) continue;
    perm.push_back(i);
    pshape.push_back(a.dim(i));
  }
  std::vector<Scalar> data(static_cast<std::size_t>(prod.size()));
  Eigen::Map<RowMat<Scalar>>(data.data(), prod.rows(), prod.cols()) = prod;
  return permute_modes(DenseTensor<Scalar>(std::move(pshape), std::move(data)), inverse_permutation(perm));
}

template <class Scalar>
Hosvd<Scalar> st_hosvd_compress(const DenseTensor<Scalar>& a, const std::array<Index, 3>& targets) {
  if (a.order() != 3) throw Error(ErrorCode::shape_mismatch, "ST-HOSVD expects an order-3 tensor");
  for (int k = 0; k < 3; ++k) {
    if (targets[static_cast<std::size_t>(k)] < 1 || targets[static_cast<std::size_t>(k)] > a.dim(k)) {
      throw Error(ErrorCode::invalid_argument, "target multilinear rank out of range");
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a.dim(x) > a.dim(y); });
  Hosvd<Scalar> out;
  out.core = a;
  for (int k : order) {
    const Index target = targets[static_cast<std::size_t>(k)];
    if (target == a.dim(k)) {
      out.factors[static_cast<std::size_t>(k)] = Mat<Scalar>::Identity(target, target);
      continue;
    }
    const Mat<Scalar> unf = unfold(out.core, k);
    Eigen::BDCSVD<Mat<Scalar>> svd(unf, Eigen::ComputeThinU);
    Mat<Scalar> u = svd.matrixU().leftCols(target);
    out.core = mode_product(out.core, k, Mat<Scalar>(u.adjoint()));
    out.factors[static_cast<std::size_t>(k)] = std::move(u);
  }
  return out;
}

template <class Scalar>
DenseTensor<Scalar> hosvd_expand(const Hosvd<Scalar>& h) {
  DenseTensor<Scalar> t = h.core;
  for (int k = 0; k < 3; ++k) t = mode_product(t, k, h.factors[static_cast<std::size_t>(k)]);
  return t;
}

template <class Scalar>
Rank1Factors<Scalar> rank1_factorization(const Vec<Scalar>& v, const std::vector<Index>& shape) {
  if (product(shape) != v.size()) throw Error(ErrorCode::shape_mismatch, "vector length does not match shape");
  if (v.norm() == 0.0) throw Error(ErrorCode::zero_tensor, "rank-1 factorization of a zero vector");
  Rank1Factors<Scalar> out;
  Vec<Scalar> rest = v;
  for (std::size_t k = 0; k + 1 < shape.size(); ++k) {
    const Index rows = shape[k];
    const Index cols = rest.size() / rows;
    const RowMat<Scalar> w = Eigen::Map<const RowMat<Scalar>>(rest.data(), rows, cols);
    Vec<Scalar> u;
    if (rows == 1) {
      u = Vec<Scalar>::Ones(1);
    } else {
      Eigen::JacobiSVD<Mat<Scalar>> svd(Mat<Scalar>(w), Eigen::ComputeThinU);
      u = svd.matrixU().col(0);
    }
    rest = (u.adjoint() * w).transpose();
    out.vectors.push_back(std::move(u));
  }
  const double nrm = rest.norm();
  out.scale = Scalar(nrm);
  out.vectors.push_back(rest / nrm);
  return out;
}

#define CPDHNF_INSTANTIATE(S)                                                                                      \
  template class DenseTensor<S>;                                                                                   \
  template struct CPDecomposition<S>;                                                                              \
  template Mat<S> flatten_mode1(const DenseTensor<S>&);                                                            \
  template DenseTensor<S> unflatten_mode1(const Mat<S>&, const std::vector<Index>&);                               \
  template Mat<S> khatri_rao(const std::vector<Mat<S>>&);                                                          \
  template DenseTensor<S> cpd_eval(const CPDecomposition<S>&);                                                     \
  template DenseTensor<S> cpd_eval(const CPDecomposition<S>&, const std::vector<Index>&);                          \
  template double backward_error(const DenseTensor<S>&, const CPDecomposition<S>&);                                \
  template RandomInstance<S> random_cpd(const std::vector<Index>&, Index, std::uint64_t);                          \
  template DenseTensor<S> permute_modes(const DenseTensor<S>&, const std::vector<int>&);                           \
  template DenseTensor<S> reshape_group(const DenseTensor<S>&, const Grouping&);                                   \
  template DenseTensor<S> ungroup(const DenseTensor<S>&, const std::vector<Index>&, const Grouping&);              \
  template Mat<S> unfold(const DenseTensor<S>&, int);                                                              \
  template DenseTensor<S> mode_product(const DenseTensor<S>&, int, const Mat<S>&);                                 \
  template Hosvd<S> st_hosvd_compress(const DenseTensor<S>&, const std::array<Index, 3>&);                         \
  template DenseTensor<S> hosvd_expand(const Hosvd<S>&);                                                           \
  template Rank1Factors<S> rank1_factorization(const Vec<S>&, const std::vector<Index>&);

CPDHNF_INSTANTIATE(double)
CPDHNF_INSTANTIATE(cdouble)

#undef CPDHNF_INSTANTIATE

}  // namespace cpdhnf
