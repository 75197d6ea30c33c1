#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "cpdhnf/error.hpp"
#include "cpdhnf/polysys.hpp"
#include "cpdhnf/tensor.hpp"
#include "support.hpp"

using namespace cpdhnf;

namespace {

std::vector<std::vector<int>> monomials(int vars, int degree) {
  std::vector<std::vector<int>> all;
  std::vector<int> cur(static_cast<std::size_t>(vars), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == vars - 1) {
      cur[static_cast<std::size_t>(pos)] = left;
      all.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, degree);
  return all;
}

// Multiplies each form by each monomial of degree (d-1,e-1) as a polynomial and reads off coefficients.
template <class S>
Mat<S> oracle_resultant(const BilinearSystem<S>& sys, Bidegree deg) {
  const auto xr = monomials(sys.m + 1, deg.d);
  const auto yr = monomials(sys.n + 1, deg.e);
  std::map<std::pair<std::vector<int>, std::vector<int>>, Index> row_of;
  for (std::size_t i = 0; i < xr.size(); ++i) {
    for (std::size_t j = 0; j < yr.size(); ++j) row_of[{xr[i], yr[j]}] = static_cast<Index>(i * yr.size() + j);
  }
  const auto xs = monomials(sys.m + 1, deg.d - 1);
  const auto ys = monomials(sys.n + 1, deg.e - 1);
  Mat<S> out = Mat<S>::Zero(static_cast<Index>(xr.size() * yr.size()), sys.s() * static_cast<Index>(xs.size() * ys.size()));
  Index col = 0;
  for (const auto& f : sys.forms) {
    for (const auto& a : xs) {
      for (const auto& b : ys) {
        for (int k = 0; k <= sys.m; ++k) {
          for (int l = 0; l <= sys.n; ++l) {
            auto aa = a;
            auto bb = b;
            ++aa[static_cast<std::size_t>(k)];
            ++bb[static_cast<std::size_t>(l)];
            out(row_of.at({aa, bb}), col) += f(k, l);
          }
        }
        ++col;
      }
    }
  }
  return out;
}

BilinearSystem<double> random_system(int m, int n, int s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  BilinearSystem<double> sys;
  sys.m = m;
  sys.n = n;
  for (int j = 0; j < s; ++j) sys.forms.push_back(MatR::NullaryExpr(m + 1, n + 1, [&] { return nd(gen); }));
  return sys;
}

// Largest principal-angle sine between two row spaces with orthonormal rows.
template <class S>
double subspace_gap(const Mat<S>& a, const Mat<S>& b) {
  const Mat<S> p = a.adjoint() * a;
  return (b - b * p).norm();
}

}  // namespace

TEST(KernelFlattening, FormsVanishAtTheReferencePoints) {
  const auto k = kernel_flattening(flatten_mode1(fixtures::small_example()), 2, 2, 4);
  ASSERT_EQ(k.system.s(), 5);
  const MatR beta = fixtures::small_example_beta();
  const MatR gamma = fixtures::small_example_gamma();
  for (Index i = 0; i < 4; ++i) EXPECT_LT(evaluate<double>(k.system, beta.col(i), gamma.col(i)).norm(), 1e-14);
  // Orthonormal coefficient vectors.
  MatR stacked(5, 9);
  for (Index j = 0; j < 5; ++j) stacked.row(j) = Eigen::Map<const MatR>(MatR(k.system.forms[j].transpose()).data(), 1, 9);
  EXPECT_LT((stacked * stacked.transpose() - MatR::Identity(5, 5)).norm(), 1e-14);
}

TEST(KernelFlattening, ComplexFormsAreBilinearNotSesquilinear) {
  const auto inst = random_cpd<cdouble>({5, 4, 3}, 5, 21);
  const auto k = kernel_flattening(flatten_mode1(inst.tensor), 3, 2, 5);
  EXPECT_EQ(k.system.s(), 7);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_LT(evaluate<cdouble>(k.system, inst.truth.factors[1].col(i), inst.truth.factors[2].col(i)).norm(), 1e-13);
  }
}

TEST(KernelFlattening, RankChecks) {
  const auto inst = random_cpd<double>({5, 4, 3}, 3, 2);
  const MatR f = flatten_mode1(inst.tensor);
  try {
    (void)kernel_flattening(f, 3, 2, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::flattening_rank_mismatch);
  }
  try {
    (void)kernel_flattening(f, 3, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::flattening_rank_mismatch);
  }
  std::vector<std::string> warnings;
  EXPECT_NO_THROW((void)kernel_flattening(f, 3, 2, 2, {}, Checks{true, &warnings}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW((void)kernel_flattening(f, 2, 2, 3), Error);
}

TEST(Resultant, ReferenceExampleEntries) {
  BilinearSystem<double> sys;
  sys.m = 2;
  sys.n = 2;
  auto form = [](std::initializer_list<std::tuple<int, int, double>> terms) {
    MatR f = MatR::Zero(3, 3);
    for (auto [k, l, c] : terms) f(k, l) = c;
    return f;
  };
  sys.forms = {form({{1, 0, -1}, {1, 1, 1}}), form({{0, 2, -1}, {1, 0, -1}, {1, 2, 1}}), form({{0, 0, -2}, {2, 0, 1}}),
               form({{0, 1, -1}, {2, 1, 1}}), form({{0, 2, -2}, {2, 2, 1}})};
  const auto res = build_resultant(sys, {2, 1});
  ASSERT_EQ(res.rows(), 18);
  ASSERT_EQ(res.cols(), 15);
  // Nonzeros of each column x_k f_j, listed in column order.
  const std::vector<std::vector<std::pair<int, double>>> reference = {
      {{3, -1}, {4, 1}},  {{9, -1}, {10, 1}},          {{12, -1}, {13, 1}},         {{2, -1}, {3, -1}, {5, 1}},
      {{5, -1}, {9, -1}, {11, 1}}, {{8, -1}, {12, -1}, {14, 1}}, {{0, -2}, {6, 1}}, {{3, -2}, {12, 1}},
      {{6, -2}, {15, 1}}, {{1, -1}, {7, 1}},           {{4, -1}, {13, 1}},          {{7, -1}, {16, 1}},
      {{2, -2}, {8, 1}},  {{5, -2}, {14, 1}},          {{8, -2}, {17, 1}}};
  MatR expected = MatR::Zero(18, 15);
  for (std::size_t c = 0; c < reference.size(); ++c) {
    for (auto [row, v] : reference[c]) expected(row, static_cast<Index>(c)) = v;
  }
  EXPECT_EQ((MatR(res.matrix) - expected).norm(), 0.0);
  EXPECT_EQ((expected - oracle_resultant(sys, {2, 1})).norm(), 0.0);
}

TEST(Resultant, AgreesWithPolynomialProductOracle) {
  for (auto [m, n, d, e] : std::vector<std::array<int, 4>>{{2, 2, 2, 1}, {3, 1, 3, 1}, {1, 3, 1, 3}, {2, 3, 2, 2}, {4, 2, 1, 1}}) {
    const auto sys = random_system(m, n, 4, 100 + m * 10 + n);
    const auto res = build_resultant(sys, {d, e});
    EXPECT_EQ((MatR(res.matrix) - oracle_resultant(sys, {d, e})).norm(), 0.0) << m << n << d << e;
    EXPECT_EQ(res.rows(), hf_s(m, n, d, e));
    EXPECT_EQ(res.cols(), 4 * hf_s(m, n, d - 1, e - 1));
  }
}

TEST(Resultant, TransposedSystemSwapsRoles) {
  const auto sys = random_system(3, 2, 3, 7);
  const auto t = sys.transposed();
  EXPECT_EQ(t.m, 2);
  EXPECT_EQ(t.n, 3);
  const VecR x = VecR::Random(4);
  const VecR y = VecR::Random(3);
  EXPECT_LT((evaluate<double>(sys, x, y) - evaluate<double>(t, y, x)).norm(), 1e-14);
}

TEST(LeftNullspace, CorankEqualsRankAndMethodsAgree) {
  const auto inst = random_cpd<double>({12, 7, 3}, 12, 3);
  const auto k = kernel_flattening(flatten_mode1(inst.tensor), 6, 2, 12);
  const auto res = build_resultant(k.system, select_degree(6, 2, 12, 12, true).degree);
  const auto a = left_nullspace(res, 12, NullspaceMethod::svd);
  const auto b = left_nullspace(res, 12, NullspaceMethod::eigs);
  EXPECT_EQ(a.basis.rows(), 12);
  EXPECT_LT(a.residual, 1e-12);
  EXPECT_LT(b.residual, 1e-10);
  EXPECT_GT(a.separation, 1e3);
  EXPECT_GT(b.separation, 1e3);
  EXPECT_LT(subspace_gap<double>(a.basis, b.basis), 1e-8);
  // Evaluation of the degree-(3,1) monomials at each point lies in the left nullspace's span.
  const MonomialBasis mb = monomial_basis(6, 2, res.degree);
  for (Index i = 0; i < 12; ++i) {
    VecR v(mb.size());
    for (Index q = 0; q < mb.size(); ++q) {
      double val = 1.0;
      const auto xa = mb.x_exponent(q);
      const auto yb = mb.y_exponent(q);
      for (std::size_t t = 0; t < xa.size(); ++t) val *= std::pow(inst.truth.factors[1](static_cast<Index>(t), i), xa[t]);
      for (std::size_t t = 0; t < yb.size(); ++t) val *= std::pow(inst.truth.factors[2](static_cast<Index>(t), i), yb[t]);
      v(q) = val;
    }
    v.normalize();
    EXPECT_LT((v - a.basis.transpose() * (a.basis * v)).norm(), 1e-9);
  }
}

TEST(LeftNullspace, WrongCorankIsRejected) {
  const auto inst = random_cpd<double>({12, 7, 3}, 12, 4);
  const auto k = kernel_flattening(flatten_mode1(inst.tensor), 6, 2, 12);
  const auto res = build_resultant(k.system, select_degree(6, 2, 12, 12, true).degree);
  for (auto method : {NullspaceMethod::svd, NullspaceMethod::eigs}) {
    try {
      (void)left_nullspace(res, 11, method);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::corank_mismatch);
    }
  }
}

TEST(SmallestEigenpairs, MatchesDenseSolver) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  const MatR a = MatR::NullaryExpr(30, 30, [&] { return nd(gen); });
  const MatR g = a * a.transpose();
  const auto ep = smallest_eigenpairs(g, 3, 6, 1e-10, 50, 5);
  Eigen::SelfAdjointEigenSolver<MatR> es(g);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(ep.values(i), es.eigenvalues()(i), 1e-9 * es.eigenvalues()(29));
  EXPECT_TRUE(ep.converged);
}

TEST(Jacobian, MatchesCentralDifferences) {
  const auto sys = random_system(3, 4, 6, 12);
  const VecR b = VecR::Random(4);
  const VecR g = VecR::Random(5);
  const MatR j = jacobian<double>(sys, b, g);
  const double h = 1e-6;
  for (Index k = 0; k < 9; ++k) {
    VecR bp = b, bm = b, gp = g, gm = g;
    if (k < 4) {
      bp(k) += h;
      bm(k) -= h;
    } else {
      gp(k - 4) += h;
      gm(k - 4) -= h;
    }
    const VecR fd = (evaluate<double>(sys, bp, gp) - evaluate<double>(sys, bm, gm)) / (2 * h);
    EXPECT_LT((fd - j.col(k)).norm(), 1e-6 * j.norm());
  }
}

TEST(MatrixMarket, HeaderAndCounts) {
  const auto sys = random_system(1, 1, 2, 3);
  const auto res = build_resultant(sys, {1, 1});
  std::ostringstream out;
  write_matrix_market(out, res);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "%%MatrixMarket matrix coordinate real general");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "4 2 8");
}

TEST(Resultant, ColumnsVanishAtGeneratingPoints) {
  const auto inst = random_cpd<double>({9, 5, 3}, 8, 14);
  const auto k = kernel_flattening(flatten_mode1(inst.tensor), 4, 2, 8);
  for (Bidegree deg : {Bidegree{1, 1}, Bidegree{2, 1}, Bidegree{1, 2}, Bidegree{3, 1}}) {
    const auto res = build_resultant(k.system, deg);
    const MonomialBasis mb = monomial_basis(4, 2, deg);
    for (Index i = 0; i < 8; ++i) {
      VecR v(mb.size());
      for (Index q = 0; q < mb.size(); ++q) {
        double val = 1.0;
        const auto xa = mb.x_exponent(q);
        const auto yb = mb.y_exponent(q);
        for (std::size_t t = 0; t < xa.size(); ++t) val *= std::pow(inst.truth.factors[1](static_cast<Index>(t), i), xa[t]);
        for (std::size_t t = 0; t < yb.size(); ++t) val *= std::pow(inst.truth.factors[2](static_cast<Index>(t), i), yb[t]);
        v(q) = val;
      }
      const VecR image = v.transpose() * MatR(res.matrix);
      EXPECT_LT(image.norm(), 1e-12 * v.norm() * MatR(res.matrix).norm());
    }
  }
}

TEST(LeftNullspace, OrthonormalAndCorankAtLeastRank) {
  std::mt19937_64 pick(4);
  for (int trial = 0; trial < 6; ++trial) {
    const Index r = 3 + static_cast<Index>(pick() % 6);
    const auto inst = random_cpd<double>({10, 5, 4}, r, 60 + trial);
    const auto k = kernel_flattening(flatten_mode1(inst.tensor), 4, 3, r);
    for (Bidegree deg : {Bidegree{1, 1}, Bidegree{2, 1}, Bidegree{1, 2}}) {
      const auto res = build_resultant(k.system, deg);
      const MatR dense(res.matrix);
      Eigen::JacobiSVD<MatR> svd(dense);
      Index rank = 0;
      for (Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > 1e-10 * svd.singularValues()(0);
      EXPECT_GE(res.rows() - rank, r);
    }
    const auto res = build_resultant(k.system, select_degree(4, 3, static_cast<int>(r), 9, true).degree);
    for (auto method : {NullspaceMethod::svd, NullspaceMethod::eigs}) {
      const auto ns = left_nullspace(res, r, method);
      EXPECT_LT((ns.basis * ns.basis.transpose() - MatR::Identity(r, r)).norm(), 1e-12);
      EXPECT_LT(ns.residual, 1e-8);
    }
  }
}
