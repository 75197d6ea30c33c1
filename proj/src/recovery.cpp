#include "cpdhnf/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "cpdhnf/normalform.hpp"

namespace cpdhnf {

namespace {

template <class Scalar>
void normalize_phase(Vec<Scalar>& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) return;
  Index lead = 0;
  v.cwiseAbs().maxCoeff(&lead);
  v /= (v(lead) / std::abs(v(lead))) * nrm;
}

class StageClock {
 public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  template <class F>
  auto run(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      const auto stop = std::chrono::steady_clock::now();
      const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
      for (auto& entry : sink_) {
        if (entry.first == stage) {
          entry.second += ms;
          return;
        }
      }
      sink_.emplace_back(stage, ms);
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
      } else {
        auto out = f();
        record();
        return out;
      }
    } catch (const Error& err) {
      throw err.with_stage(stage);
    }
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
};

enum SeedTag : std::uint64_t { seed_h0 = 1, seed_h = 2, seed_diag = 3, seed_eigs = 4 };

}  // namespace

template <class Scalar>
GammaSolution<Scalar> solve_gamma(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Tolerances& tol,
                                  const Checks& checks) {
  if (sys.s() < 1) throw Error(ErrorCode::invalid_argument, "no forms to solve with");
  if (beta.size() != sys.m + 1 || beta.norm() == 0.0) throw Error(ErrorCode::invalid_argument, "beta must be a nonzero vector of length m+1");
  Mat<Scalar> stacked(sys.s(), sys.n + 1);
  for (Index j = 0; j < sys.s(); ++j) stacked.row(j) = beta.transpose() * sys.forms[static_cast<std::size_t>(j)];
  Eigen::JacobiSVD<Mat<Scalar>> svd(stacked, Eigen::ComputeFullV);
  const VecR& sv = svd.singularValues();
  GammaSolution<Scalar> out;
  out.gamma = svd.matrixV().col(sys.n);
  const double smallest = sys.n < sv.size() ? sv(sys.n) : 0.0;
  const double second = sys.n >= 1 ? sv(sys.n - 1) : std::numeric_limits<double>::infinity();
  out.ratio = second == 0.0 ? 1.0 : smallest / second;
  if (out.ratio * tol.sep > 1.0) {
    checks.fail(ErrorCode::ambiguous_kernel, "kernel of the gamma system is not one-dimensional (ratio " + std::to_string(out.ratio) + ")");
  }
  normalize_phase(out.gamma);
  return out;
}

template <class Scalar>
NewtonResult<Scalar> newton_refine(const BilinearSystem<Scalar>& sys, const Vec<Scalar>& beta, const Vec<Scalar>& gamma,
                                   int iters, const Checks& checks) {
  const double nb = beta.norm();
  const double ng = gamma.norm();
  if (nb == 0.0 || ng == 0.0) throw Error(ErrorCode::invalid_argument, "Newton needs nonzero beta and gamma");
  NewtonResult<Scalar> out;
  out.beta = beta;
  out.gamma = gamma;
  Vec<Scalar> b = beta / nb;
  Vec<Scalar> g = gamma / ng;
  double res = evaluate(sys, b, g).norm();
  out.residual_before = res;
  out.residual_after = res;
  const Index mb = sys.m + 1;
  const Index ngam = sys.n + 1;
  for (int it = 0; it < iters && res > 0.0; ++it) {
    // Two gauge rows keep the step tangent to the unit spheres.
    Mat<Scalar> a = Mat<Scalar>::Zero(sys.s() + 2, mb + ngam);
    a.topRows(sys.s()) = jacobian(sys, b, g);
    a.row(sys.s()).head(mb) = b.adjoint();
    a.row(sys.s() + 1).tail(ngam) = g.adjoint();
    Vec<Scalar> rhs = Vec<Scalar>::Zero(sys.s() + 2);
    rhs.head(sys.s()) = -evaluate(sys, b, g);
    Eigen::JacobiSVD<Mat<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VecR& sv = svd.singularValues();
    if (sv(sv.size() - 1) < newton_singular * sv(0)) {
      checks.fail(ErrorCode::singular_jacobian, "Jacobian is rank deficient at this point (multiplicity > 1)");
    }
    Vec<Scalar> coef = svd.matrixU().adjoint() * rhs;
    for (Index i = 0; i < sv.size(); ++i) coef(i) = sv(i) > newton_cutoff * sv(0) ? coef(i) / sv(i) : Scalar(0);
    const Vec<Scalar> step = svd.matrixV() * coef;
    Vec<Scalar> nb2 = b + step.head(mb);
    Vec<Scalar> ng2 = g + step.tail(ngam);
    nb2.normalize();
    ng2.normalize();
    const double res2 = evaluate(sys, nb2, ng2).norm();
    if (!(res2 < res)) break;
    b = nb2;
    g = ng2;
    res = res2;
    ++out.accepted;
  }
  if (out.accepted > 0) {
    out.beta = b * nb;
    out.gamma = g * ng;
    out.residual_after = res;
  }
  return out;
}

template <class Scalar>
AlphaSolution<Scalar> solve_alpha(const Mat<Scalar>& flat, const Mat<Scalar>& betas, const Mat<Scalar>& gammas) {
  if (betas.cols() != gammas.cols()) throw Error(ErrorCode::shape_mismatch, "beta and gamma counts differ");
  if (flat.cols() != betas.rows() * gammas.rows()) throw Error(ErrorCode::shape_mismatch, "flattening width mismatch");
  const Index r = betas.cols();
  if (r > flat.cols()) throw Error(ErrorCode::rank_deficient_kr, "more terms than Khatri-Rao rows");
  const Mat<Scalar> kr = khatri_rao<Scalar>({betas, gammas});
  Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(kr);
  const double first = std::abs(qr.matrixQR()(0, 0));
  const double last = std::abs(qr.matrixQR()(r - 1, r - 1));
  if (first == 0.0 || last < 1e-13 * first) throw Error(ErrorCode::rank_deficient_kr, "Khatri-Rao matrix is rank deficient");
  const Mat<Scalar> rhs = flat.transpose();
  const Mat<Scalar> sol = qr.solve(rhs);
  AlphaSolution<Scalar> out;
  out.alpha = sol.transpose();
  const double fn = flat.norm();
  out.residual = fn == 0.0 ? 0.0 : (kr * sol - rhs).norm() / fn;
  return out;
}

namespace {

template <class Scalar>
struct PointSet {
  Mat<Scalar> x;
  Mat<Scalar> y;
};

// Keeps the first group and orders the other two by grouped size, largest first.
Grouping canonical_grouping(Grouping g, const std::vector<Index>& shape) {
  const auto dims = g.grouped_shape(shape);
  if (dims[1] < dims[2]) std::swap(g.groups[1], g.groups[2]);
  return g;
}

}  // namespace

template <class Scalar>
DecomposeResult<Scalar> decompose(const DenseTensor<Scalar>& a, const DecomposeOptions& options) {
  DecomposeResult<Scalar> result;
  result.shape = a.shape();
  result.rank = options.rank;
  result.seed = options.seed;
  StageClock clock(result.stage_ms);
  Checks checks{options.noise_tolerant, &result.warnings};
  const Tolerances& tol = options.tol;
  const Index r = options.rank;
  if (r < 1) throw Error(ErrorCode::invalid_argument, "rank must be positive", "input");
  if (a.order() < 3) throw Error(ErrorCode::invalid_argument, "tensor order must be at least 3", "input");
  if (a.frobenius_norm() == 0.0) throw Error(ErrorCode::zero_tensor, "input tensor is zero", "input");

  // Third-order view with m >= n.
  const DenseTensor<Scalar> t = clock.run("grouping", [&] {
    Grouping g;
    if (options.grouping) {
      g = *options.grouping;
      g.validate(a.order());
    } else {
      try {
        g = choose_grouping(a.shape(), r);
      } catch (const Error& err) {
        if (a.order() != 3 || err.code() != ErrorCode::no_feasible_grouping) throw;
        g = identity_grouping();
      }
    }
    result.grouping = canonical_grouping(g, a.shape());
    return reshape_group(a, result.grouping);
  });
  const std::array<Index, 3> dims{t.dim(0), t.dim(1), t.dim(2)};
  if (r > std::min(dims[0], (dims[1] - 1) * (dims[2] - 1))) {
    throw Error(ErrorCode::rank_out_of_range,
                "rank " + std::to_string(r) + " exceeds min{l+1, mn} = " + std::to_string(std::min(dims[0], (dims[1] - 1) * (dims[2] - 1))),
                "input");
  }

  const Hosvd<Scalar> hosvd = clock.run("compression", [&] {
    return st_hosvd_compress(t, options.compress ? compression_targets(dims, r) : dims);
  });
  const int mc = static_cast<int>(hosvd.core.dim(1) - 1);
  const int nc = static_cast<int>(hosvd.core.dim(2) - 1);
  const int lc = static_cast<int>(hosvd.core.dim(0) - 1);
  const Mat<Scalar> core_flat = flatten_mode1(hosvd.core);

  const FlatteningKernel<Scalar> kernel = clock.run("kernel", [&] { return kernel_flattening(core_flat, mc, nc, r, tol, checks); });

  DegreePlan plan = clock.run("degree", [&] {
    if (!options.degree) return select_degree(mc, nc, static_cast<int>(r), lc, true);
    const Bidegree deg = *options.degree;
    if (deg.d < 1 || deg.e < 1) throw Error(ErrorCode::invalid_argument, "degree must be at least (1,1)");
    if (deg == Bidegree{1, 1}) {
      if (r > mc + 1) throw Error(ErrorCode::rank_out_of_range, "pencil path needs r <= m+1");
      DegreePlan p = plan_for(mc, nc, static_cast<int>(r), deg);
      p.path = SolvePath::pencil;
      return p;
    }
    return plan_for(mc, nc, static_cast<int>(r), deg);
  });

  std::vector<Mat<Scalar>> family;
  BilinearSystem<Scalar> sys;
  auto run_normal_form = [&](const DegreePlan& p) {
    result.swapped = p.degree.d == 1;
    sys = result.swapped ? kernel.system.transposed() : kernel.system;
    const Bidegree deg = result.swapped ? Bidegree{p.degree.e, p.degree.d} : p.degree;
    const ResultantMatrix<Scalar> res = clock.run("resultant", [&] { return build_resultant(sys, deg); });
    if (!options.dump_resultant.empty()) {
      std::ofstream out(options.dump_resultant);
      write_matrix_market(out, res);
    }
    const Nullspace<Scalar> ns = clock.run("cokernel", [&] {
      try {
        return left_nullspace(res, r, options.kernel, tol, checks, derive_seed(options.seed, seed_eigs));
      } catch (const Error& err) {
        const bool eigs_auto = options.kernel == NullspaceMethod::automatic && err.code() == ErrorCode::corank_mismatch &&
                               res.rows() * res.cols() >= eigs_entry_threshold;
        if (!eigs_auto) throw;
        result.warnings.push_back("eigs nullspace rejected (" + err.detail() + "); retried with svd");
        return left_nullspace(res, r, NullspaceMethod::svd, tol, checks, 0);
      }
    });
    result.kernel_used = ns.method;
    family = clock.run("multiplication", [&] {
      const H0Choice<Scalar> h0 = make_h0(ns.basis, sys.m, sys.n, deg, derive_seed(options.seed, seed_h0));
      const BasisChoice<Scalar> basis = choose_basis(h0.n_h0, r, tol);
      result.basis_condition = basis.condition;
      const Vec<Scalar> h = random_h<Scalar>(sys.m, sys.n, deg, derive_seed(options.seed, seed_h));
      return multiplication_matrices(basis, shifted_family(ns.basis, sys.m, sys.n, deg, h));
    });
    result.path = SolvePath::normal_form;
    result.degree_used = p.degree;
  };
  auto run_pencil = [&] {
    // B lives in the beta space, so the eigenvalues read off the gamma coordinates.
    result.swapped = true;
    sys = kernel.system.transposed();
    const Mat<Scalar> flat_sw = flatten_mode1(permute_modes(hosvd.core, {0, 2, 1}));
    family = clock.run("multiplication", [&] {
      const PencilForm<Scalar> pf = pencil_prenormal(flat_sw, nc, mc, r, derive_seed(options.seed, seed_h0));
      const BasisChoice<Scalar> basis = choose_basis(pf.n_h0, r, tol);
      result.basis_condition = basis.condition;
      return multiplication_matrices(basis, pf.n_k);
    });
    result.path = SolvePath::pencil;
    result.degree_used = {1, 1};
    result.kernel_used = NullspaceMethod::svd;
  };

  if (plan.path == SolvePath::pencil) {
    try {
      run_pencil();
    } catch (const Error& err) {
      if (options.degree || err.code() != ErrorCode::basis_deficient) throw;
      result.warnings.push_back("pencil path failed (" + err.detail() + "); falling back to the normal-form path");
      plan = select_degree(mc, nc, static_cast<int>(r), lc, false);
      run_normal_form(plan);
    }
  } else {
    run_normal_form(plan);
  }
  result.commutation = commutation_defect(family);

  const Diagonalization<Scalar> diag = clock.run("diagonalization", [&] {
    return simultaneous_diagonalize(family, derive_seed(options.seed, seed_diag), tol, checks);
  });
  result.diag_residual = diag.residual;

  PointSet<Scalar> pre{Mat<Scalar>(sys.m + 1, r), Mat<Scalar>(sys.n + 1, r)};
  PointSet<Scalar> post = pre;
  clock.run("refinement", [&] {
    for (Index i = 0; i < r; ++i) {
      const Vec<Scalar> x = diag.coords.col(i);
      const GammaSolution<Scalar> gs = solve_gamma(sys, x, tol, checks);
      pre.x.col(i) = x;
      pre.y.col(i) = gs.gamma;
      const NewtonResult<Scalar> nr = newton_refine(sys, x, gs.gamma, options.newton_iters, checks);
      post.x.col(i) = nr.beta;
      post.y.col(i) = nr.gamma;
    }
  });

  clock.run("recovery", [&] {
    const Mat<Scalar> flat = flatten_mode1(t);
    auto assemble = [&](const PointSet<Scalar>& pts) {
      const Mat<Scalar>& bc = result.swapped ? pts.y : pts.x;
      const Mat<Scalar>& gc = result.swapped ? pts.x : pts.y;
      CPDecomposition<Scalar> cpd3;
      const Mat<Scalar> betas = hosvd.factors[1] * bc;
      const Mat<Scalar> gammas = hosvd.factors[2] * gc;
      cpd3.factors = {solve_alpha(flat, betas, gammas).alpha, betas, gammas};
      return cpd3;
    };
    auto finalize = [&](const CPDecomposition<Scalar>& cpd3) {
      CPDecomposition<Scalar> full;
      full.factors.resize(static_cast<std::size_t>(a.order()));
      for (std::size_t g = 0; g < 3; ++g) {
        const auto& modes = result.grouping.groups[g];
        for (int mode : modes) full.factors[static_cast<std::size_t>(mode)] = Mat<Scalar>(a.dim(mode), r);
        if (modes.size() == 1) {
          full.factors[static_cast<std::size_t>(modes[0])] = cpd3.factors[g];
          continue;
        }
        std::vector<Index> sub;
        for (int mode : modes) sub.push_back(a.dim(mode));
        for (Index i = 0; i < r; ++i) {
          const Rank1Factors<Scalar> rf = rank1_factorization<Scalar>(cpd3.factors[g].col(i), sub);
          for (std::size_t q = 0; q < modes.size(); ++q) {
            full.factors[static_cast<std::size_t>(modes[q])].col(i) = rf.vectors[q] * (q == 0 ? rf.scale : Scalar(1));
          }
        }
      }
      // Scale gathered into original mode 1.
      for (std::size_t k = 1; k < full.factors.size(); ++k) {
        for (Index i = 0; i < r; ++i) {
          const double nrm = full.factors[k].col(i).norm();
          if (nrm == 0.0) continue;
          full.factors[k].col(i) /= nrm;
          full.factors[0].col(i) *= nrm;
        }
      }
      full.normalize();
      return full;
    };
    CPDecomposition<Scalar> unrefined = finalize(assemble(pre));
    result.backward_error_pre_newton = backward_error(a, unrefined);
    result.cpd = finalize(assemble(post));
    result.backward_error = backward_error(a, result.cpd);
    // Newton lowers the polynomial residual, which need not lower the backward error.
    if (result.backward_error > result.backward_error_pre_newton) {
      result.cpd = std::move(unrefined);
      result.backward_error = result.backward_error_pre_newton;
      result.newton_reverted = true;
    }
  });
  return result;
}

template <class Scalar>
DenseTensor<Scalar> add_noise(const DenseTensor<Scalar>& a, std::optional<int> e, std::uint64_t seed) {
  if (!e) return a;
  const double an = a.frobenius_norm();
  if (an == 0.0) throw Error(ErrorCode::zero_tensor, "cannot scale noise relative to a zero tensor");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<Scalar> noise(static_cast<std::size_t>(a.size()));
  for (auto& x : noise) {
    if constexpr (is_complex_v<Scalar>) {
      const double re = dist(gen);
      x = Scalar(re, dist(gen));
    } else {
      x = dist(gen);
    }
  }
  const double en = DenseTensor<Scalar>(a.shape(), noise).frobenius_norm();
  const double scale = std::pow(10.0, *e) * an / en;
  std::vector<Scalar> data = a.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * noise[i];
  return DenseTensor<Scalar>(a.shape(), std::move(data));
}

#define CPDHNF_INSTANTIATE(S)                                                                                      \
  template GammaSolution<S> solve_gamma(const BilinearSystem<S>&, const Vec<S>&, const Tolerances&, const Checks&); \
  template NewtonResult<S> newton_refine(const BilinearSystem<S>&, const Vec<S>&, const Vec<S>&, int, const Checks&); \
  template AlphaSolution<S> solve_alpha(const Mat<S>&, const Mat<S>&, const Mat<S>&);                               \
  template DecomposeResult<S> decompose(const DenseTensor<S>&, const DecomposeOptions&);                           \
  template DenseTensor<S> add_noise(const DenseTensor<S>&, std::optional<int>, std::uint64_t);

CPDHNF_INSTANTIATE(double)
CPDHNF_INSTANTIATE(cdouble)

#undef CPDHNF_INSTANTIATE

}  // namespace cpdhnf
