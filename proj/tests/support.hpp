#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cpdhnf/tensor.hpp"

namespace cpdhnf::fixtures {

// The 4x3x3 rank-4 reference example; rows are the mode-1 flattening.
inline TensorR small_example() {
  const std::vector<double> data = {1, 0, 0, 0, 0, 0, 2, 0, 0,  //
                                    1, 1, 0, 0, 0, 0, 2, 1, 0,  //
                                    1, 1, 1, 0, 0, 1, 2, 1, 2,  //
                                    1, 1, 1, 1, 1, 2, 2, 1, 2};
  return TensorR({4, 3, 3}, data);
}

inline MatR small_example_beta() {
  MatR b(3, 4);
  b << 1, 1, 1, 0,  //
      0, 0, 1, 1,   //
      2, 1, 2, 0;
  return b;
}

inline MatR small_example_gamma() {
  MatR g(3, 4);
  g << 1, 0, 0, 1,  //
      0, 1, 0, 1,   //
      0, 0, 1, 1;
  return g;
}

inline MatR small_example_alpha() {
  MatR a(4, 4);
  a << 1, 0, 0, 0,  //
      1, 1, 0, 0,   //
      1, 1, 1, 0,   //
      1, 1, 1, 1;
  return a;
}

// Distance between two vectors viewed as projective points: the chord between
// unit representatives after aligning phase. Accurate down to rounding level.
template <class A, class B>
double projective_distance(const A& u, const B& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  const auto ip = v.dot(u);
  const double aip = std::abs(ip);
  if (aip == 0.0) return std::sqrt(2.0);
  const auto phase = ip / aip;
  return (u / nu - phase * (v / nv)).norm();
}

// Greedy max-correlation assignment of recovered columns to reference columns.
// Returns the worst projective distance over all modes and matched pairs.
template <class S1, class S2>
double factor_mismatch(const std::vector<Mat<S1>>& got, const std::vector<Mat<S2>>& want) {
  if (got.size() != want.size() || got.empty()) return std::numeric_limits<double>::infinity();
  const Index r = want.front().cols();
  if (got.front().cols() != r) return std::numeric_limits<double>::infinity();
  // Score on the concatenated non-first modes; the first absorbs scale.
  auto score = [&](Index i, Index j) {
    double s = 0.0;
    for (std::size_t k = 1; k < got.size(); ++k) {
      const MatC a = got[k].template cast<cdouble>();
      const MatC b = want[k].template cast<cdouble>();
      s = std::max(s, projective_distance(a.col(i), b.col(j)));
    }
    return s;
  };
  std::vector<bool> used(static_cast<std::size_t>(r), false);
  double worst = 0.0;
  for (Index j = 0; j < r; ++j) {
    Index best = -1;
    double best_s = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < r; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double s = score(i, j);
      if (s < best_s) {
        best_s = s;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    double s = best_s;
    const MatC a0 = got[0].template cast<cdouble>();
    const MatC b0 = want[0].template cast<cdouble>();
    s = std::max(s, projective_distance(a0.col(best), b0.col(j)));
    worst = std::max(worst, s);
  }
  return worst;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace cpdhnf::fixtures
