#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace gpdepth {

struct NelderMeadOptions {
  int max_iters = 60;
  double f_tol = 1e-10;  // stop when best and worst vertices agree this closely
  double reflect = 1.0;
  double expand = 2.0;
  double contract = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> trace;  // best value after each iteration, starting with the initial simplex
};

/// Downhill simplex on an axis-aligned initial simplex x0 + step_i e_i.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1][i] += step[i];

  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    return f(x);
  };
  std::vector<double> val(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) val[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
  };
  sort();
  res.trace.push_back(val[order[0]]);

  for (int it = 0; it < opt.max_iters; ++it) {
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (std::abs(val[worst] - val[best]) <= opt.f_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + opt.reflect * (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Eigen::VectorXd xe = centroid + opt.expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      const bool outside = fr < val[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + opt.contract * (xr - centroid))
                                         : Eigen::VectorXd(centroid + opt.contract * (pts[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : val[worst])) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (Eigen::Index i = 1; i <= n; ++i) {
          const std::size_t k = order[i];
          pts[k] = pts[best] + opt.shrink * (pts[k] - pts[best]);
          val[k] = eval(pts[k]);
        }
      }
    }
    sort();
    res.iterations = it + 1;
    res.trace.push_back(val[order[0]]);
  }
  res.x = pts[order[0]];
  res.value = val[order[0]];
  return res;
}

}  // namespace gpdepth
