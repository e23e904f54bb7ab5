#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace satfp {

struct NelderMeadOptions {
  int max_iters = 5000;
  double x_tol = 1e-10;
  double f_tol = 1e-14;
  // reflection, expansion, contraction, shrink
  double alpha = 1.0;
  double gamma = 2.0;
  double rho = 0.5;
  double sigma = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex descent. The initial simplex is x0 plus step[i] along
// each coordinate. Converges when both the vertex spread (inf-norm) and the
// function spread fall below the tolerances.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& o = {}) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  if (n == 0) {
    res.x = x0;
    res.f = f(x0);
    res.converged = true;
    return res;
  }

  std::vector<Eigen::VectorXd> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) v[i + 1][i] += step[i];
  for (Eigen::Index i = 0; i <= n; ++i) fv[i] = f(v[i]);

  std::vector<Eigen::Index> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
      v2[i] = v[order[i]];
      f2[i] = fv[order[i]];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  int it = 0;
  for (; it < o.max_iters; ++it) {
    sort_simplex();
    double xs = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) xs = std::max(xs, (v[i] - v[0]).cwiseAbs().maxCoeff());
    if (xs <= o.x_tol && fv[n] - fv[0] <= o.f_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) c += v[i];
    c /= static_cast<double>(n);

    const Eigen::VectorXd xr = c + o.alpha * (c - v[n]);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const Eigen::VectorXd xe = c + o.gamma * (xr - c);
      const double fe = f(xe);
      if (fe < fr) {
        v[n] = xe;
        fv[n] = fe;
      } else {
        v[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      v[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + o.rho * (xr - c))
                                       : Eigen::VectorXd(c + o.rho * (v[n] - c));
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[n])) {
      v[n] = xc;
      fv[n] = fc;
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      v[i] = v[0] + o.sigma * (v[i] - v[0]);
      fv[i] = f(v[i]);
    }
  }
  sort_simplex();
  res.x = v[0];
  res.f = fv[0];
  res.iterations = it;
  return res;
}

}  // namespace satfp
