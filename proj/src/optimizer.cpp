#include "dpdate/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpdate {
namespace {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower) {
  return x.cwiseMax(lower);
}

// A coordinate is pinned when it sits on its bound and the gradient pushes
// further into the bound.
Mask pinned_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                 const Eigen::VectorXd& lower) {
  Mask m(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m(i) = std::isfinite(lower(i)) && x(i) <= lower(i) && g(i) > 0.0;
  }
  return m;
}

struct LineSearchResult {
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  double f;
  bool ok;
};

LineSearchResult armijo(const SmoothObjective& objective, const Eigen::VectorXd& x,
                        double f, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& dir, const Eigen::VectorXd& lower) {
  constexpr double c1 = 1e-4;
  double step = 1.0;
  Eigen::VectorXd gn(x.size());
  for (int k = 0; k < 60; ++k) {
    Eigen::VectorXd xn = project(x + step * dir, lower);
    const Eigen::VectorXd s = xn - x;
    if (s.lpNorm<Eigen::Infinity>() == 0.0) break;
    const double fn = objective(xn, gn);
    if (std::isfinite(fn) && fn <= f + c1 * g.dot(s)) return {xn, gn, fn, true};
    step *= 0.5;
  }
  return {x, g, f, false};
}

}  // namespace

MinimizeResult minimize_bfgs(const SmoothObjective& objective,
                             const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& lower,
                             const StationarityNorm& stationarity,
                             const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = project(x0, lower);
  Eigen::VectorXd g(n);
  double f = objective(x, g);
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(n, n);

  MinimizeResult out;
  int iter = 0;
  Mask pinned = pinned_mask(x, g, lower);
  double norm = stationarity(x, g, pinned);
  bool scaled = false;

  while (iter < options.max_iter && norm > options.polish_threshold) {
    Eigen::VectorXd dir = -(inv_hess * g);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pinned(i)) dir(i) = 0.0;
    }
    if (g.dot(dir) >= 0.0) {
      inv_hess.setIdentity();
      dir = -g;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (pinned(i)) dir(i) = 0.0;
      }
    }
    LineSearchResult ls = armijo(objective, x, f, g, dir, lower);
    ++iter;
    if (!ls.ok) {
      if (inv_hess.isIdentity()) break;
      inv_hess.setIdentity();
      continue;
    }
    const Eigen::VectorXd s = ls.x - x;
    const Eigen::VectorXd y = ls.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hess *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
      inv_hess = (ident - rho * s * y.transpose()) * inv_hess *
                     (ident - rho * y * s.transpose()) +
                 rho * s * s.transpose();
    }
    x = ls.x;
    g = ls.g;
    f = ls.f;
    pinned = pinned_mask(x, g, lower);
    norm = stationarity(x, g, pinned);
  }

  // Newton polishing on the free coordinates.
  for (int k = 0; k < options.max_polish_steps && norm > options.tol; ++k) {
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd gp(n), gm(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-5 * std::max(1.0, std::fabs(x(j)));
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      objective(xp, gp);
      objective(xm, gm);
      hess.col(j) = (gp - gm) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!pinned(i)) free.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m == 0) break;
    Eigen::MatrixXd hf(m, m);
    Eigen::VectorXd gf(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      gf(a) = g(free[a]);
      for (Eigen::Index b = 0; b < m; ++b) hf(a, b) = hess(free[a], free[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(hf);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd df = llt.solve(-gf);
      for (Eigen::Index a = 0; a < m; ++a) dir(free[a]) = df(a);
    } else {
      const Eigen::VectorXd df = -(inv_hess * g);
      for (Eigen::Index a = 0; a < m; ++a) dir(free[a]) = df(free[a]);
    }
    // Accept a full Newton step whenever it reduces stationarity, even if the
    // objective is flat to rounding.
    Eigen::VectorXd xn = project(x + dir, lower);
    Eigen::VectorXd gn(n);
    double fn = objective(xn, gn);
    Mask pn = pinned_mask(xn, gn, lower);
    double nn = stationarity(xn, gn, pn);
    ++iter;
    if (std::isfinite(fn) && nn < norm && fn <= f + 1e-12 * (1.0 + std::fabs(f))) {
      x = xn;
      g = gn;
      f = fn;
      pinned = pn;
      norm = nn;
      continue;
    }
    LineSearchResult ls = armijo(objective, x, f, g, dir, lower);
    if (!ls.ok) break;
    x = ls.x;
    g = ls.g;
    f = ls.f;
    pinned = pinned_mask(x, g, lower);
    norm = stationarity(x, g, pinned);
  }

  out.x = x;
  out.value = f;
  out.grad = g;
  out.stationarity = norm;
  out.iterations = iter;
  out.converged = norm <= options.tol;
  return out;
}

}  // namespace dpdate
