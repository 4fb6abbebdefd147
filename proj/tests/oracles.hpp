#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical routines except the quantity under test passed in as a callable.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

// Closed-form distributions, scale s.
inline double logistic_cdf(double x, double s = 1.0) {
  return 1.0 / (1.0 + std::exp(-x / s));
}
inline double logistic_pdf(double x, double s = 1.0) {
  const double e = std::exp(-std::abs(x) / s);
  return e / (s * (1.0 + e) * (1.0 + e));
}
inline double normal_cdf(double x, double s = 1.0) {
  return 0.5 * std::erfc(-x / (s * std::sqrt(2.0)));
}
inline double normal_pdf(double x, double s = 1.0) {
  return std::exp(-0.5 * (x / s) * (x / s)) / (s * std::sqrt(2.0 * kPi));
}

// argmax over p in {0, step, 2 step, ...} <= hi of p * sf(p - v).
inline double grid_argmax_price(const std::function<double(double)>& sf,
                                double v, double hi, double step = 1e-4) {
  double best_p = 0.0;
  double best_r = -1.0;
  const long n = static_cast<long>(std::floor(hi / step));
  for (long i = 0; i <= n; ++i) {
    const double p = i * step;
    const double r = p * sf(p - v);
    if (r > best_r) {
      best_r = r;
      best_p = p;
    }
  }
  return best_p;
}

// Midpoint rule on [a, b]; never evaluates f at the endpoints.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, int n = 200000) {
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(a + (i + 0.5) * h);
  return sum * h;
}

inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a(j) += h;
    b(j) -= h;
    g(j) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Brute-force minimizer of f over the L1 ball of radius W in dimension 2 or
// 3: a mesh with spacing `step`, then repeated 10x refinement around the best
// point down to `final_step`.
inline Eigen::VectorXd mesh_minimize(
    const std::function<double(const Eigen::VectorXd&)>& f, int dim, double W,
    double step = 0.01, double final_step = 1e-6) {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd best_x = center;
  double best = f(center);
  double radius = W;
  while (true) {
    const int m = static_cast<int>(std::ceil(radius / step));
    const Eigen::VectorXd c = center;
    std::vector<int> idx(dim, -m);
    while (true) {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x(j) = c(j) + idx[j] * step;
      // Mesh points on the boundary face must not be lost to rounding.
      if (x.lpNorm<1>() <= W * (1.0 + 1e-12)) {
        const double v = f(x);
        if (v < best) {
          best = v;
          best_x = x;
        }
      }
      int j = 0;
      while (j < dim && ++idx[j] > m) idx[j++] = -m;
      if (j == dim) break;
    }
    center = best_x;
    if (step <= final_step * 1.0000001) break;
    radius = 2.0 * step;
    step /= 10.0;
  }
  return best_x;
}

// Minimizer of 0.5 ||x - v||^2 + t ||x||_1 over the L1 ball, by bisection on
// the multiplier of the ball constraint (KKT form, independent of any
// sort-based projection).
inline Eigen::VectorXd prox_l1_ball(const Eigen::VectorXd& v, double t,
                                    double W) {
  auto shrink = [&](double tau) {
    return v.unaryExpr([tau](double a) {
      return a > tau ? a - tau : (a < -tau ? a + tau : 0.0);
    }).eval();
  };
  Eigen::VectorXd x = shrink(t);
  if (x.lpNorm<1>() <= W) return x;
  double lo = t;
  double hi = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (shrink(mid).lpNorm<1>() > W ? lo : hi) = mid;
  }
  return shrink(hi);
}

// Ordinary least squares by normal equations.
template <typename Matrix>
Eigen::VectorXd least_squares(const Matrix& X, const Eigen::VectorXd& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

// Largest second difference of log f over the grid; <= 0 for log-concave f.
inline double max_log_second_difference(const std::function<double(double)>& f,
                                        double lo, double hi, double h) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double x = lo + h; x + h <= hi; x += h)
    worst = std::max(worst, std::log(f(x + h)) - 2.0 * std::log(f(x)) +
                                std::log(f(x - h)));
  return worst;
}

// Sample mean and 95% normal-approximation half-width.
inline std::pair<double, double> mean_ci95(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= n;
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, 1.96 * sd / std::sqrt(n)};
}

}  // namespace oracle
