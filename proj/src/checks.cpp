#include "pricelab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "pricelab/noise_models.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/sparse_mle.hpp"

namespace pricelab {

namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

CheckResult check_pricing() {
  double worst = 0.0;
  for (const NoiseModel& m : {NoiseModel::normal(), NoiseModel::logistic()}) {
    for (double v : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}) {
      const double hi = std::max(v + 6.0, 1e-4);
      double best_p = 0.0;
      double best_r = -1.0;
      for (double p = 0.0; p <= hi; p += 1e-4) {
        const double r = p * m.sf(p - v);
        if (r > best_r) {
          best_r = r;
          best_p = p;
        }
      }
      worst = std::max(worst, std::abs(pricing_g(m, v) - best_p));
    }
  }
  double worst_exp = 0.0;
  for (double v : {-2.0, -1.0, 0.0, 0.5, 1.0})
    worst_exp = std::max(
        worst_exp, std::abs(pricing_g(NoiseModel::exponential(), v) - 1.0));
  return {"pricing function vs grid argmax",
          worst <= 2e-3 && worst_exp <= 1e-8,
          format("max |g - argmax| = %.3g, exponential max err = %.3g", worst,
                 worst_exp)};
}

Dataset random_dataset(Rng& rng, int D, int n, double W) {
  Dataset data(D);
  Vector mu(D);
  for (int j = 0; j < D; ++j) mu(j) = uniform(rng, -1.0, 1.0);
  mu *= 0.8 * W / std::max(mu.lpNorm<1>(), 1e-12);
  const NoiseModel noise = NoiseModel::logistic();
  for (int t = 0; t < n; ++t) {
    Vector x(D);
    for (int j = 0; j + 1 < D; ++j) x(j) = uniform(rng, -1.0, 1.0);
    x(D - 1) = 1.0;
    const double p = uniform(rng, 0.0, 2.0 * W);
    const double v = mu.dot(x) + noise.sample(rng);
    data.add(x, p, v >= p ? 1 : -1);
  }
  return data;
}

CheckResult check_gradient() {
  Rng rng(20240601);
  double worst = 0.0;
  const NoiseModel models[] = {NoiseModel::logistic(), NoiseModel::normal()};
  for (int rep = 0; rep < 100; ++rep) {
    const NoiseModel& model = models[rep % 2];
    const int D = 2 + rep % 20;
    const Dataset data = random_dataset(rng, D, 50, 2.0);
    Vector mu(D);
    for (int j = 0; j < D; ++j) mu(j) = uniform(rng, -0.5, 0.5);
    const Vector g = nll_gradient(mu, data, model);
    Vector fd(D);
    const double h = 1e-6;
    for (int j = 0; j < D; ++j) {
      Vector a = mu;
      Vector b = mu;
      a(j) += h;
      b(j) -= h;
      fd(j) = (nll(a, data, model) - nll(b, data, model)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-8));
  }
  return {"likelihood gradient vs finite differences", worst <= 1e-5,
          format("max relative error = %.3g", worst)};
}

// Brute force over the 2-d L1 ball: a 0.01 mesh refined around the best point.
Vector mesh_minimize(const Dataset& data, const NoiseModel& model,
                     double lambda, double W) {
  auto objective = [&](double a, double b) {
    if (std::abs(a) + std::abs(b) > W) return std::numeric_limits<double>::infinity();
    Vector mu(2);
    mu << a, b;
    return nll(mu, data, model) + lambda * (std::abs(a) + std::abs(b));
  };
  double ca = 0.0;
  double cb = 0.0;
  double radius = W;
  double step = 0.01;
  double best = objective(0.0, 0.0);
  for (int level = 0; level < 5; ++level) {
    const int m = static_cast<int>(std::ceil(radius / step));
    const double a0 = ca;
    const double b0 = cb;
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j) {
        const double a = a0 + i * step;
        const double b = b0 + j * step;
        const double f = objective(a, b);
        if (f < best) {
          best = f;
          ca = a;
          cb = b;
        }
      }
    radius = 2.0 * step;
    step /= 10.0;
  }
  Vector mu(2);
  mu << ca, cb;
  return mu;
}

CheckResult check_solver() {
  Rng rng(77);
  double worst_mle = 0.0;
  const NoiseModel model = NoiseModel::logistic();
  for (int rep = 0; rep < 4; ++rep) {
    const double W = 0.6;
    const Dataset data = random_dataset(rng, 2, 60, W);
    SolverConfig cfg;
    cfg.W = W;
    cfg.lambda = rep % 2 == 0 ? 0.0 : 0.05;
    cfg.tol = 1e-13;
    cfg.kkt_tol = 1e-9;
    cfg.max_iter = 20000;
    const Vector fit = fit_l1_mle(data, model, cfg).mu_hat;
    const Vector brute = mesh_minimize(data, model, cfg.lambda, W);
    worst_mle = std::max(worst_mle, (fit - brute).lpNorm<Eigen::Infinity>());
  }

  double worst_ls = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const int D = 4 + rep;
    const Dataset data = random_dataset(rng, D, 80, 1.0);
    SolverConfig cfg;
    cfg.W = 1e6;
    cfg.tol = 1e-15;
    cfg.kkt_tol = 1e-11;
    cfg.max_iter = 100000;
    const double K = 2.0;
    const Vector fit =
        fit_l1_quadratic(data, K, cfg, DipResponse::kZeroOne).mu_hat;
    const auto X = data.design();
    Vector target(data.size());
    for (int t = 0; t < data.size(); ++t)
      target(t) = K * (data.labels()[t] + 1) / 2;
    const Vector ls = (X.transpose() * X).ldlt().solve(X.transpose() * target);
    worst_ls = std::max(worst_ls, (fit - ls).lpNorm<Eigen::Infinity>());
  }
  return {"solver vs brute force and least squares",
          worst_mle <= 2e-3 && worst_ls <= 1e-6,
          format("mesh max err = %.3g, least-squares max err = %.3g",
                 worst_mle, worst_ls)};
}

CheckResult check_log_concavity() {
  double worst = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  const NoiseModel models[] = {NoiseModel::normal(), NoiseModel::logistic(),
                               NoiseModel::exponential(),
                               NoiseModel::uniform()};
  const double h = 1e-2;
  for (const NoiseModel& m : models) {
    const double lo = std::max(m.support_lower(), -8.0) + 2 * h;
    const double hi = std::min(m.support_upper(), 8.0) - 2 * h;
    double prev = -1.0;
    for (double x = lo; x <= hi; x += h) {
      auto second = [&](auto&& f) { return f(x + h) - 2.0 * f(x) + f(x - h); };
      worst = std::max({worst,
                        second([&](double u) { return std::log(m.pdf(u)); }),
                        second([&](double u) { return m.log_cdf(u); }),
                        second([&](double u) { return m.log_sf(u); })});
      const double F = m.cdf(x);
      monotone = monotone && F >= prev;
      prev = F;
    }
  }
  for (const LinkFunction& link : {LinkFunction::identity(), LinkFunction::exp()}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double v = 0.05; v <= 8.0; v += h) {
      worst = std::max(worst, std::log(link.psi(v + h)) -
                                  2.0 * std::log(link.psi(v)) +
                                  std::log(link.psi(v - h)));
      monotone = monotone && link.psi(v) > prev;
      prev = link.psi(v);
    }
  }
  return {"log-concavity and monotonicity", worst <= 1e-8 && monotone,
          format("max second difference = %.3g, monotone = %.0f", worst,
                 monotone ? 1.0 : 0.0)};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  return {check_pricing(), check_gradient(), check_solver(),
          check_log_concavity()};
}

}  // namespace pricelab
