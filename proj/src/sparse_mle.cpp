#include "pricelab/sparse_mle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "pricelab/errors.hpp"

namespace pricelab {

Dataset Dataset::from_observations(std::span<const Observation> data,
                                   const LinkFunction& link) {
  if (data.empty()) throw ArgumentError("Dataset: no observations");
  Dataset out(static_cast<int>(data.front().x_aug.size()));
  for (const Observation& o : data) out.add(o.x_aug, o.price, o.y, link);
  return out;
}

void Dataset::add(const Vector& x_aug, double price, int y,
                  const LinkFunction& link) {
  if (x_aug.size() != dim_)
    throw ArgumentError("Dataset::add: feature length " +
                        std::to_string(x_aug.size()) + " != " +
                        std::to_string(dim_));
  if (y != 1 && y != -1)
    throw ArgumentError("Dataset::add: label must be +1 or -1");
  rows_.insert(rows_.end(), x_aug.data(), x_aug.data() + dim_);
  prices_.push_back(link.price_transform(price));
  labels_.push_back(y);
}

void Dataset::clear() {
  rows_.clear();
  prices_.clear();
  labels_.clear();
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw ArgumentError("SolverConfig: lambda must be >= 0");
  if (!(W > 0.0)) throw ArgumentError("SolverConfig: W must be > 0");
  if (max_iter < 1) throw ArgumentError("SolverConfig: max_iter must be >= 1");
  if (!(tol > 0.0) || !(kkt_tol > 0.0))
    throw ArgumentError("SolverConfig: tolerances must be > 0");
  if (!(step_init > 0.0) || !(step_shrink > 0.0 && step_shrink < 1.0) ||
      !(step_growth >= 1.0))
    throw ArgumentError("SolverConfig: invalid step parameters");
}

namespace {

double loss_term(const NoiseModel& model, int y, double u) {
  return y == 1 ? -model.log_sf(u) : -model.log_cdf(u);
}

double loss_slope(const NoiseModel& model, int y, double u) {
  return y == 1 ? -model.log_sf_prime(u) : -model.log_cdf_prime(u);
}

void require_nonempty(const Dataset& data, const char* who) {
  if (data.empty())
    throw ArgumentError(std::string(who) + ": empty dataset");
}

void require_dim(const Vector& mu, const Dataset& data, const char* who) {
  if (mu.size() != data.dim())
    throw ArgumentError(std::string(who) + ": parameter length " +
                        std::to_string(mu.size()) + " != " +
                        std::to_string(data.dim()));
}

// Likelihood over margins u_t = beta q_t - x_t . mu. Fills gradients when
// requested.
double glm_objective(const Dataset& data, const NoiseModel& model,
                     const Vector& mu, double beta, Vector* grad_mu,
                     double* grad_beta) {
  const int n = data.size();
  const Vector xm = data.design() * mu;
  const auto& q = data.prices();
  const auto& y = data.labels();
  Vector w;
  if (grad_mu) w.resize(n);
  double total = 0.0;
  double gb = 0.0;
  for (int t = 0; t < n; ++t) {
    const double u = beta * q[t] - xm(t);
    total += loss_term(model, y[t], u);
    if (grad_mu) {
      const double s = loss_slope(model, y[t], u);
      w(t) = s;
      gb += s * q[t];
    }
  }
  if (grad_mu) *grad_mu = -(data.design().transpose() * w) / n;
  if (grad_beta) *grad_beta = gb / n;
  return total / n;
}

struct ProxSpec {
  int penalized = 0;  // leading coordinates carrying lambda |.| and the ball
  double lambda = 0.0;
  double radius = 1.0;
  bool has_box = false;  // trailing coordinate constrained to [lo, hi]
  double lo = 0.0;
  double hi = 0.0;
};

Vector apply_prox(const Vector& v, double step, const ProxSpec& spec) {
  Vector out = v;
  out.head(spec.penalized) = l1_project(
      soft_threshold(v.head(spec.penalized), spec.lambda * step), spec.radius);
  if (spec.has_box) {
    const int b = spec.penalized;
    out(b) = std::clamp(v(b), spec.lo, spec.hi);
  }
  return out;
}

double nonsmooth(const Vector& x, const ProxSpec& spec) {
  return spec.lambda * x.head(spec.penalized).lpNorm<1>();
}

// Norm of the minimal-norm element of grad + lambda d||.||_1 + N_C(x),
// maximized over coordinates. On the ball boundary the multiplier nu of the
// ball constraint is searched on [0, nu_max].
double kkt_residual(const Vector& x, const Vector& grad, const ProxSpec& spec) {
  const int P = spec.penalized;
  const double norm1 = x.head(P).lpNorm<1>();
  const bool on_ball = norm1 >= spec.radius * (1.0 - 1e-9);

  auto residual_at = [&](double nu) {
    double worst = 0.0;
    const double weight = spec.lambda + nu;
    for (int i = 0; i < P; ++i) {
      double r;
      if (x(i) > 0.0) {
        r = std::abs(grad(i) + weight);
      } else if (x(i) < 0.0) {
        r = std::abs(grad(i) - weight);
      } else {
        r = std::max(std::abs(grad(i)) - weight, 0.0);
      }
      worst = std::max(worst, r);
    }
    return worst;
  };

  double best = residual_at(0.0);
  if (on_ball && P > 0) {
    double lo = 0.0;
    double hi = grad.head(P).cwiseAbs().maxCoeff() + spec.lambda + 1.0;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    double fa = residual_at(a);
    double fb = residual_at(b);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      if (fa <= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - ratio * (hi - lo);
        fa = residual_at(a);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + ratio * (hi - lo);
        fb = residual_at(b);
      }
    }
    best = std::min({best, fa, fb});
  }

  if (spec.has_box) {
    const int b = P;
    const double g = grad(b);
    double r;
    if (x(b) <= spec.lo) {
      r = std::max(-g, 0.0);
    } else if (x(b) >= spec.hi) {
      r = std::max(g, 0.0);
    } else {
      r = std::abs(g);
    }
    best = std::max(best, r);
  }
  return best;
}

using SmoothFn = std::function<double(const Vector&, Vector*)>;

FitResult run_fista(const SmoothFn& smooth, const ProxSpec& spec,
                    const SolverConfig& config, const Vector& start,
                    double step_init) {
  auto check_finite = [](double value, int iteration) {
    if (!std::isfinite(value))
      throw NumericalError("solver objective is not finite at iteration " +
                           std::to_string(iteration));
  };

  Vector x = apply_prox(start, 0.0, spec);
  double fx = smooth(x, nullptr);
  double Fx = fx + nonsmooth(x, spec);
  check_finite(Fx, 0);

  FitResult result;
  result.objective_trace.reserve(64);
  Vector y = x;
  Vector grad_y(x.size());
  double t = 1.0;
  double step = step_init;
  bool momentum = false;
  int iteration = 0;
  int evaluations = 0;
  const int max_evaluations = 50 * config.max_iter;

  while (iteration < config.max_iter && evaluations < max_evaluations) {
    const double fy = smooth(y, &grad_y);
    ++evaluations;
    check_finite(fy, iteration);

    Vector xn;
    double fxn = 0.0;
    for (int backtrack = 0;; ++backtrack) {
      xn = apply_prox(y - step * grad_y, step, spec);
      fxn = smooth(xn, nullptr);
      ++evaluations;
      const Vector diff = xn - y;
      const double bound = fy + grad_y.dot(diff) +
                           diff.squaredNorm() / (2.0 * step);
      if (std::isfinite(fxn) &&
          fxn <= bound + 1e-12 * std::max(1.0, std::abs(fy)))
        break;
      if (backtrack >= 200)
        throw NumericalError("solver backtracking failed at iteration " +
                             std::to_string(iteration));
      step *= config.step_shrink;
    }

    const double Fn = fxn + nonsmooth(xn, spec);
    check_finite(Fn, iteration);
    if (Fn > Fx && momentum) {
      // Objective went up: drop the momentum and retry from x.
      y = x;
      t = 1.0;
      momentum = false;
      continue;
    }

    ++iteration;
    const double decrease = Fx - Fn;
    const bool accept = Fn <= Fx;
    if (accept) {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      momentum = true;
      t = tn;
      x = std::move(xn);
      Fx = Fn;
    }
    result.objective_trace.push_back(Fx);
    step *= config.step_growth;

    if (!accept || decrease <= config.tol * std::max(1.0, std::abs(Fx))) {
      Vector grad_x(x.size());
      smooth(x, &grad_x);
      ++evaluations;
      const double kkt = kkt_residual(x, grad_x, spec);
      result.kkt_residual = kkt;
      if (kkt <= config.kkt_tol * (1.0 + std::abs(Fx))) {
        result.converged = true;
        break;
      }
      if (!accept) {
        // Plain proximal step made no progress; restart momentum.
        y = x;
        t = 1.0;
        momentum = false;
      }
    }
  }

  if (!result.converged) {
    Vector grad_x(x.size());
    smooth(x, &grad_x);
    result.kkt_residual = kkt_residual(x, grad_x, spec);
  }
  result.iterations = iteration;
  result.objective = Fx;
  result.mu_hat = x;
  return result;
}

}  // namespace

double nll(const Vector& mu, const Dataset& data, const NoiseModel& model) {
  require_nonempty(data, "nll");
  require_dim(mu, data, "nll");
  return glm_objective(data, model, mu, 1.0, nullptr, nullptr);
}

double nll(const Vector& mu, std::span<const Observation> data,
           const NoiseModel& model, const LinkFunction& price_transform) {
  return nll(mu, Dataset::from_observations(data, price_transform), model);
}

Vector nll_gradient(const Vector& mu, const Dataset& data,
                    const NoiseModel& model) {
  require_nonempty(data, "nll_gradient");
  require_dim(mu, data, "nll_gradient");
  Vector grad;
  glm_objective(data, model, mu, 1.0, &grad, nullptr);
  return grad;
}

Vector nll_gradient(const Vector& mu, std::span<const Observation> data,
                    const NoiseModel& model,
                    const LinkFunction& price_transform) {
  return nll_gradient(mu, Dataset::from_observations(data, price_transform),
                      model);
}

Vector soft_threshold(const Vector& v, double t) {
  if (!(t >= 0.0)) throw ArgumentError("soft_threshold: t must be >= 0");
  return v.unaryExpr([t](double a) {
    return a > t ? a - t : (a < -t ? a + t : 0.0);
  });
}

Vector l1_project(const Vector& v, double W) {
  if (!(W >= 0.0)) throw ArgumentError("l1_project: W must be >= 0");
  if (v.lpNorm<1>() <= W) return v;
  if (W == 0.0) return Vector::Zero(v.size());
  std::vector<double> a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = std::abs(v(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    cumulative += a[j];
    const double candidate = (cumulative - W) / static_cast<double>(j + 1);
    if (a[j] - candidate > 0.0) theta = candidate;
  }
  return soft_threshold(v, theta);
}

FitResult fit_l1_mle(const Dataset& data, const NoiseModel& model,
                     const SolverConfig& config,
                     const std::optional<Vector>& warm_start) {
  config.validate();
  require_nonempty(data, "fit_l1_mle");
  const Vector start =
      warm_start ? *warm_start : Vector::Zero(data.dim()).eval();
  require_dim(start, data, "fit_l1_mle");

  ProxSpec spec;
  spec.penalized = data.dim();
  spec.lambda = config.lambda;
  spec.radius = config.W;
  SmoothFn smooth = [&](const Vector& mu, Vector* grad) {
    return glm_objective(data, model, mu, 1.0, grad, nullptr);
  };
  return run_fista(smooth, spec, config, start, config.step_init);
}

FitResult fit_l1_mle_with_scale(const Dataset& data, const NoiseModel& model,
                                const SolverConfig& config, ScaleBox box,
                                const std::optional<Vector>& warm_mu,
                                std::optional<double> warm_beta) {
  config.validate();
  require_nonempty(data, "fit_l1_mle_with_scale");
  if (!(box.lo > 0.0) || !(box.hi > box.lo))
    throw ArgumentError("fit_l1_mle_with_scale: need 0 < beta_lo < beta_hi");
  const auto& q = data.prices();
  const auto [qmin, qmax] = std::minmax_element(q.begin(), q.end());
  if (!(*qmax > *qmin))
    throw ArgumentError(
        "fit_l1_mle_with_scale: prices have zero variance, scale is not "
        "identifiable");

  const int D = data.dim();
  Vector start(D + 1);
  start.head(D) = warm_mu ? *warm_mu : Vector::Zero(D).eval();
  if (warm_mu && warm_mu->size() != D)
    throw ArgumentError("fit_l1_mle_with_scale: warm start length mismatch");
  start(D) = std::clamp(warm_beta.value_or(1.0), box.lo, box.hi);

  ProxSpec spec;
  spec.penalized = D;
  spec.lambda = config.lambda;
  spec.radius = config.W * box.hi;
  spec.has_box = true;
  spec.lo = box.lo;
  spec.hi = box.hi;
  SmoothFn smooth = [&](const Vector& z, Vector* grad) {
    if (!grad)
      return glm_objective(data, model, z.head(D), z(D), nullptr, nullptr);
    Vector g_mu;
    double g_beta = 0.0;
    const double value =
        glm_objective(data, model, z.head(D), z(D), &g_mu, &g_beta);
    grad->resize(D + 1);
    grad->head(D) = g_mu;
    (*grad)(D) = g_beta;
    return value;
  };
  FitResult result = run_fista(smooth, spec, config, start, config.step_init);
  result.beta_hat = result.mu_hat(D);
  result.mu_hat = result.mu_hat.head(D).eval();
  return result;
}

FitResult fit_l1_quadratic(const Dataset& data, double K,
                           const SolverConfig& config, DipResponse response,
                           const std::optional<Vector>& warm_start) {
  config.validate();
  require_nonempty(data, "fit_l1_quadratic");
  if (!(K > 0.0)) throw ArgumentError("fit_l1_quadratic: K must be > 0");
  const Vector start =
      warm_start ? *warm_start : Vector::Zero(data.dim()).eval();
  require_dim(start, data, "fit_l1_quadratic");

  const int n = data.size();
  const auto X = data.design();
  Vector target(n);
  for (int t = 0; t < n; ++t) {
    const int y = data.labels()[t];
    target(t) = response == DipResponse::kPlusMinusOne ? K * y
                                                       : K * (y + 1) / 2;
  }
  // Exact Lipschitz constant of the gradient: 2 lambda_max(X^T X / n).
  const Eigen::MatrixXd gram = (X.transpose() * X) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * eig.eigenvalues().maxCoeff();
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : config.step_init;

  ProxSpec spec;
  spec.penalized = data.dim();
  spec.lambda = config.lambda;
  spec.radius = config.W;
  SmoothFn smooth = [&](const Vector& mu, Vector* grad) {
    const Vector resid = target - X * mu;
    if (grad) *grad = -(2.0 / n) * (X.transpose() * resid);
    return resid.squaredNorm() / n;
  };
  SolverConfig fixed = config;
  fixed.step_growth = 1.0;
  return run_fista(smooth, spec, fixed, start, step);
}

double lambda_schedule_rmlp(int k, int d, double u_W) {
  if (k < 2) throw ArgumentError("lambda_schedule_rmlp: k must be >= 2");
  if (d < 1) throw ArgumentError("lambda_schedule_rmlp: d must be >= 1");
  if (!(u_W > 0.0)) throw ArgumentError("lambda_schedule_rmlp: u_W must be > 0");
  const double tau = std::ldexp(1.0, k - 2);
  return 4.0 * u_W * std::sqrt(std::log(static_cast<double>(d)) / tau);
}

}  // namespace pricelab
