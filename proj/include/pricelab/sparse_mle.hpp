#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pricelab/noise_models.hpp"

namespace pricelab {

using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One sale record: augmented features, posted price and response y = +-1.
struct Observation {
  Vector x_aug;
  double price = 0.0;
  int y = -1;
};

/// Contiguous design matrix plus effective prices q = psi^{-1}(p) and labels.
class Dataset {
 public:
  explicit Dataset(int dim) : dim_(dim) {}
  static Dataset from_observations(
      std::span<const Observation> data,
      const LinkFunction& link = LinkFunction::identity());

  // `price` is the posted price; it is stored after `link.price_transform`.
  void add(const Vector& x_aug, double price, int y,
           const LinkFunction& link = LinkFunction::identity());
  void clear();

  int size() const { return static_cast<int>(labels_.size()); }
  int dim() const { return dim_; }
  bool empty() const { return labels_.empty(); }

  Eigen::Map<const RowMatrix> design() const {
    return {rows_.data(), size(), dim_};
  }
  const std::vector<double>& prices() const { return prices_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  int dim_;
  std::vector<double> rows_;
  std::vector<double> prices_;
  std::vector<int> labels_;
};

struct SolverConfig {
  double lambda = 0.0;  // L1 weight
  double W = 1.0;       // L1 ball radius
  int max_iter = 5000;
  double tol = 1e-9;      // relative objective decrease
  double kkt_tol = 1e-6;  // converged iff kkt_residual <= kkt_tol (1 + |obj|)
  double step_init = 1.0;
  double step_shrink = 0.5;
  double step_growth = 1.1;

  void validate() const;
};

// Box on the price-sensitivity coefficient for the scale-augmented fit.
struct ScaleBox {
  double lo = 0.05;
  double hi = 20.0;
};

struct FitResult {
  Vector mu_hat;
  std::optional<double> beta_hat;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  // Objective after every accepted iteration; non-increasing.
  std::vector<double> objective_trace;
};

// Negative log-likelihood (1/n) sum -[1{y=+1} log(1-F(q - mu.x)) +
// 1{y=-1} log F(q - mu.x)].
double nll(const Vector& mu, const Dataset& data, const NoiseModel& model);
double nll(const Vector& mu, std::span<const Observation> data,
           const NoiseModel& model,
           const LinkFunction& price_transform = LinkFunction::identity());

Vector nll_gradient(const Vector& mu, const Dataset& data,
                    const NoiseModel& model);
Vector nll_gradient(const Vector& mu, std::span<const Observation> data,
                    const NoiseModel& model,
                    const LinkFunction& price_transform = LinkFunction::identity());

Vector soft_threshold(const Vector& v, double t);

// Euclidean projection onto {u : ||u||_1 <= W}.
Vector l1_project(const Vector& v, double W);

/// argmin_{||mu||_1 <= W} nll(mu) + lambda ||mu||_1 by FISTA with
/// backtracking and objective-increase restarts.
FitResult fit_l1_mle(const Dataset& data, const NoiseModel& model,
                     const SolverConfig& config,
                     const std::optional<Vector>& warm_start = std::nullopt);

/// Joint fit of (mu, beta) for margins beta q - mu.x with only mu penalized,
/// beta in `box` and ||mu||_1 <= W * box.hi.
FitResult fit_l1_mle_with_scale(
    const Dataset& data, const NoiseModel& model, const SolverConfig& config,
    ScaleBox box = {},
    const std::optional<Vector>& warm_mu = std::nullopt,
    std::optional<double> warm_beta = std::nullopt);

enum class DipResponse {
  kPlusMinusOne,  // regress K * y with y in {-1, +1}
  kZeroOne,       // regress K * (y + 1) / 2
};

/// argmin_{||mu||_1 <= W} (1/n) sum (K r_t - x_t.mu)^2 + lambda ||mu||_1.
FitResult fit_l1_quadratic(const Dataset& data, double K,
                           const SolverConfig& config,
                           DipResponse response = DipResponse::kZeroOne,
                           const std::optional<Vector>& warm_start = std::nullopt);

// lambda_k = 4 u_W sqrt(log d / tau_{k-1}) with tau_{k-1} = 2^{k-2}.
double lambda_schedule_rmlp(int k, int d, double u_W);

}  // namespace pricelab
