#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pricelab/market_env.hpp"
#include "pricelab/noise_models.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/sparse_mle.hpp"

namespace pricelab {

/// One estimator refit performed by an episodic policy.
struct FitRecord {
  int k = 0;      // episode (or cycle) the estimate is used in
  int n_fit = 0;  // observations the fit saw
  double lambda = 0.0;
  Vector mu_hat;  // in valuation units; RMLP-2 reports mu_hat / beta_hat
  std::optional<double> beta_hat;
  int iterations = 0;
  bool converged = false;
  bool failed = false;  // solver threw; the previous estimate was kept
};

/// Period-by-period pricing rule.
///
/// next_price(x) and observe(outcome) must strictly alternate. A policy reads
/// only the posted price and the sale indicator of an outcome.
class Policy {
 public:
  virtual ~Policy() = default;

  double next_price(const Vector& x_aug);
  void observe(const MarketOutcome& outcome);

  virtual std::string_view id() const = 0;
  // Episode or cycle index of the most recent price (0 if not episodic).
  virtual int episode() const { return 0; }
  // Whether the most recent price was an exploration price.
  virtual bool exploring() const { return false; }
  const std::vector<FitRecord>& fits() const { return fits_; }

 protected:
  virtual double price_for(const Vector& x_aug) = 0;
  virtual void record(const Vector& x_aug, double price, int sale) = 0;

  std::vector<FitRecord> fits_;

 private:
  bool awaiting_ = false;
  Vector pending_x_;
  double pending_price_ = 0.0;
};

/// RMLP with doubling episodes; with a non-identity link this is the
/// nonlinear variant.
class RmlpPolicy : public Policy {
 public:
  struct Params {
    int d = 1;
    double W = 1.0;
    NoiseModel noise = NoiseModel::logistic();
    LinkFunction link = LinkFunction::identity();
    double lambda_scale = 1.0;
    bool regularized = true;  // false: lambda = 0 (unregularized MLE)
    SolverConfig solver{};
  };

  explicit RmlpPolicy(Params params);

  std::string_view id() const override;
  int episode() const override { return k_; }
  const Vector& estimate() const { return mu_hat_; }
  double u_W() const { return u_W_; }
  // Fixes the estimate and disables refits.
  void inject_estimate(const Vector& mu);

 protected:
  double price_for(const Vector& x_aug) override;
  void record(const Vector& x_aug, double price, int sale) override;

 private:
  void refit();

  Params params_;
  double u_W_;
  int k_ = 1;
  std::int64_t position_ = 0;
  Dataset buffer_;
  Vector mu_hat_;
  bool frozen_ = false;
};

/// RMLP-2 for unknown noise scale: episode k has one uniform exploration
/// price on [0, 1] followed by k - 1 exploitation prices.
class Rmlp2Policy : public Policy {
 public:
  struct Params {
    int d = 1;
    double W = 1.0;
    NoiseModel noise = NoiseModel::logistic();  // only the family is used
    ScaleBox box{};
    double lambda_scale = 1.0;
    SolverConfig solver{};
    std::uint64_t seed = 0;
  };

  explicit Rmlp2Policy(Params params);

  std::string_view id() const override { return "rmlp2"; }
  int episode() const override { return k_; }
  bool exploring() const override { return last_explore_; }
  int exploration_count() const { return explored_.size(); }
  const Vector& estimate() const { return mu_hat_; }
  double beta_estimate() const { return beta_hat_; }
  void inject_estimate(const Vector& mu, double beta);

 protected:
  double price_for(const Vector& x_aug) override;
  void record(const Vector& x_aug, double price, int sale) override;

 private:
  void refit();

  Params params_;
  NoiseModel unit_;
  double u_W_;
  Rng rng_;
  int k_ = 1;
  int position_ = 0;
  bool last_explore_ = false;
  Dataset explored_;
  Vector mu_hat_;
  double beta_hat_ = 1.0;
  bool fitted_ = false;
  bool frozen_ = false;
};

/// DIP for bounded noise: cycle k has c uniform exploration prices on [0, K]
/// followed by k exploitation prices mu_hat . x - 2 delta.
class DipPolicy : public Policy {
 public:
  struct Params {
    int d = 1;
    double W = 1.0;
    double delta = 0.1;
    int c = 5;
    DipResponse response = DipResponse::kZeroOne;
    double lambda_scale = 1.0;
    SolverConfig solver{};
    std::uint64_t seed = 0;
  };

  explicit DipPolicy(Params params);

  std::string_view id() const override { return "dip"; }
  int episode() const override { return k_; }
  bool exploring() const override { return last_explore_; }
  double K() const { return params_.W + params_.delta; }
  const Vector& estimate() const { return mu_hat_; }
  void inject_estimate(const Vector& mu);

 protected:
  double price_for(const Vector& x_aug) override;
  void record(const Vector& x_aug, double price, int sale) override;

 private:
  void refit();

  Params params_;
  Rng rng_;
  int k_ = 1;
  int position_ = 0;
  bool last_explore_ = false;
  Dataset explored_;
  Vector mu_hat_;
  bool frozen_ = false;
};

/// Posts the known-distribution optimal price psi(g_psi(mu0 . x)).
class ClairvoyantPolicy : public Policy {
 public:
  ClairvoyantPolicy(Vector mu0, NoiseModel noise, LinkFunction link);
  std::string_view id() const override { return "clairvoyant"; }

 protected:
  double price_for(const Vector& x_aug) override;
  void record(const Vector&, double, int) override {}

 private:
  Vector mu0_;
  NoiseModel noise_;
  LinkFunction link_;
};

class FixedPricePolicy : public Policy {
 public:
  explicit FixedPricePolicy(double price);
  std::string_view id() const override { return "fixed"; }
  double price() const { return price_; }

 protected:
  double price_for(const Vector&) override { return price_; }
  void record(const Vector&, double, int) override {}

 private:
  double price_;
};

/// Everything the factory needs to build any policy by identifier.
struct PolicyContext {
  int d = 1;
  double W = 1.0;
  NoiseModel noise = NoiseModel::logistic();
  LinkFunction link = LinkFunction::identity();
  Vector mu0;  // clairvoyant only
  int c = 5;
  double delta = 0.1;
  ScaleBox box{};
  double lambda_scale = 1.0;
  DipResponse dip_response = DipResponse::kZeroOne;
  SolverConfig solver{};
  std::uint64_t seed = 0;
};

// "rmlp", "rmlp_nonlinear", "rmlp2", "dip", "clairvoyant", "fixed:<p>",
// "mle_unreg".
std::unique_ptr<Policy> make_policy(std::string_view id,
                                    const PolicyContext& context);

// Throws ArgumentError for an unknown identifier.
void validate_policy_id(std::string_view id);

}  // namespace pricelab
