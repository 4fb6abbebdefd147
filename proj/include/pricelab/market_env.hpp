#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "pricelab/noise_models.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

using Vector = Eigen::VectorXd;

/// Hidden demand parameters mu0 = (theta0, alpha0) with ||mu0||_1 <= W and
/// at most s0 nonzero coordinates (the intercept counts).
struct GroundTruth {
  Vector theta0;
  double alpha0 = 0.0;
  double W = 1.0;
  int s0 = 1;

  int dim() const { return static_cast<int>(theta0.size()); }
  // (theta0, alpha0), length d + 1.
  Vector mu0() const;
};

// Support drawn uniformly from the d + 1 coordinates, magnitudes uniform on
// [0.5, 1] with random signs, rescaled so that ||mu0||_1 = 0.9 W.
GroundTruth sample_ground_truth(int d, int s0, double W, std::uint64_t seed);

enum class FeatureDistribution {
  kUniformPm1,       // "uniform_pm1": i.i.d. U[-1, 1]
  kRademacher,       // "rademacher": i.i.d. +-1
  kTruncatedNormal,  // "truncated_normal": N(0, rho^2) truncated to [-1, 1]
  kUniformPositive,  // "uniform_pos": i.i.d. U[0.5, 1.5], for log features
};

FeatureDistribution parse_feature_distribution(std::string_view name);
std::string_view to_string(FeatureDistribution dist);

class FeatureSampler {
 public:
  FeatureSampler(int d, FeatureDistribution distribution, std::uint64_t seed,
                 double rho = 1.0);

  int dim() const { return d_; }
  FeatureDistribution distribution() const { return distribution_; }
  // Fills the first d entries of `out`.
  void sample(Eigen::Ref<Vector> out);

 private:
  int d_;
  FeatureDistribution distribution_;
  double rho_;
  Rng rng_;
};

enum class FeatureMap { kIdentity, kComponentwiseLog };

FeatureMap parse_feature_map(std::string_view name);
std::string_view to_string(FeatureMap map);

// Which clairvoyant the regret is measured against.
enum class Benchmark {
  // Knows mu0 and F, posts p* = psi(g_psi(mu0 . x)).
  kKnownDistribution,
  // Also knows the noise draw and extracts max(v, 0).
  kFullInformation,
};

struct MarketOutcome {
  std::int64_t t = 0;
  Vector x_aug;
  double posted_price = 0.0;
  int sale = -1;  // +1 iff valuation >= posted_price
  double optimal_price = 0.0;
  double realized_regret = 0.0;
  double expected_regret = 0.0;
  // Hidden from policies.
  double valuation = 0.0;
  double noise = 0.0;
};

struct RegretPair {
  double realized;
  double expected;
};

/// Sequential market simulator. Features and noise come from separately
/// seeded generators; equal seeds give identical trajectories.
class Environment {
 public:
  Environment(GroundTruth truth, FeatureSampler sampler, NoiseModel noise,
              LinkFunction link, FeatureMap feature_map,
              std::uint64_t noise_seed,
              Benchmark benchmark = Benchmark::kKnownDistribution);

  const GroundTruth& truth() const { return truth_; }
  const Vector& mu0() const { return mu0_; }
  const NoiseModel& noise() const { return noise_; }
  const LinkFunction& link() const { return link_; }
  FeatureMap feature_map() const { return feature_map_; }
  Benchmark benchmark() const { return benchmark_; }
  int dim() const { return truth_.dim(); }
  std::int64_t period() const { return t_; }

  // Draws x_t, applies the feature map and appends the constant 1.
  Vector next_feature();
  double draw_noise();

  // Draws the period's noise and settles a sale at price p.
  MarketOutcome realize_outcome(const Vector& x_aug, double p);
  // Same with a caller-supplied noise draw; does not advance the noise stream.
  MarketOutcome settle(const Vector& x_aug, double p, double z);

  double mean_utility(const Vector& x_aug) const { return mu0_.dot(x_aug); }
  double clairvoyant_price(const Vector& x_aug) const;
  double expected_revenue(const Vector& x_aug, double p) const;
  RegretPair regret_pair(const Vector& x_aug, double p, double z) const;

 private:
  RegretPair regret_pair(double m, double p, double p_star, double z) const;
  double valuation(double m, double z) const { return link_.psi(m + z); }
  double revenue_at(double m, double p) const;

  GroundTruth truth_;
  Vector mu0_;
  FeatureSampler sampler_;
  NoiseModel noise_;
  LinkFunction link_;
  FeatureMap feature_map_;
  Benchmark benchmark_;
  Rng noise_rng_;
  std::int64_t t_ = 0;
};

}  // namespace pricelab
