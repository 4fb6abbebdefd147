#include "pricelab/market_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "pricelab/errors.hpp"

namespace pricelab {

Vector GroundTruth::mu0() const {
  Vector mu(theta0.size() + 1);
  mu.head(theta0.size()) = theta0;
  mu(theta0.size()) = alpha0;
  return mu;
}

GroundTruth sample_ground_truth(int d, int s0, double W, std::uint64_t seed) {
  if (d < 0) throw ArgumentError("sample_ground_truth: d must be >= 0");
  if (s0 < 1 || s0 > d + 1)
    throw ArgumentError("sample_ground_truth: need 1 <= s0 <= d+1, got s0=" +
                        std::to_string(s0) + ", d=" + std::to_string(d));
  if (!(W > 0.0)) throw ArgumentError("sample_ground_truth: W must be > 0");

  Rng rng(seed);
  std::vector<int> index(d + 1);
  std::iota(index.begin(), index.end(), 0);
  // Partial Fisher-Yates: the first s0 entries are the support.
  for (int i = 0; i < s0; ++i) {
    std::uniform_int_distribution<int> pick(i, d);
    std::swap(index[i], index[pick(rng)]);
  }
  Vector mu = Vector::Zero(d + 1);
  for (int i = 0; i < s0; ++i) {
    const double magnitude = uniform(rng, 0.5, 1.0);
    const double sign = (rng() >> 63) ? 1.0 : -1.0;
    mu(index[i]) = sign * magnitude;
  }
  mu *= 0.9 * W / mu.lpNorm<1>();

  GroundTruth truth;
  truth.theta0 = mu.head(d);
  truth.alpha0 = mu(d);
  truth.W = W;
  truth.s0 = s0;
  return truth;
}

FeatureDistribution parse_feature_distribution(std::string_view name) {
  if (name == "uniform_pm1") return FeatureDistribution::kUniformPm1;
  if (name == "rademacher") return FeatureDistribution::kRademacher;
  if (name == "truncated_normal") return FeatureDistribution::kTruncatedNormal;
  if (name == "uniform_pos") return FeatureDistribution::kUniformPositive;
  throw ArgumentError("unknown feature distribution '" + std::string(name) +
                      "'");
}

std::string_view to_string(FeatureDistribution dist) {
  switch (dist) {
    case FeatureDistribution::kUniformPm1: return "uniform_pm1";
    case FeatureDistribution::kRademacher: return "rademacher";
    case FeatureDistribution::kTruncatedNormal: return "truncated_normal";
    case FeatureDistribution::kUniformPositive: return "uniform_pos";
  }
  return "?";
}

FeatureMap parse_feature_map(std::string_view name) {
  if (name == "identity") return FeatureMap::kIdentity;
  if (name == "componentwise_log") return FeatureMap::kComponentwiseLog;
  throw ArgumentError("unknown feature map '" + std::string(name) + "'");
}

std::string_view to_string(FeatureMap map) {
  return map == FeatureMap::kIdentity ? "identity" : "componentwise_log";
}

FeatureSampler::FeatureSampler(int d, FeatureDistribution distribution,
                               std::uint64_t seed, double rho)
    : d_(d), distribution_(distribution), rho_(rho), rng_(seed) {
  if (d < 0) throw ArgumentError("FeatureSampler: d must be >= 0");
  if (!(rho > 0.0)) throw ArgumentError("FeatureSampler: rho must be > 0");
}

void FeatureSampler::sample(Eigen::Ref<Vector> out) {
  for (int j = 0; j < d_; ++j) {
    switch (distribution_) {
      case FeatureDistribution::kUniformPm1:
        out(j) = uniform(rng_, -1.0, 1.0);
        break;
      case FeatureDistribution::kRademacher:
        out(j) = (rng_() >> 63) ? 1.0 : -1.0;
        break;
      case FeatureDistribution::kTruncatedNormal: {
        double z;
        do {
          const double u1 = uniform_open01(rng_);
          const double u2 = uniform_open01(rng_);
          z = rho_ * std::sqrt(-2.0 * std::log(u1)) *
              std::cos(2.0 * std::numbers::pi * u2);
        } while (z < -1.0 || z > 1.0);
        out(j) = z;
        break;
      }
      case FeatureDistribution::kUniformPositive:
        out(j) = uniform(rng_, 0.5, 1.5);
        break;
    }
  }
}

Environment::Environment(GroundTruth truth, FeatureSampler sampler,
                         NoiseModel noise, LinkFunction link,
                         FeatureMap feature_map, std::uint64_t noise_seed,
                         Benchmark benchmark)
    : truth_(std::move(truth)),
      mu0_(truth_.mu0()),
      sampler_(std::move(sampler)),
      noise_(noise),
      link_(link),
      feature_map_(feature_map),
      benchmark_(benchmark),
      noise_rng_(noise_seed) {
  if (sampler_.dim() != truth_.dim())
    throw ArgumentError("Environment: sampler dimension " +
                        std::to_string(sampler_.dim()) +
                        " does not match truth dimension " +
                        std::to_string(truth_.dim()));
  if (benchmark_ == Benchmark::kFullInformation && !link_.is_identity())
    throw ArgumentError(
        "Environment: full-information benchmark requires the identity link");
}

Vector Environment::next_feature() {
  const int d = dim();
  Vector x(d + 1);
  sampler_.sample(x.head(d));
  if (feature_map_ == FeatureMap::kComponentwiseLog) {
    for (int j = 0; j < d; ++j) {
      if (!(x(j) > 0.0))
        throw DomainError("componentwise_log feature map: nonpositive input " +
                          std::to_string(x(j)) + " at coordinate " +
                          std::to_string(j));
      x(j) = std::log(x(j));
    }
  }
  x(d) = 1.0;
  return x;
}

double Environment::draw_noise() { return noise_.sample(noise_rng_); }

MarketOutcome Environment::realize_outcome(const Vector& x_aug, double p) {
  return settle(x_aug, p, draw_noise());
}

MarketOutcome Environment::settle(const Vector& x_aug, double p, double z) {
  if (!(p >= 0.0))
    throw ArgumentError("realize_outcome: price must be >= 0, got " +
                        std::to_string(p));
  const double m = mean_utility(x_aug);
  MarketOutcome out;
  out.t = ++t_;
  out.x_aug = x_aug;
  out.posted_price = p;
  out.noise = z;
  out.valuation = valuation(m, z);
  out.sale = out.valuation >= p ? +1 : -1;
  out.optimal_price = benchmark_ == Benchmark::kFullInformation
                          ? std::max(out.valuation, 0.0)
                          : clairvoyant_price(x_aug);
  const RegretPair r = regret_pair(m, p, out.optimal_price, z);
  out.realized_regret = r.realized;
  out.expected_regret = r.expected;
  return out;
}

double Environment::clairvoyant_price(const Vector& x_aug) const {
  const double m = mean_utility(x_aug);
  if (link_.is_identity()) return pricing_g(noise_, m);
  return link_.psi(pricing_g_nonlinear(noise_, link_, m));
}

double Environment::revenue_at(double m, double p) const {
  if (p == 0.0) return 0.0;
  return p * noise_.sf(link_.psi_inverse(p) - m);
}

double Environment::expected_revenue(const Vector& x_aug, double p) const {
  if (!(p >= 0.0))
    throw ArgumentError("expected_revenue: price must be >= 0");
  return revenue_at(mean_utility(x_aug), p);
}

RegretPair Environment::regret_pair(const Vector& x_aug, double p,
                                    double z) const {
  const double m = mean_utility(x_aug);
  const double p_star = benchmark_ == Benchmark::kFullInformation
                            ? std::max(valuation(m, z), 0.0)
                            : clairvoyant_price(x_aug);
  return regret_pair(m, p, p_star, z);
}

RegretPair Environment::regret_pair(double m, double p, double p_star,
                                    double z) const {
  const double v = valuation(m, z);
  const double revenue = v >= p ? p : 0.0;
  if (benchmark_ == Benchmark::kFullInformation) {
    return {std::max(v, 0.0) - revenue,
            noise_.expected_positive_part(m) - revenue_at(m, p)};
  }
  const double best = v >= p_star ? p_star : 0.0;
  return {best - revenue, revenue_at(m, p_star) - revenue_at(m, p)};
}

}  // namespace pricelab
