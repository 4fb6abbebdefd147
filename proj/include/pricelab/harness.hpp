#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pricelab/config.hpp"
#include "pricelab/market_env.hpp"
#include "pricelab/policies.hpp"

namespace pricelab {

struct PeriodRecord {
  std::int64_t t = 0;
  int episode = 0;
  bool explore = false;
  int sale = -1;
  double price = 0.0;
  double optimal_price = 0.0;
  double realized_regret = 0.0;
  double expected_regret = 0.0;
};

struct EpisodeRecord {
  int k = 0;
  int n_fit = 0;
  double lambda = 0.0;
  double est_err_sq = 0.0;  // ||mu_hat - mu0||^2
  int iters = 0;
  bool converged = false;
  bool failed = false;
};

struct RegretTrace {
  std::uint64_t seed = 0;
  std::vector<PeriodRecord> periods;
  std::vector<EpisodeRecord> episodes;

  std::vector<double> cumulative_expected() const;
  std::vector<double> cumulative_realized() const;
};

struct ReplicationHooks {
  // Called once after construction, before the first period; may inject
  // estimates.
  std::function<void(Policy&, const Environment&)> setup;
  // Applied to the copy of each outcome handed to the policy. The trace is
  // always built from the unmodified outcome.
  std::function<void(MarketOutcome&)> outcome_filter;
};

// Everything a replication builds from (config, seed).
struct ReplicationSetup {
  Environment environment;
  std::unique_ptr<Policy> policy;
};

ReplicationSetup build_replication(const ExperimentConfig& config,
                                   std::uint64_t seed);

RegretTrace run_replication(const ExperimentConfig& config, std::uint64_t seed,
                            const ReplicationHooks& hooks = {});

struct EpisodeAggregate {
  int k = 0;
  int n_fit = 0;
  int count = 0;  // replications that reached this fit
  double mean_est_err_sq = 0.0;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;
  // Per period, length T. CI entries are 95% normal half-widths.
  std::vector<double> mean_cum_expected;
  std::vector<double> ci_cum_expected;
  std::vector<double> mean_cum_realized;
  std::vector<double> ci_cum_realized;
  // Per replication, in seed order.
  std::vector<double> final_expected;
  std::vector<double> final_realized;
  std::vector<EpisodeAggregate> episodes;
};

struct ExperimentOptions {
  // 0: PRICELAB_THREADS if set, else hardware concurrency.
  int threads = 0;
  ReplicationHooks hooks;
  // Receives every finished trace (in seed order) before it is discarded.
  std::function<void(const RegretTrace&)> on_trace;
};

int default_thread_count();

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const ExperimentOptions& options = {});

enum class AbscissaKind { kLogT, kLogD, kS0, kRaw };

struct ScalingFit {
  AbscissaKind kind = AbscissaKind::kRaw;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

// Ordinary least squares of y on x; needs >= 3 points and a non-constant x.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points,
                       AbscissaKind kind = AbscissaKind::kRaw);

struct EpisodeRatio {
  int k = 0;  // ratio is error(k + 1) / error(k)
  int n_fit = 0;
  int n_fit_next = 0;
  double ratio = 0.0;
};

std::vector<EpisodeRatio> estimation_error_ratios(
    const ExperimentSummary& summary);

// Mean and 95% normal-approximation half-width.
std::pair<double, double> mean_ci(std::span<const double> values);

std::string_view to_string(AbscissaKind kind);

}  // namespace pricelab
