#include "pricelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <thread>

#include "pricelab/errors.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

std::vector<double> RegretTrace::cumulative_expected() const {
  std::vector<double> out(periods.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < periods.size(); ++i)
    out[i] = sum += periods[i].expected_regret;
  return out;
}

std::vector<double> RegretTrace::cumulative_realized() const {
  std::vector<double> out(periods.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < periods.size(); ++i)
    out[i] = sum += periods[i].realized_regret;
  return out;
}

ReplicationSetup build_replication(const ExperimentConfig& config,
                                   std::uint64_t seed) {
  config.validate();
  const NoiseModel noise = NoiseModel::from_name(config.noise,
                                                 config.noise_scale);
  const LinkFunction link = LinkFunction::from_name(config.link);
  GroundTruth truth = sample_ground_truth(
      config.d, config.s0, config.W, derive_seed(seed, Stream::kTruth));
  FeatureSampler sampler(config.d,
                         parse_feature_distribution(config.feature_dist),
                         derive_seed(seed, Stream::kFeatures));
  const Benchmark benchmark = config.policy == "dip"
                                  ? Benchmark::kFullInformation
                                  : Benchmark::kKnownDistribution;

  PolicyContext ctx;
  ctx.d = config.d;
  ctx.W = config.W;
  ctx.noise = noise;
  ctx.link = link;
  ctx.mu0 = truth.mu0();
  ctx.c = config.c;
  ctx.delta = config.delta;
  ctx.box = {config.beta_lo, config.beta_hi};
  ctx.lambda_scale = config.lambda_scale;
  ctx.dip_response = config.dip_response == "pm1" ? DipResponse::kPlusMinusOne
                                                   : DipResponse::kZeroOne;
  ctx.seed = derive_seed(seed, Stream::kPolicy);

  Environment env(std::move(truth), std::move(sampler), noise, link,
                  parse_feature_map(config.feature_map),
                  derive_seed(seed, Stream::kNoise), benchmark);
  return {std::move(env), make_policy(config.policy, ctx)};
}

RegretTrace run_replication(const ExperimentConfig& config, std::uint64_t seed,
                            const ReplicationHooks& hooks) {
  ReplicationSetup setup = build_replication(config, seed);
  Environment& env = setup.environment;
  Policy& policy = *setup.policy;
  if (hooks.setup) hooks.setup(policy, env);

  RegretTrace trace;
  trace.seed = seed;
  trace.periods.reserve(static_cast<std::size_t>(config.T));
  for (std::int64_t t = 1; t <= config.T; ++t) {
    const Vector x = env.next_feature();
    const double p = policy.next_price(x);
    const MarketOutcome outcome = env.realize_outcome(x, p);

    PeriodRecord rec;
    rec.t = t;
    rec.episode = policy.episode();
    rec.explore = policy.exploring();
    rec.sale = outcome.sale;
    rec.price = p;
    rec.optimal_price = outcome.optimal_price;
    rec.realized_regret = outcome.realized_regret;
    rec.expected_regret = outcome.expected_regret;
    trace.periods.push_back(rec);

    if (hooks.outcome_filter) {
      MarketOutcome seen = outcome;
      hooks.outcome_filter(seen);
      policy.observe(seen);
    } else {
      policy.observe(outcome);
    }
  }

  const Vector& mu0 = env.mu0();
  for (const FitRecord& fit : policy.fits()) {
    EpisodeRecord e;
    e.k = fit.k;
    e.n_fit = fit.n_fit;
    e.lambda = fit.lambda;
    e.est_err_sq = (fit.mu_hat - mu0).squaredNorm();
    e.iters = fit.iterations;
    e.converged = fit.converged;
    e.failed = fit.failed;
    trace.episodes.push_back(e);
  }
  return trace;
}

int default_thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("PRICELAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

std::pair<double, double> mean_ci(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, 1.959963984540054 * sd / std::sqrt(static_cast<double>(n))};
}

namespace {

struct CompactTrace {
  std::vector<double> cum_expected;
  std::vector<double> cum_realized;
  std::vector<EpisodeRecord> episodes;
};

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const ExperimentOptions& options) {
  config.validate();
  const int R = config.R;
  std::vector<CompactTrace> compact(R);
  std::vector<RegretTrace> full(options.on_trace ? R : 0);
  std::vector<std::exception_ptr> errors(R);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < R; i = next++) {
      try {
        RegretTrace trace =
            run_replication(config, config.base_seed + i, options.hooks);
        compact[i] = {trace.cumulative_expected(), trace.cumulative_realized(),
                      trace.episodes};
        if (options.on_trace) full[i] = std::move(trace);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads =
      std::min(R, options.threads > 0 ? options.threads : default_thread_count());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentSummary summary;
  summary.config = config;
  const auto T = static_cast<std::size_t>(config.T);
  summary.mean_cum_expected.resize(T);
  summary.ci_cum_expected.resize(T);
  summary.mean_cum_realized.resize(T);
  summary.ci_cum_realized.resize(T);
  std::vector<double> column(R);
  for (std::size_t t = 0; t < T; ++t) {
    for (int i = 0; i < R; ++i) column[i] = compact[i].cum_expected[t];
    std::tie(summary.mean_cum_expected[t], summary.ci_cum_expected[t]) =
        mean_ci(column);
    for (int i = 0; i < R; ++i) column[i] = compact[i].cum_realized[t];
    std::tie(summary.mean_cum_realized[t], summary.ci_cum_realized[t]) =
        mean_ci(column);
  }

  std::map<int, EpisodeAggregate> by_k;
  for (int i = 0; i < R; ++i) {
    summary.seeds.push_back(config.base_seed + i);
    summary.final_expected.push_back(compact[i].cum_expected.back());
    summary.final_realized.push_back(compact[i].cum_realized.back());
    for (const EpisodeRecord& e : compact[i].episodes) {
      EpisodeAggregate& agg = by_k[e.k];
      agg.k = e.k;
      agg.n_fit = e.n_fit;
      agg.count += 1;
      agg.mean_est_err_sq += e.est_err_sq;
    }
    if (options.on_trace) options.on_trace(full[i]);
  }
  for (auto& [k, agg] : by_k) {
    agg.mean_est_err_sq /= agg.count;
    summary.episodes.push_back(agg);
  }
  return summary;
}

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points,
                       AbscissaKind kind) {
  if (points.size() < 3)
    throw ArgumentError("fit_scaling: need at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0))
    throw ArgumentError("fit_scaling: abscissa values are all equal");

  ScalingFit fit;
  fit.kind = kind;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points.assign(points.begin(), points.end());
  return fit;
}

std::vector<EpisodeRatio> estimation_error_ratios(
    const ExperimentSummary& summary) {
  std::vector<EpisodeRatio> out;
  const auto& eps = summary.episodes;
  for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
    if (eps[i + 1].k != eps[i].k + 1 || !(eps[i].mean_est_err_sq > 0.0))
      continue;
    out.push_back({eps[i].k, eps[i].n_fit, eps[i + 1].n_fit,
                   eps[i + 1].mean_est_err_sq / eps[i].mean_est_err_sq});
  }
  return out;
}

std::string_view to_string(AbscissaKind kind) {
  switch (kind) {
    case AbscissaKind::kLogT: return "log T";
    case AbscissaKind::kLogD: return "log d";
    case AbscissaKind::kS0: return "s0";
    case AbscissaKind::kRaw: return "raw";
  }
  return "?";
}

}  // namespace pricelab
