// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pricelab/config.hpp"
#include "pricelab/harness.hpp"
#include "pricelab/market_env.hpp"
#include "pricelab/noise_models.hpp"
#include "pricelab/policies.hpp"
#include "pricelab/sparse_mle.hpp"

using namespace pricelab;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Vector random_l1(std::mt19937_64& rng, int D, double l1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(D);
  for (int j = 0; j < D; ++j) v(j) = u(rng);
  return v * (l1 / v.lpNorm<1>());
}

// Features uniform on [-1, 1] plus intercept, prices uniform on [0, price_hi].
Dataset simulate(std::mt19937_64& rng, const Vector& mu, int n,
                 double price_hi, const NoiseModel& noise) {
  const int D = static_cast<int>(mu.size());
  std::uniform_real_distribution<double> feature(-1.0, 1.0);
  std::uniform_real_distribution<double> price(0.0, price_hi);
  Dataset data(D);
  Vector x(D);
  for (int t = 0; t < n; ++t) {
    for (int j = 0; j + 1 < D; ++j) x(j) = feature(rng);
    x(D - 1) = 1.0;
    const double p = price(rng);
    data.add(x, p, mu.dot(x) + noise.sample(rng) >= p ? 1 : -1);
  }
  return data;
}

double sf_of(const NoiseModel& m, double u) {
  return m.family() == NoiseFamily::kLogistic
             ? 1.0 - oracle::logistic_cdf(u, m.scale())
             : 1.0 - oracle::normal_cdf(u, m.scale());
}

Verdict pricing_function() {
  double worst = 0.0;
  for (const double sigma : {0.5, 1.0, 2.0})
    for (const NoiseModel& m :
         {NoiseModel::normal(sigma), NoiseModel::logistic(sigma)})
      for (const double v : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}) {
        const double grid = oracle::grid_argmax_price(
            [&](double u) { return sf_of(m, u); }, v, v + 6.0 * sigma);
        worst = std::max(worst, std::abs(pricing_g(m, v) - grid));
      }
  double worst_exp = 0.0;
  const NoiseModel e = NoiseModel::exponential(1.0);
  for (double v = -3.0; v <= 1.0; v += 0.125)
    worst_exp = std::max(worst_exp, std::abs(pricing_g(e, v) - 1.0));
  return {worst <= 2e-3 && worst_exp <= 1e-8,
          fmt("max |g - grid argmax| = %.3g (tol 2e-3); exponential max "
              "|g - 1| = %.3g (tol 1e-8)",
              worst, worst_exp)};
}

Verdict gradient() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const NoiseModel model =
        rep % 2 ? NoiseModel::normal(0.5 + 0.1 * (rep % 10))
                : NoiseModel::logistic(0.5 + 0.1 * (rep % 10));
    const int D = 1 + (rep % 20) + 1;  // d in 1..20 plus intercept
    const Dataset data = simulate(rng, random_l1(rng, D, 2.0), 50, 4.0, model);
    const Vector mu = random_l1(rng, D, 1.5);
    const Vector g = nll_gradient(mu, data, model);
    const Vector fd = oracle::finite_difference_gradient(
        [&](const Vector& m) { return nll(m, data, model); }, mu, 1e-6);
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  return {worst <= 1e-5,
          fmt("max relative error %.3g over 100 instances (tol 1e-5)", worst)};
}

Verdict solver() {
  std::mt19937_64 rng(202);
  const NoiseModel model = NoiseModel::logistic();
  double worst = 0.0;
  int unconverged = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const int D = rep % 2 ? 3 : 2;  // d = 1 or 2 plus intercept
    SolverConfig cfg;
    cfg.W = 0.6;
    cfg.lambda = (rep / 2) % 2 ? 0.03 : 0.0;
    cfg.tol = 1e-14;
    cfg.kkt_tol = 1e-10;
    cfg.max_iter = 50000;
    const Dataset data =
        simulate(rng, random_l1(rng, D, rep < 5 ? 0.4 : 1.2), 80, 1.5, model);
    const FitResult fit = fit_l1_mle(data, model, cfg);
    unconverged += !fit.converged;
    const Vector brute = oracle::mesh_minimize(
        [&](const Vector& m) {
          return nll(m, data, model) + cfg.lambda * m.lpNorm<1>();
        },
        D, cfg.W, 0.01, D == 2 ? 1e-6 : 1e-5);
    worst = std::max(worst, (fit.mu_hat - brute).lpNorm<Eigen::Infinity>());
  }

  double worst_ls = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int D = 3 + rep;
    const Dataset data = simulate(rng, random_l1(rng, D, 1.5), 120, 2.5,
                                  NoiseModel::uniform(0.2));
    const double K = 2.6;
    const DipResponse response =
        rep % 2 ? DipResponse::kPlusMinusOne : DipResponse::kZeroOne;
    SolverConfig cfg;
    cfg.W = 1e6;
    cfg.tol = 1e-15;
    cfg.kkt_tol = 1e-11;
    cfg.max_iter = 100000;
    const FitResult fit = fit_l1_quadratic(data, K, cfg, response);
    Vector target(data.size());
    for (int t = 0; t < data.size(); ++t) {
      const int y = data.labels()[t];
      target(t) = response == DipResponse::kZeroOne ? K * (y + 1) / 2.0 : K * y;
    }
    const Vector ls = oracle::least_squares(data.design(), target);
    worst_ls = std::max(worst_ls, (fit.mu_hat - ls).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 2e-3 && worst_ls <= 1e-6 && unconverged == 0,
          fmt("MLE vs mesh max err %.3g (tol 2e-3), %d unconverged; "
              "quadratic vs least squares max err %.3g (tol 1e-6)",
              worst, unconverged, worst_ls)};
}

ExperimentConfig rmlp_setting() {
  ExperimentConfig cfg;
  cfg.policy = "rmlp";
  cfg.noise = "logistic";
  cfg.feature_dist = "uniform_pm1";
  cfg.d = 100;
  cfg.s0 = 5;
  cfg.W = 5.0;
  cfg.R = 20;
  cfg.base_seed = 1;
  return cfg;
}

// The 20-seed RMLP run at T = 2^17, shared by the estimation and regret
// criteria.
const ExperimentSummary& rmlp_run() {
  static const ExperimentSummary summary = [] {
    ExperimentConfig cfg = rmlp_setting();
    cfg.T = std::int64_t{1} << 17;
    return run_experiment(cfg);
  }();
  return summary;
}

Verdict estimation_error() {
  const ExperimentConfig cfg = rmlp_setting();
  const NoiseModel model = NoiseModel::logistic();
  const double u_W = steepness_constants(model, cfg.W).u_W;
  auto mean_error = [&](int n) {
    double sum = 0.0;
    for (int r = 0; r < cfg.R; ++r) {
      const std::uint64_t seed = cfg.base_seed + r;
      const GroundTruth truth = sample_ground_truth(cfg.d, cfg.s0, cfg.W, seed);
      const Vector mu0 = truth.mu0();
      FeatureSampler sampler(cfg.d, FeatureDistribution::kUniformPm1,
                             derive_seed(seed, Stream::kFeatures));
      Rng rng(derive_seed(seed, Stream::kNoise));
      Dataset data(cfg.d + 1);
      Vector x(cfg.d + 1);
      for (int t = 0; t < n; ++t) {
        sampler.sample(x.head(cfg.d));
        x(cfg.d) = 1.0;
        const double p = uniform(rng, 0.0, 2.0 * cfg.W);
        data.add(x, p, mu0.dot(x) + model.sample(rng) >= p ? 1 : -1);
      }
      SolverConfig solver;
      solver.W = cfg.W;
      solver.lambda = 4.0 * u_W * std::sqrt(std::log(cfg.d) / n);
      sum += (fit_l1_mle(data, model, solver).mu_hat - mu0).squaredNorm();
    }
    return sum / cfg.R;
  };
  const double e1024 = mean_error(1024);
  const double e4096 = mean_error(4096);
  const bool direct_ok = e4096 <= 0.6 * e1024;

  const std::vector<EpisodeRatio> ratios = estimation_error_ratios(rmlp_run());
  int checked = 0;
  int outside = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const EpisodeRatio& r : ratios) {
    if (r.n_fit < 512) continue;
    ++checked;
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    outside += r.ratio < 0.3 || r.ratio > 0.8;
  }
  return {direct_ok && checked > 0 && outside == 0,
          fmt("mean err^2 n=1024 %.4g, n=4096 %.4g, ratio %.3f (need <= 0.6); "
              "RMLP episode ratios with n_fit >= 512: %d checked, %d outside "
              "[0.3, 0.8], range [%.3f, %.3f]",
              e1024, e4096, e4096 / e1024, checked, outside, lo, hi)};
}

Verdict log_regret() {
  const ExperimentSummary& s = rmlp_run();
  std::vector<std::pair<double, double>> points;
  for (int e = 10; e <= 17; ++e)
    points.emplace_back(e, s.mean_cum_expected[(std::size_t{1} << e) - 1]);
  const ScalingFit fit = fit_scaling(points, AbscissaKind::kLogT);
  const double growth = points.back().second / points[3].second;
  return {fit.r_squared >= 0.9 && growth <= 2.5,
          fmt("R^2 vs log2 T = %.4f (need >= 0.9); regret(2^17)/regret(2^13) "
              "= %.3f (need <= 2.5); regret(2^10) %.2f, regret(2^17) %.2f",
              fit.r_squared, growth, points.front().second,
              points.back().second)};
}

Verdict ablation() {
  ExperimentConfig cfg = rmlp_setting();
  cfg.d = 200;
  cfg.T = std::int64_t{1} << 12;
  const ExperimentSummary reg = run_experiment(cfg);
  cfg.policy = "mle_unreg";
  const ExperimentSummary unreg = run_experiment(cfg);
  std::vector<double> diff;
  for (std::size_t i = 0; i < reg.final_expected.size(); ++i)
    diff.push_back(unreg.final_expected[i] - reg.final_expected[i]);
  const auto [mean_diff, half] = oracle::mean_ci95(diff);
  const double m_reg = oracle::mean_ci95(reg.final_expected).first;
  const double m_unreg = oracle::mean_ci95(unreg.final_expected).first;
  return {m_reg < m_unreg && mean_diff - half > 0.0,
          fmt("rmlp %.2f vs mle_unreg %.2f; paired difference %.2f +- %.2f",
              m_reg, m_unreg, mean_diff, half)};
}

Verdict rmlp2_sublinear() {
  ExperimentConfig cfg = rmlp_setting();
  cfg.policy = "rmlp2";
  cfg.noise_scale = 2.0;
  cfg.d = 50;
  cfg.T = std::int64_t{1} << 14;
  const ExperimentSummary s = run_experiment(cfg);
  const double at_T = s.mean_cum_expected[(1 << 12) - 1];
  const double at_4T = s.mean_cum_expected[(1 << 14) - 1];
  return {at_4T / at_T <= 2.7,
          fmt("regret(2^14)/regret(2^12) = %.3f (need <= 2.7); %.2f / %.2f",
              at_4T / at_T, at_4T, at_T)};
}

ExperimentConfig dip_setting() {
  ExperimentConfig cfg = rmlp_setting();
  cfg.policy = "dip";
  cfg.noise = "uniform";
  cfg.noise_scale = 0.1;
  cfg.delta = 0.1;
  cfg.c = 5;
  cfg.d = 50;
  cfg.T = std::int64_t{1} << 12;
  return cfg;
}

Verdict dip_bounds() {
  ExperimentConfig cfg = dip_setting();
  const double delta = cfg.delta;

  ReplicationHooks inject;
  inject.setup = [](Policy& p, const Environment& env) {
    dynamic_cast<DipPolicy&>(p).inject_estimate(env.mu0());
  };
  long exploit = 0;
  long no_sale = 0;
  long no_sale_at_zero = 0;
  long over = 0;
  double worst = 0.0;
  for (int r = 0; r < cfg.R; ++r) {
    const RegretTrace trace = run_replication(cfg, cfg.base_seed + r, inject);
    for (const PeriodRecord& p : trace.periods) {
      if (p.explore) continue;
      ++exploit;
      if (p.sale != 1) {
        ++no_sale;
        no_sale_at_zero += p.price == 0.0;
      }
      over += p.expected_regret > 4.0 * delta;
      worst = std::max(worst, p.expected_regret);
    }
  }
  const bool a_ok = no_sale == 0 && over == 0;

  std::vector<double> final_cycle;
  ExperimentOptions options;
  options.on_trace = [&](const RegretTrace& trace) {
    const int last = trace.periods.back().episode;
    double sum = 0.0;
    int n = 0;
    for (const PeriodRecord& p : trace.periods)
      if (p.episode == last && !p.explore) {
        sum += p.expected_regret;
        ++n;
      }
    if (n > 0) final_cycle.push_back(sum / n);
  };
  options.threads = 1;
  run_experiment(cfg, options);
  const double mean_final = oracle::mean_ci95(final_cycle).first;
  const bool b_ok = final_cycle.size() == static_cast<std::size_t>(cfg.R) &&
                    mean_final <= 6.0 * delta;
  return {a_ok && b_ok,
          fmt("(a) %s: %ld exploitation periods, %ld without a sale (%ld of "
              "them at the clamped price 0), %ld with regret > 4 delta, max "
              "%.4f; (b) %s: final-cycle mean exploitation regret %.4f (need "
              "<= %.2f)",
              a_ok ? "pass" : "fail", exploit, no_sale, no_sale_at_zero, over,
              worst, b_ok ? "pass" : "fail", mean_final, 6.0 * delta)};
}

Verdict hygiene() {
  std::vector<std::string> failing;
  int runs = 0;
  for (const std::string id : {"rmlp", "rmlp_nonlinear", "rmlp2", "dip",
                               "clairvoyant", "fixed:2.5", "mle_unreg"}) {
    ExperimentConfig cfg = id == "dip" ? dip_setting() : rmlp_setting();
    cfg.policy = id;
    cfg.T = std::int64_t{1} << 12;
    if (id == "rmlp_nonlinear") {
      cfg.link = "exp";
      cfg.noise = "normal";
      cfg.W = 1.0;
    }
    std::mt19937_64 rng(99);
    std::normal_distribution<double> junk(0.0, 50.0);
    ReplicationHooks fuzz;
    fuzz.outcome_filter = [&](MarketOutcome& o) {
      o.valuation = junk(rng);
      o.noise = junk(rng);
      o.optimal_price = junk(rng);
      o.realized_regret = junk(rng);
      o.expected_regret = junk(rng);
    };
    const RegretTrace plain = run_replication(cfg, 5);
    const RegretTrace fuzzed = run_replication(cfg, 5, fuzz);
    bool same = plain.periods.size() == fuzzed.periods.size();
    for (std::size_t t = 0; same && t < plain.periods.size(); ++t)
      same = plain.periods[t].price == fuzzed.periods[t].price;
    if (!same) failing.push_back(id);
    ++runs;
  }
  std::string detail = fmt("%d policies fuzzed over T=4096", runs);
  for (const std::string& id : failing) detail += "; prices changed: " + id;
  return {failing.empty(), detail};
}

Verdict distributions() {
  double worst = -std::numeric_limits<double>::infinity();
  long decreasing = 0;
  for (const NoiseModel& m :
       {NoiseModel::normal(1.0), NoiseModel::logistic(1.0),
        NoiseModel::exponential(1.0), NoiseModel::uniform(1.0),
        NoiseModel::normal(2.0), NoiseModel::logistic(0.5),
        NoiseModel::exponential(0.3), NoiseModel::uniform(0.1)}) {
    const double lo = std::max(m.support_lower(), -8.0 * m.scale()) + 1e-3 * m.scale();
    const double hi = std::min(m.support_upper(), 8.0 * m.scale()) - 1e-3 * m.scale();
    const double h = (hi - lo) / 2000.0;
    for (const auto& f : std::vector<std::function<double(double)>>{
             [&](double x) { return m.pdf(x); },
             [&](double x) { return m.cdf(x); },
             [&](double x) { return m.sf(x); }})
      worst = std::max(worst, oracle::max_log_second_difference(f, lo, hi, h));
    double prev = -1.0;
    for (double x = lo - 2.0 * m.scale(); x <= hi + 2.0 * m.scale(); x += h) {
      const double F = m.cdf(x);
      decreasing += F < prev || F < 0.0 || F > 1.0;
      prev = F;
    }
  }
  for (const LinkFunction& link :
       {LinkFunction::identity(), LinkFunction::exp()}) {
    worst = std::max(worst, oracle::max_log_second_difference(
                                [&](double v) { return link.psi(v); }, 0.01,
                                10.0, 1e-2));
    double prev = -std::numeric_limits<double>::infinity();
    for (double v = -5.0; v <= 5.0; v += 1e-2) {
      decreasing += link.psi(v) <= prev;
      prev = link.psi(v);
    }
  }
  return {worst <= 1e-8 && decreasing == 0,
          fmt("max log second difference %.3g (tol 1e-8); %ld monotonicity "
              "violations",
              worst, decreasing)};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "pricing function oracle", pricing_function},
      {2, "gradient correctness", gradient},
      {3, "solver oracle", solver},
      {4, "estimation error scaling", estimation_error},
      {5, "RMLP logarithmic regret", log_regret},
      {6, "regularization ablation", ablation},
      {7, "RMLP-2 sublinear regret", rmlp2_sublinear},
      {8, "DIP bounds", dip_bounds},
      {9, "policy hygiene", hygiene},
      {10, "distribution validity", distributions},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    failed += !v.passed;
    std::printf("criterion %d %s %s: %s [%.1fs]\n", c.number,
                v.passed ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
