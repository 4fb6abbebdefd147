#include "pricelab/persist.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "pricelab/errors.hpp"

namespace pricelab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory '" +
                    path.parent_path().string() + "': " + ec.message());
  }
  File f(std::fopen(path.c_str(), "w"));
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  return f;
}

void finish(File& f, const fs::path& path) {
  if (std::ferror(f.get()) || std::fclose(f.release()) != 0)
    throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

void write_periods_csv(const RegretTrace& trace, const fs::path& path) {
  File f = open_for_write(path);
  std::fputs(
      "t,episode,price,optimal_price,sale,realized_regret,expected_regret,"
      "cum_realized,cum_expected\n",
      f.get());
  double cum_realized = 0.0;
  double cum_expected = 0.0;
  for (const PeriodRecord& r : trace.periods) {
    cum_realized += r.realized_regret;
    cum_expected += r.expected_regret;
    std::fprintf(f.get(), "%lld,%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n",
                 static_cast<long long>(r.t), r.episode, r.price,
                 r.optimal_price, r.sale, r.realized_regret,
                 r.expected_regret, cum_realized, cum_expected);
  }
  finish(f, path);
}

void write_episodes_csv(const RegretTrace& trace, const fs::path& path) {
  File f = open_for_write(path);
  std::fputs("k,n_fit,lambda,est_err_sq,iters,converged\n", f.get());
  for (const EpisodeRecord& e : trace.episodes)
    std::fprintf(f.get(), "%d,%d,%.17g,%.17g,%d,%d\n", e.k, e.n_fit, e.lambda,
                 e.est_err_sq, e.iters, e.converged ? 1 : 0);
  finish(f, path);
}

void write_trace(const RegretTrace& trace, const fs::path& dir) {
  const std::string stem = "rep_" + std::to_string(trace.seed);
  write_periods_csv(trace, dir / (stem + "_periods.csv"));
  write_episodes_csv(trace, dir / (stem + "_episodes.csv"));
}

std::optional<ScalingFit> log_t_scaling(const ExperimentSummary& summary) {
  std::vector<std::pair<double, double>> points;
  const auto T = static_cast<std::int64_t>(summary.mean_cum_expected.size());
  for (int j = 4; (std::int64_t{1} << j) <= T; ++j)
    points.emplace_back(j, summary.mean_cum_expected[(std::size_t{1} << j) - 1]);
  if (points.size() < 3) return std::nullopt;
  return fit_scaling(points, AbscissaKind::kLogT);
}

json scaling_to_json(const ScalingFit& fit) {
  json pts = json::array();
  for (const auto& [x, y] : fit.points) pts.push_back({x, y});
  return {{"abscissa", to_string(fit.kind)},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points", pts}};
}

json summary_to_json(const ExperimentSummary& s) {
  const auto [mean_e, ci_e] = mean_ci(s.final_expected);
  const auto [mean_r, ci_r] = mean_ci(s.final_realized);
  json episodes = json::array();
  for (const EpisodeAggregate& e : s.episodes)
    episodes.push_back({{"k", e.k},
                        {"n_fit", e.n_fit},
                        {"count", e.count},
                        {"mean_est_err_sq", e.mean_est_err_sq}});
  json ratios = json::array();
  for (const EpisodeRatio& r : estimation_error_ratios(s))
    ratios.push_back({{"k", r.k},
                      {"n_fit", r.n_fit},
                      {"n_fit_next", r.n_fit_next},
                      {"ratio", r.ratio}});
  json doc = {{"config", s.config.to_json()},
              {"seeds", s.seeds},
              {"T", s.mean_cum_expected.size()},
              {"final_cum_expected", {{"mean", mean_e}, {"ci95", ci_e}}},
              {"final_cum_realized", {{"mean", mean_r}, {"ci95", ci_r}}},
              {"per_seed_cum_expected", s.final_expected},
              {"per_seed_cum_realized", s.final_realized},
              {"episodes", episodes},
              {"estimation_error_ratios", ratios}};
  if (auto fit = log_t_scaling(s)) doc["scaling_log_T"] = scaling_to_json(*fit);
  return doc;
}

void write_json(const json& doc, const fs::path& path) {
  File f = open_for_write(path);
  const std::string text = doc.dump(2) + "\n";
  std::fputs(text.c_str(), f.get());
  finish(f, path);
}

void write_summary(const ExperimentSummary& s, const fs::path& dir) {
  write_json(summary_to_json(s), dir / "summary.json");
  const fs::path path = dir / "aggregate.csv";
  File f = open_for_write(path);
  std::fputs(
      "t,mean_cum_expected,ci95_cum_expected,mean_cum_realized,"
      "ci95_cum_realized\n",
      f.get());
  for (std::size_t i = 0; i < s.mean_cum_expected.size(); ++i)
    std::fprintf(f.get(), "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                 s.mean_cum_expected[i], s.ci_cum_expected[i],
                 s.mean_cum_realized[i], s.ci_cum_realized[i]);
  finish(f, path);
}

}  // namespace pricelab
