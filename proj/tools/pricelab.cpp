#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pricelab/checks.hpp"
#include "pricelab/config.hpp"
#include "pricelab/errors.hpp"
#include "pricelab/harness.hpp"
#include "pricelab/persist.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pricelab;

namespace {

ExperimentSummary run_and_persist(const ExperimentConfig& config, int threads) {
  ExperimentOptions options;
  options.threads = threads;
  if (!config.output.empty() && config.persist_traces) {
    const fs::path dir = config.output;
    options.on_trace = [dir](const RegretTrace& trace) {
      write_trace(trace, dir);
    };
  }
  ExperimentSummary summary = run_experiment(config, options);
  if (!config.output.empty()) write_summary(summary, config.output);
  return summary;
}

json brief(const ExperimentSummary& summary) {
  json doc = summary_to_json(summary);
  doc.erase("per_seed_cum_realized");
  return doc;
}

int cmd_run(const std::string& path, int threads) {
  const ExperimentConfig config = ExperimentConfig::load(path);
  config.validate();
  std::cout << brief(run_and_persist(config, threads)).dump(2) << "\n";
  return 0;
}

AbscissaKind abscissa_for(const std::string& key) {
  if (key == "T") return AbscissaKind::kLogT;
  if (key == "d") return AbscissaKind::kLogD;
  if (key == "s0") return AbscissaKind::kS0;
  return AbscissaKind::kRaw;
}

int cmd_sweep(const std::string& path, const std::string& vary, int threads) {
  const ExperimentConfig base = ExperimentConfig::load(path);
  const auto eq = vary.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == vary.size())
    throw ConfigError("--vary expects KEY=v1,v2,...");
  const std::string key = vary.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream list(vary.substr(eq + 1));
  for (std::string v; std::getline(list, v, ',');)
    if (!v.empty()) values.push_back(v);

  // Validate every grid point before simulating any of them.
  std::vector<ExperimentConfig> grid;
  for (const std::string& v : values) {
    ExperimentConfig cfg = base;
    set_config_field(cfg, key, v);
    if (!base.output.empty())
      cfg.output = (fs::path(base.output) / (key + "=" + v)).string();
    cfg.validate();
    grid.push_back(cfg);
  }

  const AbscissaKind kind = abscissa_for(key);
  json points = json::array();
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ExperimentSummary s = run_and_persist(grid[i], threads);
    const auto [mean, ci] = mean_ci(s.final_expected);
    const json value = grid[i].to_json()[key];
    points.push_back({{key, value}, {"mean_cum_expected", mean}, {"ci95", ci}});
    if (value.is_number()) {
      const double x = value.get<double>();
      const double a = kind == AbscissaKind::kLogT   ? std::log2(x)
                       : kind == AbscissaKind::kLogD ? std::log(x)
                                                     : x;
      xy.emplace_back(a, mean);
    }
  }
  json report = {{"vary", key}, {"points", points}};
  if (xy.size() >= 3) {
    try {
      report["scaling_fit"] = scaling_to_json(fit_scaling(xy, kind));
    } catch (const ArgumentError& e) {
      report["scaling_fit_error"] = e.what();
    }
  }
  if (!base.output.empty())
    write_json(report, fs::path(base.output) / "sweep_report.json");
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_selftest() {
  bool ok = true;
  for (const CheckResult& r : run_selftest()) {
    std::printf("%s  %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-based dynamic pricing simulator"};
  app.require_subcommand(1);
  int threads = 0;
  std::string config_path;
  std::string vary;

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--threads", threads, "worker threads (0: automatic)");

  CLI::App* sweep = app.add_subcommand("sweep", "run a one-parameter grid");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--vary", vary, "KEY=v1,v2,...")->required();
  sweep->add_option("--threads", threads, "worker threads (0: automatic)");

  app.add_subcommand("selftest", "run the numerical self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, threads);
    if (sweep->parsed()) return cmd_sweep(config_path, vary, threads);
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
