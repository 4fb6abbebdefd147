#pragma once

#include <filesystem>

#include "json.hpp"
#include "pricelab/harness.hpp"

namespace pricelab {

// Columns t,episode,price,optimal_price,sale,realized_regret,
// expected_regret,cum_realized,cum_expected.
void write_periods_csv(const RegretTrace& trace,
                       const std::filesystem::path& path);
// Columns k,n_fit,lambda,est_err_sq,iters,converged.
void write_episodes_csv(const RegretTrace& trace,
                        const std::filesystem::path& path);
// rep_<seed>_periods.csv and rep_<seed>_episodes.csv under `dir`.
void write_trace(const RegretTrace& trace, const std::filesystem::path& dir);

// Regret at T' = 2^j for every power of two in [2^4, T], against log2 T'.
// Empty when fewer than three such points exist.
std::optional<ScalingFit> log_t_scaling(const ExperimentSummary& summary);

nlohmann::json summary_to_json(const ExperimentSummary& summary);
nlohmann::json scaling_to_json(const ScalingFit& fit);

// summary.json and aggregate.csv under `dir`.
void write_summary(const ExperimentSummary& summary,
                   const std::filesystem::path& dir);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace pricelab
