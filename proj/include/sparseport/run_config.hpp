/**
 * @file run_config.hpp
 * @brief JSON run configuration for the command-line front end.
 *
 * Schema (every key optional except data.path and a rebalance schedule):
 *
 *   {
 *     "label": "ff48-10y",
 *     "data": {"path": "ff48.csv", "format": "csv_wide", "returns_unit": "percent",
 *              "missing_sentinel": -99.99, "screen_keep": 96},
 *     "estimation": {"rebalance_dates": ["2005-07", ...]            // or
 *                    "schedule": {"first": "2005-07", "periods": 10, "step": 12},
 *                    "lookback_window": 120, "estimator": "sample_mean_cov",
 *                    "horizon": 1, "jitter_floor": 1e-10},
 *     "investment": {"xi_init": 1, "xi_term_mode": "naive" | "explicit", "xi_term_value": 1.1},
 *     "targets": {"n_act": {"fraction": 0.3}, "n_short": {"absolute": 0}},
 *     "solver": {"lambda": 1, "tau0": 1e-5, ..., "rescale": "exact", "update": "prox_certificate"},
 *     "output": {"report_path": "...", "weights_path": "...", "diagnostics_path": "...",
 *                "effective_config_path": "...", "format": "csv" | "json"}
 *   }
 *
 * Relative paths are resolved against the directory holding the config file.
 */

#pragma once

#include "sparseport/market_data.hpp"
#include "sparseport/solver.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sparseport::cli
{

    struct DataSection
    {
        std::filesystem::path path;
        data::CsvFormat format = data::CsvFormat::csv_wide;
        data::ReturnsUnit returns_unit = data::ReturnsUnit::fraction;
        double missing_sentinel = -99.99;
        /// Keep only this many lowest-volatility assets.
        std::optional<std::size_t> screen_keep;
    };

    /// `periods` rebalance dates, `step` table rows apart, starting at `first`.
    struct Schedule
    {
        std::string first;
        std::size_t periods = 0;
        std::size_t step = 1;
    };

    struct EstimationSection
    {
        std::vector<std::string> rebalance_dates;
        std::optional<Schedule> schedule;
        std::size_t lookback_window = 120;
        data::Estimator estimator = data::Estimator::sample_mean_cov;
        double horizon = 1.0;
        double jitter_floor = 1e-10;
    };

    enum class XiTermMode
    {
        naive,
        explicit_value,
    };

    struct InvestmentSection
    {
        double xi_init = 1.0;
        XiTermMode xi_term_mode = XiTermMode::naive;
        std::optional<double> xi_term_value;
    };

    /// Exactly one of `fraction` (of N, rounded down) or `absolute`.
    struct CountTarget
    {
        std::optional<double> fraction;
        std::optional<std::size_t> absolute;

        std::size_t resolve(std::size_t dimension) const;
    };

    struct TargetsSection
    {
        CountTarget n_act{1.0, std::nullopt};
        CountTarget n_short{1.0, std::nullopt};

        solver::Targets resolve(std::size_t dimension) const;
    };

    enum class OutputFormat
    {
        csv,
        json,
    };

    struct OutputSection
    {
        std::optional<std::filesystem::path> report_path;
        std::optional<std::filesystem::path> weights_path;
        std::optional<std::filesystem::path> diagnostics_path;
        std::optional<std::filesystem::path> effective_config_path;
        OutputFormat format = OutputFormat::csv;
    };

    struct RunConfig
    {
        std::string label = "run";
        DataSection data;
        EstimationSection estimation;
        InvestmentSection investment;
        TargetsSection targets;
        solver::SolverConfig solver;
        OutputSection output;

        /// Unknown keys and wrongly typed values are errors.
        static RunConfig from_json(const nlohmann::json &doc, const std::filesystem::path &base_dir);

        /// Effective configuration with every default filled in and paths
        /// made absolute; from_json(to_json()) reproduces *this.
        nlohmann::json to_json() const;

        void validate() const;
    };

    /// Sets a dotted key (`solver.theta=1`) inside `doc`. The value is read
    /// as JSON when it parses, otherwise as a string.
    void apply_override(nlohmann::json &doc, const std::string &assignment);

    RunConfig load_run_config(const std::filesystem::path &path, const std::vector<std::string> &overrides = {});

} // namespace sparseport::cli
