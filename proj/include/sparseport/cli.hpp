/**
 * @file cli.hpp
 * @brief Run pipeline behind the `solve` and `compare` commands.
 */

#pragma once

#include "sparseport/analytics.hpp"
#include "sparseport/market_data.hpp"
#include "sparseport/problem.hpp"
#include "sparseport/run_config.hpp"
#include "sparseport/solver.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sparseport::cli
{

    enum ExitCode : int
    {
        kSuccess = 0,
        kError = 1,
        kNotConverged = 2,
    };

    /// Everything up to (not including) the solve.
    struct PreparedRun
    {
        data::ReturnsTable table; ///< after screening
        std::size_t dropped_rows = 0;
        std::vector<data::Date> rebalance_dates;
        problem::MultiPeriodProblem problem;
        solver::Targets targets;
    };

    /// Load, screen, estimate and assemble.
    PreparedRun prepare_run(const RunConfig &config);

    /// Rebalance dates from an explicit list or a schedule over the table's rows.
    std::vector<data::Date> resolve_rebalance_dates(const EstimationSection &estimation, const data::ReturnsTable &table);

    struct RunOutcome
    {
        std::string label;
        std::optional<analytics::StrategyReport> report;
        std::string error;
        int exit_code = kError;
    };

    /// Full pipeline for one config, writing its configured artifacts.
    /// Diagnostics and repair notices go to `log` when given. Never throws;
    /// failures come back in the outcome.
    RunOutcome execute_run(const RunConfig &config, std::ostream *log);

    /// Report goes to `out` when the config names no report_path.
    int cmd_solve(const RunConfig &config, std::ostream &out, std::ostream &err);

    struct CompareOptions
    {
        std::optional<std::filesystem::path> output_path;
        OutputFormat format = OutputFormat::csv;
        bool parallel = true;
    };

    /// Runs every config (concurrently unless disabled) and writes one
    /// combined table in config order. Exit code is the worst of the runs.
    int cmd_compare(const std::vector<RunConfig> &configs, const CompareOptions &options,
                    std::ostream &out, std::ostream &err);

} // namespace sparseport::cli
