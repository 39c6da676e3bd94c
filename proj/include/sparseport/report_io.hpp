/**
 * @file report_io.hpp
 * @brief CSV/JSON serialisation of reports, weight trajectories and
 *        per-iteration diagnostics.
 *
 * Doubles are written in shortest round-trip form so output is stable
 * across runs and parses back to the same bits.
 */

#pragma once

#include "sparseport/analytics.hpp"
#include "sparseport/solver.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace sparseport::analytics
{

    /// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
    std::string format_number(double value);

    /// RFC 4180 quoting when the field contains a comma, quote or newline.
    std::string csv_field(const std::string &text);

    const std::vector<std::string> &report_columns();
    std::vector<std::string> report_fields(const StrategyReport &report);

    void write_report_csv(const std::vector<StrategyReport> &reports, std::ostream &out);

    /// Field names as in StrategyReport; a non-finite risk_ratio becomes null.
    nlohmann::json report_to_json(const StrategyReport &report);
    void write_report_json(const std::vector<StrategyReport> &reports, std::ostream &out);

    /// One row per period: `period,<asset1>,...`.
    void write_weights_csv(const WeightTrajectory &w, const std::vector<std::string> &assets,
                           const std::vector<std::string> &period_labels, std::ostream &out);

    std::string diagnostics_header();
    std::string diagnostics_line(const solver::IterationRecord &record);

} // namespace sparseport::analytics
