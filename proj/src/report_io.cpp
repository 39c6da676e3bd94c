/**
 * @file report_io.cpp
 */

#include "sparseport/report_io.hpp"

#include <charconv>
#include <cmath>

namespace sparseport::analytics
{

    namespace
    {
        std::string join(const std::vector<std::string> &fields)
        {
            std::string line;
            for (std::size_t i = 0; i < fields.size(); ++i)
            {
                if (i > 0)
                    line += ',';
                line += fields[i];
            }
            return line;
        }

        std::string flag(bool value) { return value ? "true" : "false"; }
    } // namespace

    std::string format_number(double value)
    {
        if (std::isnan(value))
            return "nan";
        if (std::isinf(value))
            return value > 0 ? "inf" : "-inf";
        char buffer[64];
        const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
        return std::string(buffer, ptr);
    }

    std::string csv_field(const std::string &text)
    {
        if (text.find_first_of(",\"\n\r") == std::string::npos)
            return text;
        std::string quoted = "\"";
        for (char c : text)
        {
            if (c == '"')
                quoted += '"';
            quoted += c;
        }
        return quoted + '"';
    }

    const std::vector<std::string> &report_columns()
    {
        static const std::vector<std::string> columns = {
            "period_label", "n", "m", "tau_f", "outer_iterations", "converged",
            "shorts", "shorts_pct", "actives", "sparsity_pct",
            "risk_optimal", "risk_naive", "risk_ratio",
            "transactions_optimal", "transactions_naive",
            "xi_term_target", "residual_final",
            "n_short_target", "n_act_target", "shorts_excess", "actives_excess", "tau_capped"};
        return columns;
    }

    std::vector<std::string> report_fields(const StrategyReport &r)
    {
        return {csv_field(r.period_label), std::to_string(r.n), std::to_string(r.m), format_number(r.tau_f),
                std::to_string(r.outer_iterations), flag(r.converged),
                std::to_string(r.shorts), format_number(r.shorts_pct), std::to_string(r.actives),
                format_number(r.sparsity_pct),
                format_number(r.risk_optimal), format_number(r.risk_naive), format_number(r.risk_ratio),
                std::to_string(r.transactions_optimal), std::to_string(r.transactions_naive),
                format_number(r.xi_term_target), format_number(r.residual_final),
                std::to_string(r.n_short_target), std::to_string(r.n_act_target),
                std::to_string(r.shorts_excess), std::to_string(r.actives_excess), flag(r.tau_capped)};
    }

    void write_report_csv(const std::vector<StrategyReport> &reports, std::ostream &out)
    {
        out << join(report_columns()) << '\n';
        for (const auto &r : reports)
            out << join(report_fields(r)) << '\n';
    }

    nlohmann::json report_to_json(const StrategyReport &r)
    {
        nlohmann::json j = nlohmann::json::object();
        j["period_label"] = r.period_label;
        j["n"] = r.n;
        j["m"] = r.m;
        j["tau_f"] = r.tau_f;
        j["outer_iterations"] = r.outer_iterations;
        j["converged"] = r.converged;
        j["shorts"] = r.shorts;
        j["shorts_pct"] = r.shorts_pct;
        j["actives"] = r.actives;
        j["sparsity_pct"] = r.sparsity_pct;
        j["risk_optimal"] = r.risk_optimal;
        j["risk_naive"] = r.risk_naive;
        if (std::isfinite(r.risk_ratio))
            j["risk_ratio"] = r.risk_ratio;
        else
            j["risk_ratio"] = nullptr;
        j["risk_ratio_finite"] = r.risk_ratio_finite;
        j["transactions_optimal"] = r.transactions_optimal;
        j["transactions_naive"] = r.transactions_naive;
        j["xi_term_target"] = r.xi_term_target;
        j["residual_final"] = r.residual_final;
        j["n_short_target"] = r.n_short_target;
        j["n_act_target"] = r.n_act_target;
        j["shorts_excess"] = r.shorts_excess;
        j["actives_excess"] = r.actives_excess;
        j["tau_capped"] = r.tau_capped;
        return j;
    }

    void write_report_json(const std::vector<StrategyReport> &reports, std::ostream &out)
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto &r : reports)
            rows.push_back(report_to_json(r));
        out << rows.dump(2) << '\n';
    }

    void write_weights_csv(const WeightTrajectory &w, const std::vector<std::string> &assets,
                           const std::vector<std::string> &period_labels, std::ostream &out)
    {
        if (assets.size() != w.n() || period_labels.size() != w.m())
            throw Error("analytics", "write_weights_csv: labels do not match trajectory shape");
        out << "period";
        for (const auto &a : assets)
            out << ',' << csv_field(a);
        out << '\n';
        for (std::size_t j = 0; j < w.m(); ++j)
        {
            out << csv_field(period_labels[j]);
            for (std::size_t i = 0; i < w.n(); ++i)
                out << ',' << format_number(w(j, i));
            out << '\n';
        }
    }

    std::string diagnostics_header()
    {
        return "k,tau,residual,shorts,actives,inner_iterations,inner_capped,target_violated";
    }

    std::string diagnostics_line(const solver::IterationRecord &r)
    {
        return join({std::to_string(r.k), format_number(r.tau), format_number(r.residual), std::to_string(r.shorts),
                     std::to_string(r.actives), std::to_string(r.inner_iterations), flag(r.inner_capped),
                     flag(r.target_violated)});
    }

} // namespace sparseport::analytics
