/**
 * @file cli.cpp
 */

#include "sparseport/cli.hpp"

#include "sparseport/report_io.hpp"

#include <fstream>
#include <future>
#include <sstream>

namespace sparseport::cli
{

    namespace
    {
        namespace fs = std::filesystem;

        [[noreturn]] void fail(const std::string &message)
        {
            throw Error("cli", message);
        }

        std::ofstream open_output(const fs::path &path)
        {
            if (path.has_parent_path())
                fs::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                fail("cannot open '" + path.string() + "' for writing");
            return out;
        }

        void write_file(const fs::path &path, const std::string &content)
        {
            std::ofstream out = open_output(path);
            out << content;
            if (!out)
                fail("failed writing '" + path.string() + "'");
        }

        std::string render_reports(const std::vector<analytics::StrategyReport> &reports, OutputFormat format)
        {
            std::ostringstream s;
            if (format == OutputFormat::json)
                analytics::write_report_json(reports, s);
            else
                analytics::write_report_csv(reports, s);
            return s.str();
        }

        const char *status_of(const RunOutcome &o)
        {
            if (!o.report)
                return "error";
            return o.exit_code == kSuccess ? "converged" : "not_converged";
        }
    } // namespace

    std::vector<data::Date> resolve_rebalance_dates(const EstimationSection &estimation, const data::ReturnsTable &table)
    {
        std::vector<data::Date> dates;
        if (!estimation.rebalance_dates.empty())
        {
            for (const auto &d : estimation.rebalance_dates)
                dates.push_back(data::Date::parse(d));
            return dates;
        }
        if (!estimation.schedule)
            fail("no rebalance dates configured");
        const Schedule &s = *estimation.schedule;
        const data::Date first = data::Date::parse(s.first);
        const std::ptrdiff_t start = table.index_of(first);
        if (start < 0)
            fail("schedule start " + first.to_string() + " is not a date in the returns table");
        for (std::size_t k = 0; k < s.periods; ++k)
        {
            const std::size_t row = static_cast<std::size_t>(start) + k * s.step;
            if (row >= table.rows())
                fail("schedule runs past the end of the returns table (period " + std::to_string(k + 1) + " of " +
                     std::to_string(s.periods) + ")");
            dates.push_back(table.dates[row]);
        }
        return dates;
    }

    PreparedRun prepare_run(const RunConfig &config)
    {
        config.validate();
        data::LoadOptions load;
        load.format = config.data.format;
        load.unit = config.data.returns_unit;
        load.missing_sentinel = config.data.missing_sentinel;
        data::LoadResult loaded = data::load_returns(config.data.path, load);

        data::ReturnsTable table = std::move(loaded.table);
        if (config.data.screen_keep)
        {
            if (*config.data.screen_keep > table.cols())
                fail("data.screen_keep (" + std::to_string(*config.data.screen_keep) + ") exceeds the " +
                     std::to_string(table.cols()) + " available assets");
            table = data::screen_volatility(table, *config.data.screen_keep);
        }

        data::EstimationSpec spec;
        spec.rebalance_dates = resolve_rebalance_dates(config.estimation, table);
        spec.lookback_window = config.estimation.lookback_window;
        spec.estimator = config.estimation.estimator;
        spec.horizon = config.estimation.horizon;
        spec.jitter_floor = config.estimation.jitter_floor;
        data::MarketModel model = data::estimate_model(table, spec);

        const double xi_init = config.investment.xi_init;
        const double xi_term = config.investment.xi_term_mode == XiTermMode::naive
                                   ? analytics::naive_wealth(model, xi_init)
                                   : *config.investment.xi_term_value;
        problem::MultiPeriodProblem problem(std::move(model), xi_init, xi_term);
        const solver::Targets targets = config.targets.resolve(problem.dimension());
        return PreparedRun{std::move(table), loaded.dropped_rows, spec.rebalance_dates, std::move(problem), targets};
    }

    RunOutcome execute_run(const RunConfig &config, std::ostream *log)
    {
        RunOutcome outcome;
        outcome.label = config.label;
        try
        {
            PreparedRun run = prepare_run(config);
            if (log)
            {
                if (run.dropped_rows > 0)
                    *log << "market_data: dropped " << run.dropped_rows << " rows with missing values\n";
                const auto &jitter = run.problem.model().jitter;
                for (std::size_t j = 0; j < jitter.size(); ++j)
                    if (jitter[j] > 0.0)
                        *log << "market_data: covariance for " << run.rebalance_dates[j].to_string()
                             << " repaired with delta=" << analytics::format_number(jitter[j]) << '\n';
            }

            std::optional<std::ofstream> diagnostics;
            if (config.output.diagnostics_path)
            {
                diagnostics.emplace(open_output(*config.output.diagnostics_path));
                *diagnostics << analytics::diagnostics_header() << '\n';
                diagnostics->flush();
            }
            solver::SolveHooks hooks;
            hooks.progress = [&](const solver::IterationRecord &r)
            {
                if (diagnostics)
                {
                    *diagnostics << analytics::diagnostics_line(r) << '\n';
                    diagnostics->flush();
                }
                if (log && r.inner_capped)
                    *log << "solver: inner iteration cap hit at outer iteration " << r.k << '\n';
            };

            const solver::SolveResult result = solver::bregman_solve(run.problem, run.targets, config.solver, hooks);
            analytics::ReportOptions report_options;
            report_options.zero_tol = config.solver.zero_tol;
            const analytics::StrategyReport report =
                analytics::build_report(run.problem, result, run.targets, config.solver, config.label, report_options);

            if (config.output.effective_config_path)
                write_file(*config.output.effective_config_path, config.to_json().dump(2) + "\n");
            if (config.output.report_path)
                write_file(*config.output.report_path, render_reports({report}, config.output.format));
            if (config.output.weights_path)
            {
                std::vector<std::string> periods;
                for (const auto &d : run.rebalance_dates)
                    periods.push_back(d.to_string());
                std::ostringstream s;
                analytics::write_weights_csv(result.w, run.table.assets, periods, s);
                write_file(*config.output.weights_path, s.str());
            }

            outcome.report = report;
            outcome.exit_code = result.converged ? kSuccess : kNotConverged;
        }
        catch (const std::exception &e)
        {
            outcome.report.reset();
            outcome.error = e.what();
            outcome.exit_code = kError;
        }
        return outcome;
    }

    int cmd_solve(const RunConfig &config, std::ostream &out, std::ostream &err)
    {
        const RunOutcome outcome = execute_run(config, &err);
        if (!outcome.report)
        {
            err << "error: " << outcome.error << '\n';
            return kError;
        }
        const auto &r = *outcome.report;
        if (!config.output.report_path)
            out << render_reports({r}, config.output.format);
        err << r.period_label << ": " << (r.converged ? "converged" : "not converged") << " after "
            << r.outer_iterations << " outer iterations, residual " << analytics::format_number(r.residual_final)
            << ", tau_f " << analytics::format_number(r.tau_f) << '\n';
        if (r.tau_capped)
            err << r.period_label << ": tau reached tau_max with targets missed by " << r.actives_excess
                << " actives and " << r.shorts_excess << " shorts\n";
        return outcome.exit_code;
    }

    int cmd_compare(const std::vector<RunConfig> &configs, const CompareOptions &options,
                    std::ostream &out, std::ostream &err)
    {
        if (configs.empty())
            fail("compare needs at least one config");

        std::vector<RunOutcome> outcomes;
        if (options.parallel)
        {
            std::vector<std::future<RunOutcome>> pending;
            for (const auto &c : configs)
                pending.push_back(std::async(std::launch::async, [&c]
                                             { return execute_run(c, nullptr); }));
            for (auto &f : pending)
                outcomes.push_back(f.get());
        }
        else
        {
            for (const auto &c : configs)
                outcomes.push_back(execute_run(c, nullptr));
        }

        std::ostringstream table;
        if (options.format == OutputFormat::json)
        {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto &o : outcomes)
            {
                nlohmann::json row = {{"label", o.label}, {"status", status_of(o)}};
                if (o.report)
                    row["report"] = analytics::report_to_json(*o.report);
                else
                    row["error"] = o.error;
                rows.push_back(row);
            }
            table << rows.dump(2) << '\n';
        }
        else
        {
            const auto &columns = analytics::report_columns();
            table << "status,error";
            for (const auto &c : columns)
                table << ',' << c;
            table << '\n';
            for (const auto &o : outcomes)
            {
                table << status_of(o) << ',' << analytics::csv_field(o.error);
                if (o.report)
                    for (const auto &f : analytics::report_fields(*o.report))
                        table << ',' << f;
                else
                {
                    table << ',' << analytics::csv_field(o.label);
                    for (std::size_t i = 1; i < columns.size(); ++i)
                        table << ',';
                }
                table << '\n';
            }
        }

        if (options.output_path)
            write_file(*options.output_path, table.str());
        else
            out << table.str();

        int code = kSuccess;
        for (const auto &o : outcomes)
        {
            if (!o.report)
            {
                err << "error: " << o.label << ": " << o.error << '\n';
                code = kError;
            }
            else if (o.exit_code == kNotConverged && code == kSuccess)
                code = kNotConverged;
        }
        return code;
    }

} // namespace sparseport::cli
