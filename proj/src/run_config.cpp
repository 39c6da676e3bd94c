/**
 * @file run_config.cpp
 */

#include "sparseport/run_config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

namespace sparseport::cli
{

    namespace
    {
        using nlohmann::json;
        namespace fs = std::filesystem;

        [[noreturn]] void fail(const std::string &message)
        {
            throw Error("config", message);
        }

        // Typed access to one JSON object; rejects keys nobody asked for.
        class Section
        {
        public:
            Section(const json &node, std::string where) : node_(node), where_(std::move(where))
            {
                if (!node_.is_object())
                    fail(where_ + ": expected an object");
            }

            bool has(const std::string &key)
            {
                seen_.insert(key);
                return node_.contains(key) && !node_.at(key).is_null();
            }

            double number(const std::string &key, double fallback)
            {
                if (!has(key))
                    return fallback;
                const json &v = node_.at(key);
                if (!v.is_number())
                    fail(name(key) + ": expected a number");
                return v.get<double>();
            }

            std::size_t count(const std::string &key, std::size_t fallback)
            {
                if (!has(key))
                    return fallback;
                const json &v = node_.at(key);
                if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
                    return v.get<std::size_t>();
                if (v.is_number_float() && v.get<double>() >= 0.0 && std::floor(v.get<double>()) == v.get<double>())
                    return static_cast<std::size_t>(v.get<double>());
                fail(name(key) + ": expected a non-negative integer");
            }

            std::string text(const std::string &key, const std::string &fallback)
            {
                if (!has(key))
                    return fallback;
                const json &v = node_.at(key);
                if (!v.is_string())
                    fail(name(key) + ": expected a string");
                return v.get<std::string>();
            }

            bool boolean(const std::string &key, bool fallback)
            {
                if (!has(key))
                    return fallback;
                const json &v = node_.at(key);
                if (!v.is_boolean())
                    fail(name(key) + ": expected true or false");
                return v.get<bool>();
            }

            template <typename E>
            E choice(const std::string &key, E fallback, const std::vector<std::pair<std::string, E>> &options)
            {
                if (!has(key))
                    return fallback;
                const std::string value = text(key, "");
                std::string known;
                for (const auto &[label, e] : options)
                {
                    if (label == value)
                        return e;
                    known += (known.empty() ? "" : ", ") + label;
                }
                fail(name(key) + ": unknown value '" + value + "' (expected one of " + known + ")");
            }

            const json &child(const std::string &key)
            {
                seen_.insert(key);
                return node_.at(key);
            }

            std::string name(const std::string &key) const { return where_.empty() ? key : where_ + "." + key; }

            void finish() const
            {
                for (const auto &[key, value] : node_.items())
                    if (!seen_.count(key))
                        fail(name(key) + ": unknown key");
            }

        private:
            const json &node_;
            std::string where_;
            std::set<std::string> seen_;
        };

        const std::vector<std::pair<std::string, data::CsvFormat>> kFormats = {{"csv_wide", data::CsvFormat::csv_wide}};
        const std::vector<std::pair<std::string, data::ReturnsUnit>> kUnits = {
            {"fraction", data::ReturnsUnit::fraction}, {"percent", data::ReturnsUnit::percent}};
        const std::vector<std::pair<std::string, data::Estimator>> kEstimators = {
            {"sample_mean_cov", data::Estimator::sample_mean_cov}};
        const std::vector<std::pair<std::string, XiTermMode>> kXiModes = {
            {"naive", XiTermMode::naive}, {"explicit", XiTermMode::explicit_value}};
        const std::vector<std::pair<std::string, solver::SubgradientRescale>> kRescales = {
            {"exact", solver::SubgradientRescale::exact}, {"legacy", solver::SubgradientRescale::legacy}};
        const std::vector<std::pair<std::string, solver::SubgradientUpdate>> kUpdates = {
            {"prox_certificate", solver::SubgradientUpdate::prox_certificate},
            {"residual", solver::SubgradientUpdate::residual}};
        const std::vector<std::pair<std::string, OutputFormat>> kOutputFormats = {
            {"csv", OutputFormat::csv}, {"json", OutputFormat::json}};

        template <typename E>
        std::string label_of(E value, const std::vector<std::pair<std::string, E>> &options)
        {
            for (const auto &[label, e] : options)
                if (e == value)
                    return label;
            return "?";
        }

        fs::path resolve_path(const std::string &text, const fs::path &base_dir)
        {
            fs::path p(text);
            if (p.is_relative())
                p = base_dir / p;
            return p.lexically_normal();
        }

        std::optional<fs::path> optional_path(Section &s, const std::string &key, const fs::path &base_dir)
        {
            if (!s.has(key))
                return std::nullopt;
            const std::string text = s.text(key, "");
            if (text.empty())
                fail(s.name(key) + ": empty path");
            return resolve_path(text, base_dir);
        }

        CountTarget read_count_target(Section &parent, const std::string &key, CountTarget fallback)
        {
            if (!parent.has(key))
                return fallback;
            Section s(parent.child(key), parent.name(key));
            CountTarget t;
            if (s.has("fraction"))
                t.fraction = s.number("fraction", 0.0);
            if (s.has("absolute"))
                t.absolute = s.count("absolute", 0);
            s.finish();
            if (t.fraction.has_value() == t.absolute.has_value())
                fail(parent.name(key) + ": give exactly one of 'fraction' or 'absolute'");
            return t;
        }

        json count_target_json(const CountTarget &t)
        {
            json j = json::object();
            if (t.fraction)
                j["fraction"] = *t.fraction;
            if (t.absolute)
                j["absolute"] = *t.absolute;
            return j;
        }
    } // namespace

    std::size_t CountTarget::resolve(std::size_t dimension) const
    {
        if (absolute)
            return *absolute;
        if (!fraction)
            fail("count target has neither fraction nor absolute");
        return static_cast<std::size_t>(std::floor(*fraction * static_cast<double>(dimension) + 1e-9));
    }

    solver::Targets TargetsSection::resolve(std::size_t dimension) const
    {
        solver::Targets t;
        t.n_short = n_short.resolve(dimension);
        t.n_act = std::max<std::size_t>(1, n_act.resolve(dimension));
        if (t.n_short > dimension && !n_short.absolute)
            t.n_short = dimension;
        if (t.n_act > dimension && !n_act.absolute)
            t.n_act = dimension;
        t.validate(dimension);
        return t;
    }

    RunConfig RunConfig::from_json(const json &doc, const fs::path &base_dir)
    {
        RunConfig c;
        Section root(doc, "");
        c.label = root.text("label", c.label);

        if (!root.has("data"))
            fail("data: section is required");
        {
            Section s(root.child("data"), "data");
            if (!s.has("path"))
                fail("data.path: required");
            c.data.path = resolve_path(s.text("path", ""), base_dir);
            c.data.format = s.choice("format", c.data.format, kFormats);
            c.data.returns_unit = s.choice("returns_unit", c.data.returns_unit, kUnits);
            c.data.missing_sentinel = s.number("missing_sentinel", c.data.missing_sentinel);
            if (s.has("screen_keep"))
                c.data.screen_keep = s.count("screen_keep", 0);
            s.finish();
        }

        if (!root.has("estimation"))
            fail("estimation: section is required");
        {
            Section s(root.child("estimation"), "estimation");
            if (s.has("rebalance_dates"))
            {
                const json &dates = s.child("rebalance_dates");
                if (!dates.is_array())
                    fail("estimation.rebalance_dates: expected an array of date strings");
                for (const auto &d : dates)
                {
                    if (!d.is_string())
                        fail("estimation.rebalance_dates: expected an array of date strings");
                    c.estimation.rebalance_dates.push_back(d.get<std::string>());
                }
            }
            if (s.has("schedule"))
            {
                Section sch(s.child("schedule"), "estimation.schedule");
                Schedule schedule;
                if (!sch.has("first") || !sch.has("periods"))
                    fail("estimation.schedule: 'first' and 'periods' are required");
                schedule.first = sch.text("first", "");
                schedule.periods = sch.count("periods", 0);
                schedule.step = sch.count("step", schedule.step);
                sch.finish();
                c.estimation.schedule = schedule;
            }
            c.estimation.lookback_window = s.count("lookback_window", c.estimation.lookback_window);
            c.estimation.estimator = s.choice("estimator", c.estimation.estimator, kEstimators);
            c.estimation.horizon = s.number("horizon", c.estimation.horizon);
            c.estimation.jitter_floor = s.number("jitter_floor", c.estimation.jitter_floor);
            s.finish();
        }

        if (root.has("investment"))
        {
            Section s(root.child("investment"), "investment");
            c.investment.xi_init = s.number("xi_init", c.investment.xi_init);
            c.investment.xi_term_mode = s.choice("xi_term_mode", c.investment.xi_term_mode, kXiModes);
            if (s.has("xi_term_value"))
                c.investment.xi_term_value = s.number("xi_term_value", 0.0);
            s.finish();
        }

        if (root.has("targets"))
        {
            Section s(root.child("targets"), "targets");
            c.targets.n_act = read_count_target(s, "n_act", c.targets.n_act);
            c.targets.n_short = read_count_target(s, "n_short", c.targets.n_short);
            s.finish();
        }

        if (root.has("solver"))
        {
            Section s(root.child("solver"), "solver");
            solver::SolverConfig &v = c.solver;
            v.lambda = s.number("lambda", v.lambda);
            v.tau0 = s.number("tau0", v.tau0);
            v.tau_max = s.number("tau_max", v.tau_max);
            v.theta = s.number("theta", v.theta);
            v.tol_outer = s.number("tol_outer", v.tol_outer);
            v.max_outer = s.count("max_outer", v.max_outer);
            v.tol_inner = s.number("tol_inner", v.tol_inner);
            v.max_inner = s.count("max_inner", v.max_inner);
            v.bt_shrink = s.number("bt_shrink", v.bt_shrink);
            v.step_init = s.number("step_init", v.step_init);
            v.zero_tol = s.number("zero_tol", v.zero_tol);
            v.inexact_ratio = s.number("inexact_ratio", v.inexact_ratio);
            v.rescale = s.choice("rescale", v.rescale, kRescales);
            v.update = s.choice("update", v.update, kUpdates);
            s.finish();
        }

        if (root.has("output"))
        {
            Section s(root.child("output"), "output");
            c.output.report_path = optional_path(s, "report_path", base_dir);
            c.output.weights_path = optional_path(s, "weights_path", base_dir);
            c.output.diagnostics_path = optional_path(s, "diagnostics_path", base_dir);
            c.output.effective_config_path = optional_path(s, "effective_config_path", base_dir);
            c.output.format = s.choice("format", c.output.format, kOutputFormats);
            s.finish();
        }

        root.finish();
        c.validate();
        return c;
    }

    json RunConfig::to_json() const
    {
        json j = json::object();
        j["label"] = label;

        json d = json::object();
        d["path"] = fs::absolute(data.path).lexically_normal().string();
        d["format"] = label_of(data.format, kFormats);
        d["returns_unit"] = label_of(data.returns_unit, kUnits);
        d["missing_sentinel"] = data.missing_sentinel;
        if (data.screen_keep)
            d["screen_keep"] = *data.screen_keep;
        j["data"] = d;

        json e = json::object();
        if (!estimation.rebalance_dates.empty())
            e["rebalance_dates"] = estimation.rebalance_dates;
        if (estimation.schedule)
            e["schedule"] = {{"first", estimation.schedule->first},
                             {"periods", estimation.schedule->periods},
                             {"step", estimation.schedule->step}};
        e["lookback_window"] = estimation.lookback_window;
        e["estimator"] = label_of(estimation.estimator, kEstimators);
        e["horizon"] = estimation.horizon;
        e["jitter_floor"] = estimation.jitter_floor;
        j["estimation"] = e;

        json inv = json::object();
        inv["xi_init"] = investment.xi_init;
        inv["xi_term_mode"] = label_of(investment.xi_term_mode, kXiModes);
        if (investment.xi_term_value)
            inv["xi_term_value"] = *investment.xi_term_value;
        j["investment"] = inv;

        j["targets"] = {{"n_act", count_target_json(targets.n_act)}, {"n_short", count_target_json(targets.n_short)}};

        json s = json::object();
        s["lambda"] = solver.lambda;
        s["tau0"] = solver.tau0;
        s["tau_max"] = solver.tau_max;
        s["theta"] = solver.theta;
        s["tol_outer"] = solver.tol_outer;
        s["max_outer"] = solver.max_outer;
        s["tol_inner"] = solver.tol_inner;
        s["max_inner"] = solver.max_inner;
        s["bt_shrink"] = solver.bt_shrink;
        s["step_init"] = solver.step_init;
        s["zero_tol"] = solver.zero_tol;
        s["inexact_ratio"] = solver.inexact_ratio;
        s["rescale"] = label_of(solver.rescale, kRescales);
        s["update"] = label_of(solver.update, kUpdates);
        j["solver"] = s;

        json o = json::object();
        const auto put = [&](const char *key, const std::optional<fs::path> &p)
        {
            if (p)
                o[key] = fs::absolute(*p).lexically_normal().string();
        };
        put("report_path", output.report_path);
        put("weights_path", output.weights_path);
        put("diagnostics_path", output.diagnostics_path);
        put("effective_config_path", output.effective_config_path);
        o["format"] = label_of(output.format, kOutputFormats);
        j["output"] = o;
        return j;
    }

    void RunConfig::validate() const
    {
        if (label.empty())
            fail("label: must not be empty");
        if (data.path.empty())
            fail("data.path: required");
        if (data.screen_keep && *data.screen_keep == 0)
            fail("data.screen_keep: must be positive");

        const bool explicit_dates = !estimation.rebalance_dates.empty();
        if (explicit_dates == estimation.schedule.has_value())
            fail("estimation: give exactly one of 'rebalance_dates' or 'schedule'");
        for (const auto &d : estimation.rebalance_dates)
            data::Date::parse(d);
        if (estimation.schedule)
        {
            data::Date::parse(estimation.schedule->first);
            if (estimation.schedule->periods < 1)
                fail("estimation.schedule.periods: must be at least 1");
            if (estimation.schedule->step < 1)
                fail("estimation.schedule.step: must be at least 1");
        }
        if (estimation.lookback_window < 2)
            fail("estimation.lookback_window: must be at least 2");
        if (!(estimation.horizon > 0.0) || !std::isfinite(estimation.horizon))
            fail("estimation.horizon: must be positive");
        if (!(estimation.jitter_floor > 0.0))
            fail("estimation.jitter_floor: must be positive");

        if (!(investment.xi_init > 0.0) || !std::isfinite(investment.xi_init))
            fail("investment.xi_init: must be positive");
        if (investment.xi_term_mode == XiTermMode::explicit_value && !investment.xi_term_value)
            fail("investment.xi_term_value: required when xi_term_mode is 'explicit'");
        if (investment.xi_term_mode == XiTermMode::naive && investment.xi_term_value)
            fail("investment.xi_term_value: only allowed when xi_term_mode is 'explicit'");
        if (investment.xi_term_value && !std::isfinite(*investment.xi_term_value))
            fail("investment.xi_term_value: must be finite");

        for (const auto &[name, t] : {std::pair{"targets.n_act", &targets.n_act}, std::pair{"targets.n_short", &targets.n_short}})
        {
            if (t->fraction.has_value() == t->absolute.has_value())
                fail(std::string(name) + ": give exactly one of 'fraction' or 'absolute'");
            if (t->fraction && !(*t->fraction >= 0.0 && *t->fraction <= 1.0))
                fail(std::string(name) + ".fraction: must lie in [0, 1]");
        }
        if (targets.n_act.absolute && *targets.n_act.absolute < 1)
            fail("targets.n_act.absolute: must be at least 1");

        try
        {
            solver.validate();
        }
        catch (const Error &e)
        {
            fail(std::string("solver: ") + e.what());
        }
    }

    void apply_override(json &doc, const std::string &assignment)
    {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            fail("override '" + assignment + "': expected key=value");
        const std::string key = assignment.substr(0, eq);
        const std::string text = assignment.substr(eq + 1);

        json value = json::parse(text, nullptr, false);
        if (value.is_discarded())
            value = text;

        json *node = &doc;
        std::size_t start = 0;
        while (true)
        {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty())
                fail("override '" + assignment + "': empty key component");
            if (!node->is_object())
                fail("override '" + assignment + "': '" + key.substr(0, start > 0 ? start - 1 : 0) + "' is not an object");
            if (dot == std::string::npos)
            {
                (*node)[part] = value;
                return;
            }
            if (!node->contains(part) || (*node)[part].is_null())
                (*node)[part] = json::object();
            node = &(*node)[part];
            start = dot + 1;
        }
    }

    RunConfig load_run_config(const fs::path &path, const std::vector<std::string> &overrides)
    {
        std::ifstream in(path);
        if (!in)
            fail("cannot open config file '" + path.string() + "'");
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded())
            fail("'" + path.string() + "' is not valid JSON");
        for (const auto &o : overrides)
            apply_override(doc, o);
        return RunConfig::from_json(doc, fs::absolute(path).parent_path());
    }

} // namespace sparseport::cli
