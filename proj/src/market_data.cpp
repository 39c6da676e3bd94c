/**
 * @file market_data.cpp
 * @brief CSV ingestion, volatility screen and rolling-window estimation.
 */

#include "sparseport/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace sparseport::data
{

    namespace
    {
        const std::string kModule = "market_data";

        [[noreturn]] void fail(const std::string &message)
        {
            throw Error(kModule, message);
        }

        std::string trim(std::string_view s)
        {
            const auto first = s.find_first_not_of(" \t\r\n\"");
            if (first == std::string_view::npos)
                return {};
            const auto last = s.find_last_not_of(" \t\r\n\"");
            return std::string(s.substr(first, last - first + 1));
        }

        std::vector<std::string> split_csv_line(const std::string &line)
        {
            std::vector<std::string> fields;
            std::string field;
            std::istringstream ss(line);
            while (std::getline(ss, field, ','))
                fields.push_back(trim(field));
            if (!line.empty() && line.back() == ',')
                fields.emplace_back();
            return fields;
        }

        bool parse_double(const std::string &text, double &value)
        {
            if (text.empty())
                return false;
            const char *begin = text.data();
            const char *end = begin + text.size();
            if (*begin == '+')
                ++begin;
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            return ec == std::errc() && ptr == end;
        }

        int parse_int(std::string_view digits, const std::string &original)
        {
            int value = 0;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (ec != std::errc() || ptr != digits.data() + digits.size())
                fail("unparseable date '" + original + "'");
            return value;
        }

        bool is_missing(double raw, double sentinel)
        {
            return !std::isfinite(raw) || std::abs(raw - sentinel) <= 1e-9 * std::max(1.0, std::abs(sentinel));
        }

        std::string format_double(double value)
        {
            char buffer[64];
            const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
            return std::string(buffer, ptr);
        }
    } // namespace

    Date Date::parse(const std::string &text)
    {
        const std::string s = trim(text);
        Date d;
        const std::string_view v(s);
        if (s.size() == 10 && s[4] == '-' && s[7] == '-')
        {
            d = {parse_int(v.substr(0, 4), s), parse_int(v.substr(5, 2), s), parse_int(v.substr(8, 2), s)};
        }
        else if (s.size() == 7 && s[4] == '-')
        {
            d = {parse_int(v.substr(0, 4), s), parse_int(v.substr(5, 2), s), 0};
        }
        else if (s.size() == 8)
        {
            d = {parse_int(v.substr(0, 4), s), parse_int(v.substr(4, 2), s), parse_int(v.substr(6, 2), s)};
        }
        else if (s.size() == 6)
        {
            d = {parse_int(v.substr(0, 4), s), parse_int(v.substr(4, 2), s), 0};
        }
        else
        {
            fail("unparseable date '" + s + "'");
        }
        const bool has_day = s.size() == 10 || s.size() == 8;
        if (d.month < 1 || d.month > 12 || d.day > 31 || (has_day && d.day < 1))
            fail("invalid calendar date '" + s + "'");
        return d;
    }

    std::string Date::to_string() const
    {
        char buffer[16];
        if (day == 0)
            std::snprintf(buffer, sizeof(buffer), "%04d-%02d", year, month);
        else
            std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", year, month, day);
        return buffer;
    }

    void ReturnsTable::validate() const
    {
        if (static_cast<std::size_t>(values.rows()) != dates.size() ||
            static_cast<std::size_t>(values.cols()) != assets.size())
            fail("returns table shape does not match its date/asset axes");
        for (std::size_t t = 1; t < dates.size(); ++t)
        {
            if (!(dates[t - 1] < dates[t]))
                fail("dates not strictly increasing at " + dates[t].to_string());
        }
        for (Eigen::Index i = 0; i < values.rows(); ++i)
        {
            for (Eigen::Index j = 0; j < values.cols(); ++j)
            {
                const double v = values(i, j);
                if (!std::isfinite(v))
                    fail("non-finite return at " + dates[i].to_string() + ", " + assets[j]);
                if (v <= -1.0)
                    fail("return <= -1 at " + dates[i].to_string() + ", " + assets[j]);
            }
        }
    }

    std::ptrdiff_t ReturnsTable::index_of(const Date &date) const
    {
        const auto it = std::lower_bound(dates.begin(), dates.end(), date);
        if (it == dates.end() || *it != date)
            return -1;
        return it - dates.begin();
    }

    LoadResult parse_returns(std::istream &in, const LoadOptions &options)
    {
        std::string line;
        if (!std::getline(in, line))
            fail("empty returns file");
        const auto header = split_csv_line(line);
        if (header.size() < 2)
            fail("header must contain a date column and at least one asset");
        const std::size_t n = header.size() - 1;

        std::vector<Date> dates;
        std::vector<std::vector<double>> rows;
        std::vector<bool> row_missing;
        std::vector<std::size_t> present(n, 0);
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (trim(line).empty())
                continue;
            const auto fields = split_csv_line(line);
            if (fields.size() != n + 1)
                fail("line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) +
                     " fields, found " + std::to_string(fields.size()));
            dates.push_back(Date::parse(fields[0]));
            std::vector<double> row(n);
            bool missing = false;
            for (std::size_t j = 0; j < n; ++j)
            {
                double raw = 0.0;
                if (fields[j + 1].empty())
                {
                    missing = true;
                    row[j] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                if (!parse_double(fields[j + 1], raw))
                    fail("line " + std::to_string(line_no) + ": cannot parse '" + fields[j + 1] + "'");
                if (is_missing(raw, options.missing_sentinel))
                {
                    missing = true;
                    row[j] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                ++present[j];
                row[j] = options.unit == ReturnsUnit::percent ? raw / 100.0 : raw;
            }
            rows.push_back(std::move(row));
            row_missing.push_back(missing);
        }

        for (std::size_t t = 1; t < dates.size(); ++t)
        {
            if (!(dates[t - 1] < dates[t]))
                fail("dates not strictly increasing: " + dates[t - 1].to_string() + " then " + dates[t].to_string());
        }
        for (std::size_t j = 0; j < n; ++j)
        {
            if (present[j] == 0)
                fail("column '" + header[j + 1] + "' is entirely missing");
        }

        LoadResult result;
        result.table.assets.assign(header.begin() + 1, header.end());
        const auto kept = static_cast<std::size_t>(std::count(row_missing.begin(), row_missing.end(), false));
        result.dropped_rows = rows.size() - kept;
        result.table.values.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(n));
        Eigen::Index r = 0;
        for (std::size_t t = 0; t < rows.size(); ++t)
        {
            if (row_missing[t])
                continue;
            result.table.dates.push_back(dates[t]);
            for (std::size_t j = 0; j < n; ++j)
                result.table.values(r, static_cast<Eigen::Index>(j)) = rows[t][j];
            ++r;
        }
        result.table.validate();
        return result;
    }

    LoadResult load_returns(const std::filesystem::path &path, const LoadOptions &options)
    {
        std::ifstream in(path);
        if (!in)
            fail("cannot open returns file '" + path.string() + "'");
        return parse_returns(in, options);
    }

    void write_returns(const ReturnsTable &table, std::ostream &out)
    {
        out << "date";
        for (const auto &a : table.assets)
            out << ',' << a;
        out << '\n';
        for (std::size_t t = 0; t < table.rows(); ++t)
        {
            out << table.dates[t].to_string();
            for (Eigen::Index j = 0; j < table.values.cols(); ++j)
                out << ',' << format_double(table.values(static_cast<Eigen::Index>(t), j));
            out << '\n';
        }
    }

    ReturnsTable screen_volatility(const ReturnsTable &table, std::size_t keep)
    {
        if (keep == 0)
            fail("screen_volatility: keep must be positive");
        if (keep > table.cols())
            fail("screen_volatility: keep (" + std::to_string(keep) + ") exceeds asset count (" +
                 std::to_string(table.cols()) + ")");
        if (table.rows() < 2)
            fail("screen_volatility: need at least two observations");

        const Eigen::RowVectorXd mean = table.values.colwise().mean();
        const Eigen::MatrixXd centered = table.values.rowwise() - mean;
        const Eigen::RowVectorXd stdev =
            (centered.array().square().colwise().sum() / static_cast<double>(table.rows() - 1)).sqrt();

        std::vector<std::size_t> order(table.cols());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                         { return stdev(static_cast<Eigen::Index>(a)) < stdev(static_cast<Eigen::Index>(b)); });
        order.resize(keep);
        std::sort(order.begin(), order.end());

        ReturnsTable out;
        out.dates = table.dates;
        out.values.resize(table.values.rows(), static_cast<Eigen::Index>(keep));
        for (std::size_t k = 0; k < keep; ++k)
        {
            out.assets.push_back(table.assets[order[k]]);
            out.values.col(static_cast<Eigen::Index>(k)) = table.values.col(static_cast<Eigen::Index>(order[k]));
        }
        return out;
    }

    void EstimationSpec::validate(const ReturnsTable &table) const
    {
        if (lookback_window < 2)
            fail("lookback_window must be at least 2");
        if (rebalance_dates.empty())
            fail("at least one rebalance date is required");
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            fail("horizon must be positive");
        if (!(jitter_floor > 0.0))
            fail("jitter_floor must be positive");
        for (std::size_t j = 0; j < rebalance_dates.size(); ++j)
        {
            if (j > 0 && !(rebalance_dates[j - 1] < rebalance_dates[j]))
                fail("rebalance dates not strictly increasing at " + rebalance_dates[j].to_string());
            const auto idx = table.index_of(rebalance_dates[j]);
            if (idx < 0)
                fail("rebalance date " + rebalance_dates[j].to_string() + " is not on the table's date axis");
            if (static_cast<std::size_t>(idx) < lookback_window)
                fail("insufficient history before " + rebalance_dates[j].to_string() + ": " +
                     std::to_string(idx) + " observations, need " + std::to_string(lookback_window));
        }
    }

    void MarketModel::validate() const
    {
        if (returns.empty())
            fail("market model has no periods");
        if (covariances.size() != returns.size())
            fail("market model: return/covariance period counts differ");
        const auto size = static_cast<Eigen::Index>(n());
        for (std::size_t j = 0; j < m(); ++j)
        {
            if (returns[j].size() != size || covariances[j].rows() != size || covariances[j].cols() != size)
                fail("market model: dimension mismatch in period " + std::to_string(j + 1));
            if ((returns[j].array() <= -1.0).any() || !returns[j].allFinite())
                fail("market model: expected return <= -1 in period " + std::to_string(j + 1));
        }
    }

    MarketModel estimate_model(const ReturnsTable &table, const EstimationSpec &spec)
    {
        spec.validate(table);
        const auto window = static_cast<Eigen::Index>(spec.lookback_window);

        MarketModel model;
        for (const auto &date : spec.rebalance_dates)
        {
            const Eigen::Index end = table.index_of(date);
            const auto sample = table.values.middleRows(end - window, window);
            const Eigen::RowVectorXd mean = sample.colwise().mean();
            const Eigen::MatrixXd centered = sample.rowwise() - mean;
            Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(window - 1);
            cov = 0.5 * (cov + cov.transpose()).eval();

            auto repaired = ensure_pd(spec.horizon * cov, spec.jitter_floor);
            model.returns.push_back(spec.horizon * mean.transpose());
            model.covariances.push_back(std::move(repaired.matrix));
            model.jitter.push_back(repaired.delta);
        }
        model.validate();
        return model;
    }

    bool cholesky_succeeds(const Eigen::MatrixXd &c)
    {
        if (c.rows() == 0)
            return true;
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success)
            return false;
        const double scale = c.diagonal().mean();
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
        return (pivots.array() > 1e-12 * scale).all();
    }

    PdRepair ensure_pd(const Eigen::MatrixXd &c, double jitter_floor, double delta_cap)
    {
        if (c.rows() != c.cols())
            fail("ensure_pd: matrix is not square");
        if (!(jitter_floor > 0.0))
            fail("ensure_pd: jitter_floor must be positive");
        const double max_abs = c.cwiseAbs().maxCoeff();
        if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * max_abs)
            fail("ensure_pd: matrix is not symmetric");

        if (cholesky_succeeds(c))
            return {c, 0.0};

        const double n = static_cast<double>(c.rows());
        const double cap = delta_cap >= 0.0 ? delta_cap : std::max(1e-2 * c.trace() / n, jitter_floor);
        const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(c.rows(), c.cols());
        for (double delta = jitter_floor; delta <= cap; delta *= 2.0)
        {
            Eigen::MatrixXd shifted = c + delta * identity;
            if (cholesky_succeeds(shifted))
                return {std::move(shifted), delta};
        }
        fail("ensure_pd: required diagonal shift exceeds cap " + format_double(cap) +
             " (pathological covariance)");
    }

} // namespace sparseport::data
