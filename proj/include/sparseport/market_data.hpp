/**
 * @file market_data.hpp
 * @brief Return-series ingestion, volatility screening and per-period
 *        estimation of expected returns and covariances.
 */

#pragma once

#include "sparseport/error.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparseport::data
{

    /// Calendar date. Monthly series carry no day (`day == 0`).
    struct Date
    {
        int year = 0;
        int month = 0;
        int day = 0;

        auto operator<=>(const Date &) const = default;

        /// Accepts YYYY-MM-DD, YYYY-MM, YYYYMMDD and YYYYMM.
        static Date parse(const std::string &text);

        /// ISO form: YYYY-MM or YYYY-MM-DD depending on whether a day is set.
        std::string to_string() const;
    };

    /// Dated matrix of simple returns (rows = dates, columns = assets).
    struct ReturnsTable
    {
        std::vector<Date> dates;
        std::vector<std::string> assets;
        Eigen::MatrixXd values;

        std::size_t rows() const { return dates.size(); }
        std::size_t cols() const { return assets.size(); }

        /// Throws sparseport::Error if any table invariant is violated:
        /// strictly increasing dates, matching shapes, finite entries > -1.
        void validate() const;

        /// Index of `date` on the date axis, or -1 if absent.
        std::ptrdiff_t index_of(const Date &date) const;
    };

    enum class CsvFormat
    {
        csv_wide
    };

    enum class ReturnsUnit
    {
        fraction,
        percent
    };

    struct LoadOptions
    {
        CsvFormat format = CsvFormat::csv_wide;
        ReturnsUnit unit = ReturnsUnit::fraction;
        /// Raw (pre-unit-conversion) value marking a missing observation.
        double missing_sentinel = -99.99;
    };

    struct LoadResult
    {
        ReturnsTable table;
        std::size_t dropped_rows = 0;
    };

    LoadResult load_returns(const std::filesystem::path &path, const LoadOptions &options = {});
    LoadResult parse_returns(std::istream &in, const LoadOptions &options = {});

    /// Writes `table` in csv_wide layout with shortest round-trip decimal
    /// formatting, so parse_returns(write_returns(t)) reproduces t exactly.
    void write_returns(const ReturnsTable &table, std::ostream &out);

    /// Keeps the `keep` assets with the smallest full-sample standard
    /// deviation; survivors stay in their original column order and ties
    /// go to the earlier column.
    ReturnsTable screen_volatility(const ReturnsTable &table, std::size_t keep);

    enum class Estimator
    {
        sample_mean_cov
    };

    struct EstimationSpec
    {
        std::vector<Date> rebalance_dates;
        std::size_t lookback_window = 120;
        Estimator estimator = Estimator::sample_mean_cov;
        /// Observations per holding period. Mean and covariance of the
        /// window are multiplied by this factor (1 = use raw per-observation
        /// moments).
        double horizon = 1.0;
        double jitter_floor = 1e-10;

        void validate(const ReturnsTable &table) const;
    };

    /// Per-period model inputs: expected returns r_j and covariances C_j.
    struct MarketModel
    {
        std::vector<Eigen::VectorXd> returns;
        std::vector<Eigen::MatrixXd> covariances;
        /// Diagonal shift applied to each C_j by ensure_pd (0 if none).
        std::vector<double> jitter;

        std::size_t n() const { return returns.empty() ? 0 : static_cast<std::size_t>(returns.front().size()); }
        std::size_t m() const { return returns.size(); }

        void validate() const;
    };

    MarketModel estimate_model(const ReturnsTable &table, const EstimationSpec &spec);

    struct PdRepair
    {
        Eigen::MatrixXd matrix;
        double delta = 0.0;
    };

    /// True if the Cholesky factorisation of `c` succeeds with every pivot
    /// above a relative floor of 1e-12 times the mean diagonal.
    bool cholesky_succeeds(const Eigen::MatrixXd &c);

    /// Returns `c` untouched if it factors; otherwise `c + delta*I` with
    /// delta = jitter_floor * 2^k for the smallest k that factors. A negative
    /// `delta_cap` selects the default cap max(1e-2 * trace(c)/n, jitter_floor).
    PdRepair ensure_pd(const Eigen::MatrixXd &c, double jitter_floor, double delta_cap = -1.0);

} // namespace sparseport::data
