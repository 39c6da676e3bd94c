/**
 * @file analytics.hpp
 * @brief Equal-weight benchmark, position and transaction counts, and the
 *        per-run strategy report.
 */

#pragma once

#include "sparseport/problem.hpp"
#include "sparseport/solver.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace sparseport::analytics
{

    using data::MarketModel;
    using problem::MultiPeriodProblem;
    using problem::WeightTrajectory;

    /// Equal split of current wealth over all n assets at every rebalance.
    /// Satisfies the budget and self-financing rows exactly.
    WeightTrajectory naive_trajectory(const MarketModel &model, double xi_init);

    /// Wealth of the equal-weight strategy after the m-th revaluation.
    double naive_wealth(const MarketModel &model, double xi_init);

    solver::PositionCounts count_positions(const WeightTrajectory &w, double zero_tol);

    /// n x m indicator matrix. Column 0 flags initial purchases (w_1 against
    /// the empty portfolio), column j flags |w_{j+1} - w_j| > compare_tol.
    Eigen::MatrixXi transaction_matrix(const WeightTrajectory &w, double compare_tol = 0.0);

    /// Sum of transaction_matrix entries.
    std::size_t transactions(const WeightTrajectory &w, double compare_tol = 0.0);

    struct ReportOptions
    {
        double zero_tol = 0.0;
        double compare_tol = 0.0;
    };

    struct StrategyReport
    {
        std::string period_label;
        std::size_t n = 0;
        std::size_t m = 0;
        double tau_f = 0.0;
        std::size_t outer_iterations = 0;
        bool converged = false;
        std::size_t shorts = 0;
        std::size_t actives = 0;
        double shorts_pct = 0.0;
        double sparsity_pct = 0.0;
        double risk_optimal = 0.0;
        double risk_naive = 0.0;
        /// risk_naive / risk_optimal; +inf when risk_optimal is 0.
        double risk_ratio = 0.0;
        bool risk_ratio_finite = true;
        std::size_t transactions_optimal = 0;
        std::size_t transactions_naive = 0;
        double xi_term_target = 0.0;
        double residual_final = 0.0;
        std::size_t n_short_target = 0;
        std::size_t n_act_target = 0;
        /// Positions above the targets (0 when met).
        std::size_t shorts_excess = 0;
        std::size_t actives_excess = 0;
        /// tau_f reached tau_max while a target was still missed.
        bool tau_capped = false;
    };

    StrategyReport build_report(const MultiPeriodProblem &problem, const solver::SolveResult &result,
                                const solver::Targets &targets, const solver::SolverConfig &config,
                                const std::string &label, const ReportOptions &options = {});

} // namespace sparseport::analytics
