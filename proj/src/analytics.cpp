/**
 * @file analytics.cpp
 */

#include "sparseport/analytics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sparseport::analytics
{

    namespace
    {
        const std::string kModule = "analytics";

        [[noreturn]] void fail(const std::string &message)
        {
            throw Error(kModule, message);
        }

        void check_inputs(const MarketModel &model, double xi_init)
        {
            model.validate();
            if (model.m() < 1 || model.n() < 1)
                fail("model has no periods or no assets");
            if (!(xi_init > 0.0))
                fail("xi_init must be positive");
        }
    } // namespace

    WeightTrajectory naive_trajectory(const MarketModel &model, double xi_init)
    {
        check_inputs(model, xi_init);
        const std::size_t n = model.n();
        WeightTrajectory w(n, model.m());
        double wealth = xi_init;
        for (std::size_t j = 0; j < model.m(); ++j)
        {
            if (j > 0)
                wealth = w.block(j - 1).sum() + w.block(j - 1).dot(model.returns[j - 1]);
            w.block(j).setConstant(wealth / static_cast<double>(n));
        }
        return w;
    }

    double naive_wealth(const MarketModel &model, double xi_init)
    {
        const WeightTrajectory w = naive_trajectory(model, xi_init);
        const auto last = w.block(model.m() - 1);
        return last.sum() + last.dot(model.returns.back());
    }

    solver::PositionCounts count_positions(const WeightTrajectory &w, double zero_tol)
    {
        return solver::count_positions(w.flat(), zero_tol);
    }

    Eigen::MatrixXi transaction_matrix(const WeightTrajectory &w, double compare_tol)
    {
        if (!(compare_tol >= 0.0))
            fail("compare_tol must be non-negative");
        const auto n = static_cast<Eigen::Index>(w.n());
        const auto m = static_cast<Eigen::Index>(w.m());
        Eigen::MatrixXi g = Eigen::MatrixXi::Zero(n, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
            {
                const double before = j == 0 ? 0.0 : w(static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i));
                const double after = w(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
                g(i, j) = std::abs(after - before) > compare_tol ? 1 : 0;
            }
        return g;
    }

    std::size_t transactions(const WeightTrajectory &w, double compare_tol)
    {
        return static_cast<std::size_t>(transaction_matrix(w, compare_tol).sum());
    }

    StrategyReport build_report(const MultiPeriodProblem &problem, const solver::SolveResult &result,
                                const solver::Targets &targets, const solver::SolverConfig &config,
                                const std::string &label, const ReportOptions &options)
    {
        if (result.w.n() != problem.n() || result.w.m() != problem.m())
            fail("build_report: result does not belong to this problem");

        const MarketModel &model = problem.model();
        const WeightTrajectory naive = naive_trajectory(model, problem.xi_init());
        const auto counts = count_positions(result.w, options.zero_tol);
        const double total = static_cast<double>(problem.dimension());

        StrategyReport r;
        r.period_label = label;
        r.n = problem.n();
        r.m = problem.m();
        r.tau_f = result.tau_f;
        r.outer_iterations = result.outer_iterations;
        r.converged = result.converged;
        r.shorts = counts.shorts;
        r.actives = counts.actives;
        r.shorts_pct = 100.0 * static_cast<double>(counts.shorts) / total;
        r.sparsity_pct = 100.0 * (total - static_cast<double>(counts.actives)) / total;
        r.risk_optimal = problem::risk(model, result.w);
        r.risk_naive = problem::risk(model, naive);
        if (r.risk_optimal > 0.0)
            r.risk_ratio = r.risk_naive / r.risk_optimal;
        else
        {
            r.risk_ratio = std::numeric_limits<double>::infinity();
            r.risk_ratio_finite = false;
        }
        r.transactions_optimal = transactions(result.w, options.compare_tol);
        r.transactions_naive = transactions(naive, options.compare_tol);
        r.xi_term_target = problem.xi_term();
        r.residual_final = problem::residual(problem, result.w.flat());
        r.n_short_target = targets.n_short;
        r.n_act_target = targets.n_act;
        r.shorts_excess = counts.shorts > targets.n_short ? counts.shorts - targets.n_short : 0;
        r.actives_excess = counts.actives > targets.n_act ? counts.actives - targets.n_act : 0;
        r.tau_capped = (r.shorts_excess > 0 || r.actives_excess > 0) && result.tau_f >= config.tau_max;
        return r;
    }

} // namespace sparseport::analytics
