/**
 * @file solver.cpp
 * @brief FPG inner solver and the adaptive Bregman outer loop.
 */

#include "sparseport/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sparseport::solver
{

    namespace
    {
        const std::string kModule = "solver";

        [[noreturn]] void fail(const std::string &message)
        {
            throw Error(kModule, message);
        }

        void require_size(const Eigen::VectorXd &v, std::size_t expected, const char *what)
        {
            if (static_cast<std::size_t>(v.size()) != expected)
                fail(std::string(what) + ": dimension mismatch (got " + std::to_string(v.size()) +
                     ", expected " + std::to_string(expected) + ")");
        }

        // Values needed to evaluate f and its gradient at one point.
        struct SmoothEval
        {
            Eigen::VectorXd cw;
            Eigen::VectorXd violation;
            double value;
        };

        SmoothEval evaluate(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                            const Eigen::VectorXd &p, double lambda)
        {
            SmoothEval e{problem.apply_covariance(w), problem.constraint_violation(w), 0.0};
            e.value = w.dot(e.cw) - p.dot(w) + 0.5 * lambda * e.violation.squaredNorm();
            return e;
        }

        Eigen::VectorXd gradient_from(const MultiPeriodProblem &problem, const SmoothEval &e,
                                      const Eigen::VectorXd &p, double lambda)
        {
            return 2.0 * e.cw - p + lambda * problem.a().apply_transpose(e.violation);
        }

        // Element of tau*d||z||_1 certified by z = prox_{beta*tau*||.||_1}(v).
        Eigen::VectorXd prox_certificate(const Eigen::VectorXd &z, const Eigen::VectorXd &v, double beta, double tau)
        {
            Eigen::VectorXd q(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i)
            {
                if (z(i) > 0.0)
                    q(i) = tau;
                else if (z(i) < 0.0)
                    q(i) = -tau;
                else
                    q(i) = std::clamp(v(i) / beta, -tau, tau);
            }
            return q;
        }

        constexpr int kMaxBacktracks = 200;
    } // namespace

    void SolverConfig::validate() const
    {
        if (!(lambda > 0.0))
            fail("lambda must be positive");
        if (!(tau0 >= 0.0))
            fail("tau0 must be non-negative");
        if (!(tau_max >= tau0))
            fail("tau_max must be at least tau0");
        if (!(theta >= 1.0))
            fail("theta must be at least 1");
        if (!(tol_outer > 0.0) || !(tol_inner > 0.0))
            fail("tolerances must be positive");
        if (max_outer < 1 || max_inner < 1)
            fail("iteration caps must be at least 1");
        if (!(bt_shrink > 0.0 && bt_shrink < 1.0))
            fail("bt_shrink must lie in (0, 1)");
        if (!(step_init > 0.0))
            fail("step_init must be positive");
        if (!(zero_tol >= 0.0))
            fail("zero_tol must be non-negative");
        if (!(inexact_ratio >= 0.0))
            fail("inexact_ratio must be non-negative");
    }

    void Targets::validate(std::size_t dimension) const
    {
        if (n_short > dimension)
            fail("n_short (" + std::to_string(n_short) + ") exceeds problem dimension " + std::to_string(dimension));
        if (n_act < 1 || n_act > dimension)
            fail("n_act (" + std::to_string(n_act) + ") must lie in [1, " + std::to_string(dimension) + "]");
    }

    double soft_threshold(double v, double t)
    {
        if (t < 0.0)
            fail("soft_threshold: threshold must be non-negative");
        const double shrunk = std::abs(v) - std::min(std::abs(v), t);
        if (shrunk == 0.0)
            return 0.0;
        return v > 0.0 ? shrunk : -shrunk;
    }

    Eigen::VectorXd soft_threshold(const Eigen::VectorXd &v, double t)
    {
        if (t < 0.0)
            fail("soft_threshold: threshold must be non-negative");
        Eigen::VectorXd out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i)
            out(i) = soft_threshold(v(i), t);
        return out;
    }

    double smooth_value(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                        const Eigen::VectorXd &p, double lambda)
    {
        require_size(w, problem.dimension(), "smooth_value");
        require_size(p, problem.dimension(), "smooth_value");
        return evaluate(problem, w, p, lambda).value;
    }

    Eigen::VectorXd smooth_gradient(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                                    const Eigen::VectorXd &p, double lambda)
    {
        require_size(w, problem.dimension(), "smooth_gradient");
        require_size(p, problem.dimension(), "smooth_gradient");
        return gradient_from(problem, evaluate(problem, w, p, lambda), p, lambda);
    }

    double subproblem_objective(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                                const Eigen::VectorXd &p, double tau, double lambda)
    {
        return smooth_value(problem, w, p, lambda) + tau * w.lpNorm<1>();
    }

    FpgResult fpg_solve(const MultiPeriodProblem &problem, const Eigen::VectorXd &p, double tau, double lambda,
                        const Eigen::VectorXd &w_start, const SolverConfig &config, const FpgTrace &trace,
                        double inexact_ratio)
    {
        if (tau < 0.0)
            fail("fpg_solve: tau must be non-negative");
        if (inexact_ratio < 0.0)
            fail("fpg_solve: inexact_ratio must be non-negative");
        require_size(p, problem.dimension(), "fpg_solve");
        require_size(w_start, problem.dimension(), "fpg_solve");
        if (!w_start.allFinite())
            fail("fpg_solve: starting point is not finite");

        FpgResult result;
        Eigen::VectorXd x = w_start;
        Eigen::VectorXd x_prev = x;
        Eigen::VectorXd y = x;
        SmoothEval at_x = evaluate(problem, x, p, lambda);
        double phi_x = at_x.value + tau * x.lpNorm<1>();
        double t = 1.0;
        double beta = config.step_init;

        // Optimality residual of the accepted iterate, computed on demand.
        const auto measure = [&]()
        {
            const Eigen::VectorXd push = lambda * problem.a().apply_transpose(at_x.violation);
            result.constraint_push = push.norm();
            if (result.l1_subgradient)
                result.stationarity = (2.0 * at_x.cw - p + push + *result.l1_subgradient).norm();
            else
                result.stationarity = std::numeric_limits<double>::infinity();
        };

        for (std::size_t it = 1; it <= config.max_inner; ++it)
        {
            const SmoothEval at_y = evaluate(problem, y, p, lambda);
            const Eigen::VectorXd grad = gradient_from(problem, at_y, p, lambda);
            if (!std::isfinite(at_y.value) || !grad.allFinite())
                fail("fpg_solve: non-finite objective (check lambda and step size)");

            Eigen::VectorXd v, z;
            SmoothEval at_z;
            for (int backtracks = 0;; ++backtracks)
            {
                if (backtracks > kMaxBacktracks)
                    fail("fpg_solve: backtracking failed to find an admissible step");
                v = y - beta * grad;
                z = soft_threshold(v, beta * tau);
                const Eigen::VectorXd d = z - y;
                at_z = evaluate(problem, z, p, lambda);
                const double bound = at_y.value + grad.dot(d) + d.squaredNorm() / (2.0 * beta);
                const double slack = 1e-15 * std::max({std::abs(at_y.value), std::abs(at_z.value), 1.0});
                if (at_z.value <= bound + slack)
                    break;
                beta *= config.bt_shrink;
            }
            if (!std::isfinite(at_z.value))
                fail("fpg_solve: non-finite objective (check lambda and step size)");

            const double phi_z = at_z.value + tau * z.lpNorm<1>();
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            x_prev = x;
            if (phi_z <= phi_x)
            {
                x = z;
                phi_x = phi_z;
                at_x = std::move(at_z);
                result.l1_subgradient = prox_certificate(x, v, beta, tau);
            }
            y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
            t = t_next;
            result.iterations = it;
            if (trace)
                trace(it, phi_x);

            const double step = (z - x_prev).norm();
            if (step <= config.tol_inner * std::max(x_prev.norm(), z.norm()))
            {
                if (inexact_ratio == 0.0)
                    break;
                measure();
                if (result.stationarity <= inexact_ratio * result.constraint_push)
                    break;
            }
            if (it == config.max_inner)
                result.capped = true;
        }

        measure();
        result.w = std::move(x);
        result.objective = phi_x;
        return result;
    }

    Eigen::VectorXd rescale_subgradient(const MultiPeriodProblem &problem, const Eigen::VectorXd &p,
                                        double tau_prev, double tau_new, const Eigen::VectorXd &w,
                                        SubgradientRescale variant)
    {
        if (!(tau_prev > 0.0))
            fail("rescale_subgradient: tau_prev must be positive");
        if (!(tau_new > 0.0))
            fail("rescale_subgradient: tau_new must be positive");
        require_size(p, problem.dimension(), "rescale_subgradient");
        if (tau_new == tau_prev)
            return p;
        const double ratio = tau_new / tau_prev;
        const double factor = variant == SubgradientRescale::exact ? 2.0 : 1.0;
        return ratio * p + factor * (1.0 - ratio) * problem.apply_covariance(w);
    }

    PositionCounts count_positions(const Eigen::VectorXd &w, double zero_tol)
    {
        if (zero_tol < 0.0)
            fail("count_positions: zero_tol must be non-negative");
        PositionCounts c;
        for (Eigen::Index i = 0; i < w.size(); ++i)
        {
            if (w(i) < -zero_tol)
                ++c.shorts;
            if (std::abs(w(i)) > zero_tol)
                ++c.actives;
        }
        return c;
    }

    SolveResult bregman_solve(const MultiPeriodProblem &problem, const Targets &targets,
                              const SolverConfig &config, const SolveHooks &hooks)
    {
        config.validate();
        targets.validate(problem.dimension());

        const auto dim = static_cast<Eigen::Index>(problem.dimension());
        Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
        double tau_prev = config.tau0;
        double tau = config.tau0;

        SolveResult result;
        for (std::size_t k = 1; k <= config.max_outer; ++k)
        {
            if (tau != tau_prev)
                p = rescale_subgradient(problem, p, tau_prev, tau, w, config.rescale);
            if (hooks.subgradient)
                hooks.subgradient(SubgradientState{k, tau_prev, tau, w, p});

            FpgResult inner = fpg_solve(problem, p, tau, config.lambda, w, config, {},
                                        config.update == SubgradientUpdate::prox_certificate ? config.inexact_ratio : 0.0);
            const Eigen::VectorXd violation = problem.constraint_violation(inner.w);
            if (config.update == SubgradientUpdate::prox_certificate && inner.l1_subgradient)
                p = 2.0 * problem.apply_covariance(inner.w) + *inner.l1_subgradient;
            else
                p -= config.lambda * problem.a().apply_transpose(violation);
            w = std::move(inner.w);

            const PositionCounts counts = count_positions(w, config.zero_tol);
            const bool violated = counts.shorts > targets.n_short || counts.actives > targets.n_act;

            IterationRecord record;
            record.k = k;
            record.tau = tau;
            record.residual = violation.norm();
            record.shorts = counts.shorts;
            record.actives = counts.actives;
            record.inner_iterations = inner.iterations;
            record.inner_capped = inner.capped;
            record.target_violated = violated;
            result.iterations.push_back(record);
            result.residual_history.push_back(record.residual);
            result.tau_history.push_back(tau);
            if (hooks.progress)
                hooks.progress(record);

            const double eta = violated ? config.theta : 1.0;
            tau_prev = tau;
            tau = std::min(eta * tau, config.tau_max);

            result.outer_iterations = k;
            result.shorts = counts.shorts;
            result.actives = counts.actives;
            if (record.residual <= config.tol_outer)
            {
                result.converged = true;
                break;
            }
        }

        result.tau_f = tau;
        result.w = WeightTrajectory(std::move(w), problem.n());
        return result;
    }

} // namespace sparseport::solver
