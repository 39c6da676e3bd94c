/**
 * @file solver.hpp
 * @brief Modified Bregman iteration with an adaptive l1 weight, and the
 *        fast proximal gradient (FPG) inner solver it relies on.
 *
 * Outer iteration k solves
 *
 *   min_w  w'Cw - <p_k, w> + tau_k ||w||_1 + (lambda/2) ||Aw - b||^2
 *
 * by FPG warm-started at w_k, then updates the subgradient p and grows
 * tau by theta while the financial targets (short count, active count)
 * are violated, up to tau_max.
 */

#pragma once

#include "sparseport/problem.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace sparseport::solver
{

    using problem::MultiPeriodProblem;
    using problem::WeightTrajectory;

    /// How p is carried across a change of tau.
    enum class SubgradientRescale
    {
        /// p~ = r p + 2 (1 - r) C w, r = tau_new / tau_prev. Keeps p~ in dJ_new(w).
        exact,
        /// p~ = r p + (1 - r) C w, the variant without the factor 2.
        legacy,
    };

    /// How p_{k+1} is formed after an inner solve.
    enum class SubgradientUpdate
    {
        /// p_{k+1} = 2 C w_{k+1} + q, with q the element of tau*d||w_{k+1}||_1
        /// certified by the last proximal step. Equals the residual form when
        /// the subproblem is solved exactly, and stays a true subgradient when
        /// it is not.
        prox_certificate,
        /// p_{k+1} = p_k - lambda A'(A w_{k+1} - b).
        residual,
    };

    struct SolverConfig
    {
        double lambda = 1.0;
        double tau0 = 1e-5;
        double tau_max = 0.5;
        double theta = 1.5;
        double tol_outer = 1e-4;
        std::size_t max_outer = 100;
        double tol_inner = 1e-5;
        std::size_t max_inner = 5000;
        double bt_shrink = 0.5;
        double step_init = 1.0;
        double zero_tol = 0.0;
        /// Inner solves inside bregman_solve also require the subproblem
        /// stationarity residual ||grad f(w) + q|| to be at most this fraction
        /// of the constraint term ||lambda A'(Aw - b)||. 0 disables the test.
        double inexact_ratio = 0.1;
        SubgradientRescale rescale = SubgradientRescale::exact;
        SubgradientUpdate update = SubgradientUpdate::prox_certificate;

        void validate() const;
    };

    struct Targets
    {
        std::size_t n_short = 0;
        std::size_t n_act = 1;

        /// No requirement: n_short = n_act = N.
        static Targets unconstrained(std::size_t dimension) { return {dimension, dimension}; }

        void validate(std::size_t dimension) const;
    };

    /// One record per outer iteration, emitted through the progress sink.
    struct IterationRecord
    {
        std::size_t k = 0; ///< 1-based outer iteration
        double tau = 0.0;  ///< tau used for this subproblem
        double residual = 0.0;
        std::size_t shorts = 0;
        std::size_t actives = 0;
        std::size_t inner_iterations = 0;
        bool inner_capped = false;
        bool target_violated = false;
    };

    struct SolveResult
    {
        WeightTrajectory w;
        double tau_f = 0.0;
        std::size_t outer_iterations = 0;
        std::vector<double> residual_history;
        std::vector<double> tau_history;
        std::vector<IterationRecord> iterations;
        std::size_t shorts = 0;
        std::size_t actives = 0;
        bool converged = false;
    };

    /// State right after the subgradient has been rescaled for the
    /// upcoming subproblem: p lies in d J_tau(w) when everything is exact.
    struct SubgradientState
    {
        std::size_t k = 0;
        double tau_prev = 0.0;
        double tau = 0.0;
        const Eigen::VectorXd &w;
        const Eigen::VectorXd &p;
    };

    struct SolveHooks
    {
        std::function<void(const IterationRecord &)> progress;
        std::function<void(const SubgradientState &)> subgradient;
    };

    /// Elementwise sgn(v) * (|v| - min(|v|, t)); entries with |v| <= t are exactly 0.
    Eigen::VectorXd soft_threshold(const Eigen::VectorXd &v, double t);
    double soft_threshold(double v, double t);

    /// f(w) = w'Cw - <p, w> + (lambda/2) ||Aw - b||^2
    double smooth_value(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                        const Eigen::VectorXd &p, double lambda);

    /// grad f(w) = 2Cw - p + lambda A'(Aw - b)
    Eigen::VectorXd smooth_gradient(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                                    const Eigen::VectorXd &p, double lambda);

    /// Phi(w) = f(w) + tau ||w||_1
    double subproblem_objective(const MultiPeriodProblem &problem, const Eigen::VectorXd &w,
                                const Eigen::VectorXd &p, double tau, double lambda);

    struct FpgResult
    {
        Eigen::VectorXd w;
        /// q in tau * d||w||_1 from the proximal step that produced w; empty
        /// when w is the unmodified starting point.
        std::optional<Eigen::VectorXd> l1_subgradient;
        std::size_t iterations = 0;
        bool capped = false;
        double objective = 0.0;
        /// ||grad f(w) + q||, the distance of 0 from dPhi(w) witnessed by q.
        double stationarity = 0.0;
        /// ||lambda A'(Aw - b)||
        double constraint_push = 0.0;
    };

    /// Objective value after each FPG iteration (iteration index, Phi(w_i)).
    using FpgTrace = std::function<void(std::size_t, double)>;

    /// Monotone FISTA with backtracking on Phi(w). Stops when the relative
    /// Euclidean step drops below config.tol_inner (and, if
    /// `inexact_ratio > 0`, stationarity <= inexact_ratio * constraint_push)
    /// or after config.max_inner iterations. The returned iterate is always a
    /// soft-threshold output (or w_start), so its zeros are exact.
    FpgResult fpg_solve(const MultiPeriodProblem &problem, const Eigen::VectorXd &p, double tau, double lambda,
                        const Eigen::VectorXd &w_start, const SolverConfig &config, const FpgTrace &trace = {},
                        double inexact_ratio = 0.0);

    /// (tau_new/tau_prev) p + c (1 - tau_new/tau_prev) C w, c = 2 (exact) or 1 (legacy).
    Eigen::VectorXd rescale_subgradient(const MultiPeriodProblem &problem, const Eigen::VectorXd &p,
                                        double tau_prev, double tau_new, const Eigen::VectorXd &w,
                                        SubgradientRescale variant = SubgradientRescale::exact);

    struct PositionCounts
    {
        std::size_t shorts = 0;
        std::size_t actives = 0;
    };

    /// shorts = #{w_i < -zero_tol}, actives = #{|w_i| > zero_tol}
    PositionCounts count_positions(const Eigen::VectorXd &w, double zero_tol);

    SolveResult bregman_solve(const MultiPeriodProblem &problem, const Targets &targets,
                              const SolverConfig &config, const SolveHooks &hooks = {});

} // namespace sparseport::solver
