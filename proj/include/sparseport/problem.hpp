/**
 * @file problem.hpp
 * @brief Multi-period l1-regularised minimum-variance problem.
 *
 * Decision vector w = (w_1, ..., w_m), w_j in R^n, N = m*n.
 *
 *   minimise   sum_j w_j' C_j w_j + tau * ||w||_1
 *   subject to 1' w_1                       = xi_init
 *              1' w_j - (1 + r_{j-1})' w_{j-1} = 0,   j = 2..m
 *              1' w_m                       = xi_term
 *
 * The constraints are held as A w = b with A lower block-bidiagonal. Neither
 * A nor the block-diagonal covariance C is ever stored densely.
 */

#pragma once

#include "sparseport/market_data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sparseport::problem
{

    using data::MarketModel;

    /// Flat N-vector viewed as m stacked per-period blocks of n weights.
    class WeightTrajectory
    {
    public:
        WeightTrajectory() = default;
        WeightTrajectory(std::size_t n, std::size_t m);
        WeightTrajectory(Eigen::VectorXd flat, std::size_t n);

        /// Rows are periods, columns are assets.
        static WeightTrajectory from_matrix(const Eigen::MatrixXd &periods_by_assets);

        std::size_t n() const { return n_; }
        std::size_t m() const { return m_; }
        std::size_t size() const { return n_ * m_; }

        double operator()(std::size_t period, std::size_t asset) const { return flat_(index(period, asset)); }
        double &operator()(std::size_t period, std::size_t asset) { return flat_(index(period, asset)); }

        auto block(std::size_t period) const { return flat_.segment(static_cast<Eigen::Index>(period * n_), static_cast<Eigen::Index>(n_)); }
        auto block(std::size_t period) { return flat_.segment(static_cast<Eigen::Index>(period * n_), static_cast<Eigen::Index>(n_)); }

        const Eigen::VectorXd &flat() const { return flat_; }
        Eigen::VectorXd &flat() { return flat_; }

        Eigen::MatrixXd as_matrix() const;

    private:
        Eigen::Index index(std::size_t period, std::size_t asset) const
        {
            return static_cast<Eigen::Index>(period * n_ + asset);
        }

        Eigen::VectorXd flat_;
        std::size_t n_ = 0;
        std::size_t m_ = 0;
    };

    /// Lower block-bidiagonal (m+1) x (m*n) constraint matrix stored as its
    /// block rows. Row 0 is the budget row, rows 1..m-1 the self-financing
    /// rows, row m the terminal-wealth row. Within each row the later-period
    /// block carries +1'.
    class ConstraintMatrix
    {
    public:
        ConstraintMatrix() = default;
        ConstraintMatrix(std::size_t n, std::vector<Eigen::VectorXd> growth);

        std::size_t n() const { return n_; }
        std::size_t m() const { return growth_.size() + 1; }
        std::size_t rows() const { return m() + 1; }
        std::size_t cols() const { return n_ * m(); }

        /// Gross growth vector 1 + r_j used in self-financing row j+1.
        const Eigen::VectorXd &growth(std::size_t period) const { return growth_[period]; }

        Eigen::VectorXd apply(const Eigen::VectorXd &w) const;
        Eigen::VectorXd apply_transpose(const Eigen::VectorXd &y) const;

        /// Number of structurally nonzero entries (2*m*n).
        std::size_t nonzeros() const;

        Eigen::MatrixXd to_dense() const;

    private:
        std::size_t n_ = 0;
        std::vector<Eigen::VectorXd> growth_;
    };

    struct Constraints
    {
        ConstraintMatrix a;
        Eigen::VectorXd b;
    };

    Constraints assemble_constraints(const MarketModel &model, double xi_init, double xi_term);

    class MultiPeriodProblem
    {
    public:
        MultiPeriodProblem(MarketModel model, double xi_init, double xi_term);

        const MarketModel &model() const { return model_; }
        double xi_init() const { return xi_init_; }
        double xi_term() const { return xi_term_; }
        std::size_t n() const { return model_.n(); }
        std::size_t m() const { return model_.m(); }
        std::size_t dimension() const { return n() * m(); }

        const ConstraintMatrix &a() const { return constraints_.a; }
        const Eigen::VectorXd &b() const { return constraints_.b; }

        /// C w with C = diag(C_1, ..., C_m), computed per block.
        Eigen::VectorXd apply_covariance(const Eigen::VectorXd &w) const;

        /// A w - b.
        Eigen::VectorXd constraint_violation(const Eigen::VectorXd &w) const;

    private:
        MarketModel model_;
        double xi_init_;
        double xi_term_;
        Constraints constraints_;
    };

    /// sum_j w_j' C_j w_j
    double risk(const MarketModel &model, const WeightTrajectory &w);
    double risk(const MarketModel &model, const Eigen::VectorXd &w);

    /// w' C w + tau * ||w||_1
    double objective_j(const MultiPeriodProblem &problem, const Eigen::VectorXd &w, double tau);

    /// ||A w - b||_2 (not H = 0.5 * residual^2).
    double residual(const MultiPeriodProblem &problem, const Eigen::VectorXd &w);

} // namespace sparseport::problem
