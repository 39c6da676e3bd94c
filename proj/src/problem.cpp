/**
 * @file problem.cpp
 * @brief Blockwise constraint and covariance operators.
 */

#include "sparseport/problem.hpp"

#include <cmath>
#include <string>

namespace sparseport::problem
{

    namespace
    {
        const std::string kModule = "problem";

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

        Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
    } // namespace

    WeightTrajectory::WeightTrajectory(std::size_t n, std::size_t m)
        : flat_(Eigen::VectorXd::Zero(idx(n * m))), n_(n), m_(m)
    {
    }

    WeightTrajectory::WeightTrajectory(Eigen::VectorXd flat, std::size_t n)
        : flat_(std::move(flat)), n_(n)
    {
        if (n == 0 || static_cast<std::size_t>(flat_.size()) % n != 0)
            fail("weight vector length " + std::to_string(flat_.size()) + " is not a multiple of n=" + std::to_string(n));
        m_ = static_cast<std::size_t>(flat_.size()) / n;
    }

    WeightTrajectory WeightTrajectory::from_matrix(const Eigen::MatrixXd &periods_by_assets)
    {
        WeightTrajectory w(static_cast<std::size_t>(periods_by_assets.cols()),
                           static_cast<std::size_t>(periods_by_assets.rows()));
        for (std::size_t j = 0; j < w.m(); ++j)
            w.block(j) = periods_by_assets.row(idx(j)).transpose();
        return w;
    }

    Eigen::MatrixXd WeightTrajectory::as_matrix() const
    {
        Eigen::MatrixXd out(idx(m_), idx(n_));
        for (std::size_t j = 0; j < m_; ++j)
            out.row(idx(j)) = block(j).transpose();
        return out;
    }

    ConstraintMatrix::ConstraintMatrix(std::size_t n, std::vector<Eigen::VectorXd> growth)
        : n_(n), growth_(std::move(growth))
    {
        for (const auto &g : growth_)
            require_size(g, n_, "ConstraintMatrix growth vector");
    }

    Eigen::VectorXd ConstraintMatrix::apply(const Eigen::VectorXd &w) const
    {
        require_size(w, cols(), "A*w");
        const std::size_t periods = m();
        Eigen::VectorXd out(idx(periods + 1));
        const auto blk = [&](std::size_t j)
        { return w.segment(idx(j * n_), idx(n_)); };
        out(0) = blk(0).sum();
        for (std::size_t j = 1; j < periods; ++j)
            out(idx(j)) = blk(j).sum() - growth_[j - 1].dot(blk(j - 1));
        out(idx(periods)) = blk(periods - 1).sum();
        return out;
    }

    Eigen::VectorXd ConstraintMatrix::apply_transpose(const Eigen::VectorXd &y) const
    {
        require_size(y, rows(), "A'*y");
        const std::size_t periods = m();
        Eigen::VectorXd out(idx(cols()));
        for (std::size_t j = 0; j < periods; ++j)
        {
            auto blk = out.segment(idx(j * n_), idx(n_));
            // column block j is touched by row j (+1') and row j+1 (-(1+r_j)' or +1' for the terminal row)
            blk.setConstant(y(idx(j)));
            if (j + 1 < periods)
                blk -= y(idx(j + 1)) * growth_[j];
            else
                blk.array() += y(idx(periods));
        }
        return out;
    }

    std::size_t ConstraintMatrix::nonzeros() const
    {
        return 2 * m() * n_;
    }

    Eigen::MatrixXd ConstraintMatrix::to_dense() const
    {
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(idx(rows()), idx(cols()));
        const std::size_t periods = m();
        dense.block(0, 0, 1, idx(n_)).setOnes();
        for (std::size_t j = 1; j < periods; ++j)
        {
            dense.block(idx(j), idx(j * n_), 1, idx(n_)).setOnes();
            dense.block(idx(j), idx((j - 1) * n_), 1, idx(n_)) = -growth_[j - 1].transpose();
        }
        dense.block(idx(periods), idx((periods - 1) * n_), 1, idx(n_)).setOnes();
        return dense;
    }

    Constraints assemble_constraints(const MarketModel &model, double xi_init, double xi_term)
    {
        if (model.m() < 1)
            fail("assemble_constraints: need at least one period");
        if (!(xi_init > 0.0))
            fail("assemble_constraints: xi_init must be positive");
        if (!std::isfinite(xi_term))
            fail("assemble_constraints: xi_term must be finite");
        const std::size_t n = model.n();
        std::vector<Eigen::VectorXd> growth;
        growth.reserve(model.m() - 1);
        for (std::size_t j = 0; j + 1 < model.m(); ++j)
        {
            require_size(model.returns[j], n, "assemble_constraints");
            growth.push_back(Eigen::VectorXd::Ones(idx(n)) + model.returns[j]);
        }
        Constraints c{ConstraintMatrix(n, std::move(growth)), Eigen::VectorXd::Zero(idx(model.m() + 1))};
        c.b(0) = xi_init;
        c.b(idx(model.m())) = xi_term;
        return c;
    }

    MultiPeriodProblem::MultiPeriodProblem(MarketModel model, double xi_init, double xi_term)
        : model_(std::move(model)), xi_init_(xi_init), xi_term_(xi_term)
    {
        model_.validate();
        constraints_ = assemble_constraints(model_, xi_init_, xi_term_);
    }

    Eigen::VectorXd MultiPeriodProblem::apply_covariance(const Eigen::VectorXd &w) const
    {
        require_size(w, dimension(), "C*w");
        const auto n = idx(this->n());
        Eigen::VectorXd out(w.size());
        for (std::size_t j = 0; j < m(); ++j)
            out.segment(idx(j) * n, n).noalias() = model_.covariances[j] * w.segment(idx(j) * n, n);
        return out;
    }

    Eigen::VectorXd MultiPeriodProblem::constraint_violation(const Eigen::VectorXd &w) const
    {
        return constraints_.a.apply(w) - constraints_.b;
    }

    double risk(const MarketModel &model, const Eigen::VectorXd &w)
    {
        require_size(w, model.n() * model.m(), "risk");
        const auto n = idx(model.n());
        double total = 0.0;
        for (std::size_t j = 0; j < model.m(); ++j)
        {
            const auto wj = w.segment(idx(j) * n, n);
            total += wj.dot(model.covariances[j] * wj);
        }
        return total;
    }

    double risk(const MarketModel &model, const WeightTrajectory &w)
    {
        if (w.n() != model.n() || w.m() != model.m())
            fail("risk: trajectory shape does not match model");
        return risk(model, w.flat());
    }

    double objective_j(const MultiPeriodProblem &problem, const Eigen::VectorXd &w, double tau)
    {
        if (tau < 0.0)
            fail("objective_j: tau must be non-negative");
        return risk(problem.model(), w) + tau * w.lpNorm<1>();
    }

    double residual(const MultiPeriodProblem &problem, const Eigen::VectorXd &w)
    {
        return problem.constraint_violation(w).norm();
    }

} // namespace sparseport::problem
