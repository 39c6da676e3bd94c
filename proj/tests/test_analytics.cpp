#include "sparseport/analytics.hpp"
#include "sparseport/report_io.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace sparseport;
using namespace sparseport::analytics;

namespace
{
    data::MarketModel returns_only(const std::vector<std::vector<double>> &returns)
    {
        data::MarketModel model;
        for (const auto &r : returns)
        {
            model.returns.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
            model.covariances.push_back(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.size())));
            model.jitter.push_back(0.0);
        }
        return model;
    }

    data::MarketModel random_returns(std::size_t n, std::size_t m, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-0.2, 0.3);
        std::vector<std::vector<double>> returns(m, std::vector<double>(n));
        for (auto &row : returns)
            for (auto &v : row)
            {
                do
                    v = u(rng);
                while (v == 0.0);
            }
        return returns_only(returns);
    }

    // Wealth recursion written out with plain loops.
    std::vector<double> hand_wealth_path(const data::MarketModel &model, double xi_init)
    {
        std::vector<double> wealth = {xi_init};
        for (std::size_t j = 0; j < model.m(); ++j)
        {
            const double per_asset = wealth.back() / static_cast<double>(model.n());
            double next = 0.0;
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(model.n()); ++i)
                next += per_asset * (1.0 + model.returns[j](i));
            wealth.push_back(next);
        }
        return wealth;
    }

    solver::SolveResult result_from(const WeightTrajectory &w)
    {
        solver::SolveResult r;
        r.w = w;
        r.tau_f = 0.01;
        r.outer_iterations = 3;
        r.converged = true;
        return r;
    }
} // namespace

TEST_CASE("naive trajectory with zero returns is flat")
{
    const data::MarketModel model = returns_only({{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}});
    const WeightTrajectory w = naive_trajectory(model, 1.0);
    CHECK((w.flat().array() == 0.25).all());
    CHECK(naive_wealth(model, 1.0) == 1.0);
}

TEST_CASE("naive benchmark on the two-asset, two-period fixture")
{
    const data::MarketModel model = returns_only({{0.1, 0.3}, {0.2, -0.1}});
    const WeightTrajectory w = naive_trajectory(model, 1.0);
    CHECK(std::abs(w(0, 0) - 0.5) <= 1e-12);
    CHECK(std::abs(w(0, 1) - 0.5) <= 1e-12);
    CHECK(std::abs(w(1, 0) - 0.6) <= 1e-12);
    CHECK(std::abs(w(1, 1) - 0.6) <= 1e-12);
    // 0.6 * 1.2 + 0.6 * 0.9
    CHECK(std::abs(naive_wealth(model, 1.0) - 1.26) <= 1e-12);
}

TEST_CASE("naive wealth examples")
{
    CHECK(std::abs(naive_wealth(returns_only({{0.1}, {0.2}}), 1.0) - 1.32) <= 1e-12);
    CHECK(std::abs(naive_wealth(returns_only({{0.1, 0.3}}), 1.0) - 1.2) <= 1e-12);
    CHECK_THROWS_AS(naive_wealth(returns_only({{0.1}}), 0.0), Error);
}

TEST_CASE("naive benchmark follows the hand recursion and the first m constraints")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const data::MarketModel model = testing::random_model(3 + seed % 6, 1 + seed % 5, seed);
        const double xi = 0.5 + static_cast<double>(seed);
        const std::vector<double> path = hand_wealth_path(model, xi);
        const WeightTrajectory w = naive_trajectory(model, xi);
        for (std::size_t j = 0; j < model.m(); ++j)
            CHECK(std::abs(w.block(j).sum() - path[j]) <= 1e-12 * path[j]);
        CHECK(std::abs(naive_wealth(model, xi) - path.back()) <= 1e-12 * path.back());

        const problem::MultiPeriodProblem p(model, xi, 123.0);
        Eigen::VectorXd violation = p.constraint_violation(w.flat());
        violation(violation.size() - 1) = 0.0;
        CHECK(violation.norm() <= 1e-12 * xi);

        const problem::MultiPeriodProblem closed(model, xi, naive_wealth(model, xi));
        const auto last = w.block(model.m() - 1);
        CHECK(std::abs(last.dot(Eigen::VectorXd::Ones(last.size()) + model.returns.back()) - naive_wealth(model, xi)) <= 1e-12 * xi);

        CHECK(std::abs(naive_wealth(model, 2.0 * xi) - 2.0 * naive_wealth(model, xi)) <= 1e-12 * naive_wealth(model, xi));
    }
}

TEST_CASE("position counts on trajectories")
{
    CHECK(count_positions(WeightTrajectory(3, 2), 0.0).actives == 0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        WeightTrajectory w(7, 3);
        std::size_t shorts = 0, actives = 0;
        for (std::size_t k = 0; k < w.size(); ++k)
        {
            const int kind = static_cast<int>((k * 7 + static_cast<std::size_t>(trial)) % 3);
            if (kind == 0)
                continue;
            w.flat()(static_cast<Eigen::Index>(k)) = kind == 1 ? u(rng) : -u(rng);
            ++actives;
            shorts += kind == 2;
        }
        const auto c = count_positions(w, 0.0);
        CHECK(c.shorts == shorts);
        CHECK(c.actives == actives);
    }
}

TEST_CASE("transaction matrix counts initial purchases then changes")
{
    Eigen::MatrixXd periods(3, 3);
    periods << 1.0, 0.0, 0.5,
        1.0, 0.2, 0.0,
        0.7, 0.2, 0.0;
    const WeightTrajectory w = WeightTrajectory::from_matrix(periods);
    Eigen::MatrixXi expected(3, 3);
    expected << 1, 0, 1,
        0, 1, 0,
        1, 1, 0;
    CHECK(transaction_matrix(w) == expected);
    CHECK(transactions(w) == 5);
    CHECK(transactions(w, 0.25) == 4);
    CHECK(transactions(w, 10.0) == 0);
    CHECK_THROWS_AS(transactions(w, -1.0), Error);
}

TEST_CASE("constant and empty trajectories")
{
    Eigen::MatrixXd constant(4, 5);
    for (int j = 0; j < 4; ++j)
        constant.row(j) << 0.3, 0.0, -0.1, 0.0, 0.8;
    CHECK(transactions(WeightTrajectory::from_matrix(constant)) == 3);
    CHECK(transactions(WeightTrajectory(6, 4)) == 0);
}

TEST_CASE("transactions never increase with the comparison tolerance")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        WeightTrajectory w(5, 4);
        for (std::size_t k = 0; k < w.size(); ++k)
            if (k % 3 != 0)
                w.flat()(static_cast<Eigen::Index>(k)) = normal(rng);
        std::size_t previous = transactions(w, 0.0);
        for (double tol : {1e-6, 1e-3, 0.1, 0.5, 1.0, 3.0})
        {
            const std::size_t t = transactions(w, tol);
            CHECK(t <= previous);
            previous = t;
        }
    }
}

TEST_CASE("naive transaction counts equal n*m for every benchmark shape")
{
    const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> shapes = {
        {48, 10, 480}, {48, 20, 960}, {48, 30, 1440}, {96, 10, 960},
        {96, 20, 1920}, {96, 30, 2880}, {50, 22, 1100}, {50, 6, 300}};
    std::uint64_t seed = 1;
    for (const auto &[n, m, expected] : shapes)
    {
        const data::MarketModel model = random_returns(n, m, seed++);
        CHECK(transactions(naive_trajectory(model, 1.0)) == expected);
        CHECK(n * m == expected);
    }
}

TEST_CASE("report on the naive trajectory has ratio one")
{
    const data::MarketModel model = testing::planted_factor_model();
    const problem::MultiPeriodProblem p(model, 1.0, naive_wealth(model, 1.0));
    const WeightTrajectory naive = naive_trajectory(model, 1.0);
    const StrategyReport r = build_report(p, result_from(naive), solver::Targets::unconstrained(40), solver::SolverConfig{}, "self");
    CHECK(r.risk_ratio == 1.0);
    CHECK(r.transactions_optimal == r.transactions_naive);
    CHECK(r.transactions_naive == 40);
    // the terminal row asks for post-revaluation wealth, the naive last block holds pre-revaluation wealth
    CHECK(std::abs(r.residual_final - std::abs(naive.block(3).sum() - naive_wealth(model, 1.0))) <= 1e-12);
    CHECK(r.sparsity_pct == 0.0);
    CHECK(r.shorts == 0);
}

TEST_CASE("report fields match metrics recomputed from raw weights")
{
    const data::MarketModel model = testing::planted_factor_model();
    const double xi_term = naive_wealth(model, 1.0);
    const problem::MultiPeriodProblem p(model, 1.0, xi_term);
    const solver::Targets targets{4, 12};
    solver::SolverConfig config;
    const solver::SolveResult result = solver::bregman_solve(p, targets, config);
    const StrategyReport r = build_report(p, result, targets, config, "synthetic");

    const Eigen::VectorXd &w = result.w.flat();
    std::size_t shorts = 0, actives = 0, trades = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
    {
        shorts += w(i) < 0.0;
        actives += w(i) != 0.0;
    }
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 10; ++i)
            trades += result.w(j, i) != (j == 0 ? 0.0 : result.w(j - 1, i));
    double risk_opt = 0.0, risk_naive = 0.0;
    const WeightTrajectory naive = naive_trajectory(model, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
    {
        risk_opt += result.w.block(j).dot(model.covariances[j] * result.w.block(j));
        risk_naive += naive.block(j).dot(model.covariances[j] * naive.block(j));
    }

    CHECK(r.period_label == "synthetic");
    CHECK(r.shorts == shorts);
    CHECK(r.actives == actives);
    CHECK(r.shorts_pct == doctest::Approx(100.0 * static_cast<double>(shorts) / 40.0));
    CHECK(r.sparsity_pct + 100.0 * static_cast<double>(actives) / 40.0 == doctest::Approx(100.0));
    CHECK(r.transactions_optimal == trades);
    CHECK(r.transactions_naive == 40);
    CHECK(r.risk_optimal == doctest::Approx(risk_opt).epsilon(1e-12));
    CHECK(r.risk_naive == doctest::Approx(risk_naive).epsilon(1e-12));
    CHECK(r.risk_ratio == doctest::Approx(risk_naive / risk_opt).epsilon(1e-12));
    CHECK(r.xi_term_target == xi_term);
    CHECK(r.residual_final == doctest::Approx(result.residual_history.back()).epsilon(1e-9));
    CHECK(r.tau_f == result.tau_f);
    CHECK(r.outer_iterations == result.outer_iterations);
    CHECK(r.actives_excess == (actives > 12 ? actives - 12 : 0));
    CHECK(r.shorts_excess == (shorts > 4 ? shorts - 4 : 0));
    CHECK(r.tau_capped == ((r.actives_excess > 0 || r.shorts_excess > 0) && result.tau_f >= config.tau_max));
    CHECK(r.shorts_pct >= 0.0);
    CHECK(r.sparsity_pct <= 100.0);
}

TEST_CASE("zero optimal risk gives an infinite, flagged ratio")
{
    const data::MarketModel model = testing::planted_factor_model();
    const problem::MultiPeriodProblem p(model, 1.0, 1.0);
    const StrategyReport r = build_report(p, result_from(WeightTrajectory(10, 4)), solver::Targets::unconstrained(40),
                                          solver::SolverConfig{}, "empty");
    CHECK(std::isinf(r.risk_ratio));
    CHECK_FALSE(r.risk_ratio_finite);
    CHECK(r.sparsity_pct == 100.0);
    CHECK(report_to_json(r)["risk_ratio"].is_null());
    CHECK_THROWS_AS(build_report(p, result_from(WeightTrajectory(5, 4)), solver::Targets::unconstrained(40),
                                 solver::SolverConfig{}, "bad"),
                    Error);
}

TEST_CASE("number formatting round-trips")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 200; ++i)
    {
        const double v = normal(rng) * std::pow(10.0, i % 20 - 10);
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
}

TEST_CASE("report and weights serialisation")
{
    StrategyReport r;
    r.period_label = "July 2005, 10y";
    r.n = 48;
    r.m = 10;
    r.risk_ratio = 2.5;
    std::ostringstream csv;
    write_report_csv({r, r}, csv);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header.rfind("period_label,n,m,tau_f", 0) == 0);
    CHECK(row.rfind("\"July 2005, 10y\",48,10,", 0) == 0);
    CHECK(report_fields(r).size() == report_columns().size());

    std::ostringstream js;
    write_report_json({r}, js);
    const auto parsed = nlohmann::json::parse(js.str());
    REQUIRE(parsed.is_array());
    CHECK(parsed[0]["risk_ratio"] == 2.5);
    CHECK(parsed[0]["period_label"] == "July 2005, 10y");
    for (const auto &c : report_columns())
        CHECK(parsed[0].contains(c));

    Eigen::MatrixXd periods(2, 3);
    periods << 0.5, 0.0, 0.5, -0.25, 1.0, 0.375;
    std::ostringstream weights;
    write_weights_csv(WeightTrajectory::from_matrix(periods), {"a", "b", "c"}, {"2020-01", "2021-01"}, weights);
    CHECK(weights.str() == "period,a,b,c\n2020-01,0.5,0,0.5\n2021-01,-0.25,1,0.375\n");
    CHECK_THROWS_AS(write_weights_csv(WeightTrajectory::from_matrix(periods), {"a"}, {"x", "y"}, weights), Error);
}

TEST_CASE("diagnostic lines")
{
    solver::IterationRecord rec;
    rec.k = 3;
    rec.tau = 1.5e-5;
    rec.residual = 0.25;
    rec.shorts = 2;
    rec.actives = 9;
    rec.inner_iterations = 41;
    rec.target_violated = true;
    CHECK(diagnostics_line(rec) == "3,1.5e-05,0.25,2,9,41,false,true");
    const std::string header = diagnostics_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 7);
}
