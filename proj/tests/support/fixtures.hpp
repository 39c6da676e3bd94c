#pragma once

// Files on disk for end-to-end tests: a scratch directory and a synthetic
// monthly returns CSV with a one-factor structure.

#include "sparseport/market_data.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

namespace sparseport::testing
{

    class TempDir
    {
    public:
        explicit TempDir(const std::string &tag)
            : path_(std::filesystem::temp_directory_path() /
                    ("sparseport_" + tag + "_" + std::to_string(::getpid())))
        {
            std::filesystem::remove_all(path_);
            std::filesystem::create_directories(path_);
        }
        ~TempDir() { std::filesystem::remove_all(path_); }
        TempDir(const TempDir &) = delete;
        TempDir &operator=(const TempDir &) = delete;

        const std::filesystem::path &path() const { return path_; }
        std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

    private:
        std::filesystem::path path_;
    };

    /// `rows` monthly observations from January 1995 for `n` assets.
    inline data::ReturnsTable synthetic_monthly_table(std::size_t n, std::size_t rows, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> beta(n), alpha(n), idio(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            beta[i] = 1.0 + 0.3 * normal(rng);
            alpha[i] = 0.002 * normal(rng);
            idio[i] = 0.02 + 0.01 * static_cast<double>(i % 4);
        }
        data::ReturnsTable t;
        for (std::size_t i = 0; i < n; ++i)
            t.assets.push_back("S" + std::to_string(i + 1));
        t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < rows; ++r)
        {
            t.dates.push_back(data::Date{1995 + static_cast<int>(r / 12), static_cast<int>(r % 12) + 1, 0});
            const double market = 0.008 + 0.045 * normal(rng);
            for (std::size_t i = 0; i < n; ++i)
                t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
                    alpha[i] + beta[i] * market + idio[i] * normal(rng);
        }
        return t;
    }

    inline void write_table(const data::ReturnsTable &table, const std::filesystem::path &path)
    {
        std::ofstream out(path);
        data::write_returns(table, out);
    }

    /// Yearly rebalancing over `periods` years, ten-year lookback, annualised moments.
    inline nlohmann::json base_config(const std::filesystem::path &data_path, std::size_t periods = 6)
    {
        return {
            {"label", "synthetic"},
            {"data", {{"path", data_path.string()}}},
            {"estimation", {{"schedule", {{"first", "2005-01"}, {"periods", periods}, {"step", 12}}}, {"lookback_window", 120}, {"horizon", 12}}},
            {"targets", {{"n_act", {{"fraction", 0.3}}}, {"n_short", {{"fraction", 1.0}}}}},
        };
    }

    inline void write_json(const nlohmann::json &doc, const std::filesystem::path &path)
    {
        std::ofstream out(path);
        out << doc.dump(2);
    }

    inline std::string read_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

} // namespace sparseport::testing
