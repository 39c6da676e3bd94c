// sparseport: sparse multi-period portfolio selection from the command line.
//
//   sparseport solve   --config run.json [--override solver.theta=1 ...]
//   sparseport compare --config a.json b.json [--output table.csv] [--format csv|json]
//   sparseport config  --config run.json      (print the effective config)
//
// Exit status: 0 success, 2 solver hit max_outer, 1 any error.

#include "sparseport/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{
    using namespace sparseport;

    std::vector<cli::RunConfig> load_all(const std::vector<std::string> &paths, const std::vector<std::string> &overrides)
    {
        std::vector<cli::RunConfig> configs;
        for (const auto &p : paths)
            configs.push_back(cli::load_run_config(p, overrides));
        return configs;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Sparse multi-period portfolio selection"};
    app.require_subcommand(1);

    std::vector<std::string> overrides;
    std::string solve_config;
    auto *solve = app.add_subcommand("solve", "Run one configuration");
    solve->add_option("--config", solve_config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    solve->add_option("--override", overrides, "Set a config value, e.g. solver.theta=1 (repeatable)");

    std::vector<std::string> compare_configs;
    std::string compare_output;
    std::string compare_format = "csv";
    bool sequential = false;
    auto *compare = app.add_subcommand("compare", "Run several configurations and tabulate them together");
    compare->add_option("--config", compare_configs, "JSON run configurations")->required()->check(CLI::ExistingFile);
    compare->add_option("--override", overrides, "Applied to every configuration (repeatable)");
    compare->add_option("--output", compare_output, "Write the combined table here instead of stdout");
    compare->add_option("--format", compare_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    compare->add_flag("--sequential", sequential, "Run configurations one after another");

    std::string show_config;
    auto *config = app.add_subcommand("config", "Print the effective configuration with defaults filled in");
    config->add_option("--config", show_config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    config->add_option("--override", overrides, "Set a config value (repeatable)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? cli::kSuccess : cli::kError;
    }

    try
    {
        if (*solve)
            return cli::cmd_solve(cli::load_run_config(solve_config, overrides), std::cout, std::cerr);
        if (*compare)
        {
            cli::CompareOptions options;
            if (!compare_output.empty())
                options.output_path = compare_output;
            options.format = compare_format == "json" ? cli::OutputFormat::json : cli::OutputFormat::csv;
            options.parallel = !sequential;
            return cli::cmd_compare(load_all(compare_configs, overrides), options, std::cout, std::cerr);
        }
        std::cout << cli::load_run_config(show_config, overrides).to_json().dump(2) << '\n';
        return cli::kSuccess;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kError;
    }
}
