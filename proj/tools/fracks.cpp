#include "fracks/cli.hpp"
#include "fracks/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace fracks;
    CLI::App app{"fracks: experiments for the fractional chemotaxis model"};
    app.require_subcommand(1);

    std::string config_path, out_dir, gamma_sign;
    std::uint64_t seed = 0;
    bool seed_given = false;

    for (const std::string& name : experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "INI or JSON config file")->required();
        sub->add_option("--seed", seed, "seed for ensembles and perturbations")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--gamma-sign", gamma_sign, "sign of gamma in the symbol")
            ->check(CLI::IsMember({"paper", "damped"}));
    }
    CLI::App* index = app.add_subcommand("index", "rebuild index.md in an output directory");
    index->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (index->parsed()) {
        const std::size_t rows = report_index(out_dir);
        std::cout << rows << " checks indexed in " << out_dir << "/index.md\n";
        return 0;
    }

    RunConfig cfg;
    try {
        const Experiment exp = parse_experiment(app.get_subcommands().front()->get_name());
        cfg = load_config(config_path, exp);
        if (seed_given) cfg.seed = seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!gamma_sign.empty()) cfg.model.gamma_sign = parse_gamma_sign(gamma_sign);
        cfg.finalize();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto reports = run(cfg, std::cout);
        report_index(cfg.output_dir);
        return exit_status(reports);
    } catch (const std::exception& e) {
        std::cerr << "error " << e.what() << '\n';
        return 1;
    }
}
