#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "midgcn/midgcn.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
};

void add_common_options(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_path, "experiment config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", state.seed, "replace the config's seed list with this single seed");
    sub->add_option("--out", state.out_dir, "output directory (overrides config)");
    sub->add_option("--threads", state.threads, "worker threads for seed/rate fan-out");
}

midgcn::ExperimentConfig resolve_config(const CliState& state) {
    midgcn::ExperimentConfig config = midgcn::load_experiment_config(state.config_path);
    if (state.seed) config.seeds = {*state.seed};
    if (state.out_dir) config.out_dir = *state.out_dir;
    if (state.threads) config.threads = *state.threads;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mid-pass graph filtering and robustness toolkit"};
    app.require_subcommand(1);
    CliState state;

    CLI::App* spectrum = app.add_subcommand("spectrum", "Laplacian spectra and band shift stats");
    CLI::App* train = app.add_subcommand("train", "train the configured classifier per seed");
    CLI::App* attack = app.add_subcommand("attack", "generate a structural or feature attack");
    CLI::App* analyze = app.add_subcommand("analyze", "graph diagnostics bundle");
    CLI::App* compare = app.add_subcommand("compare", "model vs baseline accuracy grid");
    for (CLI::App* sub : {spectrum, train, attack, analyze, compare}) add_common_options(sub, state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const midgcn::ExperimentConfig config = resolve_config(state);
        if (spectrum->parsed()) midgcn::cmd_spectrum(config);
        else if (train->parsed()) midgcn::cmd_train(config);
        else if (attack->parsed()) midgcn::cmd_attack(config);
        else if (analyze->parsed()) midgcn::cmd_analyze(config);
        else if (compare->parsed()) midgcn::cmd_compare(config);
        return 0;
    } catch (const midgcn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const midgcn::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const midgcn::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
