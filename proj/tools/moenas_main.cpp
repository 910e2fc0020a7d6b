#include <iostream>

#include <CLI11.hpp>

#include "moenas/cli.hpp"
#include "moenas/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-assisted multiobjective search over encoder-decoder architectures"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = "out";

    auto* run = app.add_subcommand("run", "Run the search and write log, checkpoints, NDS CSV and summary");
    std::optional<std::uint64_t> seed;
    std::optional<int> stop_after;
    run->add_option("--config", config, "Configuration file")->required();
    run->add_option("--seed", seed, "Override engine.seed");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--stop-after", stop_after, "Stop after this generation (resume later)");

    auto* oracle = app.add_subcommand("oracle", "Enumerate the space and write the true Pareto front");
    oracle->add_option("--config", config, "Configuration file")->required();
    oracle->add_option("--out", out_dir, "Output directory")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Compare variants over several seeds");
    std::string variants = "samea,mea,random";
    std::string seeds = "0..4";
    bench->add_option("--config", config, "Configuration file")->required();
    bench->add_option("--variants", variants, "Comma-separated subset of samea,mea,random")->capture_default_str();
    bench->add_option("--seeds", seeds, "Seed range a..b or comma-separated list")->capture_default_str();
    bench->add_option("--out", out_dir, "Output directory")->capture_default_str();

    auto* resume = app.add_subcommand("resume", "Continue a run from its checkpoint");
    std::string checkpoint;
    resume->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? moenas::kExitOk : moenas::kExitUsage;
    }

    if (*run) {
        return moenas::cmd_run(config, seed, out_dir, stop_after, std::cout, std::cerr);
    }
    if (*oracle) {
        return moenas::cmd_oracle(config, out_dir, std::cout, std::cerr);
    }
    if (*bench) {
        try {
            const auto v = moenas::parse_variant_list(variants);
            const auto s = moenas::parse_seed_list(seeds);
            return moenas::cmd_bench(config, v, s, out_dir, std::cout, std::cerr);
        } catch (const moenas::ConfigError& ex) {
            std::cerr << "usage error: " << ex.what() << '\n';
            return moenas::kExitUsage;
        }
    }
    return moenas::cmd_resume(checkpoint, std::cout, std::cerr);
}
