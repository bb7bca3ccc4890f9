#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mnlbandit/checks.hpp"
#include "mnlbandit/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"MNL contextual bandit laboratory"};
    app.require_subcommand(1);

    // run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run a regret/runtime experiment and emit CSV");
    std::string config_path;
    std::vector<std::string> algos;
    mnl::ExperimentConfig defaults;
    long T = -1;
    int d = -1, N = -1, K = -1, runs = -1, threads = -1;
    double B = -1.0, delta = -1.0, tau_mult = -1.0, alpha0_scale = -1.0, lambda0 = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false, no_timing = false;
    std::string out;

    run->add_option("--config", config_path, "Flat key=value config file");
    run->add_option("--algo", algos,
                    "Algorithm (repeatable): ofu-mnl-pp, ofu-mle-mnl, ucb-mnl, ts-mnl");
    run->add_option("--T", T, "Horizon");
    run->add_option("--d", d, "Feature dimension");
    run->add_option("--N", N, "Items per round");
    run->add_option("--K", K, "Maximum assortment size");
    run->add_option("--B", B, "Parameter norm bound");
    run->add_option("--delta", delta, "Failure level");
    run->add_option("--runs", runs, "Independent replicas");
    run->add_option("--seed", seed, "Base seed")->each([&](const std::string&) { seed_set = true; });
    run->add_option("--tau-mult", tau_mult, "Warm-up threshold multiplier");
    run->add_option("--alpha0-scale", alpha0_scale, "Baseline bonus scale");
    run->add_option("--lambda0", lambda0, "Baseline design-matrix regularizer");
    run->add_option("--threads", threads, "Worker threads (0 = hardware)");
    run->add_option("--out", out, "Output CSV path");
    run->add_flag("--no-timing", no_timing, "Skip per-round timing (byte-stable CSV)");

    // verify ------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "Run the property/oracle suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            mnl::ExperimentConfig cfg =
                config_path.empty() ? defaults : mnl::load_config_file(config_path, defaults);
            // Flags win over the config file.
            if (!algos.empty()) cfg.algorithms = algos;
            if (T >= 0) cfg.T = T;
            if (d >= 0) cfg.d = d;
            if (N >= 0) cfg.N = N;
            if (K >= 0) cfg.K = K;
            if (B >= 0.0) cfg.B = B;
            if (delta >= 0.0) cfg.delta = delta;
            if (runs >= 0) cfg.runs = runs;
            if (seed_set) cfg.seed = seed;
            if (tau_mult >= 0.0) cfg.tau_multiplier = tau_mult;
            if (alpha0_scale >= 0.0) cfg.baseline.alpha0_scale = alpha0_scale;
            if (lambda0 >= 0.0) cfg.baseline.lambda0 = lambda0;
            if (threads >= 0) cfg.threads = threads;
            if (!out.empty()) cfg.out = out;
            if (no_timing) cfg.timing = false;

            const mnl::AggregateResult result = mnl::run_experiment(cfg);
            mnl::emit_csv(result, cfg.out);
            mnl::write_manifest(cfg, result, cfg.out);
            std::printf("wrote %s and %s.manifest\n", cfg.out.c_str(), cfg.out.c_str());
            return 0;
        }
        if (verify->parsed()) {
            bool all_pass = true;
            for (const auto& res : mnl::checks::run_quick_suite()) {
                std::printf("[%s] %s: %s\n", res.pass ? "PASS" : "FAIL", res.name.c_str(),
                            res.detail.c_str());
                all_pass = all_pass && res.pass;
            }
            return all_pass ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
