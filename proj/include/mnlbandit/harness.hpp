#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mnlbandit/bandit.hpp"

namespace mnl {

struct ExperimentConfig {
    std::vector<std::string> algorithms = {"ofu-mnl-pp", "ofu-mle-mnl", "ucb-mnl", "ts-mnl"};
    int N = 50;
    int K = 5;
    int d = 5;
    double B = 1.0;
    long T = 3000;
    double delta = 0.1;
    int runs = 20;
    std::uint64_t seed = 1;
    double tau_multiplier = 1.0;
    BaselineOptions baseline;
    std::string out = "results.csv";
    int threads = 0;      // 0 = hardware concurrency
    bool timing = true;   // wall-clock per round; disable for byte-stable CSV

    void validate() const;
};

/// Flat key=value file; '#' starts a comment. Unknown keys are rejected.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});
ExperimentConfig apply_config_line(ExperimentConfig cfg, const std::string& key,
                                   const std::string& value);

struct AlgorithmSeries {
    std::string algo;
    std::vector<double> mean_cum_regret;  // length T
    std::vector<double> band2sd;          // length T
    std::vector<double> mean_round_ms;    // length T
    std::vector<double> warmup_frac;      // length T
};

struct AggregateResult {
    std::vector<AlgorithmSeries> series;          // config order
    std::vector<std::uint64_t> replica_seeds;     // per replica
    std::vector<std::uint64_t> stream_hashes;     // per replica (env stream)
    long T = 0;
};

/// Runs every algorithm on common random numbers within each replica; replicas
/// execute on a worker pool and are reduced in replica order.
AggregateResult run_experiment(const ExperimentConfig& cfg);

/// Header: algo,t,mean_cum_regret,band2sd,mean_round_ms,warmup_frac with
/// 12-significant-digit decimals.
std::string render_csv(const AggregateResult& result);
void emit_csv(const AggregateResult& result, const std::string& path);

/// All resolved parameters plus per-replica seeds and stream hashes, written
/// next to the CSV as `<out>.manifest`.
std::string render_manifest(const ExperimentConfig& cfg, const AggregateResult& result);
void write_manifest(const ExperimentConfig& cfg, const AggregateResult& result,
                    const std::string& csv_path);

}  // namespace mnl
