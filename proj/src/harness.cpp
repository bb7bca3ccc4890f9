#include "mnlbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace mnl {

namespace {

// Canonical algorithm ids keep choice-noise substreams stable across --algo
// subsets of the same seed.
int canonical_algo_id(const std::string& algo) {
    if (algo == "ofu-mnl-pp") return 0;
    if (algo == "ofu-mle-mnl") return 1;
    if (algo == "ucb-mnl") return 2;
    if (algo == "ts-mnl") return 3;
    throw std::invalid_argument("unknown algorithm: " + algo);
}

std::uint64_t fnv1a_update(std::uint64_t h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_double(std::uint64_t h, double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    return fnv1a_update(h, bits);
}

struct ReplicaOutput {
    // [algo index][t]
    std::vector<std::vector<double>> cum_regret;
    std::vector<std::vector<double>> round_ms;
    std::vector<std::vector<std::uint8_t>> warmup;
    std::uint64_t env_seed = 0;
    std::uint64_t stream_hash = 0;
};

ReplicaOutput run_replica(const ExperimentConfig& cfg, int replica) {
    ReplicaOutput out;
    out.env_seed = derive_seed(cfg.seed, 0x656e76ULL, static_cast<std::uint64_t>(replica));
    Rng env_rng(out.env_seed);

    EnvironmentConfig env;
    env.N = cfg.N;
    env.K = cfg.K;
    env.d = cfg.d;
    env.B = cfg.B;
    env.T = cfg.T;
    env.seed = out.env_seed;

    const MnlParameter w_star(env_rng.uniform_ball(cfg.d, cfg.B), cfg.B);

    // Common random numbers: one context/reward stream per replica, shared by
    // every algorithm. Choice noise cannot be shared (choices depend on the
    // offered assortment), so each algorithm draws from its own substream.
    std::vector<RoundContext> stream;
    stream.reserve(cfg.T);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (long t = 0; t < cfg.T; ++t) {
        stream.push_back(env_step(env, env_rng));
        const RoundContext& ctx = stream.back();
        for (int i = 0; i < cfg.N; ++i) {
            for (int j = 0; j < cfg.d; ++j) h = hash_double(h, ctx.features(i, j));
            h = hash_double(h, ctx.rewards(i));
        }
    }
    out.stream_hash = h;

    const std::size_t n_algos = cfg.algorithms.size();
    out.cum_regret.assign(n_algos, std::vector<double>(cfg.T, 0.0));
    out.round_ms.assign(n_algos, std::vector<double>(cfg.T, 0.0));
    out.warmup.assign(n_algos, std::vector<std::uint8_t>(cfg.T, 0));

    for (std::size_t a = 0; a < n_algos; ++a) {
        const std::string& algo = cfg.algorithms[a];
        Rng choice_rng(derive_seed(cfg.seed, 0x616c67ULL + canonical_algo_id(algo),
                                   static_cast<std::uint64_t>(replica)));
        auto agent = make_agent(algo, env, cfg.delta, cfg.tau_multiplier, cfg.baseline);
        double cum = 0.0;
        for (long t = 0; t < cfg.T; ++t) {
            const RoundContext& ctx = stream[t];
            const auto start = std::chrono::steady_clock::now();
            const Assortment offered = agent->select(ctx, choice_rng);
            const ChoiceOutcome outcome = sample_choice(ctx, offered, w_star.w, choice_rng);
            agent->update(ctx, offered, outcome);
            const auto stop = std::chrono::steady_clock::now();

            // Diagnostics and trace bookkeeping stay outside the timed span.
            const Diagnostics diag = regret_and_diagnostics(ctx, offered, w_star, cfg.K);
            cum += diag.inst_regret;
            out.cum_regret[a][t] = cum;
            if (cfg.timing)
                out.round_ms[a][t] =
                    std::chrono::duration<double, std::milli>(stop - start).count();
            out.warmup[a][t] = agent->last_round_was_warmup() ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (algorithms.empty()) throw std::invalid_argument("config: no algorithms");
    for (const auto& a : algorithms) canonical_algo_id(a);
    if (N < 1 || K < 1 || K > N) throw std::invalid_argument("config: need 1 <= K <= N");
    if (d < 1) throw std::invalid_argument("config: d >= 1");
    if (B <= 0.0) throw std::invalid_argument("config: B > 0");
    if (T < 1) throw std::invalid_argument("config: T >= 1");
    if (delta <= 0.0 || delta > 1.0) throw std::invalid_argument("config: delta in (0, 1]");
    if (runs < 1) throw std::invalid_argument("config: runs >= 1");
    if (tau_multiplier <= 0.0) throw std::invalid_argument("config: tau multiplier > 0");
}

ExperimentConfig apply_config_line(ExperimentConfig cfg, const std::string& key,
                                   const std::string& value) {
    if (key == "algos") {
        cfg.algorithms.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) cfg.algorithms.push_back(item);
        }
    } else if (key == "N") {
        cfg.N = std::stoi(value);
    } else if (key == "K") {
        cfg.K = std::stoi(value);
    } else if (key == "d") {
        cfg.d = std::stoi(value);
    } else if (key == "B") {
        cfg.B = std::stod(value);
    } else if (key == "T") {
        cfg.T = std::stol(value);
    } else if (key == "delta") {
        cfg.delta = std::stod(value);
    } else if (key == "runs") {
        cfg.runs = std::stoi(value);
    } else if (key == "seed") {
        cfg.seed = std::stoull(value);
    } else if (key == "tau_mult") {
        cfg.tau_multiplier = std::stod(value);
    } else if (key == "alpha0_scale") {
        cfg.baseline.alpha0_scale = std::stod(value);
    } else if (key == "lambda0") {
        cfg.baseline.lambda0 = std::stod(value);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "threads") {
        cfg.threads = std::stoi(value);
    } else if (key == "timing") {
        cfg.timing = value == "on" || value == "1" || value == "true";
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        base = apply_config_line(std::move(base), trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

AggregateResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int runs = cfg.runs;
    std::vector<ReplicaOutput> outputs(runs);

    int workers = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, runs));

    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int wk = 0; wk < workers; ++wk) {
        pool.emplace_back([&, wk] {
            try {
                for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1))
                    outputs[r] = run_replica(cfg, r);
            } catch (...) {
                errors[wk] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    AggregateResult agg;
    agg.T = cfg.T;
    for (const auto& o : outputs) {
        agg.replica_seeds.push_back(o.env_seed);
        agg.stream_hashes.push_back(o.stream_hash);
    }
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        AlgorithmSeries s;
        s.algo = cfg.algorithms[a];
        s.mean_cum_regret.resize(cfg.T);
        s.band2sd.resize(cfg.T);
        s.mean_round_ms.resize(cfg.T);
        s.warmup_frac.resize(cfg.T);
        for (long t = 0; t < cfg.T; ++t) {
            double mean = 0.0, ms = 0.0, wu = 0.0;
            for (int r = 0; r < runs; ++r) {
                mean += outputs[r].cum_regret[a][t];
                ms += outputs[r].round_ms[a][t];
                wu += outputs[r].warmup[a][t];
            }
            mean /= runs;
            double var = 0.0;
            for (int r = 0; r < runs; ++r) {
                const double dlt = outputs[r].cum_regret[a][t] - mean;
                var += dlt * dlt;
            }
            var = runs > 1 ? var / (runs - 1) : 0.0;
            s.mean_cum_regret[t] = mean;
            s.band2sd[t] = 2.0 * std::sqrt(var);
            s.mean_round_ms[t] = ms / runs;
            s.warmup_frac[t] = wu / runs;
        }
        agg.series.push_back(std::move(s));
    }
    return agg;
}

namespace {

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

}  // namespace

std::string render_csv(const AggregateResult& result) {
    std::string out = "algo,t,mean_cum_regret,band2sd,mean_round_ms,warmup_frac\n";
    for (const auto& s : result.series) {
        for (long t = 0; t < result.T; ++t) {
            out += s.algo;
            out += ',';
            out += std::to_string(t + 1);
            out += ',';
            out += fmt12(s.mean_cum_regret[t]);
            out += ',';
            out += fmt12(s.band2sd[t]);
            out += ',';
            out += fmt12(s.mean_round_ms[t]);
            out += ',';
            out += fmt12(s.warmup_frac[t]);
            out += '\n';
        }
    }
    return out;
}

void emit_csv(const AggregateResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << render_csv(result);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string render_manifest(const ExperimentConfig& cfg, const AggregateResult& result) {
    std::ostringstream m;
    m << "format=mnlbandit-manifest-v1\n";
    m << "algos=";
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
        m << (i ? "," : "") << cfg.algorithms[i];
    m << "\n";
    m << "N=" << cfg.N << "\nK=" << cfg.K << "\nd=" << cfg.d << "\nB=" << fmt12(cfg.B)
      << "\nT=" << cfg.T << "\ndelta=" << fmt12(cfg.delta) << "\nruns=" << cfg.runs
      << "\nseed=" << cfg.seed << "\ntau_mult=" << fmt12(cfg.tau_multiplier)
      << "\nalpha0_scale=" << fmt12(cfg.baseline.alpha0_scale)
      << "\nlambda0=" << fmt12(cfg.baseline.lambda0) << "\ntiming=" << (cfg.timing ? "on" : "off")
      << "\nout=" << cfg.out << "\n";
    for (std::size_t r = 0; r < result.replica_seeds.size(); ++r) {
        m << "replica" << r << ".env_seed=" << result.replica_seeds[r] << "\n";
        m << "replica" << r << ".stream_hash=" << result.stream_hashes[r] << "\n";
        for (const auto& algo : cfg.algorithms) {
            m << "replica" << r << ".choice_seed." << algo << "="
              << derive_seed(cfg.seed, 0x616c67ULL + canonical_algo_id(algo),
                             static_cast<std::uint64_t>(r))
              << "\n";
        }
    }
    return m.str();
}

void write_manifest(const ExperimentConfig& cfg, const AggregateResult& result,
                    const std::string& csv_path) {
    std::ofstream out(csv_path + ".manifest", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest for: " + csv_path);
    out << render_manifest(cfg, result);
}

}  // namespace mnl
