#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace mnl {

/// splitmix64 mixing step; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt_a, std::uint64_t salt_b = 0) {
    return mix64(mix64(base ^ mix64(salt_a)) ^ mix64(salt_b + 0x51ed270b74a4e11dULL));
}

// Deterministic sampling helpers on top of mt19937_64. The engine's output
// sequence is pinned by the standard; the std::*_distribution wrappers are
// not, so we roll the few transforms we need to keep runs byte-reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via polar Box-Muller (rejection; caches the spare).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    Eigen::VectorXd gaussian_vector(int d) {
        Eigen::VectorXd g(d);
        for (int i = 0; i < d; ++i) g(i) = gaussian();
        return g;
    }

    /// Uniform draw from the Euclidean ball of given radius: direction from a
    /// normalized Gaussian, length from radius * U^{1/d}.
    Eigen::VectorXd uniform_ball(int d, double radius) {
        Eigen::VectorXd g = gaussian_vector(d);
        double n = g.norm();
        while (n == 0.0) {  // astronomically unlikely
            g = gaussian_vector(d);
            n = g.norm();
        }
        const double r = radius * std::pow(uniform01(), 1.0 / d);
        return g * (r / n);
    }

    /// Index sampled from an (unnormalized is fine) probability vector by CDF
    /// inversion; assumes nonnegative entries with positive total.
    int categorical(const Eigen::VectorXd& probs) {
        const double total = probs.sum();
        const double u = uniform01() * total;
        double acc = 0.0;
        for (int i = 0; i < probs.size(); ++i) {
            acc += probs(i);
            if (u < acc) return i;
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mnl
