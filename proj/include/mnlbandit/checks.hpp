#pragma once

#include <string>
#include <vector>

namespace mnl::checks {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// best_assortment vs brute force on random instances (N <= 12, K <= 4).
CheckResult assortment_oracle(int instances = 1000, std::uint64_t seed = 7);

/// Gradient and Hessian against central finite differences.
CheckResult calculus(int instances = 100, std::uint64_t seed = 11);

/// Sampled third-derivative ratio bound and the Hessian comparison bounds.
CheckResult self_concordance(int samples = 1000, int sandwich_instances = 200,
                             std::uint64_t seed = 13);

/// Variational-inequality residuals and idempotence for both projections.
CheckResult projections(int instances = 500, std::uint64_t seed = 17);

/// Two small timing-free harness runs must render identical CSV bytes.
CheckResult determinism(std::uint64_t seed = 23);

std::vector<CheckResult> run_quick_suite();

}  // namespace mnl::checks
