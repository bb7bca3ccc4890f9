#include "mnlbandit/assortment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mnl {

namespace {

double revenue_of(const std::vector<int>& items, const VectorXd& v, const VectorXd& r) {
    double num = 0.0, den = 1.0;
    for (int i : items) {
        num += v(i) * r(i);
        den += v(i);
    }
    return num / den;
}

// exp with the argument clamped to keep weights finite; at |u| ~ 350 the
// choice probabilities are already saturated beyond double resolution.
VectorXd exp_utilities(const VectorXd& u) {
    return u.array().min(350.0).max(-350.0).exp();
}

// Up-to-K items with the largest positive v_i (r_i - theta), lowest index on
// ties; the pair (sum of taken scores, item set) realizes the inner maximum of
// the parametric feasibility test.
std::pair<double, std::vector<int>> top_scores(const VectorXd& v, const VectorXd& r, int K,
                                               double theta) {
    const int n = static_cast<int>(v.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) score[i] = v(i) * (r(i) - theta);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    double total = 0.0;
    std::vector<int> taken;
    for (int i : order) {
        if (score[i] <= 0.0 || static_cast<int>(taken.size()) == K) break;
        total += score[i];
        taken.push_back(i);
    }
    std::sort(taken.begin(), taken.end());
    return {total, std::move(taken)};
}

}  // namespace

std::pair<Assortment, double> brute_force_best(const VectorXd& item_utilities,
                                               const VectorXd& rewards, int K) {
    const int n = static_cast<int>(item_utilities.size());
    if (n > 20) throw std::invalid_argument("brute_force_best: N > 20");
    if (n < 1 || K < 1) throw std::invalid_argument("brute_force_best: need N >= 1, K >= 1");
    const VectorXd v = exp_utilities(item_utilities);

    std::vector<int> best;
    double best_value = -1.0;
    std::vector<int> current;
    // Depth-first over index-increasing subsets enumerates sets in
    // lexicographic order, so the first maximum seen is the lex-smallest.
    auto visit = [&](auto&& self, int start) -> void {
        if (!current.empty()) {
            const double value = revenue_of(current, v, rewards);
            if (value > best_value) {
                best_value = value;
                best = current;
            }
        }
        if (static_cast<int>(current.size()) == K) return;
        for (int i = start; i < n; ++i) {
            current.push_back(i);
            self(self, i + 1);
            current.pop_back();
        }
    };
    visit(visit, 0);
    return {Assortment(best), best_value};
}

std::pair<Assortment, double> best_assortment(const VectorXd& item_utilities,
                                              const VectorXd& rewards, int K) {
    const int n = static_cast<int>(item_utilities.size());
    if (n < 1 || K < 1) throw std::invalid_argument("best_assortment: need N >= 1, K >= 1");
    const VectorXd v = exp_utilities(item_utilities);

    double lo = 0.0, hi = rewards.maxCoeff();
    if (hi <= 0.0) {
        // All rewards are zero: any set earns 0; tie rule picks item 0.
        return {Assortment({0}), 0.0};
    }
    std::vector<int> candidate = top_scores(v, rewards, K, lo).second;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto [total, set] = top_scores(v, rewards, K, mid);
        if (total >= mid && !set.empty()) {
            lo = mid;
            candidate = std::move(set);
        } else {
            hi = mid;
        }
    }
    // Fixed-point polish: re-solving the inner problem at the exact revenue of
    // the incumbent can only improve it, and recovers exactness lost to the
    // bisection tolerance.
    double value = revenue_of(candidate, v, rewards);
    for (int it = 0; it < 4; ++it) {
        auto set = top_scores(v, rewards, K, value).second;
        if (set.empty() || set == candidate) break;
        const double improved = revenue_of(set, v, rewards);
        if (improved <= value) break;
        candidate = std::move(set);
        value = improved;
    }
    return {Assortment(candidate), value};
}

}  // namespace mnl
