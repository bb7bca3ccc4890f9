#pragma once

#include <utility>

#include <Eigen/Core>

#include "mnlbandit/mnl_model.hpp"

namespace mnl {

/// Exhaustive search over all nonempty S with |S| <= K for the maximizer of
/// sum_{i in S} v_i r_i / (1 + sum v_i), v_i = exp(utility_i). Guarded to
/// N <= 20; ties broken by lexicographically smallest item set.
std::pair<Assortment, double> brute_force_best(const VectorXd& item_utilities,
                                               const VectorXd& rewards, int K);

/// Polynomial-time revenue maximization by bisection on the objective value:
/// R(S) >= theta for some |S| <= K iff the top-K positive v_i (r_i - theta)
/// sum to at least theta. The final set is re-scored exactly.
std::pair<Assortment, double> best_assortment(const VectorXd& item_utilities,
                                              const VectorXd& rewards, int K);

}  // namespace mnl
