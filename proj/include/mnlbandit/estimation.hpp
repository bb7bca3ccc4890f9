#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mnlbandit/mnl_model.hpp"
#include "mnlbandit/psd_linalg.hpp"

namespace mnl {

/// Step sizes, regularizers and the failure level used by the online
/// estimators. `delta` is the per-family failure level (the agent splits its
/// overall budget between the warm-up and planning confidence families).
struct HyperParams {
    int d = 1;
    double B = 1.0;
    double delta = 0.1;
    double eta = 1.0;
    double eta_w = 0.0;
    double lambda = 0.0;
    double lambda_w = 0.0;

    static HyperParams standard(int d, double B, double delta);
};

/// Warm-up confidence radius zeta_t(delta).
double zeta_radius(long t, const HyperParams& hp);

/// Planning confidence radius beta_t(delta).
double beta_radius(long t, const HyperParams& hp);

/// Warm-up trigger threshold tau_t = 6 sqrt(2) zeta_t(delta).
double tau_threshold(long t, const HyperParams& hp);

// ---------------------------------------------------------------------------
// Restricted Space OMD.

/// Euclidean ball of the given radius, centered at the origin.
struct BallSpace {
    double radius = 1.0;
};

using SearchSpace = std::variant<BallSpace, Ellipsoid>;

VectorXd project_search(const VectorXd& v, const PsdMatrix& metric, const SearchSpace& space);
bool search_space_contains(const SearchSpace& space, const VectorXd& w, double tol = 1e-10);

/// Online estimator state: current estimate and accumulated Hessian metric.
struct OmdState {
    VectorXd w;
    PsdMatrix H;
    double eta = 1.0;
    double lambda = 0.0;
    long t_updates = 0;

    static OmdState initial(int d, double eta, double lambda);
};

/// One mirror-descent update against the linearized loss:
///   w'    = argmin_{space} |w - state.w|_H
///   Htil  = H + eta * hess(w')
///   w''   = w' - eta * Htil^{-1} grad(w')
///   w_next = argmin_{space} |w - w''|_Htil
///   H_next = H + hess(w_next)
OmdState rs_omd_step(const OmdState& state, const SearchSpace& space, const RoundContext& ctx,
                     const Assortment& S, const ChoiceOutcome& y, double eta);

struct WarmupDecision {
    bool triggered = false;
    int item = 0;           // maximizer of the leverage, lowest index on ties
    double max_leverage = 0.0;
};

/// Checks max_i |x_i|^2_{Hw^{-1}} >= 1/tau^2 over the round's features.
WarmupDecision warmup_criterion(const RoundContext& ctx, const PsdMatrix& H_w, double tau);

Ellipsoid confidence_ellipsoid(const VectorXd& center, const PsdMatrix& H, double radius);
inline Ellipsoid confidence_ellipsoid(const OmdState& state, double radius) {
    return confidence_ellipsoid(state.w, state.H, radius);
}

/// Diagnostic for the update condition: max over sampled w in W and items in S
/// of |x_i . (w - w_star)|.
double empirical_alpha(const Ellipsoid& W, const RoundContext& ctx, const Assortment& S,
                       const VectorXd& w_star, int samples, Rng& rng);

// ---------------------------------------------------------------------------
// Norm-constrained MLE over the full history.

/// Append-only choice history plus the current constrained MLE. Feature rows
/// are stored flat so that full-history loss evaluations stay cache-friendly;
/// they dominate the cost of the MLE-based agent.
class MleState {
  public:
    MleState(int d, double B);

    void append(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y);

    int dim() const { return d_; }
    double bound() const { return B_; }
    long rounds() const { return static_cast<long>(offsets_.size()) - 1; }
    const VectorXd& w_hat() const { return w_hat_; }
    double loss_at_mle() const { return loss_at_mle_; }
    double regularizer() const { return 1.0 / (8.0 * B_ * B_); }  // diagnostic only

    /// Total loss L(w) = sum_s loss_s(w); optionally accumulates the gradient
    /// and Hessian in the same pass.
    double total_loss(const VectorXd& w, VectorXd* grad = nullptr, MatrixXd* hess = nullptr) const;

    friend MleState mle_fit(MleState state, double tol);

  private:
    int d_;
    double B_;
    std::vector<double> feats_;       // concatenated item feature rows
    std::vector<double> rewards_;     // per stored item (kept with the history)
    std::vector<int> offsets_;        // item range per round; size rounds + 1
    std::vector<int> chosen_slot_;    // 0 = outside, k >= 1 = k-th stored item
    VectorXd w_hat_;
    double loss_at_mle_ = 0.0;

    mutable std::vector<double> scratch_z_;
};

/// Projected-Newton fit of the norm-constrained MLE, warm-started at the
/// previous estimate. Terminates when the projected-gradient norm drops below
/// tol; throws after 500 iterations.
MleState mle_fit(MleState state, double tol = 1e-8);

/// Squared MLE confidence radius gamma_t(delta)^2.
double mle_radius_sq(long t, double B, int d, double delta);

struct OptimisticWarmStart {
    double mu = -1.0;  // negative means "no previous solution"
    VectorXd w;
};

/// max x . w over {|w|_2 <= B, L(w) - L(w_hat) <= gamma_sq}, by bisection on
/// the Lagrange multiplier of the likelihood constraint with a projected
/// gradient ascent inner solver. `warm`, when given, carries the previous
/// solution across calls and is updated in place.
double mle_optimistic_utility(const MleState& state, const VectorXd& x, double gamma_sq,
                              OptimisticWarmStart* warm = nullptr);

}  // namespace mnl
