#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mnlbandit/rng.hpp"

namespace mnl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Per-round item features and rewards as presented by the environment.
/// Features are rows of `features` (N x d); every row has norm <= 1 and every
/// reward lies in [0, 1].
struct RoundContext {
    MatrixXd features;  // N x d
    VectorXd rewards;   // N

    RoundContext() = default;
    RoundContext(MatrixXd f, VectorXd r);

    int num_items() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

/// Utility parameter with its known norm bound B.
struct MnlParameter {
    VectorXd w;
    double bound = 1.0;

    MnlParameter() = default;
    MnlParameter(VectorXd w_, double bound_);
};

/// Sorted set of distinct item indices, at most K of them.
struct Assortment {
    std::vector<int> items;

    Assortment() = default;
    explicit Assortment(std::vector<int> items_);

    int size() const { return static_cast<int>(items.size()); }
    bool operator==(const Assortment& o) const { return items == o.items; }
};

/// Outcome of one choice: `chosen` is the picked item index, or -1 for the
/// outside option. `onehot` spans {outside} followed by the assortment items,
/// so it has |S| + 1 entries and exactly one of them is 1.
struct ChoiceOutcome {
    int chosen = -1;
    VectorXd onehot;

    bool outside() const { return chosen < 0; }
};

// ---------------------------------------------------------------------------
// Utility-space (z-space) primitives. The assortment loss only sees the vector
// of utilities z_i = x_i . w, with the outside option pinned at utility 0.

/// log(1 + sum_i exp(z_i)), computed with max-subtraction against the implicit
/// zero utility of the outside option.
double log_partition(const VectorXd& z);

/// Choice probabilities over {outside} + items: entry 0 is the outside option.
VectorXd softmax_with_outside(const VectorXd& z);

/// Item-only probabilities p_i = exp(z_i) / (1 + sum_j exp(z_j)).
VectorXd item_probs(const VectorXd& z);

/// Hessian of the z-space loss: diag(p) - p p^T over the item probabilities.
MatrixXd z_hessian(const VectorXd& z);

/// Inverse of item_probs on its range: [pinv(q)]_i = log(q_i / (1 - |q|_1)).
/// Requires all q_i > 0 and sum q_i < 1.
VectorXd softmax_pinv(const VectorXd& q);

// ---------------------------------------------------------------------------
// Round-level model operations.

/// Utilities x_i . w for the items of S, in S order.
VectorXd utilities(const RoundContext& ctx, const Assortment& S, const VectorXd& w);

/// Choice probabilities over {outside} + S given parameter w.
VectorXd choice_probs(const RoundContext& ctx, const Assortment& S, const VectorXd& w);

ChoiceOutcome sample_choice(const RoundContext& ctx, const Assortment& S, const VectorXd& w,
                            Rng& rng);

/// Expected revenue sum_{i in S} p(i|S,w) r_i.
double expected_revenue(const RoundContext& ctx, const Assortment& S, const VectorXd& w);

/// Negative log-likelihood of the observed choice (outside option included).
double loss(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y,
            const VectorXd& w);

/// Gradient sum_{i in S} (p_i - y_i) x_i.
VectorXd loss_gradient(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y,
                       const VectorXd& w);

/// Hessian sum_i p_i x_i x_i^T - (sum_i p_i x_i)(sum_i p_i x_i)^T; PSD with
/// spectral norm <= 1 when all features have norm <= 1.
MatrixXd loss_hessian(const RoundContext& ctx, const Assortment& S, const VectorXd& w);

// ---------------------------------------------------------------------------
// Self-concordance diagnostics.

struct SelfConcordanceReport {
    double max_ratio = 0.0;   // max |phi'''| / (|b|_inf * phi'') over samples
    int evaluated = 0;        // samples with phi'' above the noise floor
    int skipped = 0;          // samples skipped because phi'' was too small
};

/// Samples s and checks |phi'''(s)| <= M |b|_inf phi''(s) for the z-space loss
/// phi(s) = log_partition(a + s b), with derivatives from 5-point central
/// differences. The assortment fixes the dimension; a and b live in R^|S|.
SelfConcordanceReport check_self_concordance(const RoundContext& ctx, const Assortment& S,
                                             const VectorXd& a, const VectorXd& b, int samples,
                                             Rng& rng);

}  // namespace mnl
