#include "mnlbandit/bandit.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace mnl {

RoundContext env_step(const EnvironmentConfig& cfg, Rng& rng) {
    MatrixXd feats(cfg.N, cfg.d);
    for (int i = 0; i < cfg.N; ++i) feats.row(i) = rng.uniform_ball(cfg.d, 1.0).transpose();
    VectorXd rewards(cfg.N);
    for (int i = 0; i < cfg.N; ++i) rewards(i) = rng.uniform01();
    return RoundContext(std::move(feats), std::move(rewards));
}

Diagnostics regret_and_diagnostics(const RoundContext& ctx, const Assortment& offered,
                                   const MnlParameter& w_star, int K) {
    Diagnostics out;
    VectorXd true_utils(ctx.num_items());
    for (int i = 0; i < ctx.num_items(); ++i) true_utils(i) = ctx.features.row(i).dot(w_star.w);

    auto [s_opt, r_opt] = best_assortment(true_utils, ctx.rewards, std::max(K, 1));
    const double r_offered = expected_revenue(ctx, offered, w_star.w);
    out.inst_regret = std::max(0.0, r_opt - r_offered);

    // sigma_t^2: variance of the offered assortment's reward under the true
    // choice distribution, with the outside option paying 0.
    const VectorXd p = choice_probs(ctx, offered, w_star.w);
    double mean = 0.0, second = 0.0;
    for (int k = 0; k < offered.size(); ++k) {
        const double r = ctx.rewards(offered.items[k]);
        mean += p(k + 1) * r;
        second += p(k + 1) * r * r;
    }
    out.sigma_sq = std::max(0.0, second - mean * mean);

    // kappa*_t over the optimal assortment.
    const VectorXd p_opt = choice_probs(ctx, s_opt, w_star.w);
    for (int k = 0; k < s_opt.size(); ++k) out.kappa_star += p_opt(k + 1) * p_opt(0);
    return out;
}

// ---------------------------------------------------------------------------
// OFU-MNL++

OfuMnlPpAgent::OfuMnlPpAgent(int d, double B, int K, double delta)
    : OfuMnlPpAgent(d, B, K, delta, Options()) {}

OfuMnlPpAgent::OfuMnlPpAgent(int d, double B, int K, double delta, Options opts)
    : hp_(HyperParams::standard(d, B, delta / 2.0)),
      K_(K),
      opts_(opts),
      plan_(OmdState::initial(d, hp_.eta, hp_.lambda)),
      warm_(OmdState::initial(d, hp_.eta_w, hp_.lambda_w)) {}

Assortment OfuMnlPpAgent::select(const RoundContext& ctx, Rng&) {
    const double tau = opts_.tau_multiplier * tau_threshold(t_, hp_);
    const WarmupDecision decision = warmup_criterion(ctx, warm_.H, tau);
    warmup_round_ = decision.triggered;
    if (warmup_round_) {
        warmup_item_ = decision.item;
        return Assortment({decision.item});
    }

    plan_.H.precompute_factorization();
    const double beta = beta_radius(t_, hp_);
    VectorXd ucb(ctx.num_items());
    for (int i = 0; i < ctx.num_items(); ++i) {
        const VectorXd x = ctx.features.row(i).transpose();
        ucb(i) = x.dot(plan_.w) + beta * plan_.H.inv_mahalanobis(x);
    }
    return best_assortment(ucb, ctx.rewards, K_).first;
}

void OfuMnlPpAgent::update(const RoundContext& ctx, const Assortment& offered,
                           const ChoiceOutcome& outcome) {
    if (warmup_round_) {
        // Warm-up: RS-OMD over the full ball with the warm-up step size; the
        // planning quantities are carried over unchanged.
        warm_ = rs_omd_step(warm_, BallSpace{hp_.B}, ctx, offered, outcome, hp_.eta_w);
        warmup_set_ = confidence_ellipsoid(warm_, zeta_radius(t_ + 1, hp_));
    } else {
        const SearchSpace space =
            warmup_set_ ? SearchSpace(*warmup_set_) : SearchSpace(BallSpace{hp_.B});
        plan_ = rs_omd_step(plan_, space, ctx, offered, outcome, hp_.eta);
    }
    ++t_;
}

// ---------------------------------------------------------------------------
// OFU-MLE-MNL

OfuMleMnlAgent::OfuMleMnlAgent(int d, double B, int K, double delta)
    : K_(K), delta_(delta), mle_(d, B) {}

Assortment OfuMleMnlAgent::select(const RoundContext& ctx, Rng&) {
    mle_ = mle_fit(std::move(mle_));
    const double gamma_sq = mle_radius_sq(t_, mle_.bound(), mle_.dim(), delta_);
    if (warm_.size() < static_cast<std::size_t>(ctx.num_items()))
        warm_.resize(ctx.num_items());
    VectorXd optimistic(ctx.num_items());
    for (int i = 0; i < ctx.num_items(); ++i) {
        const VectorXd x = ctx.features.row(i).transpose();
        optimistic(i) = mle_optimistic_utility(mle_, x, gamma_sq, &warm_[i]);
    }
    return best_assortment(optimistic, ctx.rewards, K_).first;
}

void OfuMleMnlAgent::update(const RoundContext& ctx, const Assortment& offered,
                            const ChoiceOutcome& outcome) {
    mle_.append(ctx, offered, outcome);
    ++t_;
}

// ---------------------------------------------------------------------------
// Baselines

UcbMnlAgent::UcbMnlAgent(int d, double B, int K, BaselineOptions opts)
    : K_(K), opts_(opts), mle_(d, B), V_(PsdMatrix::scaled_identity(d, opts.lambda0)) {}

Assortment UcbMnlAgent::select(const RoundContext& ctx, Rng&) {
    mle_ = mle_fit(std::move(mle_));
    const double alpha0 =
        opts_.alpha0_scale * std::sqrt(mle_.dim() * std::log(static_cast<double>(t_) + 1.0));
    V_.precompute_factorization();
    VectorXd ucb(ctx.num_items());
    for (int i = 0; i < ctx.num_items(); ++i) {
        const VectorXd x = ctx.features.row(i).transpose();
        ucb(i) = x.dot(mle_.w_hat()) + alpha0 * V_.inv_mahalanobis(x);
    }
    return best_assortment(ucb, ctx.rewards, K_).first;
}

void UcbMnlAgent::update(const RoundContext& ctx, const Assortment& offered,
                         const ChoiceOutcome& outcome) {
    mle_.append(ctx, offered, outcome);
    MatrixXd add = MatrixXd::Zero(mle_.dim(), mle_.dim());
    for (int i : offered.items) {
        const VectorXd x = ctx.features.row(i).transpose();
        add += x * x.transpose();
    }
    V_ = V_.accumulate(add);
    ++t_;
}

TsMnlAgent::TsMnlAgent(int d, double B, int K, BaselineOptions opts)
    : K_(K), opts_(opts), mle_(d, B), V_(PsdMatrix::scaled_identity(d, opts.lambda0)) {}

Assortment TsMnlAgent::select(const RoundContext& ctx, Rng& rng) {
    mle_ = mle_fit(std::move(mle_));
    const double alpha0 =
        opts_.alpha0_scale * std::sqrt(mle_.dim() * std::log(static_cast<double>(t_) + 1.0));
    // w_tilde ~ N(w_hat, alpha0^2 V^{-1}); with V = L L^T, L^{-T} xi has
    // covariance V^{-1}.
    const Eigen::LLT<MatrixXd> llt(V_.matrix());
    const VectorXd xi = rng.gaussian_vector(mle_.dim());
    const VectorXd w_tilde =
        mle_.w_hat() + alpha0 * llt.matrixU().solve(xi);
    VectorXd utils(ctx.num_items());
    for (int i = 0; i < ctx.num_items(); ++i) utils(i) = ctx.features.row(i).dot(w_tilde);
    return best_assortment(utils, ctx.rewards, K_).first;
}

void TsMnlAgent::update(const RoundContext& ctx, const Assortment& offered,
                        const ChoiceOutcome& outcome) {
    mle_.append(ctx, offered, outcome);
    MatrixXd add = MatrixXd::Zero(mle_.dim(), mle_.dim());
    for (int i : offered.items) {
        const VectorXd x = ctx.features.row(i).transpose();
        add += x * x.transpose();
    }
    V_ = V_.accumulate(add);
    ++t_;
}

std::unique_ptr<Agent> make_agent(const std::string& algo, const EnvironmentConfig& cfg,
                                  double delta, double tau_multiplier,
                                  const BaselineOptions& baseline) {
    if (algo == "ofu-mnl-pp")
        return std::make_unique<OfuMnlPpAgent>(cfg.d, cfg.B, cfg.K, delta,
                                               OfuMnlPpAgent::Options{tau_multiplier});
    if (algo == "ofu-mle-mnl")
        return std::make_unique<OfuMleMnlAgent>(cfg.d, cfg.B, cfg.K, delta);
    if (algo == "ucb-mnl") return std::make_unique<UcbMnlAgent>(cfg.d, cfg.B, cfg.K, baseline);
    if (algo == "ts-mnl") return std::make_unique<TsMnlAgent>(cfg.d, cfg.B, cfg.K, baseline);
    throw std::invalid_argument("unknown algorithm: " + algo);
}

}  // namespace mnl
