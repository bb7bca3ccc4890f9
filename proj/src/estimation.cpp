#include "mnlbandit/estimation.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace mnl {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt6 = std::sqrt(6.0);

VectorXd project_euclidean_ball(const VectorXd& v, double radius) {
    const double n = v.norm();
    return n <= radius ? v : VectorXd(v * (radius / n));
}

}  // namespace

HyperParams HyperParams::standard(int d, double B, double delta) {
    HyperParams hp;
    hp.d = d;
    hp.B = B;
    hp.delta = delta;
    hp.eta = 1.0;
    hp.eta_w = 0.5 + 3.0 * kSqrt2 * B;
    hp.lambda = 144.0 * d;
    hp.lambda_w = std::max({12.0 * kSqrt2 * hp.eta_w * B, 144.0 * hp.eta_w * d, 2.0});
    return hp;
}

double zeta_radius(long t, const HyperParams& hp) {
    return std::sqrt(2.0 * hp.eta_w * std::log(1.0 / hp.delta) +
                     4.0 * kSqrt6 * hp.eta_w * hp.eta_w * hp.d * std::log(static_cast<double>(t) + 2.0) +
                     4.0 * hp.B * hp.B * hp.lambda_w);
}

double beta_radius(long t, const HyperParams& hp) {
    return std::sqrt(2.0 * hp.eta * std::log(1.0 / hp.delta) +
                     4.0 * kSqrt6 * hp.eta * hp.eta * hp.d * std::log(static_cast<double>(t) + 2.0) +
                     4.0 * hp.B * hp.B * hp.lambda);
}

double tau_threshold(long t, const HyperParams& hp) { return 6.0 * kSqrt2 * zeta_radius(t, hp); }

VectorXd project_search(const VectorXd& v, const PsdMatrix& metric, const SearchSpace& space) {
    if (const auto* ball = std::get_if<BallSpace>(&space))
        return project_metric_ball(v, metric, ball->radius);
    return project_metric_ellipsoid(v, metric, std::get<Ellipsoid>(space));
}

bool search_space_contains(const SearchSpace& space, const VectorXd& w, double tol) {
    if (const auto* ball = std::get_if<BallSpace>(&space)) return w.norm() <= ball->radius + tol;
    return std::get<Ellipsoid>(space).contains(w, tol);
}

OmdState OmdState::initial(int d, double eta, double lambda) {
    OmdState s;
    s.w = VectorXd::Zero(d);
    s.H = PsdMatrix::scaled_identity(d, lambda);
    s.eta = eta;
    s.lambda = lambda;
    s.t_updates = 0;
    return s;
}

OmdState rs_omd_step(const OmdState& state, const SearchSpace& space, const RoundContext& ctx,
                     const Assortment& S, const ChoiceOutcome& y, double eta) {
    const VectorXd w_proj = project_search(state.w, state.H, space);
    const PsdMatrix H_til = state.H.accumulate(eta * loss_hessian(ctx, S, w_proj));
    const VectorXd grad = loss_gradient(ctx, S, y, w_proj);
    const VectorXd w_free = w_proj - eta * H_til.solve(grad);
    const VectorXd w_next = project_search(w_free, H_til, space);

    OmdState next;
    next.w = w_next;
    next.H = state.H.accumulate(loss_hessian(ctx, S, w_next));
    next.eta = state.eta;
    next.lambda = state.lambda;
    next.t_updates = state.t_updates + 1;
    return next;
}

WarmupDecision warmup_criterion(const RoundContext& ctx, const PsdMatrix& H_w, double tau) {
    WarmupDecision out;
    for (int i = 0; i < ctx.num_items(); ++i) {
        const VectorXd x = ctx.features.row(i).transpose();
        const double lev = x.dot(H_w.solve(x));
        if (lev > out.max_leverage) {
            out.max_leverage = lev;
            out.item = i;
        }
    }
    out.triggered = out.max_leverage >= 1.0 / (tau * tau);
    return out;
}

Ellipsoid confidence_ellipsoid(const VectorXd& center, const PsdMatrix& H, double radius) {
    return Ellipsoid(center, H, radius);
}

double empirical_alpha(const Ellipsoid& W, const RoundContext& ctx, const Assortment& S,
                       const VectorXd& w_star, int samples, Rng& rng) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(W.metric.matrix());
    const MatrixXd inv_sqrt = es.eigenvectors() *
                              es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
    double alpha = 0.0;
    for (int n = 0; n < samples; ++n) {
        const VectorXd w = W.center + W.radius * (inv_sqrt * rng.uniform_ball(W.center.size(), 1.0));
        for (int i : S.items) {
            alpha = std::max(alpha, std::abs(ctx.features.row(i).dot(w - w_star)));
        }
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// MLE over the full history.

MleState::MleState(int d, double B) : d_(d), B_(B), w_hat_(VectorXd::Zero(d)) {
    offsets_.push_back(0);
}

void MleState::append(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y) {
    for (int k = 0; k < S.size(); ++k) {
        const int item = S.items[k];
        for (int j = 0; j < d_; ++j) feats_.push_back(ctx.features(item, j));
        rewards_.push_back(ctx.rewards(item));
    }
    offsets_.push_back(static_cast<int>(rewards_.size()));
    int slot = 0;
    for (int k = 0; k < S.size(); ++k)
        if (y.onehot(k + 1) == 1.0) slot = k + 1;
    chosen_slot_.push_back(slot);
}

double MleState::total_loss(const VectorXd& w, VectorXd* grad, MatrixXd* hess) const {
    const long n_rounds = rounds();
    const int n_items = offsets_.back();
    if (grad) grad->setZero(d_);
    if (hess) hess->setZero(d_, d_);
    if (n_rounds == 0) return 0.0;

    scratch_z_.resize(n_items);
    {
        // One flat pass for all utilities, then one vectorized exp sweep.
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
            feats_.data(), n_items, d_);
        Eigen::Map<Eigen::VectorXd> z(scratch_z_.data(), n_items);
        z.noalias() = X * w;
        z = z.array().min(350.0).max(-350.0).exp();
    }

    double total = 0.0;
    VectorXd px(d_);
    for (long s = 0; s < n_rounds; ++s) {
        const int begin = offsets_[s], end = offsets_[s + 1];
        double denom = 1.0;
        for (int k = begin; k < end; ++k) denom += scratch_z_[k];
        const int slot = chosen_slot_[s];
        const double chosen_e = slot == 0 ? 1.0 : scratch_z_[begin + slot - 1];
        total += std::log(denom) - std::log(chosen_e);

        if (grad || hess) {
            const double inv = 1.0 / denom;
            if (hess) px.setZero();
            for (int k = begin; k < end; ++k) {
                const double p = scratch_z_[k] * inv;
                const double coeff = p - (slot == k - begin + 1 ? 1.0 : 0.0);
                const double* xk = feats_.data() + static_cast<std::size_t>(k) * d_;
                if (grad)
                    for (int j = 0; j < d_; ++j) (*grad)(j) += coeff * xk[j];
                if (hess) {
                    for (int a = 0; a < d_; ++a) {
                        const double pa = p * xk[a];
                        px(a) += pa;
                        for (int b = 0; b <= a; ++b) (*hess)(a, b) += pa * xk[b];
                    }
                }
            }
            if (hess)
                for (int a = 0; a < d_; ++a)
                    for (int b = 0; b <= a; ++b) (*hess)(a, b) -= px(a) * px(b);
        }
    }
    if (hess) *hess = hess->selfadjointView<Eigen::Lower>();
    return total;
}

MleState mle_fit(MleState state, double tol) {
    const double B = state.B_;
    VectorXd w = project_euclidean_ball(state.w_hat_, B);
    if (state.rounds() == 0) {
        state.w_hat_ = VectorXd::Zero(state.d_);
        state.loss_at_mle_ = 0.0;
        return state;
    }

    VectorXd grad(state.d_);
    MatrixXd hess(state.d_, state.d_);
    double f = state.total_loss(w, &grad, &hess);
    for (int it = 0; it < 500; ++it) {
        const double pg = (w - project_euclidean_ball(w - grad, B)).norm();
        if (pg <= tol) {
            state.w_hat_ = w;
            state.loss_at_mle_ = f;
            return state;
        }
        const double jitter = 1e-10 * std::max(1.0, hess.diagonal().maxCoeff());
        MatrixXd reg = hess;
        reg.diagonal().array() += jitter;
        VectorXd dir = -Eigen::LLT<MatrixXd>(reg).solve(grad);
        if (!dir.allFinite() || grad.dot(dir) >= 0.0) dir = -grad;
        // Early-round Hessians are rank-deficient; keep flat-direction Newton
        // steps at the scale of the feasible ball.
        const double dn = dir.norm();
        if (dn > 4.0 * B) dir *= 4.0 * B / dn;

        // Armijo backtracking on the projected step.
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const VectorXd w_new = project_euclidean_ball(w + step * dir, B);
            const double f_new = state.total_loss(w_new);
            if (f_new <= f + 1e-4 * grad.dot(w_new - w)) {
                w = w_new;
                f = state.total_loss(w, &grad, &hess);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // Line search stalled at numeric precision; accept if optimal.
            if (pg <= std::max(tol, 1e-7)) break;
            throw std::runtime_error("mle_fit: line search failed to make progress");
        }
    }
    const double pg = (w - project_euclidean_ball(w - grad, B)).norm();
    if (pg > std::max(tol, 1e-7)) throw std::runtime_error("mle_fit: iteration cap reached");
    state.w_hat_ = w;
    state.loss_at_mle_ = f;
    return state;
}

double mle_radius_sq(long t, double B, int d, double delta) {
    const double arg = std::max(std::exp(1.0), 4.0 * std::exp(1.0) * B * static_cast<double>(t - 1) / d);
    return std::log(1.0 / delta) + d * std::log(arg);
}

namespace {

// Inner problem of the optimistic-utility solve for a fixed multiplier mu:
// maximize x . w - mu L(w) over the B-ball by projected gradient ascent with a
// Barzilai-Borwein step and Armijo backtracking.
VectorXd maximize_penalized(const MleState& state, const VectorXd& x, double mu, VectorXd w,
                            double tol, int max_iter) {
    const double B = state.bound();
    w = project_euclidean_ball(w, B);
    VectorXd lgrad(state.dim());
    double loss = state.total_loss(w, &lgrad);
    double f = x.dot(w) - mu * loss;
    VectorXd g = x - mu * lgrad;

    double step = 1.0 / std::max(1.0, mu * static_cast<double>(state.rounds()) * 0.25);
    VectorXd w_prev = w, g_prev = g;
    for (int it = 0; it < max_iter; ++it) {
        if ((w - project_euclidean_ball(w + g, B)).norm() <= tol) return w;
        double alpha = step;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            const VectorXd w_new = project_euclidean_ball(w + alpha * g, B);
            const double loss_new = state.total_loss(w_new);
            const double f_new = x.dot(w_new) - mu * loss_new;
            if (f_new >= f + 1e-4 * g.dot(w_new - w)) {
                w_prev = w;
                g_prev = g;
                w = w_new;
                f = f_new;
                loss = state.total_loss(w, &lgrad);
                g = x - mu * lgrad;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return w;
        const VectorXd dw = w - w_prev;
        const VectorXd dg = g - g_prev;
        const double denom = -dw.dot(dg);  // ascent: -dg aligns with curvature
        step = denom > 1e-16 ? dw.squaredNorm() / denom : alpha * 2.0;
        step = std::min(std::max(step, 1e-12), 1e12);
    }
    return w;
}

}  // namespace

double mle_optimistic_utility(const MleState& state, const VectorXd& x, double gamma_sq,
                              OptimisticWarmStart* warm) {
    const double B = state.bound();
    const double xn = x.norm();
    if (xn == 0.0) return 0.0;
    if (state.rounds() == 0) return B * xn;  // vacuous constraint
    if (gamma_sq <= 0.0) return x.dot(state.w_hat());

    const double L_hat = state.loss_at_mle();
    const double inner_tol = 1e-8;
    const double residual_tol = 1e-6;
    const auto gap_at = [&](double mu, VectorXd& w_io) {
        w_io = maximize_penalized(state, x, mu, w_io, inner_tol, 500);
        return state.total_loss(w_io) - L_hat - gamma_sq;
    };

    // mu = 0: the ball alone binds. If the likelihood constraint is already
    // satisfied there, it is inactive and the value is B |x|.
    VectorXd w_ball = B / xn * x;
    if (state.total_loss(w_ball) - L_hat <= gamma_sq + residual_tol) return B * xn;

    double mu_lo = 0.0;  // gap > 0 here
    VectorXd w = (warm && warm->mu > 0.0) ? warm->w : state.w_hat();
    double mu_hi = (warm && warm->mu > 0.0) ? warm->mu : 1.0;
    double gap_hi = gap_at(mu_hi, w);
    double gap_lo = std::numeric_limits<double>::infinity();
    while (gap_hi > 0.0 && mu_hi < 1e14) {
        mu_lo = mu_hi;
        gap_lo = gap_hi;
        mu_hi *= 2.0;
        gap_hi = gap_at(mu_hi, w);
    }
    if (gap_hi > residual_tol)
        throw std::runtime_error("mle_optimistic_utility: could not bracket the multiplier");
    // Walk the lower edge up toward the root so a warm multiplier that
    // overshot still yields a tight bracket.
    while (mu_lo == 0.0 && mu_hi > 1e-12) {
        const double cand = 0.5 * mu_hi;
        VectorXd w_cand = w;
        const double gap_cand = gap_at(cand, w_cand);
        if (gap_cand > 0.0) {
            mu_lo = cand;
            gap_lo = gap_cand;
            break;
        }
        mu_hi = cand;
        gap_hi = gap_cand;
        w = w_cand;
        if (std::abs(gap_hi) <= residual_tol) break;
    }

    // Safeguarded bisection on the (decreasing) constraint gap, with a secant
    // proposal inside the bracket to speed convergence.
    double mu = mu_hi, gap = gap_hi;
    for (int it = 0; it < 200 && std::abs(gap) > residual_tol; ++it) {
        double cand = 0.5 * (mu_lo + mu_hi);
        if (std::isfinite(gap_lo) && gap_lo > gap_hi) {
            const double secant = mu_lo + (mu_hi - mu_lo) * gap_lo / (gap_lo - gap_hi);
            if (secant > mu_lo && secant < mu_hi) cand = secant;
        }
        mu = cand;
        gap = gap_at(mu, w);
        if (gap > 0.0) {
            mu_lo = mu;
            gap_lo = gap;
        } else {
            mu_hi = mu;
            gap_hi = gap;
        }
        if (mu_hi - mu_lo <= 1e-15 * std::max(1.0, mu_hi)) break;
    }
    if (warm) {
        warm->mu = mu;
        warm->w = w;
    }
    return x.dot(w);
}

}  // namespace mnl
