#include "mnlbandit/mnl_model.hpp"

#include <algorithm>
#include <cmath>

namespace mnl {

namespace {

constexpr double kNormSlack = 1e-9;

void check_assortment(const RoundContext& ctx, const Assortment& S) {
    if (S.items.empty()) throw std::invalid_argument("assortment is empty");
    for (int i : S.items) {
        if (i < 0 || i >= ctx.num_items()) throw std::out_of_range("item index out of range");
    }
}

}  // namespace

RoundContext::RoundContext(MatrixXd f, VectorXd r) : features(std::move(f)), rewards(std::move(r)) {
    if (features.rows() != rewards.size())
        throw std::invalid_argument("features/rewards size mismatch");
    if (features.rows() < 1 || features.cols() < 1)
        throw std::invalid_argument("need N >= 1 and d >= 1");
    for (int i = 0; i < features.rows(); ++i) {
        if (features.row(i).norm() > 1.0 + kNormSlack)
            throw std::invalid_argument("feature norm exceeds 1");
        if (rewards(i) < -kNormSlack || rewards(i) > 1.0 + kNormSlack)
            throw std::invalid_argument("reward outside [0, 1]");
    }
}

MnlParameter::MnlParameter(VectorXd w_, double bound_) : w(std::move(w_)), bound(bound_) {
    if (bound <= 0.0) throw std::invalid_argument("bound must be positive");
    if (w.norm() > bound * (1.0 + kNormSlack)) throw std::invalid_argument("parameter norm exceeds bound");
}

Assortment::Assortment(std::vector<int> items_) : items(std::move(items_)) {
    std::sort(items.begin(), items.end());
    if (items.empty()) throw std::invalid_argument("assortment is empty");
    if (std::adjacent_find(items.begin(), items.end()) != items.end())
        throw std::invalid_argument("duplicate items in assortment");
}

double log_partition(const VectorXd& z) {
    const double m = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    double s = std::exp(-m);  // outside option's exp(0 - m)
    for (int i = 0; i < z.size(); ++i) s += std::exp(z(i) - m);
    return m + std::log(s);
}

VectorXd softmax_with_outside(const VectorXd& z) {
    const double m = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    VectorXd p(z.size() + 1);
    p(0) = std::exp(-m);
    for (int i = 0; i < z.size(); ++i) p(i + 1) = std::exp(z(i) - m);
    p /= p.sum();
    return p;
}

VectorXd item_probs(const VectorXd& z) {
    return softmax_with_outside(z).tail(z.size());
}

MatrixXd z_hessian(const VectorXd& z) {
    const VectorXd p = item_probs(z);
    MatrixXd h = MatrixXd(p.asDiagonal()) - p * p.transpose();
    return h;
}

VectorXd softmax_pinv(const VectorXd& q) {
    double total = 0.0;
    for (int i = 0; i < q.size(); ++i) {
        if (!(q(i) > 0.0)) throw std::invalid_argument("softmax_pinv: entries must be positive");
        total += q(i);
    }
    if (!(total < 1.0)) throw std::invalid_argument("softmax_pinv: entries must sum below 1");
    const double log_rest = std::log(1.0 - total);
    VectorXd z(q.size());
    for (int i = 0; i < q.size(); ++i) z(i) = std::log(q(i)) - log_rest;
    return z;
}

VectorXd utilities(const RoundContext& ctx, const Assortment& S, const VectorXd& w) {
    check_assortment(ctx, S);
    VectorXd z(S.size());
    for (int k = 0; k < S.size(); ++k) z(k) = ctx.features.row(S.items[k]).dot(w);
    return z;
}

VectorXd choice_probs(const RoundContext& ctx, const Assortment& S, const VectorXd& w) {
    return softmax_with_outside(utilities(ctx, S, w));
}

ChoiceOutcome sample_choice(const RoundContext& ctx, const Assortment& S, const VectorXd& w,
                            Rng& rng) {
    const VectorXd p = choice_probs(ctx, S, w);
    const int slot = rng.categorical(p);
    ChoiceOutcome y;
    y.chosen = slot == 0 ? -1 : S.items[slot - 1];
    y.onehot = VectorXd::Zero(p.size());
    y.onehot(slot) = 1.0;
    return y;
}

double expected_revenue(const RoundContext& ctx, const Assortment& S, const VectorXd& w) {
    const VectorXd p = choice_probs(ctx, S, w);
    double rev = 0.0;
    for (int k = 0; k < S.size(); ++k) rev += p(k + 1) * ctx.rewards(S.items[k]);
    return rev;
}

double loss(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y,
            const VectorXd& w) {
    const VectorXd z = utilities(ctx, S, w);
    if (y.onehot.size() != S.size() + 1) throw std::invalid_argument("outcome size mismatch");
    // -log p(chosen); the chosen utility is 0 for the outside option.
    double chosen_z = 0.0;
    for (int k = 0; k < S.size(); ++k)
        if (y.onehot(k + 1) == 1.0) chosen_z = z(k);
    return log_partition(z) - chosen_z;
}

VectorXd loss_gradient(const RoundContext& ctx, const Assortment& S, const ChoiceOutcome& y,
                       const VectorXd& w) {
    const VectorXd z = utilities(ctx, S, w);
    const VectorXd p = softmax_with_outside(z);
    VectorXd g = VectorXd::Zero(ctx.dim());
    for (int k = 0; k < S.size(); ++k)
        g += (p(k + 1) - y.onehot(k + 1)) * ctx.features.row(S.items[k]).transpose();
    return g;
}

MatrixXd loss_hessian(const RoundContext& ctx, const Assortment& S, const VectorXd& w) {
    const VectorXd z = utilities(ctx, S, w);
    const VectorXd p = item_probs(z);
    MatrixXd X(S.size(), ctx.dim());
    for (int k = 0; k < S.size(); ++k) X.row(k) = ctx.features.row(S.items[k]);
    const VectorXd px = X.transpose() * p;
    MatrixXd h = X.transpose() * p.asDiagonal() * X - px * px.transpose();
    return 0.5 * (h + h.transpose());  // symmetrize roundoff
}

SelfConcordanceReport check_self_concordance(const RoundContext& ctx, const Assortment& S,
                                             const VectorXd& a, const VectorXd& b, int samples,
                                             Rng& rng) {
    check_assortment(ctx, S);
    if (a.size() != S.size() || b.size() != S.size())
        throw std::invalid_argument("direction size must match assortment size");

    SelfConcordanceReport report;
    const double b_inf = b.lpNorm<Eigen::Infinity>();
    if (b_inf == 0.0) return report;  // phi is constant along b

    const auto phi = [&](double s) { return log_partition(a + s * b); };
    // 5-point central stencils; h balances truncation against the 1/h^3
    // roundoff amplification in the third derivative.
    const double h = 1e-2;
    const double floor2 = 1e-5;  // below this, phi'' is FD noise
    for (int n = 0; n < samples; ++n) {
        const double s = rng.uniform(-2.0, 2.0);
        const double f_2 = phi(s - 2 * h), f_1 = phi(s - h), f0 = phi(s);
        const double f1 = phi(s + h), f2 = phi(s + 2 * h);
        const double d2 = (-f_2 + 16 * f_1 - 30 * f0 + 16 * f1 - f2) / (12 * h * h);
        const double d3 = (f2 - 2 * f1 + 2 * f_1 - f_2) / (2 * h * h * h);
        if (d2 < floor2) {
            ++report.skipped;
            continue;
        }
        ++report.evaluated;
        report.max_ratio = std::max(report.max_ratio, std::abs(d3) / (b_inf * d2));
    }
    return report;
}

}  // namespace mnl
