#include "mnlbandit/checks.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mnlbandit/assortment.hpp"
#include "mnlbandit/estimation.hpp"
#include "mnlbandit/harness.hpp"
#include "mnlbandit/mnl_model.hpp"
#include "mnlbandit/psd_linalg.hpp"

namespace mnl::checks {

namespace {

RoundContext random_context(Rng& rng, int n, int d) {
    MatrixXd f(n, d);
    for (int i = 0; i < n; ++i) f.row(i) = rng.uniform_ball(d, 1.0).transpose();
    VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = rng.uniform01();
    return RoundContext(std::move(f), std::move(r));
}

Assortment random_assortment(Rng& rng, int n, int k_max) {
    const int k = 1 + static_cast<int>(rng.uniform01() * std::min(n, k_max));
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform01() * (n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return Assortment(pool);
}

MatrixXd random_spd(Rng& rng, int d, double cond_scale = 1.0) {
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.gaussian();
    MatrixXd m = a * a.transpose();
    m.diagonal().array() += 0.05 * cond_scale;
    return m;
}

}  // namespace

CheckResult assortment_oracle(int instances, std::uint64_t seed) {
    Rng rng(seed);
    double worst_gap = 0.0;
    int set_mismatches = 0;
    for (int n = 0; n < instances; ++n) {
        const int items = 2 + static_cast<int>(rng.uniform01() * 11);  // 2..12
        const int k = 1 + static_cast<int>(rng.uniform01() * 4);       // 1..4
        VectorXd util(items), reward(items);
        for (int i = 0; i < items; ++i) {
            util(i) = rng.uniform(-2.0, 2.0);
            reward(i) = rng.uniform01();
        }
        auto [s_fast, v_fast] = best_assortment(util, reward, std::min(k, items));
        auto [s_brute, v_brute] = brute_force_best(util, reward, std::min(k, items));
        worst_gap = std::max(worst_gap, std::abs(v_fast - v_brute));
        if (!(s_fast == s_brute)) {
            // Accept only genuine ties: both sets must re-score at the brute
            // optimum within tolerance.
            if (std::abs(v_fast - v_brute) > 1e-9) ++set_mismatches;
        }
    }
    CheckResult res;
    res.name = "assortment-oracle";
    res.pass = worst_gap <= 1e-9 && set_mismatches == 0;
    std::ostringstream os;
    os << "max value gap " << worst_gap << ", set mismatches " << set_mismatches << " over "
       << instances << " instances";
    res.detail = os.str();
    return res;
}

CheckResult calculus(int instances, std::uint64_t seed) {
    Rng rng(seed);
    double worst_grad = 0.0, worst_hess = 0.0;
    const double h = 1e-5;
    for (int n = 0; n < instances; ++n) {
        const int d = 2 + static_cast<int>(rng.uniform01() * 5);
        const int items = 2 + static_cast<int>(rng.uniform01() * 6);
        const RoundContext ctx = random_context(rng, items, d);
        const Assortment S = random_assortment(rng, items, 5);
        const VectorXd w = rng.uniform_ball(d, 1.5);
        ChoiceOutcome y;
        {
            Rng tmp(rng.next_u64());
            y = sample_choice(ctx, S, w, tmp);
        }

        const VectorXd g = loss_gradient(ctx, S, y, w);
        VectorXd g_fd(d);
        for (int j = 0; j < d; ++j) {
            VectorXd wp = w, wm = w;
            wp(j) += h;
            wm(j) -= h;
            g_fd(j) = (loss(ctx, S, y, wp) - loss(ctx, S, y, wm)) / (2 * h);
        }
        worst_grad = std::max(worst_grad, (g_fd - g).lpNorm<Eigen::Infinity>() /
                                              std::max(1.0, g.lpNorm<Eigen::Infinity>()));

        const MatrixXd hess = loss_hessian(ctx, S, w);
        MatrixXd h_fd(d, d);
        for (int j = 0; j < d; ++j) {
            VectorXd wp = w, wm = w;
            wp(j) += h;
            wm(j) -= h;
            h_fd.col(j) = (loss_gradient(ctx, S, y, wp) - loss_gradient(ctx, S, y, wm)) / (2 * h);
        }
        worst_hess = std::max(worst_hess, (h_fd - hess).cwiseAbs().maxCoeff() /
                                              std::max(1.0, hess.cwiseAbs().maxCoeff()));
    }
    CheckResult res;
    res.name = "calculus-fd";
    res.pass = worst_grad <= 1e-6 && worst_hess <= 1e-5;
    std::ostringstream os;
    os << "gradient rel err " << worst_grad << " (tol 1e-6), hessian rel err " << worst_hess
       << " (tol 1e-5) over " << instances << " instances";
    res.detail = os.str();
    return res;
}

CheckResult self_concordance(int samples, int sandwich_instances, std::uint64_t seed) {
    Rng rng(seed);
    const double bound = 3.0 * std::sqrt(2.0);

    // Sampled derivative-ratio bound for K in 1..5.
    double max_ratio = 0.0, max_ratio_k1 = 0.0;
    for (int n = 0; n < samples; ++n) {
        const int k = 1 + static_cast<int>(rng.uniform01() * 5);
        const RoundContext ctx = random_context(rng, k, 2);
        std::vector<int> all(k);
        for (int i = 0; i < k; ++i) all[i] = i;
        const Assortment S(all);
        VectorXd a(k), b(k);
        for (int i = 0; i < k; ++i) {
            a(i) = rng.uniform(-2.0, 2.0);
            b(i) = rng.uniform(-1.0, 1.0);
        }
        const auto rep = check_self_concordance(ctx, S, a, b, 1, rng);
        if (rep.evaluated == 0) continue;
        max_ratio = std::max(max_ratio, rep.max_ratio);
        if (k == 1) max_ratio_k1 = std::max(max_ratio_k1, rep.max_ratio);
    }

    // Hessian sandwich: generalized eigenvalues of (hess(z2), hess(z1)) lie in
    // [exp(-m), exp(m)] with m = 3 sqrt(2) |z1 - z2|_inf.
    double worst_violation = 0.0;
    for (int n = 0; n < sandwich_instances; ++n) {
        const int k = 2 + static_cast<int>(rng.uniform01() * 4);
        VectorXd z1(k), z2(k);
        for (int i = 0; i < k; ++i) {
            z1(i) = rng.uniform(-2.0, 2.0);
            z2(i) = z1(i) + rng.uniform(-0.8, 0.8);
        }
        const double m = bound * (z1 - z2).lpNorm<Eigen::Infinity>();
        MatrixXd h1 = z_hessian(z1);
        h1.diagonal().array() += 1e-10;
        const MatrixXd h2 = z_hessian(z2);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(h2, h1);
        const double lo = ges.eigenvalues().minCoeff();
        const double hi = ges.eigenvalues().maxCoeff();
        worst_violation = std::max(worst_violation, std::exp(-m) - lo);
        worst_violation = std::max(worst_violation, hi - std::exp(m));
    }

    CheckResult res;
    res.name = "self-concordance";
    res.pass = max_ratio <= bound + 1e-3 && max_ratio_k1 <= 1.0 + 1e-3 && worst_violation <= 1e-6;
    std::ostringstream os;
    os << "max ratio " << max_ratio << " (bound " << bound << "), K=1 ratio " << max_ratio_k1
       << " (bound 1), sandwich violation " << worst_violation << " (tol 1e-6)";
    res.detail = os.str();
    return res;
}

CheckResult projections(int instances, std::uint64_t seed) {
    Rng rng(seed);
    double worst_vi = 0.0, worst_idem = 0.0;
    for (int n = 0; n < instances; ++n) {
        const int d = 2 + static_cast<int>(rng.uniform01() * 5);  // 2..6
        const PsdMatrix metric(random_spd(rng, d));
        const double B = rng.uniform(0.3, 1.5);
        const VectorXd v = rng.gaussian_vector(d) * rng.uniform(0.0, 3.0);

        // Ball projection.
        const VectorXd p = project_metric_ball(v, metric, B);
        worst_idem =
            std::max(worst_idem, (project_metric_ball(p, metric, B) - p).norm());
        for (int q = 0; q < 20; ++q) {
            const VectorXd feas = rng.uniform_ball(d, B);
            const double vi = (v - p).dot(metric.matrix() * (feas - p));
            worst_vi = std::max(worst_vi, vi);
        }

        // Ellipsoid projection.
        const Ellipsoid e(rng.gaussian_vector(d) * 0.3, PsdMatrix(random_spd(rng, d)),
                          rng.uniform(0.2, 1.5));
        const VectorXd pe = project_metric_ellipsoid(v, metric, e);
        worst_idem =
            std::max(worst_idem, (project_metric_ellipsoid(pe, metric, e) - pe).norm());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(e.metric.matrix());
        const MatrixXd inv_sqrt = es.eigenvectors() *
                                  es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();
        for (int q = 0; q < 20; ++q) {
            const VectorXd feas = e.center + e.radius * (inv_sqrt * rng.uniform_ball(d, 1.0));
            const double vi = (v - pe).dot(metric.matrix() * (feas - pe));
            worst_vi = std::max(worst_vi, vi);
        }
    }
    CheckResult res;
    res.name = "projection-optimality";
    res.pass = worst_vi <= 1e-8 && worst_idem <= 1e-10;
    std::ostringstream os;
    os << "max VI residual " << worst_vi << " (tol 1e-8), max idempotence drift " << worst_idem
       << " (tol 1e-10) over " << instances << " instances";
    res.detail = os.str();
    return res;
}

CheckResult determinism(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.algorithms = {"ofu-mnl-pp", "ucb-mnl", "ts-mnl"};
    cfg.N = 8;
    cfg.K = 3;
    cfg.d = 3;
    cfg.B = 1.0;
    cfg.T = 40;
    cfg.runs = 2;
    cfg.seed = seed;
    cfg.timing = false;
    const std::string csv1 = render_csv(run_experiment(cfg));
    const std::string csv2 = render_csv(run_experiment(cfg));
    CheckResult res;
    res.name = "determinism";
    res.pass = csv1 == csv2;
    res.detail = res.pass ? "two timing-free runs rendered identical CSV bytes"
                          : "CSV bytes differ between identical runs";
    return res;
}

std::vector<CheckResult> run_quick_suite() {
    return {assortment_oracle(), calculus(), self_concordance(), projections(), determinism()};
}

}  // namespace mnl::checks
