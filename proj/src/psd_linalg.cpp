#include "mnlbandit/psd_linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace mnl {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kConstraintTol = 1e-12;
constexpr int kMaxNewton = 200;

// Solves min_y (y - b)^T diag(lam) (y - b) s.t. |y| <= r, where lam > 0.
// y(mu) = lam_i b_i / (lam_i + mu); g(mu) = |y(mu)|^2 - r^2 is convex and
// decreasing, so Newton from mu = 0 converges monotonically from the left.
VectorXd secular_project(const VectorXd& lam, const VectorXd& b, double r) {
    const auto y_of = [&](double mu) {
        return VectorXd((lam.array() * b.array() / (lam.array() + mu)).matrix());
    };
    if (y_of(0.0).norm() <= r + kConstraintTol) return b;  // interior or on boundary
    if (r == 0.0) return VectorXd::Zero(b.size());

    double mu = 0.0;
    for (int it = 0; it < kMaxNewton; ++it) {
        const Eigen::ArrayXd denom = lam.array() + mu;
        const Eigen::ArrayXd y = lam.array() * b.array() / denom;
        const double norm2 = (y * y).sum();
        const double g = norm2 - r * r;
        if (std::abs(std::sqrt(norm2) - r) <= kConstraintTol) return y.matrix();
        const double gp = -2.0 * (y * y / denom).sum();
        mu -= g / gp;
    }
    throw std::runtime_error("metric projection: secular Newton did not converge");
}

}  // namespace

PsdMatrix::PsdMatrix(MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("PsdMatrix: not square");
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (asym > kSymTol * scale) throw std::invalid_argument("PsdMatrix: not symmetric");
    m_ = 0.5 * (m_ + m_.transpose());
}

PsdMatrix PsdMatrix::scaled_identity(int d, double scale) {
    return PsdMatrix(MatrixXd::Identity(d, d) * scale);
}

PsdMatrix PsdMatrix::accumulate(const MatrixXd& h) const {
    if (h.rows() != m_.rows() || h.cols() != m_.cols())
        throw std::invalid_argument("accumulate: dimension mismatch");
    return PsdMatrix(m_ + h);
}

const Eigen::LLT<MatrixXd>& PsdMatrix::llt() const {
    if (!llt_) {
        llt_.emplace(m_);
        // Accumulated Hessians are PSD but can be numerically semi-definite;
        // retry with growing jitter before giving up.
        double jitter = 1e-12 * std::max(1.0, m_.diagonal().maxCoeff());
        for (int attempt = 0; attempt < 4 && llt_->info() != Eigen::Success; ++attempt) {
            llt_.emplace(MatrixXd(m_ + jitter * MatrixXd::Identity(dim(), dim())));
            jitter *= 100.0;
        }
        if (llt_->info() != Eigen::Success)
            throw std::runtime_error("PsdMatrix: Cholesky failed (matrix not PSD?)");
    }
    return *llt_;
}

double PsdMatrix::mahalanobis(const VectorXd& v) const {
    return std::sqrt(std::max(0.0, v.dot(m_ * v)));
}

double PsdMatrix::inv_mahalanobis(const VectorXd& v) const {
    return std::sqrt(std::max(0.0, v.dot(llt().solve(v))));
}

VectorXd PsdMatrix::solve(const VectorXd& b) const { return llt().solve(b); }

Ellipsoid::Ellipsoid(VectorXd c, PsdMatrix m, double r)
    : center(std::move(c)), metric(std::move(m)), radius(r) {
    if (radius < 0.0) throw std::invalid_argument("Ellipsoid: negative radius");
    if (metric.dim() != center.size()) throw std::invalid_argument("Ellipsoid: dimension mismatch");
}

VectorXd project_metric_ball(const VectorXd& v, const PsdMatrix& metric, double B) {
    if (B <= 0.0) throw std::invalid_argument("project_metric_ball: B must be positive");
    if (v.norm() <= B + kConstraintTol) return v;

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(metric.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("project_metric_ball: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("project_metric_ball: metric not positive definite");

    const VectorXd b = es.eigenvectors().transpose() * v;
    const VectorXd y = secular_project(es.eigenvalues(), b, B);
    return es.eigenvectors() * y;
}

VectorXd project_metric_ellipsoid(const VectorXd& v, const PsdMatrix& metric, const Ellipsoid& E) {
    const VectorXd diff = v - E.center;
    if (E.metric.mahalanobis(diff) <= E.radius + kConstraintTol) return v;
    if (E.radius == 0.0) return E.center;

    // Pencil (metric, E.metric): V^T E.metric V = I and V^T metric V = diag(lam),
    // so in y-coordinates (w = center + V y) the feasible set is the Euclidean
    // ball of radius E.radius and the objective is the diagonal quadratic.
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(metric.matrix(), E.metric.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("project_metric_ellipsoid: pencil decomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("project_metric_ellipsoid: metric not positive definite");

    const MatrixXd& V = es.eigenvectors();
    const VectorXd b = V.transpose() * (E.metric.matrix() * diff);  // V^{-1} diff
    const VectorXd y = secular_project(es.eigenvalues(), b, E.radius);
    return E.center + V * y;
}

}  // namespace mnl
