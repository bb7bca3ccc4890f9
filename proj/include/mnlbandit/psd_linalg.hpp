#pragma once

#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mnl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric positive semi-definite accumulator (H_t, H_t^w, V_t). Values are
/// immutable snapshots: accumulate() returns a new matrix. The Cholesky
/// factorization is built lazily and cached; build it under exclusive access
/// (or call precompute_factorization) before sharing across threads.
class PsdMatrix {
  public:
    PsdMatrix() = default;
    explicit PsdMatrix(MatrixXd m);

    static PsdMatrix scaled_identity(int d, double scale);

    int dim() const { return static_cast<int>(m_.rows()); }
    const MatrixXd& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    /// Entrywise sum with another PSD matrix of the same dimension.
    PsdMatrix accumulate(const MatrixXd& h) const;
    PsdMatrix accumulate(const PsdMatrix& h) const { return accumulate(h.m_); }

    /// sqrt(v^T M v).
    double mahalanobis(const VectorXd& v) const;

    /// sqrt(v^T M^{-1} v) via a factorization solve (no explicit inverse).
    double inv_mahalanobis(const VectorXd& v) const;

    /// M^{-1} b via the cached factorization.
    VectorXd solve(const VectorXd& b) const;

    void precompute_factorization() const { llt(); }

  private:
    const Eigen::LLT<MatrixXd>& llt() const;

    MatrixXd m_;
    mutable std::optional<Eigen::LLT<MatrixXd>> llt_;
};

/// Confidence set {w : |w - center|_metric <= radius}.
struct Ellipsoid {
    VectorXd center;
    PsdMatrix metric;
    double radius = 0.0;

    Ellipsoid() = default;
    Ellipsoid(VectorXd c, PsdMatrix m, double r);

    bool contains(const VectorXd& w, double tol = 1e-10) const {
        return metric.mahalanobis(w - center) <= radius + tol;
    }
};

/// argmin_{|w|_2 <= B} |w - v|_metric. Solved in the metric's eigenbasis by
/// Newton on the secular equation for the Lagrange multiplier; the constraint
/// residual is driven below 1e-12. Returns v unchanged when it is feasible.
VectorXd project_metric_ball(const VectorXd& v, const PsdMatrix& metric, double B);

/// argmin_{w in E} |w - v|_metric, via simultaneous diagonalization of the
/// pencil (metric, E.metric) and the same secular-equation Newton.
VectorXd project_metric_ellipsoid(const VectorXd& v, const PsdMatrix& metric, const Ellipsoid& E);

}  // namespace mnl
