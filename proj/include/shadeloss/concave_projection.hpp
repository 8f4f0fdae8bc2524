#pragma once

#include <Eigen/Core>

namespace shadeloss {

/// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter = 0);

/// Euclidean projection of a sequence onto {x : x >= 0, second differences <= 0}.
///
/// A nonnegative concave sequence is nonnegative iff its two endpoints are, so the set is the
/// nonnegative cone spanned by the two endpoint ramps and the interior tent functions; the
/// projection is an NNLS problem in that basis.
Eigen::VectorXd project_nonneg_concave(const Eigen::VectorXd& v);

/// Same projection with the basis built once for a fixed length.
class ConcaveProjector {
public:
    explicit ConcaveProjector(Eigen::Index n);
    Eigen::VectorXd operator()(const Eigen::VectorXd& v) const;

private:
    Eigen::MatrixXd basis_;
};

}  // namespace shadeloss
