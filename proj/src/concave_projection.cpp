#include "shadeloss/concave_projection.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace shadeloss {

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter) {
    const Eigen::Index n = a.cols();
    if (max_iter <= 0) max_iter = static_cast<int>(30 * n + 30);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff());

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
        const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
        z.setZero(n);
        for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Eigen::Index>(c)];
    };

    Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::VectorXd z(n);
    for (int outer = 0; outer < max_iter; ++outer) {
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;
        for (int inner = 0; inner < max_iter; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && x[j] <= tol) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        w = a.transpose() * (b - a * x);
    }
    return x;
}

namespace {

Eigen::MatrixXd concave_basis(Eigen::Index n) {
    const double last = static_cast<double>(n - 1);
    Eigen::MatrixXd basis(n, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double s = static_cast<double>(t) / last;
        basis(t, 0) = 1.0 - s;
        basis(t, n - 1) = s;
        for (Eigen::Index j = 1; j + 1 < n; ++j) {
            // tent with a unit concave kink at j, zero at both ends
            const double jj = static_cast<double>(j);
            basis(t, j) = t <= j ? static_cast<double>(t) * (last - jj) / last : jj * (last - static_cast<double>(t)) / last;
        }
    }
    return basis;
}

}  // namespace

ConcaveProjector::ConcaveProjector(Eigen::Index n) {
    if (n > 2) basis_ = concave_basis(n);
}

Eigen::VectorXd ConcaveProjector::operator()(const Eigen::VectorXd& v) const {
    if (v.size() <= 2 || basis_.rows() != v.size()) return v.size() <= 2 ? v.cwiseMax(0.0) : project_nonneg_concave(v);
    return basis_ * nnls(basis_, v);
}

Eigen::VectorXd project_nonneg_concave(const Eigen::VectorXd& v) {
    if (v.size() <= 2) return v.cwiseMax(0.0);
    const Eigen::MatrixXd basis = concave_basis(v.size());
    return basis * nnls(basis, v);
}

}  // namespace shadeloss
