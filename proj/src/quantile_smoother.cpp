#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/solar_geometry.hpp"

namespace shadeloss {

namespace {

// Proximal map of t * rho_q at v: the check loss has slope q above zero and q - 1 below.
double prox_check(double v, double q, double t) {
    if (v > q * t) return v - q * t;
    if (v < -(1.0 - q) * t) return v + (1.0 - q) * t;
    return 0.0;
}

Eigen::SparseMatrix<double> curvature_gram(int n) {
    // D^T D for the (n-2) x n second-difference operator, assembled directly.
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j + 2 < n; ++j) {
        const int idx[3] = {j, j + 1, j + 2};
        const double w[3] = {1.0, -2.0, 1.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) trips.emplace_back(idx[a], idx[b], w[a] * w[b]);
    }
    Eigen::SparseMatrix<double> g(n, n);
    g.setFromTriplets(trips.begin(), trips.end());
    return g;
}

}  // namespace

std::vector<double> quantile_smooth(std::span<const double> raw, double q, double kappa) {
    const int n = static_cast<int>(raw.size());
    std::vector<int> obs;
    for (int i = 0; i < n; ++i)
        if (!is_missing(raw[i])) obs.push_back(i);
    if (obs.empty()) throw InvalidDataError("no day has a detectable production window");
    if (obs.size() == 1 || n < 3) {
        double mean = 0.0;
        for (int i : obs) mean += raw[i];
        return std::vector<double>(static_cast<std::size_t>(n), mean / static_cast<double>(obs.size()));
    }

    const Eigen::SparseMatrix<double> gram = curvature_gram(n);
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (int i : obs) {
        mask[i] = 1.0;
        r[i] = raw[i];
    }

    double sigma = 1.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    auto factor = [&] {
        Eigen::SparseMatrix<double> h = 2.0 * kappa * gram;
        for (int i : obs) h.coeffRef(i, i) += sigma;
        solver.compute(h);
        if (solver.info() != Eigen::Success) throw InvalidDataError("quantile smoothing system is singular");
    };
    factor();

    // Split e = r - f on observed days; scaled dual u.
    Eigen::VectorXd f = r;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
    constexpr int kMaxIter = 20000;
    for (int it = 0; it < kMaxIter; ++it) {
        const Eigen::VectorXd rhs = sigma * mask.cwiseProduct(r - e - u);
        f = solver.solve(rhs);
        const Eigen::VectorXd e_prev = e;
        for (int i : obs) e[i] = prox_check(r[i] - f[i] - u[i], q, 1.0 / sigma);
        Eigen::VectorXd resid = mask.cwiseProduct(f + e - r);
        u += resid;
        const double primal = resid.norm();
        const double dual = sigma * (e - e_prev).norm();
        const double tol = 1e-9 * std::sqrt(static_cast<double>(obs.size())) * scale;
        if (primal < tol && dual < tol) break;
        if (it % 50 == 49) {
            if (primal > 10.0 * dual) {
                sigma *= 2.0;
                u /= 2.0;
                factor();
            } else if (dual > 10.0 * primal) {
                sigma /= 2.0;
                u *= 2.0;
                factor();
            }
        }
    }
    return std::vector<double>(f.data(), f.data() + n);
}

}  // namespace shadeloss
