#include "shadeloss/sd_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "shadeloss/concave_projection.hpp"
#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SdParams::validate() const {
    if (!(lambda_2a > 0.0) || !(lambda_2b > 0.0) || !(lambda_3 > 0.0))
        throw ArgumentError("regularization weights must be positive");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ArgumentError("tolerances must be positive");
    if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");
    if (!(rho > 0.0)) throw ArgumentError("rho must be positive");
    if (!(relaxation > 0.0 && relaxation < 2.0)) throw ArgumentError("relaxation must lie in (0, 2)");
}

std::string SdParams::fingerprint() const {
    Fingerprint f;
    f.add(lambda_2a);
    f.add(lambda_2b);
    f.add(lambda_3);
    f.add(to_string(weight_mode));
    f.add(to_string(norm_mode));
    f.add(abs_tol);
    f.add(rel_tol);
    f.add(static_cast<std::int64_t>(max_iter));
    f.add(rho);
    f.add(static_cast<std::int64_t>(adaptive_rho));
    f.add(relaxation);
    return f.hex();
}

std::string to_string(WeightMode m) {
    return m == WeightMode::EigenvalueInverse ? "eigenvalue-inverse" : "eigenvalue-inverse-sqrt";
}

std::string to_string(NormMode m) { return m == NormMode::Unsquared ? "unsquared" : "squared"; }

WeightMode parse_weight_mode(const std::string& s) {
    if (s == "eigenvalue-inverse") return WeightMode::EigenvalueInverse;
    if (s == "eigenvalue-inverse-sqrt") return WeightMode::EigenvalueInverseSqrt;
    throw ArgumentError("unknown weight mode '" + s + "'");
}

NormMode parse_norm_mode(const std::string& s) {
    if (s == "unsquared") return NormMode::Unsquared;
    if (s == "squared") return NormMode::Squared;
    throw ArgumentError("unknown norm mode '" + s + "'");
}

Eigen::SparseMatrix<double> second_diff(int n) {
    if (n < 3) throw ArgumentError("second difference needs n >= 3, got " + std::to_string(n));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * (n - 2)));
    for (int j = 0; j < n - 2; ++j) {
        trip.emplace_back(j, j, 1.0);
        trip.emplace_back(j, j + 1, -2.0);
        trip.emplace_back(j, j + 2, 1.0);
    }
    Eigen::SparseMatrix<double> d(n - 2, n);
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

int SdProblem::known_count() const {
    return static_cast<int>(std::count(known_rows.begin(), known_rows.end(), true)) * p();
}

MatrixXd SdProblem::corpus_signal(const MatrixXd& z) const {
    MatrixXd out = z * corpus.q.transpose();
    out.rowwise() += corpus.mu.transpose();
    return out;
}

SdProblem build_problem(const MatrixXd& y, const std::vector<bool>& known_rows, const ClearSkyCorpus& corpus,
                        const SdParams& params) {
    params.validate();
    if (y.rows() < 3 || y.cols() < 3) throw BuildError("signal must be at least 3 x 3");
    if (static_cast<Eigen::Index>(known_rows.size()) != y.rows())
        throw BuildError("known-row mask has " + std::to_string(known_rows.size()) + " entries, signal has " +
                         std::to_string(y.rows()) + " rows");
    if (corpus.p() != y.cols())
        throw BuildError("corpus dimension p=" + std::to_string(corpus.p()) + " does not match signal width " +
                         std::to_string(y.cols()));
    if (corpus.k < 1 || corpus.q.rows() != y.cols() || corpus.q.cols() != corpus.k ||
        corpus.lambda.size() != corpus.k)
        throw BuildError("corpus factors are inconsistent");

    SdProblem prob;
    prob.y = MatrixXd::Zero(y.rows(), y.cols());
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
        if (!known_rows[static_cast<std::size_t>(t)]) continue;
        if (!y.row(t).allFinite()) throw BuildError("known row " + std::to_string(t) + " contains missing values");
        prob.y.row(t) = y.row(t);
    }
    prob.known_rows = known_rows;
    prob.corpus = corpus;
    prob.params = params;
    prob.d2_rows = second_diff(static_cast<int>(y.rows()));
    prob.d2_cols = second_diff(static_cast<int>(y.cols()));
    prob.weights.resize(corpus.k);
    for (int j = 0; j < corpus.k; ++j) {
        const double lam = corpus.lambda[j];
        if (!(lam > 0.0)) throw BuildError("corpus eigenvalues must be positive");
        prob.weights[j] = params.weight_mode == WeightMode::EigenvalueInverse ? 1.0 / lam : 1.0 / std::sqrt(lam);
    }
    return prob;
}

SdProblem build_problem(const TransformedSignal& ts, const ClearSkyCorpus& corpus, const SdParams& params) {
    return build_problem(ts.y, ts.known_rows, corpus, params);
}

namespace {

double penalty_norm(const MatrixXd& m, NormMode mode) {
    return mode == NormMode::Unsquared ? m.norm() : m.squaredNorm();
}

}  // namespace

double ObjectiveTerms::total() const { return residual + corpus + clear_smooth + shade; }

bool ConstraintViolation::within_tolerance() const {
    return x2_negative <= kConeTolerance && x2_convexity <= kConeTolerance && x2_boundary <= kConeTolerance &&
           x2_subspace <= kSubspaceTolerance && x3_positive <= kConeTolerance;
}

ConstraintViolation constraint_violation(const SdProblem& prob, const MatrixXd& x2, const MatrixXd& x3,
                                         const MatrixXd& z) {
    ConstraintViolation v;
    v.x2_negative = std::max(0.0, -x2.minCoeff());
    v.x2_convexity = std::max(0.0, MatrixXd(prob.d2_rows * x2).maxCoeff());
    v.x2_boundary = std::max(x2.col(0).cwiseAbs().maxCoeff(), x2.col(x2.cols() - 1).cwiseAbs().maxCoeff());
    v.x2_subspace = (x2 - prob.corpus_signal(z)).cwiseAbs().maxCoeff();
    v.x3_positive = std::max(0.0, x3.maxCoeff());
    return v;
}

ObjectiveTerms objective_terms(const SdProblem& prob, const MatrixXd& x2, const MatrixXd& x3, const MatrixXd& z) {
    if (x2.rows() != prob.T() || x2.cols() != prob.p() || x3.rows() != prob.T() || x3.cols() != prob.p() ||
        z.rows() != prob.T() || z.cols() != prob.k())
        throw ArgumentError("component shapes do not match the problem");
    const SdParams& sp = prob.params;
    ObjectiveTerms out;
    for (int t = 0; t < prob.T(); ++t)
        if (prob.known_rows[static_cast<std::size_t>(t)])
            out.residual += (prob.y.row(t) - x2.row(t) - x3.row(t)).cwiseAbs().sum();
    out.corpus = sp.lambda_2a * penalty_norm(z * prob.weights.asDiagonal(), sp.norm_mode);
    out.clear_smooth = sp.lambda_2b * penalty_norm(prob.d2_rows * x2, sp.norm_mode);
    out.shade = sp.lambda_3 * (penalty_norm(prob.d2_rows * x3, sp.norm_mode) +
                               penalty_norm(x3 * prob.d2_cols.transpose(), sp.norm_mode));
    out.feasible = constraint_violation(prob, x2, x3, z).within_tolerance();
    return out;
}

double evaluate_objective(const SdProblem& prob, const MatrixXd& x2, const MatrixXd& x3, const MatrixXd& z) {
    const ObjectiveTerms terms = objective_terms(prob, x2, x3, z);
    return terms.feasible ? terms.total() : std::numeric_limits<double>::infinity();
}

namespace {

constexpr int kBlocks = 7;
using Blocks = std::array<MatrixXd, kBlocks>;

// Splitting of the problem into seven simple terms, each composed with a linear map of (Z, X):
//   0: P(1 mu^T + Z Q^T + X)   masked l1 fit
//   1: D Z Q^T                 curvature of x2 across declination, <= 0, lambda_2b norm
//   2: 1 mu^T + Z Q^T          x2 >= 0
//   3: Z W                     lambda_2a norm
//   4: D X                     lambda_3 norm
//   5: X Dp^T                  lambda_3 norm
//   6: X                       x3 <= 0
// Block j carries penalty rho * sigma_j. The x-update operator depends on sigma only, so a global
// rho change never refactors.
class Splitting {
public:
    Splitting(const SdProblem& prob, const std::array<double, kBlocks>& sigma)
        : prob_(prob), T_(prob.T()), p_(prob.p()), k_(prob.k()), sigma_(sigma) {
        mask_ = VectorXd::Zero(T_);
        for (int t = 0; t < T_; ++t)
            if (prob.known_rows[static_cast<std::size_t>(t)]) mask_[t] = 1.0;
        w_ = prob.weights;

        const MatrixXd dt = MatrixXd(prob.d2_rows);
        const MatrixXd dp = MatrixXd(prob.d2_cols);
        const MatrixXd lt = dt.transpose() * dt;
        a_z_ = sigma_[1] * lt;
        a_z_.diagonal() += sigma_[0] * mask_ + sigma_[2] * VectorXd::Ones(T_);
        MatrixXd a_x = sigma_[4] * lt;
        a_x.diagonal() += sigma_[0] * mask_ + sigma_[6] * VectorXd::Ones(T_);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es_t(a_x);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es_p(dp.transpose() * dp);
        u_ = es_t.eigenvectors();
        v_ = es_p.eigenvectors();
        inv_den_.resize(T_, p_);
        for (int i = 0; i < T_; ++i)
            for (int j = 0; j < p_; ++j)
                inv_den_(i, j) = 1.0 / (es_t.eigenvalues()[i] + sigma_[5] * std::max(0.0, es_p.eigenvalues()[j]));
        pu_ = mask_.asDiagonal() * u_;
        qtv_ = prob.corpus.q.transpose() * v_;

        const int n = T_ * k_;
        MatrixXd kmat(n, n);
        MatrixXd e = MatrixXd::Zero(T_, k_);
        for (int c = 0; c < n; ++c) {
            e(c % T_, c / T_) = 1.0;
            const MatrixXd col = schur_apply(e);
            kmat.col(c) = Eigen::Map<const VectorXd>(col.data(), n);
            e(c % T_, c / T_) = 0.0;
        }
        kfac_.compute(0.5 * (kmat + kmat.transpose()));
        if (kfac_.info() != Eigen::Success) throw Error("x-update system is not positive definite");

        offsets_[0] = MatrixXd::Zero(T_, p_);
        for (int t = 0; t < T_; ++t)
            if (mask_[t] > 0.0) offsets_[0].row(t) = prob.corpus.mu.transpose();
        offsets_[1] = MatrixXd::Zero(T_ - 2, p_);
        offsets_[2] = MatrixXd::Zero(T_, p_);
        offsets_[2].rowwise() = prob.corpus.mu.transpose();
        offsets_[3] = MatrixXd::Zero(T_, k_);
        offsets_[4] = MatrixXd::Zero(T_ - 2, p_);
        offsets_[5] = MatrixXd::Zero(T_, p_ - 2);
        offsets_[6] = MatrixXd::Zero(T_, p_);
    }

    const Blocks& offsets() const { return offsets_; }
    double sigma(int j) const { return sigma_[static_cast<std::size_t>(j)]; }

    /// L(Z, X) + c
    Blocks forward(const MatrixXd& z, const MatrixXd& x) const {
        Blocks b;
        const MatrixXd zq = z * prob_.corpus.q.transpose();
        b[0] = mask_.asDiagonal() * (zq + x);
        b[0] += offsets_[0];
        b[1] = prob_.d2_rows * zq;
        b[2] = zq + offsets_[2];
        b[3] = z * w_.asDiagonal();
        b[4] = prob_.d2_rows * x;
        b[5] = x * prob_.d2_cols.transpose();
        b[6] = x;
        return b;
    }

    /// sum_j sigma_j L_j^T(v_j)
    void adjoint(const Blocks& v, MatrixXd& gz, MatrixXd& gx) const {
        const MatrixXd pv = sigma_[0] * (mask_.asDiagonal() * v[0]);
        gz = (pv + sigma_[1] * (prob_.d2_rows.transpose() * v[1]) + sigma_[2] * v[2]) * prob_.corpus.q +
             sigma_[3] * (v[3] * w_.asDiagonal());
        gx = pv + sigma_[4] * (prob_.d2_rows.transpose() * v[4]) + sigma_[5] * (v[5] * prob_.d2_cols) +
             sigma_[6] * v[6];
    }

    /// ||sigma_j L_j^T(v)||_inf
    double adjoint_norm(int j, const MatrixXd& v) const {
        const double sg = sigma_[static_cast<std::size_t>(j)];
        MatrixXd g;
        switch (j) {
            case 0: {
                const MatrixXd pv = mask_.asDiagonal() * v;
                return sg * std::max(pv.cwiseAbs().maxCoeff(), (pv * prob_.corpus.q).cwiseAbs().maxCoeff());
            }
            case 1: g = (prob_.d2_rows.transpose() * v) * prob_.corpus.q; break;
            case 2: g = v * prob_.corpus.q; break;
            case 3: g = v * w_.asDiagonal(); break;
            case 4: g = prob_.d2_rows.transpose() * v; break;
            case 5: g = v * prob_.d2_cols; break;
            default: g = v; break;
        }
        return sg * g.cwiseAbs().maxCoeff();
    }

    /// argmin_x sum_j sigma_j ||L_j x - target_j||^2
    void least_squares(const Blocks& target, MatrixXd& z, MatrixXd& x) const {
        MatrixXd rz, rx;
        adjoint(target, rz, rx);
        const MatrixXd yhat = (u_.transpose() * rx * v_).cwiseProduct(inv_den_);
        const MatrixXd rhs = rz - sigma_[0] * (pu_ * (yhat * qtv_.transpose()));
        z.resize(T_, k_);
        Eigen::Map<VectorXd>(z.data(), T_ * k_) = kfac_.solve(Eigen::Map<const VectorXd>(rhs.data(), T_ * k_));
        const MatrixXd xhat = yhat - sigma_[0] * (pu_.transpose() * z * qtv_).cwiseProduct(inv_den_);
        x = u_ * xhat * v_.transpose();
    }

private:
    MatrixXd schur_apply(const MatrixXd& z) const {
        const MatrixXd g = (pu_.transpose() * z * qtv_).cwiseProduct(inv_den_);
        return a_z_ * z + sigma_[3] * (z * w_.cwiseAbs2().asDiagonal()) -
               sigma_[0] * sigma_[0] * (pu_ * (g * qtv_.transpose()));
    }

    const SdProblem& prob_;
    int T_, p_, k_;
    std::array<double, kBlocks> sigma_;
    VectorXd mask_, w_;
    MatrixXd u_, v_, a_z_, inv_den_, pu_, qtv_;
    Eigen::LDLT<MatrixXd> kfac_;
    Blocks offsets_;
};

// prox of lambda*||.||_F (or lambda*||.||_F^2) with step 1/rho
void shrink(MatrixXd& m, double lambda, double rho, NormMode mode) {
    if (mode == NormMode::Squared) {
        m /= 1.0 + 2.0 * lambda / rho;
        return;
    }
    const double nrm = m.norm();
    const double thr = lambda / rho;
    if (nrm <= thr)
        m.setZero();
    else
        m *= 1.0 - thr / nrm;
}

void prox(const SdProblem& prob, const VectorXd& mask, const Splitting& split, double rho, Blocks& v) {
    const SdParams& sp = prob.params;
    const double inv_rho = 1.0 / (rho * split.sigma(0));
    for (int t = 0; t < prob.T(); ++t) {
        if (mask[t] == 0.0) {
            v[0].row(t).setZero();
            continue;
        }
        for (int i = 0; i < prob.p(); ++i) {
            const double r = prob.y(t, i) - v[0](t, i);
            const double soft = r > inv_rho ? r - inv_rho : (r < -inv_rho ? r + inv_rho : 0.0);
            v[0](t, i) = prob.y(t, i) - soft;
        }
    }
    v[1] = v[1].cwiseMin(0.0);
    shrink(v[1], sp.lambda_2b, rho * split.sigma(1), sp.norm_mode);
    v[2] = v[2].cwiseMax(0.0);
    shrink(v[3], sp.lambda_2a, rho * split.sigma(3), sp.norm_mode);
    shrink(v[4], sp.lambda_3, rho * split.sigma(4), sp.norm_mode);
    shrink(v[5], sp.lambda_3, rho * split.sigma(5), sp.norm_mode);
    v[6] = v[6].cwiseMin(0.0);
}

double sup_norm(const MatrixXd& a, const MatrixXd& b) {
    return std::max(a.size() ? a.cwiseAbs().maxCoeff() : 0.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
}

MatrixXd initial_coefficients(const SdProblem& prob) {
    const int T = prob.T();
    MatrixXd z = MatrixXd::Zero(T, prob.k());
    std::vector<int> known;
    for (int t = 0; t < T; ++t) {
        if (!prob.known_rows[static_cast<std::size_t>(t)]) continue;
        z.row(t) = (prob.y.row(t) - prob.corpus.mu.transpose()) * prob.corpus.q;
        known.push_back(t);
    }
    if (known.empty()) return z;
    for (int t = 0; t < T; ++t) {
        if (prob.known_rows[static_cast<std::size_t>(t)]) continue;
        const auto hi = std::lower_bound(known.begin(), known.end(), t);
        if (hi == known.begin()) {
            z.row(t) = z.row(known.front());
        } else if (hi == known.end()) {
            z.row(t) = z.row(known.back());
        } else {
            const int b = *hi;
            const int a = *(hi - 1);
            const double f = static_cast<double>(t - a) / static_cast<double>(b - a);
            z.row(t) = (1.0 - f) * z.row(a) + f * z.row(b);
        }
    }
    return z;
}

struct Polished {
    MatrixXd x2, x3;
    double displacement = 0.0;
};

Polished polish(const SdProblem& prob, const MatrixXd& z, const MatrixXd& x) {
    Polished out;
    const MatrixXd aff = prob.corpus_signal(z);
    out.x2 = MatrixXd::Zero(aff.rows(), aff.cols());
    const ConcaveProjector proj(prob.T());
    const MatrixXd curv = prob.d2_rows * aff;
    for (Eigen::Index i = 1; i + 1 < aff.cols(); ++i) {
        if (aff.col(i).minCoeff() >= 0.0 && curv.col(i).maxCoeff() <= 0.0)
            out.x2.col(i) = aff.col(i);
        else
            out.x2.col(i) = proj(aff.col(i));
    }
    out.x3 = x.cwiseMin(0.0);
    out.displacement = (out.x2 - aff).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace

Decomposition solve(const SdProblem& prob) {
    const SdParams& sp = prob.params;
    sp.validate();
    VectorXd mask = VectorXd::Zero(prob.T());
    for (int t = 0; t < prob.T(); ++t)
        if (prob.known_rows[static_cast<std::size_t>(t)]) mask[t] = 1.0;

    constexpr int kBalanceEvery = 50;
    constexpr int kHistoryStride = 10;
    constexpr double kPolishTolerance = 5e-7;
    constexpr double kBalanceRatio = 10.0;
    constexpr double kMinPenalty = 1e-4;
    constexpr double kMaxPenalty = 1e8;
    // penalties stop adapting after this share of the budget so the tail is plain ADMM
    const int balance_until = sp.max_iter / 2;

    std::array<double, kBlocks> sigma;
    sigma.fill(1.0);
    auto split = std::make_unique<Splitting>(prob, sigma);

    MatrixXd z = initial_coefficients(prob);
    MatrixXd x = MatrixXd::Zero(prob.T(), prob.p());
    Blocks s = split->forward(z, x);
    Blocks u;
    for (int j = 0; j < kBlocks; ++j) u[j] = MatrixXd::Zero(s[j].rows(), s[j].cols());
    const double rho = sp.rho;
    const double alpha = sp.relaxation;

    Decomposition dec;
    dec.history_stride = kHistoryStride;
    double best = std::numeric_limits<double>::infinity();
    Blocks target, lx, hat, delta;
    MatrixXd gz, gx;
    double r_pri = std::numeric_limits<double>::infinity();
    double r_dual = std::numeric_limits<double>::infinity();
    bool converged = false;
    int it = 0;
    while (it < sp.max_iter) {
        ++it;
        for (int j = 0; j < kBlocks; ++j) target[j] = s[j] - u[j] - split->offsets()[j];
        split->least_squares(target, z, x);
        lx = split->forward(z, x);
        delta = s;
        for (int j = 0; j < kBlocks; ++j) {
            hat[j] = alpha * lx[j] + (1.0 - alpha) * s[j];
            s[j] = hat[j] + u[j];
        }
        prox(prob, mask, *split, rho, s);
        for (int j = 0; j < kBlocks; ++j) {
            u[j] += hat[j] - s[j];
            delta[j] = s[j] - delta[j];
        }

        std::array<double, kBlocks> pri{}, pri_scale{};
        for (int j = 0; j < kBlocks; ++j) {
            pri[j] = (lx[j] - s[j]).cwiseAbs().maxCoeff();
            pri_scale[j] = std::max(lx[j].cwiseAbs().maxCoeff(), s[j].cwiseAbs().maxCoeff());
        }
        split->adjoint(delta, gz, gx);
        r_pri = *std::max_element(pri.begin(), pri.end());
        r_dual = rho * sup_norm(gz, gx);
        const double eps_pri = sp.abs_tol + sp.rel_tol * *std::max_element(pri_scale.begin(), pri_scale.end());

        if (it % kHistoryStride == 0) {
            const double obj = objective_terms(prob, prob.corpus_signal(z), x.cwiseMin(0.0), z).total();
            best = std::min(best, obj);
            dec.best_objective.push_back(best);
        }

        const bool balance = sp.adaptive_rho && it % kBalanceEvery == 0 && it <= balance_until;
        if (r_pri > eps_pri && !balance) continue;

        std::array<double, kBlocks> dual_scale{};
        for (int j = 0; j < kBlocks; ++j) dual_scale[j] = rho * split->adjoint_norm(j, u[j]);
        const double eps_dual =
            sp.abs_tol + sp.rel_tol * *std::max_element(dual_scale.begin(), dual_scale.end());

        if (it % 250 == 0)
            spdlog::debug("iter {} primal {:.3e}/{:.3e} dual {:.3e}/{:.3e} best {:.9g}", it, r_pri, eps_pri, r_dual,
                          eps_dual, best);

        if (r_pri <= eps_pri && r_dual <= eps_dual && polish(prob, z, x).displacement <= kPolishTolerance) {
            converged = true;
            break;
        }
        if (!balance) continue;

        bool changed = false;
        for (int j = 0; j < kBlocks; ++j) {
            const double rj = pri[j] / (sp.abs_tol + sp.rel_tol * pri_scale[j]);
            const double dj = rho * split->adjoint_norm(j, delta[j]) / (sp.abs_tol + sp.rel_tol * dual_scale[j]);
            double factor = 1.0;
            if (rj > kBalanceRatio * dj) factor = 2.0;
            else if (dj > kBalanceRatio * rj) factor = 0.5;
            const double next = sigma[static_cast<std::size_t>(j)] * factor;
            if (factor != 1.0 && next >= kMinPenalty && next <= kMaxPenalty) {
                sigma[static_cast<std::size_t>(j)] = next;
                u[j] /= factor;
                changed = true;
            }
        }
        if (changed) split = std::make_unique<Splitting>(prob, sigma);
    }

    const Polished pol = polish(prob, z, x);
    dec.x2 = pol.x2;
    dec.x3 = pol.x3;
    dec.z = z;
    dec.x1 = MatrixXd::Zero(prob.T(), prob.p());
    for (int t = 0; t < prob.T(); ++t)
        if (mask[t] > 0.0) dec.x1.row(t) = prob.y.row(t) - dec.x2.row(t) - dec.x3.row(t);
    dec.objective = objective_terms(prob, dec.x2, dec.x3, dec.z).total();
    dec.iterations = it;
    dec.primal_residual = r_pri;
    dec.dual_residual = r_dual;
    dec.converged = converged;
    dec.final_rho = rho;
    spdlog::debug("block penalties {}", fmt::join(sigma, " "));
    if (!converged)
        spdlog::warn("decomposition did not converge in {} iterations (primal {:.3g}, dual {:.3g})", it, r_pri,
                     r_dual);
    return dec;
}

void write_decomposition(const std::filesystem::path& dir, const Decomposition& dec, const SdParams& params,
                         const std::string& params_hash) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const std::pair<const char*, const MatrixXd*> blocks[] = {
        {"x1.csv", &dec.x1}, {"x2.csv", &dec.x2}, {"x3.csv", &dec.x3}, {"z.csv", &dec.z}};
    for (const auto& [name, m] : blocks) {
        std::ostringstream os;
        write_matrix(os, *m, "params_hash=" + params_hash);
        write_text_file(dir / name, os.str());
    }
    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-decomposition-v1"));
    doc.set("params_hash", params_hash);
    doc.set("solver_hash", params.fingerprint());
    doc.set("objective", dec.objective);
    doc.set("iterations", static_cast<long long>(dec.iterations));
    doc.set("primal_residual", dec.primal_residual);
    doc.set("dual_residual", dec.dual_residual);
    doc.set("converged", std::string(dec.converged ? "true" : "false"));
    doc.set("final_rho", dec.final_rho);
    doc.set("lambda_2a", params.lambda_2a);
    doc.set("lambda_2b", params.lambda_2b);
    doc.set("lambda_3", params.lambda_3);
    doc.set("weight_mode", to_string(params.weight_mode));
    doc.set("norm_mode", to_string(params.norm_mode));
    doc.set("abs_tol", params.abs_tol);
    doc.set("rel_tol", params.rel_tol);
    doc.set("max_iter", static_cast<long long>(params.max_iter));
    doc.set("rho", params.rho);
    std::ostringstream os;
    doc.write(os);
    write_text_file(dir / "diagnostics.txt", os.str());
}

}  // namespace shadeloss
