#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "shadeloss/corpus.hpp"
#include "shadeloss/preprocess.hpp"

namespace shadeloss {

/// Per-column weights on the corpus coefficients: 1/lambda_j or 1/sqrt(lambda_j).
enum class WeightMode { EigenvalueInverse, EigenvalueInverseSqrt };
/// Whether the Frobenius-norm penalties enter as ||.||_F or ||.||_F^2.
enum class NormMode { Unsquared, Squared };

struct SdParams {
    double lambda_2a = 0.5;  ///< distance of the clear-sky component from the corpus
    double lambda_2b = 1e3;  ///< smoothness of the clear-sky component across declination
    double lambda_3 = 1.0;   ///< compactness of the shade component
    WeightMode weight_mode = WeightMode::EigenvalueInverse;
    NormMode norm_mode = NormMode::Unsquared;
    double abs_tol = 1e-6;
    double rel_tol = 1e-5;
    int max_iter = 5000;
    double rho = 1.0;
    bool adaptive_rho = true;
    double relaxation = 1.6;

    void validate() const;
    std::string fingerprint() const;
};

std::string to_string(WeightMode m);
std::string to_string(NormMode m);
WeightMode parse_weight_mode(const std::string& s);
NormMode parse_norm_mode(const std::string& s);

/// Second-difference operator, (n-2) x n; row j is x_j - 2 x_{j+1} + x_{j+2}.
Eigen::SparseMatrix<double> second_diff(int n);

struct SdProblem {
    Eigen::MatrixXd y;             ///< T x p; missing rows hold 0 and are never read
    std::vector<bool> known_rows;  ///< the known set is known_rows x all columns
    ClearSkyCorpus corpus;
    SdParams params;
    Eigen::SparseMatrix<double> d2_rows;  ///< (T-2) x T
    Eigen::SparseMatrix<double> d2_cols;  ///< (p-2) x p
    Eigen::VectorXd weights;              ///< k

    int T() const noexcept { return static_cast<int>(y.rows()); }
    int p() const noexcept { return static_cast<int>(y.cols()); }
    int k() const noexcept { return corpus.k; }
    int known_count() const;
    /// 1 mu^T + Z Q^T
    Eigen::MatrixXd corpus_signal(const Eigen::MatrixXd& z) const;
};

/// Generic builder: y may hold NaN on rows that are not known.
SdProblem build_problem(const Eigen::MatrixXd& y, const std::vector<bool>& known_rows, const ClearSkyCorpus& corpus,
                        const SdParams& params);
SdProblem build_problem(const TransformedSignal& ts, const ClearSkyCorpus& corpus, const SdParams& params);

/// Feasibility tolerances of the hard constraints.
inline constexpr double kConeTolerance = 1e-7;
inline constexpr double kSubspaceTolerance = 1e-6;

struct ObjectiveTerms {
    double residual = 0.0;     ///< sum of |y - x2 - x3| over the known set
    double corpus = 0.0;       ///< lambda_2a-weighted
    double clear_smooth = 0.0; ///< lambda_2b-weighted
    double shade = 0.0;        ///< lambda_3-weighted
    bool feasible = true;
    double total() const;
};

ObjectiveTerms objective_terms(const SdProblem& prob, const Eigen::MatrixXd& x2, const Eigen::MatrixXd& x3,
                               const Eigen::MatrixXd& z);
/// Objective value; +infinity when a hard constraint is violated beyond tolerance.
double evaluate_objective(const SdProblem& prob, const Eigen::MatrixXd& x2, const Eigen::MatrixXd& x3,
                          const Eigen::MatrixXd& z);

struct ConstraintViolation {
    double x2_negative = 0.0;   ///< max(-x2)
    double x2_convexity = 0.0;  ///< max(D x2)
    double x2_boundary = 0.0;   ///< max |x2| on the first and last column
    double x2_subspace = 0.0;   ///< max |x2 - (1 mu^T + Z Q^T)|
    double x3_positive = 0.0;   ///< max(x3)
    bool within_tolerance() const;
};

ConstraintViolation constraint_violation(const SdProblem& prob, const Eigen::MatrixXd& x2, const Eigen::MatrixXd& x3,
                                         const Eigen::MatrixXd& z);

struct Decomposition {
    Eigen::MatrixXd x1;  ///< residual; y - x2 - x3 on known rows, 0 elsewhere
    Eigen::MatrixXd x2;  ///< clear sky
    Eigen::MatrixXd x3;  ///< shade (nonpositive)
    Eigen::MatrixXd z;   ///< corpus coefficients, T x k
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    double final_rho = 0.0;
    /// Running minimum of the penalty objective, sampled every `history_stride` iterations.
    std::vector<double> best_objective;
    int history_stride = 10;
};

/// Operator-splitting (ADMM) solve of the three-component decomposition.
Decomposition solve(const SdProblem& prob);

void write_decomposition(const std::filesystem::path& dir, const Decomposition& dec, const SdParams& params,
                         const std::string& params_hash);

}  // namespace shadeloss
