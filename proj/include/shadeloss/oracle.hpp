#pragma once

#include "shadeloss/sd_engine.hpp"

namespace shadeloss {

struct OracleOptions {
    long long iterations = 200000;
    double step0 = 0.1;
    int projection_passes = 50;
};

struct OracleResult {
    double objective = 0.0;  ///< best objective over feasible iterates
    bool found_feasible = false;
    long long iterations = 0;
};

/// Projected subgradient descent on a small problem, written independently of the operator-splitting solver.
/// Throws ArgumentError for problems larger than T=8, p=12, k=3.
OracleResult oracle_solve(const SdProblem& prob, const OracleOptions& opts = {});

}  // namespace shadeloss
