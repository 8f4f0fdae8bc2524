#include "shadeloss/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "shadeloss/errors.hpp"

namespace shadeloss {

namespace {

constexpr double kFeasible = 1e-9;
constexpr double kStopViolation = 1e-10;
constexpr double kStopMove = 1e-10;

// Everything below uses plain arrays and loops; only the problem data is shared with the solver.
struct Dense {
    int rows = 0, cols = 0;
    std::vector<double> v;
    Dense() = default;
    Dense(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), 0.0) {}
    double& operator()(int r, int c) { return v[static_cast<std::size_t>(r * cols + c)]; }
    double operator()(int r, int c) const { return v[static_cast<std::size_t>(r * cols + c)]; }
};

struct Instance {
    int T, p, k;
    Dense y, q;
    std::vector<double> mu, w;
    std::vector<bool> known;
    double l2a, l2b, l3;
    bool squared;
};

double fro(const Dense& m) {
    double s = 0.0;
    for (double x : m.v) s += x * x;
    return std::sqrt(s);
}

// x2 = 1 mu^T + Z Q^T
Dense clear_part(const Instance& in, const Dense& z) {
    Dense x2(in.T, in.p);
    for (int t = 0; t < in.T; ++t)
        for (int i = 0; i < in.p; ++i) {
            double s = in.mu[static_cast<std::size_t>(i)];
            for (int j = 0; j < in.k; ++j) s += z(t, j) * in.q(i, j);
            x2(t, i) = s;
        }
    return x2;
}

Dense diff_rows(const Dense& m) {
    Dense d(m.rows - 2, m.cols);
    for (int t = 0; t + 2 < m.rows; ++t)
        for (int i = 0; i < m.cols; ++i) d(t, i) = m(t, i) - 2.0 * m(t + 1, i) + m(t + 2, i);
    return d;
}

Dense diff_cols(const Dense& m) {
    Dense d(m.rows, m.cols - 2);
    for (int t = 0; t < m.rows; ++t)
        for (int i = 0; i + 2 < m.cols; ++i) d(t, i) = m(t, i) - 2.0 * m(t, i + 1) + m(t, i + 2);
    return d;
}

// adjoints of the difference maps
Dense diff_rows_t(const Dense& g, int rows) {
    Dense out(rows, g.cols);
    for (int t = 0; t < g.rows; ++t)
        for (int i = 0; i < g.cols; ++i) {
            out(t, i) += g(t, i);
            out(t + 1, i) -= 2.0 * g(t, i);
            out(t + 2, i) += g(t, i);
        }
    return out;
}

Dense diff_cols_t(const Dense& g, int cols) {
    Dense out(g.rows, cols);
    for (int t = 0; t < g.rows; ++t)
        for (int i = 0; i < g.cols; ++i) {
            out(t, i) += g(t, i);
            out(t, i + 1) -= 2.0 * g(t, i);
            out(t, i + 2) += g(t, i);
        }
    return out;
}

double norm_term(const Dense& m, bool squared) {
    const double f = fro(m);
    return squared ? f * f : f;
}

// subgradient of ||m|| (or ||m||^2) with respect to m
Dense norm_grad(const Dense& m, bool squared) {
    Dense g = m;
    if (squared) {
        for (double& x : g.v) x *= 2.0;
        return g;
    }
    const double f = fro(m);
    for (double& x : g.v) x = f > 0.0 ? x / f : 0.0;
    return g;
}

double objective(const Instance& in, const Dense& z, const Dense& x3) {
    const Dense x2 = clear_part(in, z);
    double obj = 0.0;
    for (int t = 0; t < in.T; ++t) {
        if (!in.known[static_cast<std::size_t>(t)]) continue;
        for (int i = 0; i < in.p; ++i) obj += std::abs(in.y(t, i) - x2(t, i) - x3(t, i));
    }
    Dense zw = z;
    for (int t = 0; t < in.T; ++t)
        for (int j = 0; j < in.k; ++j) zw(t, j) *= in.w[static_cast<std::size_t>(j)];
    obj += in.l2a * norm_term(zw, in.squared);
    obj += in.l2b * norm_term(diff_rows(x2), in.squared);
    obj += in.l3 * (norm_term(diff_rows(x3), in.squared) + norm_term(diff_cols(x3), in.squared));
    return obj;
}

// Halfspace sum_r coef[r] * (z_{row[r]} . q_i) <= b for x2 >= 0 and curvature(x2) <= 0 across rows.
struct Halfspace {
    int i = 0;  // sample column of Q
    int nrows = 0;
    int row[3] = {0, 0, 0};
    double coef[3] = {0.0, 0.0, 0.0};
    double b = 0.0;
    double aa = 0.0;  // squared norm of the full coefficient vector
};

std::vector<Halfspace> constraint_set(const Instance& in) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < in.p; ++i) {
        double qq = 0.0;
        for (int j = 0; j < in.k; ++j) qq += in.q(i, j) * in.q(i, j);
        if (qq == 0.0) continue;  // boundary samples carry no variable
        for (int t = 0; t < in.T; ++t) {
            // -(mu_i + z_t . q_i) <= 0
            Halfspace h;
            h.i = i;
            h.nrows = 1;
            h.row[0] = t;
            h.coef[0] = -1.0;
            h.b = in.mu[static_cast<std::size_t>(i)];
            h.aa = qq;
            hs.push_back(h);
        }
        for (int t = 0; t + 2 < in.T; ++t) {
            // (z_t - 2 z_{t+1} + z_{t+2}) . q_i <= 0
            Halfspace h;
            h.i = i;
            h.nrows = 3;
            for (int r = 0; r < 3; ++r) h.row[r] = t + r;
            h.coef[0] = 1.0;
            h.coef[1] = -2.0;
            h.coef[2] = 1.0;
            h.aa = 6.0 * qq;
            hs.push_back(h);
        }
    }
    return hs;
}

double excess(const Instance& in, const Halfspace& h, const Dense& z) {
    double s = -h.b;
    for (int r = 0; r < h.nrows; ++r)
        for (int j = 0; j < in.k; ++j) s += h.coef[r] * z(h.row[r], j) * in.q(h.i, j);
    return s;
}

// z += step * a_h
void move_along(const Instance& in, const Halfspace& h, Dense& z, double step) {
    for (int r = 0; r < h.nrows; ++r)
        for (int j = 0; j < in.k; ++j) z(h.row[r], j) += step * h.coef[r] * in.q(h.i, j);
}

double max_violation(const Instance& in, const std::vector<Halfspace>& hs, const Dense& z) {
    double m = 0.0;
    for (const auto& h : hs) m = std::max(m, excess(in, h, z));
    return m;
}

// Dykstra's alternating projections onto the intersection of halfspaces. Every correction is a multiple
// of its halfspace normal, so one scalar per halfspace is kept. The corrections of the previous call seed
// the next one (z starts at v minus their sum); passes stop once z is feasible and no longer moves.
void project(const Instance& in, const std::vector<Halfspace>& hs, Dense& z, int passes, std::vector<double>& incr) {
    if (incr.size() != hs.size()) incr.assign(hs.size(), 0.0);
    for (std::size_t h = 0; h < hs.size(); ++h)
        if (incr[h] != 0.0) move_along(in, hs[h], z, -incr[h]);
    for (int pass = 0; pass < passes; ++pass) {
        double moved = 0.0;
        double violation = 0.0;
        for (std::size_t h = 0; h < hs.size(); ++h) {
            const double old = incr[h];
            double s = excess(in, hs[h], z);
            violation = std::max(violation, s);
            if (old != 0.0) s += old * hs[h].aa;  // excess after undoing the stored correction
            const double next = s > 0.0 ? s / hs[h].aa : 0.0;
            if (next != old) move_along(in, hs[h], z, old - next);
            incr[h] = next;
            moved = std::max(moved, std::abs(next - old) * std::sqrt(hs[h].aa));
        }
        if (moved <= kStopMove && violation <= kStopViolation) return;
    }
}

}  // namespace

OracleResult oracle_solve(const SdProblem& prob, const OracleOptions& opts) {
    if (prob.T() > 8 || prob.p() > 12 || prob.k() > 3)
        throw ArgumentError("oracle is limited to T <= 8, p <= 12, k <= 3");
    Instance in;
    in.T = prob.T();
    in.p = prob.p();
    in.k = prob.k();
    in.y = Dense(in.T, in.p);
    for (int t = 0; t < in.T; ++t)
        for (int i = 0; i < in.p; ++i) in.y(t, i) = prob.y(t, i);
    in.q = Dense(in.p, in.k);
    for (int i = 0; i < in.p; ++i)
        for (int j = 0; j < in.k; ++j) in.q(i, j) = prob.corpus.q(i, j);
    for (int i = 0; i < in.p; ++i) in.mu.push_back(prob.corpus.mu[i]);
    for (int j = 0; j < in.k; ++j) in.w.push_back(prob.weights[j]);
    in.known = prob.known_rows;
    in.l2a = prob.params.lambda_2a;
    in.l2b = prob.params.lambda_2b;
    in.l3 = prob.params.lambda_3;
    in.squared = prob.params.norm_mode == NormMode::Squared;
    for (int i : {0, in.p - 1}) {
        if (in.mu[static_cast<std::size_t>(i)] != 0.0) throw ArgumentError("corpus mean must vanish at the boundary");
        for (int j = 0; j < in.k; ++j)
            if (in.q(i, j) != 0.0) throw ArgumentError("corpus basis must vanish at the boundary");
    }

    const auto hs = constraint_set(in);
    std::vector<double> incr;
    Dense z(in.T, in.k), x3(in.T, in.p);
    project(in, hs, z, opts.projection_passes, incr);
    if (max_violation(in, hs, z) > kFeasible)
        throw Error("oracle could not find a point satisfying the clear-sky constraints");
    OracleResult res;
    res.objective = std::numeric_limits<double>::infinity();

    for (long long it = 1; it <= opts.iterations; ++it) {
        const double obj = objective(in, z, x3);
        if (obj < res.objective && max_violation(in, hs, z) <= kFeasible) {
            res.objective = obj;
            res.found_feasible = true;
        }

        // subgradient of the objective in (Z, X)
        const Dense x2 = clear_part(in, z);
        Dense g2(in.T, in.p), g3(in.T, in.p);
        for (int t = 0; t < in.T; ++t) {
            if (!in.known[static_cast<std::size_t>(t)]) continue;
            for (int i = 0; i < in.p; ++i) {
                const double r = in.y(t, i) - x2(t, i) - x3(t, i);
                const double sg = r > 0.0 ? -1.0 : (r < 0.0 ? 1.0 : 0.0);
                g2(t, i) += sg;
                g3(t, i) += sg;
            }
        }
        const Dense gd2 = diff_rows_t(norm_grad(diff_rows(x2), in.squared), in.T);
        for (std::size_t c = 0; c < g2.v.size(); ++c) g2.v[c] += in.l2b * gd2.v[c];
        const Dense gr = diff_rows_t(norm_grad(diff_rows(x3), in.squared), in.T);
        const Dense gc = diff_cols_t(norm_grad(diff_cols(x3), in.squared), in.p);
        for (std::size_t c = 0; c < g3.v.size(); ++c) g3.v[c] += in.l3 * (gr.v[c] + gc.v[c]);

        Dense zw = z;
        for (int t = 0; t < in.T; ++t)
            for (int j = 0; j < in.k; ++j) zw(t, j) *= in.w[static_cast<std::size_t>(j)];
        const Dense gzw = norm_grad(zw, in.squared);
        Dense gz(in.T, in.k);
        for (int t = 0; t < in.T; ++t)
            for (int j = 0; j < in.k; ++j) {
                double s = in.l2a * gzw(t, j) * in.w[static_cast<std::size_t>(j)];
                for (int i = 0; i < in.p; ++i) s += g2(t, i) * in.q(i, j);
                gz(t, j) = s;
            }

        const double step = opts.step0 / std::sqrt(static_cast<double>(it));
        for (std::size_t c = 0; c < z.v.size(); ++c) z.v[c] -= step * gz.v[c];
        for (std::size_t c = 0; c < x3.v.size(); ++c) x3.v[c] = std::min(0.0, x3.v[c] - step * g3.v[c]);
        project(in, hs, z, opts.projection_passes, incr);
        res.iterations = it;
    }
    const double obj = objective(in, z, x3);
    if (obj < res.objective && max_violation(in, hs, z) <= kFeasible) {
        res.objective = obj;
        res.found_feasible = true;
    }
    return res;
}

}  // namespace shadeloss
