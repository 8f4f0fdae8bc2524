// Acceptance gate: runs every criterion at its stated tolerance and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "shadeloss/oracle.hpp"
#include "shadeloss/pipeline.hpp"
#include "shadeloss/synth.hpp"

using namespace shadeloss;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SynthConfig base_config() {
    SynthConfig cfg;
    cfg.geometry = SystemGeometry{34.0, -118.0, 20.0, 180.0, 5.0};
    cfg.years = 2;
    cfg.interval = 300;
    cfg.cloud_prob = 0.35;
    cfg.seed = 42;
    return cfg;
}

// A southern obstruction spanning azimuth [lo, hi] below `elevation`, blocking the whole beam.
Obstruction southern(double lo, double hi, double elevation) { return Obstruction{{{lo, hi, elevation, 1.0}}}; }

struct Run {
    SynthOutput synth;
    Analysis analysis;
    double seconds = 0.0;
};

Run run_fixture(const SynthConfig& cfg) {
    const auto t0 = Clock::now();
    Run r;
    r.synth = synthesize(cfg);
    r.analysis = analyze(r.synth.series, testing::default_corpus());
    attach_metrics(r.analysis.report, r.synth.truth.reference());
    r.seconds = seconds_since(t0);
    return r;
}

double truth_fraction(const GroundTruth& t) { return 100.0 * t.yearly_loss_ref / t.yearly_energy_ref; }

std::string describe(const Run& r) {
    return fmt::format("truth {:.2f}% est {:.2f}% re {:+.2f} rmse {:.2f} kWh converged {} ({:.0f} s)",
                       truth_fraction(r.synth.truth), r.analysis.report.loss_fraction, *r.analysis.report.re,
                       *r.analysis.report.rmse, r.analysis.dec.converged, r.seconds);
}

// Invariants every analysis must satisfy.
struct InvariantCheck {
    bool ok = true;
    std::string worst;
    bool shape_ok = true;
};

void check_invariants(const Analysis& a, InvariantCheck& out) {
    const auto& ts = a.prep.signal;
    const auto& d = a.dec;
    for (int t = 0; t < ts.rows(); ++t) {
        if (!ts.known_rows[static_cast<std::size_t>(t)]) continue;
        for (int j = 0; j < ts.cols(); ++j)
            if (d.x1(t, j) != ts.y(t, j) - d.x2(t, j) - d.x3(t, j)) {
                out.ok = false;
                out.worst = "reconstruction";
            }
    }
    const auto fail = [&](bool bad, const char* what) {
        if (bad) {
            out.ok = false;
            out.worst = what;
        }
    };
    fail(d.x3.maxCoeff() > 1e-7, "x3 sign");
    fail(-d.x2.minCoeff() > 1e-7, "x2 sign");
    const Eigen::MatrixXd curvature = second_diff(ts.rows()) * d.x2;
    fail(curvature.maxCoeff() > 1e-7, "x2 concavity");
    fail(d.x2.col(0).cwiseAbs().maxCoeff() > 1e-7 || d.x2.col(ts.cols() - 1).cwiseAbs().maxCoeff() > 1e-7,
         "x2 boundary");
    if (ts.rows() != kNumBins || ts.cols() != kProfileSamples) out.shape_ok = false;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (std::memcmp(a.data() + i, b.data() + i, sizeof(double)) != 0) return false;
    return true;
}

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d %s: %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    InvariantCheck invariants;

    // 1. medium shade
    SynthConfig medium = base_config();
    medium.obstruction = southern(150.0, 210.0, 35.0);
    const Run med = run_fixture(medium);
    check_invariants(med.analysis, invariants);
    {
        const double tf = truth_fraction(med.synth.truth);
        const bool fixture_ok = tf >= 3.0 && tf <= 8.0;
        const bool pass = fixture_ok && std::abs(*med.analysis.report.re) <= 4.0 &&
                          *med.analysis.report.rmse <= 2.5 && med.seconds <= 600.0;
        report(1, pass, "medium shade: " + describe(med) + " [need truth in 3..8%, |re| <= 4, rmse <= 2.5, <= 600 s]");
    }

    // 2. unshaded control
    const Run none = run_fixture(base_config());
    check_invariants(none.analysis, invariants);
    report(2, none.analysis.report.loss_fraction <= 1.0 && std::abs(*none.analysis.report.re) <= 1.5,
           "unshaded: " + describe(none) + " [need est <= 1%, |re| <= 1.5]");

    // 3. high shade
    SynthConfig high = base_config();
    high.obstruction = southern(120.0, 240.0, 45.0);
    const Run hi = run_fixture(high);
    check_invariants(hi.analysis, invariants);
    {
        const bool fixture_ok = truth_fraction(hi.synth.truth) >= 20.0;
        const bool pass = fixture_ok && *hi.analysis.report.re <= 0.0 &&
                          hi.analysis.report.yearly_loss >= 0.5 * hi.synth.truth.yearly_loss_ref;
        report(3, pass,
               "high shade: " + describe(hi) +
                   fmt::format(" est/truth {:.2f} [need truth >= 20%, re <= 0, est/truth >= 0.5]",
                               hi.analysis.report.yearly_loss / hi.synth.truth.yearly_loss_ref));
    }

    // 4. azimuth sweep at low shade
    {
        std::vector<double> re;
        std::string detail = "low-shade sweep re:";
        for (double az : {90.0, 135.0, 180.0, 225.0, 270.0}) {
            SynthConfig cfg = base_config();
            cfg.geometry.azimuth = az;
            cfg.obstruction = southern(150.0, 210.0, 30.0);
            const Run r = run_fixture(cfg);
            check_invariants(r.analysis, invariants);
            re.push_back(*r.analysis.report.re);
            detail += fmt::format(" az{:.0f}={:+.2f}(truth {:.2f}%)", az, re.back(), truth_fraction(r.synth.truth));
        }
        report(4, re[0] >= re[2] && re[4] >= re[2], detail + " [need re(90) >= re(180) <= re(270)]");
    }

    // 5. oracle parity
    {
        const auto t0 = Clock::now();
        SdParams sp;
        sp.lambda_2b = 1.0;
        OracleOptions oo;
        oo.iterations = 500000;
        bool pass = true;
        std::string detail = "tiny instances rel gap:";
        for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
            const SdProblem prob = make_tiny_problem(seed, sp);
            const Decomposition dec = solve(prob);
            const OracleResult orc = oracle_solve(prob, oo);
            const double rel = std::abs(dec.objective - orc.objective) / std::max(orc.objective, 1e-12);
            const ConstraintViolation v = constraint_violation(prob, dec.x2, dec.x3, dec.z);
            const double viol = std::max({v.x2_negative, v.x2_convexity, v.x2_boundary, v.x2_subspace, v.x3_positive});
            pass = pass && orc.found_feasible && rel <= 1e-3 && viol <= 1e-6;
            detail += fmt::format(" {:.1e}(viol {:.1e})", rel, viol);
        }
        const double secs = seconds_since(t0);
        pass = pass && secs <= 120.0;
        report(5, pass, detail + fmt::format(" in {:.0f} s [need rel <= 1e-3, viol <= 1e-6, <= 120 s]", secs));
    }

    // 6. invariants, plus missing-row invariance and determinism on the medium fixture
    {
        const auto& ts = med.analysis.prep.signal;
        std::vector<bool> known = ts.known_rows;
        known[10] = false;
        Eigen::MatrixXd y1 = ts.y, y2 = ts.y;
        y1.row(10).setConstant(0.25);
        y2.row(10).setConstant(-7.0);
        const Decomposition a = solve(build_problem(y1, known, testing::default_corpus(), SdParams{}));
        const Decomposition b = solve(build_problem(y2, known, testing::default_corpus(), SdParams{}));
        const bool missing_ok = bit_equal(a.x2, b.x2) && bit_equal(a.x3, b.x3) && bit_equal(a.z, b.z);

        const Analysis again = analyze(med.synth.series, testing::default_corpus());
        const bool determinism_ok = bit_equal(again.dec.x1, med.analysis.dec.x1) &&
                                    bit_equal(again.dec.x2, med.analysis.dec.x2) &&
                                    bit_equal(again.dec.x3, med.analysis.dec.x3) &&
                                    again.params_hash == med.analysis.params_hash;
        report(6, invariants.ok && missing_ok && determinism_ok,
               fmt::format("cones/boundary/reconstruction {} missing-row {} determinism {}",
                           invariants.ok ? "ok" : "violated (" + invariants.worst + ")",
                           missing_ok ? "bit-exact" : "differs", determinism_ok ? "bit-exact" : "differs"));
    }

    // 7. corpus quality
    {
        const auto& c = testing::default_corpus();
        const Eigen::MatrixXd gram = c.q.transpose() * c.q;
        const double ortho = (gram - Eigen::MatrixXd::Identity(c.k, c.k)).cwiseAbs().maxCoeff();
        report(7, c.k == 6 && c.captured_variance() >= 0.95 && ortho <= 1e-8,
               fmt::format("k {} captured {:.4f} orthonormality {:.1e} [need >= 0.95, <= 1e-8]", c.k,
                           c.captured_variance(), ortho));
    }

    // 8. pipeline shape and cloudy-day recovery on the medium fixture
    {
        const auto& clear = med.analysis.prep.clear;
        const auto& labels = med.synth.truth.clear_day_labels;
        int cloudy = 0, caught = 0;
        for (std::size_t d = 0; d < std::min(clear.size(), labels.size()); ++d) {
            if (labels[d]) continue;
            ++cloudy;
            caught += !clear[d];
        }
        const double recall = cloudy > 0 ? static_cast<double>(caught) / cloudy : 0.0;
        const bool shape_ok = invariants.shape_ok;
        report(8, shape_ok && clear.size() == labels.size() && recall >= 0.9,
               fmt::format("all signals 47x256 {} cloudy days caught {}/{} = {:.3f} [need >= 0.90]",
                           shape_ok ? "yes" : "no", caught, cloudy, recall));
    }

    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
