#include "shadeloss/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "shadeloss/corpus.hpp"
#include "shadeloss/errors.hpp"
#include "shadeloss/pipeline.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

namespace {

namespace fs = std::filesystem;

struct CorpusArgs {
    fs::path out = "corpus.txt";
    int k = 6;
    CorpusGrid grid;
    ClearSkyParams clearsky;
};

struct AnalyzeArgs {
    fs::path input;
    fs::path corpus;
    fs::path out = "analysis";
    SdParams sd;
    std::string weight_mode = "eigenvalue-inverse";
    std::string norm_mode = "unsquared";
    int min_days = ParseOptions{}.min_distinct_days;
};

struct SynthArgs {
    fs::path out = "synth";
    SynthConfig cfg;
    std::vector<std::string> obstructions;
};

struct ValidateArgs {
    fs::path input;
    fs::path truth;
    fs::path out = "metrics.txt";
    // azimuth sweep
    std::vector<double> sweep;
    fs::path corpus;
    SynthArgs synth;
    SdParams sd;
};

void add_config(CLI::App* sub, fs::path& path) {
    sub->add_option("--config", path, "key=value file; command-line flags take precedence");
}

// CLI11 only reads config files attached to the top-level app, so subcommand files are applied here:
// each key fills the option of the same name unless that option was given on the command line.
void apply_config(CLI::App* sub, const fs::path& path) {
    if (!fs::is_regular_file(path)) throw IoError("config file not found: " + path.string());
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path.string())) {
        if (item.name == "++" || item.name == "--") continue;
        CLI::Option* op = sub->get_option_no_throw("--" + item.name);
        if (op == nullptr || item.name == "config")
            throw ArgumentError("unknown key '" + item.fullname() + "' in " + path.string());
        if (op->count() > 0) continue;
        op->add_result(item.inputs);
        op->run_callback();
    }
}

void add_clearsky(CLI::App* sub, ClearSkyParams& p) {
    sub->add_option("--aod700", p.aod700, "aerosol optical depth at 700 nm")->capture_default_str();
    sub->add_option("--precipitable-water", p.precipitable_water, "cm")->capture_default_str();
    sub->add_option("--pressure", p.pressure, "Pa")->capture_default_str();
    sub->add_option("--albedo", p.albedo, "ground reflectance")->capture_default_str();
}

void add_sd(CLI::App* sub, SdParams& sd) {
    sub->add_option("--lambda2a", sd.lambda_2a, "corpus distance weight")->capture_default_str();
    sub->add_option("--lambda2b", sd.lambda_2b, "clear-sky smoothness weight")->capture_default_str();
    sub->add_option("--lambda3", sd.lambda_3, "shade compactness weight")->capture_default_str();
    sub->add_option("--max-iter", sd.max_iter, "solver iteration budget")->capture_default_str();
    sub->add_option("--abs-tol", sd.abs_tol)->capture_default_str();
    sub->add_option("--rel-tol", sd.rel_tol)->capture_default_str();
    sub->add_option("--rho", sd.rho, "splitting penalty")->capture_default_str();
}

void add_synth(CLI::App* sub, SynthArgs& a) {
    auto& g = a.cfg.geometry;
    sub->add_option("--latitude", g.latitude)->capture_default_str();
    sub->add_option("--longitude", g.longitude)->capture_default_str();
    sub->add_option("--tilt", g.tilt)->capture_default_str();
    sub->add_option("--azimuth", g.azimuth, "degrees clockwise from north")->capture_default_str();
    sub->add_option("--capacity", g.capacity, "kW")->capture_default_str();
    sub->add_option("--years", a.cfg.years)->capture_default_str();
    sub->add_option("--interval", a.cfg.interval, "seconds")->capture_default_str();
    sub->add_option("--cloud-prob", a.cfg.cloud_prob)->capture_default_str();
    sub->add_option("--seed", a.cfg.seed)->capture_default_str();
    sub->add_option("--obstruction", a.obstructions, "az_lo:az_hi:elevation:fraction, repeatable");
    add_clearsky(sub, a.cfg.clearsky);
}

Obstruction parse_obstructions(const std::vector<std::string>& specs) {
    Obstruction obs;
    for (const auto& spec : specs) {
        std::vector<double> v;
        std::stringstream ss(spec);
        std::string field;
        while (std::getline(ss, field, ':')) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ArgumentError("bad obstruction '" + spec + "'");
            }
        }
        if (v.size() != 4) throw ArgumentError("obstruction '" + spec + "' needs az_lo:az_hi:elevation:fraction");
        obs.segments.push_back({v[0], v[1], v[2], v[3]});
    }
    obs.validate();
    return obs;
}

RawSeries load_series(const fs::path& path, int min_days) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input " + path.string());
    ParseOptions opts;
    opts.min_distinct_days = min_days;
    return parse_series(in, opts);
}

ClearSkyCorpus load_corpus(const fs::path& path) {
    if (path.empty()) throw ArgumentError("--corpus is required");
    if (!fs::exists(path)) throw IoError("corpus file not found: " + path.string());
    return read_corpus(path);
}

int cmd_corpus(const CorpusArgs& a, std::ostream& out) {
    if (a.k < 1) throw ArgumentError("k must be at least 1");
    a.clearsky.validate();
    const CorpusProfiles profiles = generate_corpus(a.grid, a.clearsky);
    ClearSkyCorpus c = fit_corpus(profiles.rows, a.k);
    c.grid = a.grid;
    c.params = a.clearsky;
    write_corpus(a.out, c);
    out << "profiles " << c.n_profiles << "\n";
    out << "k " << c.k << " (requested " << c.requested_k << ")\n";
    out << "eigenvalues";
    for (int j = 0; j < c.k; ++j) out << ' ' << format_double(c.lambda[j]);
    out << "\ncaptured_variance " << format_double(c.captured_variance()) << "\n";
    out << "fingerprint " << corpus_fingerprint(c) << "\n";
    out << "wrote " << a.out.string() << "\n";
    return kExitOk;
}

int cmd_analyze(AnalyzeArgs a, std::ostream& out) {
    if (a.input.empty()) throw ArgumentError("--input is required");
    a.sd.weight_mode = parse_weight_mode(a.weight_mode);
    a.sd.norm_mode = parse_norm_mode(a.norm_mode);
    const RawSeries series = load_series(a.input, a.min_days);
    const ClearSkyCorpus corpus = load_corpus(a.corpus);
    AnalyzeOptions opts;
    opts.sd = a.sd;
    const Analysis an = analyze(series, corpus, opts);
    write_analysis(a.out, an, a.sd);
    out << "known_bins " << an.prep.signal.known_count() << "\n";
    out << "converged " << (an.dec.converged ? "true" : "false") << " after " << an.dec.iterations
        << " iterations\n";
    out << "yearly_loss_kwh " << format_double(an.report.yearly_loss) << "\n";
    out << "yearly_energy_kwh " << format_double(an.report.yearly_energy) << "\n";
    out << "loss_fraction_pct " << format_double(an.report.loss_fraction) << "\n";
    out << "wrote " << a.out.string() << "\n";
    return an.dec.converged ? kExitOk : kExitWarning;
}

int cmd_synth(SynthArgs a, std::ostream& out) {
    a.cfg.obstruction = parse_obstructions(a.obstructions);
    const SynthOutput s = synthesize(a.cfg);
    write_synth(a.out, s);
    out << "samples " << s.series.size() << "\n";
    out << "yearly_loss_ref_kwh " << format_double(s.truth.yearly_loss_ref) << "\n";
    out << "yearly_energy_ref_kwh " << format_double(s.truth.yearly_energy_ref) << "\n";
    out << "wrote " << a.out.string() << "\n";
    return kExitOk;
}

fs::path report_path(const fs::path& p) { return fs::is_directory(p) ? p / "report.txt" : p; }
fs::path truth_path(const fs::path& p) { return fs::is_directory(p) ? p / "ground_truth.txt" : p; }

int cmd_validate_pair(const ValidateArgs& a, std::ostream& out) {
    if (a.input.empty() || a.truth.empty()) throw ArgumentError("--input and --truth are required");
    ShadeReport est = read_report(report_path(a.input));
    const ReferenceLosses ref = read_reference(truth_path(a.truth));
    attach_metrics(est, ref);
    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-metrics-v1"));
    doc.set("params_hash", est.params_hash);
    doc.set("rmse_kwh", *est.rmse);
    doc.set("re_pct", *est.re);
    doc.set("yearly_loss_kwh", est.yearly_loss);
    doc.set("yearly_loss_ref_kwh", ref.yearly_loss);
    doc.set("yearly_energy_ref_kwh", ref.yearly_energy);
    std::ostringstream os;
    doc.write(os);
    write_text_file(a.out, os.str());
    out << "rmse_kwh " << format_double(*est.rmse) << "\nre_pct " << format_double(*est.re) << "\n";
    return kExitOk;
}

int cmd_validate_sweep(const ValidateArgs& a, std::ostream& out) {
    const ClearSkyCorpus corpus = load_corpus(a.corpus);
    SynthConfig cfg = a.synth.cfg;
    cfg.obstruction = parse_obstructions(a.synth.obstructions);
    AnalyzeOptions opts;
    opts.sd = a.sd;
    std::ostringstream table;
    table << "azimuth,yearly_loss_kWh,reference_kWh,reference_energy_kWh,re_pct,rmse_kWh,converged\n";
    bool all_converged = true;
    for (double az : a.sweep) {
        cfg.geometry.azimuth = az;
        const SynthOutput s = synthesize(cfg);
        Analysis an = analyze(s.series, corpus, opts);
        attach_metrics(an.report, s.truth.reference());
        all_converged = all_converged && an.dec.converged;
        table << format_double(az) << ',' << format_double(an.report.yearly_loss) << ','
              << format_double(s.truth.yearly_loss_ref) << ',' << format_double(s.truth.yearly_energy_ref) << ','
              << format_double(*an.report.re) << ',' << format_double(*an.report.rmse) << ','
              << (an.dec.converged ? 1 : 0) << '\n';
        out << "azimuth " << format_double(az) << " re_pct " << format_double(*an.report.re) << " rmse_kwh "
            << format_double(*an.report.rmse) << "\n";
    }
    write_text_file(a.out, table.str());
    return all_converged ? kExitOk : kExitWarning;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimate energy lost to shade from PV power data by signal decomposition", "shadeloss"};
    app.require_subcommand(1);
    bool verbose = false;
    fs::path config_path;
    app.add_flag("-v,--verbose", verbose, "debug logging");

    CorpusArgs corpus_args;
    auto* corpus = app.add_subcommand("corpus", "simulate and fit the clear-sky corpus");
    corpus->add_option("--out", corpus_args.out, "artifact path")->capture_default_str();
    corpus->add_option("--k", corpus_args.k, "eigenvectors kept")->capture_default_str();
    corpus->add_option("--latitudes", corpus_args.grid.latitudes)->delimiter(',');
    corpus->add_option("--tilts", corpus_args.grid.tilts)->delimiter(',');
    corpus->add_option("--azimuths", corpus_args.grid.azimuths)->delimiter(',');
    add_clearsky(corpus, corpus_args.clearsky);
    add_config(corpus, config_path);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "estimate shade losses of a power series");
    analyze_cmd->add_option("--input", analyze_args.input, "timestamp,power_kw series");
    analyze_cmd->add_option("--corpus", analyze_args.corpus, "corpus artifact");
    analyze_cmd->add_option("--out", analyze_args.out, "output directory")->capture_default_str();
    analyze_cmd->add_option("--weight-mode", analyze_args.weight_mode)
        ->check(CLI::IsMember({"eigenvalue-inverse", "eigenvalue-inverse-sqrt"}))
        ->capture_default_str();
    analyze_cmd->add_option("--norm-mode", analyze_args.norm_mode)
        ->check(CLI::IsMember({"unsquared", "squared"}))
        ->capture_default_str();
    analyze_cmd->add_option("--min-days", analyze_args.min_days, "minimum distinct days of data")
        ->capture_default_str();
    add_sd(analyze_cmd, analyze_args.sd);
    add_config(analyze_cmd, config_path);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "simulate a shaded, cloudy PV system with ground truth");
    synth->add_option("--out", synth_args.out, "output directory")->capture_default_str();
    add_synth(synth, synth_args);
    add_config(synth, config_path);

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "compare an analysis with ground truth, or run an azimuth sweep");
    validate->add_option("--input", validate_args.input, "analysis directory or report.txt");
    validate->add_option("--truth", validate_args.truth, "synth directory or ground_truth.txt");
    validate->add_option("--out", validate_args.out, "metrics file (sweep: table)")->capture_default_str();
    validate->add_option("--sweep", validate_args.sweep, "azimuths to simulate and analyze")->delimiter(',');
    validate->add_option("--corpus", validate_args.corpus, "corpus artifact (sweep)");
    add_synth(validate, validate_args.synth);
    add_sd(validate, validate_args.sd);
    add_config(validate, config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (!config_path.empty()) apply_config(app.get_subcommands().front(), config_path);
        if (*corpus) return cmd_corpus(corpus_args, out);
        if (*analyze_cmd) return cmd_analyze(analyze_args, out);
        if (*synth) return cmd_synth(synth_args, out);
        if (validate_args.sweep.empty()) return cmd_validate_pair(validate_args, out);
        return cmd_validate_sweep(validate_args, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

}  // namespace shadeloss
