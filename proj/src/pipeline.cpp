#include "nhrmt/pipeline.hpp"

#include "nhrmt/ensembles.hpp"
#include "nhrmt/parallel.hpp"
#include "nhrmt/stats.hpp"
#include "nhrmt/unfolding.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace nhrmt {

namespace fs = std::filesystem;
using nlohmann::json;

double KickedTopCfg::nan_sentinel() { return std::nan(""); }

std::string to_string(Command c) {
    switch (c) {
        case Command::Ensemble: return "ensemble";
        case Command::KickedTop: return "kickedtop";
        case Command::LogGas: return "loggas";
        case Command::Stats: return "stats";
        case Command::Analytic: return "analytic";
    }
    throw std::logic_error("unknown command");
}

std::string to_string(OutputFormat f) {
    return f == OutputFormat::Csv ? "csv" : "json";
}

namespace {

Command command_from_string(const std::string& name) {
    if (name == "ensemble") return Command::Ensemble;
    if (name == "kickedtop") return Command::KickedTop;
    if (name == "loggas") return Command::LogGas;
    if (name == "stats") return Command::Stats;
    if (name == "analytic") return Command::Analytic;
    throw std::invalid_argument("unknown command '" + name + "'");
}

OutputFormat format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw std::invalid_argument("unknown format '" + name + "'");
}

std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Seed salts for the independent sub-streams of one run.
constexpr std::uint64_t kVarianceSalt = 0x76617269616e6365ull;
constexpr std::uint64_t kControlSalt = 0x636f6e74726f6c00ull;

} // namespace

std::vector<double> StatsKnobs::target_list() const {
    if (targets.empty()) throw std::invalid_argument("empty variance target list");
    for (double t : targets) {
        if (!(t >= 0.0)) throw std::invalid_argument("variance targets must be >= 0");
    }
    return targets;
}

// --- configuration resolution ---

namespace {

void resolve(RunConfig& cfg) {
    // Kicked-top presets are resolved unconditionally so no sentinel survives
    // into manifests, regardless of the active command.
    KickedTopCfg& t = cfg.kickedtop;
    const TopClass tc = top_class_from_string(t.top_class);
    if (t.paper_scale) t.desk_scale = false;
    if (t.j <= 0.0) {
        const bool half = (tc == TopClass::SE);
        t.j = t.paper_scale ? (half ? 999.5 : 1000.0) : (half ? 249.5 : 250.0);
    }
    const double n_dim = 2.0 * t.j + 1.0;
    if (t.gamma < 0.0) t.gamma = (tc == TopClass::UE ? 4.0 : 5.0) / n_dim;

    auto fill = [](double& slot, double value) {
        if (std::isnan(slot)) slot = value;
    };
    // Parameter table of the dissipative-top study.
    switch (tc) {
        case TopClass::OE:
            fill(t.alpha, 7.0);
            fill(t.tau_min, 300.0);
            fill(t.tau_max, 350.0);
            break;
        case TopClass::UE:
            fill(t.alpha, 25.0);
            fill(t.tau_min, 40.0);
            fill(t.tau_max, 50.0);
            fill(t.k_min, 60.0);
            fill(t.k_max, 66.0);
            break;
        case TopClass::SE:
            fill(t.tau1, 307.0);
            fill(t.tau2, 336.0);
            fill(t.tau3_min, 506.0);
            fill(t.tau3_max, 530.0);
            fill(t.tau4_min, 370.0);
            fill(t.tau4_max, 420.0);
            break;
    }
    for (double* slot : {&t.alpha, &t.tau_min, &t.tau_max, &t.k_min, &t.k_max, &t.tau1, &t.tau2,
                         &t.tau3_min, &t.tau3_max, &t.tau4_min, &t.tau4_max}) {
        if (std::isnan(*slot)) *slot = 0.0;
    }
}

void validate(const RunConfig& cfg) {
    if (cfg.threads < 0) throw std::invalid_argument("--threads must be >= 0");
    cfg.knobs.target_list();
    if (cfg.knobs.centers < cfg.knobs.variance_batches || cfg.knobs.variance_batches < 1) {
        throw std::invalid_argument("need centers >= variance-batches >= 1");
    }
    switch (cfg.command) {
        case Command::Ensemble: {
            EnsembleSpec spec;
            spec.ensemble_class = ensemble_class_from_string(cfg.ensemble.ensemble_class);
            spec.n = cfg.ensemble.n;
            spec.validate();
            if (cfg.ensemble.members < 1) throw std::invalid_argument("members must be >= 1");
            if (!(cfg.ensemble.trim_frac > 0.0 && cfg.ensemble.trim_frac <= 1.0)) {
                throw std::invalid_argument("trim-frac must be in (0, 1]");
            }
            break;
        }
        case Command::KickedTop:
            make_top_params(cfg).validate();
            break;
        case Command::LogGas:
            make_loggas_config(cfg).validate();
            if (cfg.loggas.members < 1) throw std::invalid_argument("members must be >= 1");
            break;
        case Command::Stats:
            if (cfg.stats.input_dir.empty()) {
                throw std::invalid_argument("stats: --input directory is required");
            }
            break;
        case Command::Analytic:
            if (!cfg.analytic.sigma2_gine && !cfg.analytic.sigma2_selfdual) {
                throw std::invalid_argument(
                    "analytic: select at least one of --sigma2-gine / --sigma2-selfdual");
            }
            if (!(cfg.analytic.n_max > 0.0) || !(cfg.analytic.n_step > 0.0)) {
                throw std::invalid_argument("analytic: n-max and n-step must be positive");
            }
            break;
    }
}

} // namespace

TopParams make_top_params(const RunConfig& cfg) {
    const KickedTopCfg& t = cfg.kickedtop;
    TopParams p;
    p.top_class = top_class_from_string(t.top_class);
    p.j = t.j;
    p.alpha = t.alpha;
    p.gamma = t.gamma;
    p.tau_range = {t.tau_min, t.tau_max};
    p.kick_range = {t.k_min, t.k_max};
    p.tau1 = t.tau1;
    p.tau2 = t.tau2;
    p.tau3_range = {t.tau3_min, t.tau3_max};
    p.tau4_range = {t.tau4_min, t.tau4_max};
    p.tau = (t.tau_min + t.tau_max) / 2.0;
    p.kick = (t.k_min + t.k_max) / 2.0;
    p.tau3 = (t.tau3_min + t.tau3_max) / 2.0;
    p.tau4 = (t.tau4_min + t.tau4_max) / 2.0;
    p.oe_half_j_norm = t.oe_half_j_norm;
    p.members = t.members;
    p.seed = cfg.seed;
    return p;
}

LogGasConfig make_loggas_config(const RunConfig& cfg) {
    LogGasConfig lc;
    lc.n_points = cfg.loggas.n;
    lc.k_exponent = cfg.loggas.k;
    lc.sweeps_per_sample = cfg.loggas.thin;
    lc.burn_in = cfg.loggas.burn_in;
    lc.proposal_scale = cfg.loggas.proposal_scale;
    lc.seed = cfg.seed;
    return lc;
}

// --- parsing ---

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    std::string format = "csv";

    CLI::App app{"nhrmt: spectra of non-Hermitian ensembles and dissipative kicked tops,\n"
                 "two-dimensional unfolding, and universal fluctuation statistics"};
    app.set_config("--config", "", "INI config file (key = value, [section] headers)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    app.add_option("--seed", cfg.seed, "base RNG seed")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)")
        ->capture_default_str();

    auto add_knobs = [&](CLI::App* sub) {
        sub->add_option("--targets", cfg.knobs.targets,
                        "variance mean-count targets (comma separated)")
            ->delimiter(',')
            ->capture_default_str();
        sub->add_option("--centers", cfg.knobs.centers, "counting centers per target")
            ->capture_default_str();
        sub->add_option("--variance-batches", cfg.knobs.variance_batches,
                        "batches for the variance standard error")
            ->capture_default_str();
        sub->add_option("--density-degree", cfg.knobs.density_degree,
                        "radial density fit degree")
            ->capture_default_str();
        sub->add_option("--nnsd-bins", cfg.knobs.nnsd_bins, "spacing histogram bins")
            ->capture_default_str();
        sub->add_option("--nnsd-max", cfg.knobs.nnsd_max, "spacing histogram upper edge")
            ->capture_default_str();
        sub->add_option("--ratio-bins", cfg.knobs.ratio_bins, "ratio histogram bins")
            ->capture_default_str();
        sub->add_option("--s-max-fit", cfg.knobs.s_max_fit, "small-s fit window")
            ->capture_default_str();
        sub->add_option("--isochrone-dirs", cfg.knobs.isochrone_dirs,
                        "geodesic rays per isochrone")
            ->capture_default_str();
    };

    CLI::App* ens = app.add_subcommand("ensemble",
                                       "sample symm-GinE / GinE / self-dual-GinE spectra "
                                       "and compute their fluctuation statistics");
    ens->configurable();
    ens->fallthrough();
    ens->add_option("--class", cfg.ensemble.ensemble_class, "ensemble class")
        ->check(CLI::IsMember({"symm", "gine", "selfdual"}))
        ->capture_default_str();
    ens->add_option("--n", cfg.ensemble.n, "matrix dimension N (quaternion N for selfdual)")
        ->capture_default_str();
    ens->add_option("--members", cfg.ensemble.members, "ensemble members")->capture_default_str();
    ens->add_option("--trim-frac", cfg.ensemble.trim_frac,
                    "bulk window |z| <= trim-frac sqrt(N) for statistics")
        ->capture_default_str();
    add_knobs(ens);

    CLI::App* top = app.add_subcommand("kickedtop",
                                       "dissipative kicked-top sweep (OE/UE/SE) and statistics");
    top->configurable();
    top->fallthrough();
    top->add_option("--class", cfg.kickedtop.top_class, "symmetry class")
        ->check(CLI::IsMember({"oe", "ue", "se"}))
        ->capture_default_str();
    top->add_option("--j", cfg.kickedtop.j,
                    "total angular momentum (0 = scale default: 250/249.5 desk, 1000/999.5 paper)");
    top->add_option("--members", cfg.kickedtop.members, "sweep members")->capture_default_str();
    top->add_flag("--paper-scale", cfg.kickedtop.paper_scale, "J = 1000 (999.5 for se)");
    top->add_flag("--desk-scale", cfg.kickedtop.desk_scale,
                  "J = 250 (249.5 for se); the default");
    top->add_option("--gamma", cfg.kickedtop.gamma,
                    "dissipation strength (default: 5/N, 4/N for ue)");
    top->add_option("--alpha", cfg.kickedtop.alpha, "precession angle (default: class preset)");
    top->add_option("--tau-min", cfg.kickedtop.tau_min, "kick sweep lower edge");
    top->add_option("--tau-max", cfg.kickedtop.tau_max, "kick sweep upper edge");
    top->add_option("--k-min", cfg.kickedtop.k_min, "second kick sweep lower edge (ue)");
    top->add_option("--k-max", cfg.kickedtop.k_max, "second kick sweep upper edge (ue)");
    top->add_option("--tau1", cfg.kickedtop.tau1, "se kick strength tau1");
    top->add_option("--tau2", cfg.kickedtop.tau2, "se kick strength tau2");
    top->add_option("--tau3-min", cfg.kickedtop.tau3_min, "se tau3 sweep lower edge");
    top->add_option("--tau3-max", cfg.kickedtop.tau3_max, "se tau3 sweep upper edge");
    top->add_option("--tau4-min", cfg.kickedtop.tau4_min, "se tau4 sweep lower edge");
    top->add_option("--tau4-max", cfg.kickedtop.tau4_max, "se tau4 sweep upper edge");
    top->add_flag("--oe-half-j-norm", cfg.kickedtop.oe_half_j_norm,
                  "carry the 1/2J normalization in the OE exponent");
    top->add_option("--trim-lo-q", cfg.kickedtop.trim_lo_q, "lower modulus quantile for trimming")
        ->capture_default_str();
    top->add_option("--trim-hi-q", cfg.kickedtop.trim_hi_q, "upper modulus quantile for trimming")
        ->capture_default_str();
    add_knobs(top);

    CLI::App* gas = app.add_subcommand("loggas",
                                       "Metropolis sampling of the 2D log-gas with V = |z|^2k, "
                                       "flat unfolding, and number variance");
    gas->configurable();
    gas->fallthrough();
    gas->add_option("--n", cfg.loggas.n, "points per configuration")->capture_default_str();
    gas->add_option("--k", cfg.loggas.k, "potential exponent in V = |z|^2k")
        ->capture_default_str();
    gas->add_option("--members", cfg.loggas.members, "configurations to emit")
        ->capture_default_str();
    gas->add_option("--burn-in", cfg.loggas.burn_in, "burn-in sweeps")->capture_default_str();
    gas->add_option("--thin", cfg.loggas.thin, "sweeps between samples")->capture_default_str();
    gas->add_option("--proposal-scale", cfg.loggas.proposal_scale,
                    "Metropolis step scale (0 = auto-tune)")
        ->capture_default_str();
    gas->add_option("--trim-lo-q", cfg.loggas.trim_lo_q, "lower unfolded-radius quantile")
        ->capture_default_str();
    gas->add_option("--trim-hi-q", cfg.loggas.trim_hi_q, "upper unfolded-radius quantile")
        ->capture_default_str();
    gas->add_flag("--controls,!--no-controls", cfg.loggas.controls,
                  "also run the radial-only and Cartesian control unfoldings");
    add_knobs(gas);

    CLI::App* sta = app.add_subcommand("stats",
                                       "recompute statistics from stored spectrum CSVs");
    sta->configurable();
    sta->fallthrough();
    sta->add_option("--input", cfg.stats.input_dir, "directory of spectrum CSV + meta files")
        ->required();
    sta->add_flag("--uniform", cfg.stats.uniform,
                  "constant-density spectra: count discs, skip local unfolding");
    sta->add_option("--trim-lo-q", cfg.stats.trim_lo_q, "lower modulus quantile for trimming")
        ->capture_default_str();
    sta->add_option("--trim-hi-q", cfg.stats.trim_hi_q, "upper modulus quantile for trimming")
        ->capture_default_str();
    add_knobs(sta);

    CLI::App* ana = app.add_subcommand("analytic", "tabulate analytic number-variance curves");
    ana->configurable();
    ana->fallthrough();
    ana->add_flag("--sigma2-gine", cfg.analytic.sigma2_gine, "Ginibre number variance");
    ana->add_flag("--sigma2-selfdual", cfg.analytic.sigma2_selfdual,
                  "self-dual number variance");
    ana->add_option("--n-max", cfg.analytic.n_max, "largest mean count")->capture_default_str();
    ana->add_option("--n-step", cfg.analytic.n_step, "grid step")->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("nhrmt");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }

    if (app.got_subcommand(ens)) cfg.command = Command::Ensemble;
    else if (app.got_subcommand(top)) cfg.command = Command::KickedTop;
    else if (app.got_subcommand(gas)) cfg.command = Command::LogGas;
    else if (app.got_subcommand(sta)) cfg.command = Command::Stats;
    else cfg.command = Command::Analytic;
    cfg.format = format_from_string(format);

    resolve(cfg);
    validate(cfg);
    return cfg;
}

// --- JSON / INI round trip ---

namespace {

json knobs_to_json(const StatsKnobs& k) {
    return json{{"targets", k.targets},
                {"centers", k.centers},
                {"variance_batches", k.variance_batches},
                {"density_degree", k.density_degree},
                {"nnsd_bins", k.nnsd_bins},
                {"nnsd_max", k.nnsd_max},
                {"ratio_bins", k.ratio_bins},
                {"s_max_fit", k.s_max_fit},
                {"isochrone_dirs", k.isochrone_dirs}};
}

void knobs_from_json(const json& j, StatsKnobs& k) {
    j.at("targets").get_to(k.targets);
    j.at("centers").get_to(k.centers);
    j.at("variance_batches").get_to(k.variance_batches);
    j.at("density_degree").get_to(k.density_degree);
    j.at("nnsd_bins").get_to(k.nnsd_bins);
    j.at("nnsd_max").get_to(k.nnsd_max);
    j.at("ratio_bins").get_to(k.ratio_bins);
    j.at("s_max_fit").get_to(k.s_max_fit);
    j.at("isochrone_dirs").get_to(k.isochrone_dirs);
}

} // namespace

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["command"] = to_string(cfg.command);
    j["out"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["format"] = to_string(cfg.format);
    j["threads"] = cfg.threads;
    j["ensemble"] = {{"class", cfg.ensemble.ensemble_class},
                     {"n", cfg.ensemble.n},
                     {"members", cfg.ensemble.members},
                     {"trim_frac", cfg.ensemble.trim_frac}};
    j["kickedtop"] = {{"class", cfg.kickedtop.top_class},
                      {"j", cfg.kickedtop.j},
                      {"members", cfg.kickedtop.members},
                      {"paper_scale", cfg.kickedtop.paper_scale},
                      {"desk_scale", cfg.kickedtop.desk_scale},
                      {"gamma", cfg.kickedtop.gamma},
                      {"alpha", cfg.kickedtop.alpha},
                      {"tau_min", cfg.kickedtop.tau_min},
                      {"tau_max", cfg.kickedtop.tau_max},
                      {"k_min", cfg.kickedtop.k_min},
                      {"k_max", cfg.kickedtop.k_max},
                      {"tau1", cfg.kickedtop.tau1},
                      {"tau2", cfg.kickedtop.tau2},
                      {"tau3_min", cfg.kickedtop.tau3_min},
                      {"tau3_max", cfg.kickedtop.tau3_max},
                      {"tau4_min", cfg.kickedtop.tau4_min},
                      {"tau4_max", cfg.kickedtop.tau4_max},
                      {"oe_half_j_norm", cfg.kickedtop.oe_half_j_norm},
                      {"trim_lo_q", cfg.kickedtop.trim_lo_q},
                      {"trim_hi_q", cfg.kickedtop.trim_hi_q}};
    j["loggas"] = {{"n", cfg.loggas.n},
                   {"k", cfg.loggas.k},
                   {"members", cfg.loggas.members},
                   {"burn_in", cfg.loggas.burn_in},
                   {"thin", cfg.loggas.thin},
                   {"proposal_scale", cfg.loggas.proposal_scale},
                   {"trim_lo_q", cfg.loggas.trim_lo_q},
                   {"trim_hi_q", cfg.loggas.trim_hi_q},
                   {"controls", cfg.loggas.controls}};
    j["stats"] = {{"input", cfg.stats.input_dir},
                  {"uniform", cfg.stats.uniform},
                  {"trim_lo_q", cfg.stats.trim_lo_q},
                  {"trim_hi_q", cfg.stats.trim_hi_q}};
    j["analytic"] = {{"sigma2_gine", cfg.analytic.sigma2_gine},
                     {"sigma2_selfdual", cfg.analytic.sigma2_selfdual},
                     {"n_max", cfg.analytic.n_max},
                     {"n_step", cfg.analytic.n_step}};
    j["knobs"] = knobs_to_json(cfg.knobs);
    return j.dump(2);
}

RunConfig config_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    RunConfig cfg;
    cfg.command = command_from_string(j.at("command").get<std::string>());
    j.at("out").get_to(cfg.out_dir);
    j.at("seed").get_to(cfg.seed);
    cfg.format = format_from_string(j.at("format").get<std::string>());
    j.at("threads").get_to(cfg.threads);

    const json& e = j.at("ensemble");
    e.at("class").get_to(cfg.ensemble.ensemble_class);
    e.at("n").get_to(cfg.ensemble.n);
    e.at("members").get_to(cfg.ensemble.members);
    e.at("trim_frac").get_to(cfg.ensemble.trim_frac);

    const json& t = j.at("kickedtop");
    t.at("class").get_to(cfg.kickedtop.top_class);
    t.at("j").get_to(cfg.kickedtop.j);
    t.at("members").get_to(cfg.kickedtop.members);
    t.at("paper_scale").get_to(cfg.kickedtop.paper_scale);
    t.at("desk_scale").get_to(cfg.kickedtop.desk_scale);
    t.at("gamma").get_to(cfg.kickedtop.gamma);
    t.at("alpha").get_to(cfg.kickedtop.alpha);
    t.at("tau_min").get_to(cfg.kickedtop.tau_min);
    t.at("tau_max").get_to(cfg.kickedtop.tau_max);
    t.at("k_min").get_to(cfg.kickedtop.k_min);
    t.at("k_max").get_to(cfg.kickedtop.k_max);
    t.at("tau1").get_to(cfg.kickedtop.tau1);
    t.at("tau2").get_to(cfg.kickedtop.tau2);
    t.at("tau3_min").get_to(cfg.kickedtop.tau3_min);
    t.at("tau3_max").get_to(cfg.kickedtop.tau3_max);
    t.at("tau4_min").get_to(cfg.kickedtop.tau4_min);
    t.at("tau4_max").get_to(cfg.kickedtop.tau4_max);
    t.at("oe_half_j_norm").get_to(cfg.kickedtop.oe_half_j_norm);
    t.at("trim_lo_q").get_to(cfg.kickedtop.trim_lo_q);
    t.at("trim_hi_q").get_to(cfg.kickedtop.trim_hi_q);

    const json& g = j.at("loggas");
    g.at("n").get_to(cfg.loggas.n);
    g.at("k").get_to(cfg.loggas.k);
    g.at("members").get_to(cfg.loggas.members);
    g.at("burn_in").get_to(cfg.loggas.burn_in);
    g.at("thin").get_to(cfg.loggas.thin);
    g.at("proposal_scale").get_to(cfg.loggas.proposal_scale);
    g.at("trim_lo_q").get_to(cfg.loggas.trim_lo_q);
    g.at("trim_hi_q").get_to(cfg.loggas.trim_hi_q);
    g.at("controls").get_to(cfg.loggas.controls);

    const json& s = j.at("stats");
    s.at("input").get_to(cfg.stats.input_dir);
    s.at("uniform").get_to(cfg.stats.uniform);
    s.at("trim_lo_q").get_to(cfg.stats.trim_lo_q);
    s.at("trim_hi_q").get_to(cfg.stats.trim_hi_q);

    const json& a = j.at("analytic");
    a.at("sigma2_gine").get_to(cfg.analytic.sigma2_gine);
    a.at("sigma2_selfdual").get_to(cfg.analytic.sigma2_selfdual);
    a.at("n_max").get_to(cfg.analytic.n_max);
    a.at("n_step").get_to(cfg.analytic.n_step);

    knobs_from_json(j.at("knobs"), cfg.knobs);
    return cfg;
}

std::string config_to_ini(const RunConfig& cfg) {
    std::ostringstream ini;
    ini << "seed=" << cfg.seed << '\n';
    ini << "out=" << cfg.out_dir << '\n';
    ini << "format=" << to_string(cfg.format) << '\n';
    ini << "threads=" << cfg.threads << '\n';
    ini << '[' << to_string(cfg.command) << "]\n";

    auto knobs = [&]() {
        ini << "targets=";
        for (std::size_t i = 0; i < cfg.knobs.targets.size(); ++i) {
            ini << (i ? "," : "") << format17(cfg.knobs.targets[i]);
        }
        ini << '\n';
        ini << "centers=" << cfg.knobs.centers << '\n';
        ini << "variance-batches=" << cfg.knobs.variance_batches << '\n';
        ini << "density-degree=" << cfg.knobs.density_degree << '\n';
        ini << "nnsd-bins=" << cfg.knobs.nnsd_bins << '\n';
        ini << "nnsd-max=" << format17(cfg.knobs.nnsd_max) << '\n';
        ini << "ratio-bins=" << cfg.knobs.ratio_bins << '\n';
        ini << "s-max-fit=" << format17(cfg.knobs.s_max_fit) << '\n';
        ini << "isochrone-dirs=" << cfg.knobs.isochrone_dirs << '\n';
    };

    switch (cfg.command) {
        case Command::Ensemble:
            ini << "class=" << cfg.ensemble.ensemble_class << '\n';
            ini << "n=" << cfg.ensemble.n << '\n';
            ini << "members=" << cfg.ensemble.members << '\n';
            ini << "trim-frac=" << format17(cfg.ensemble.trim_frac) << '\n';
            knobs();
            break;
        case Command::KickedTop:
            ini << "class=" << cfg.kickedtop.top_class << '\n';
            ini << "j=" << format17(cfg.kickedtop.j) << '\n';
            ini << "members=" << cfg.kickedtop.members << '\n';
            if (cfg.kickedtop.paper_scale) ini << "paper-scale=true\n";
            ini << "gamma=" << format17(cfg.kickedtop.gamma) << '\n';
            ini << "alpha=" << format17(cfg.kickedtop.alpha) << '\n';
            ini << "tau-min=" << format17(cfg.kickedtop.tau_min) << '\n';
            ini << "tau-max=" << format17(cfg.kickedtop.tau_max) << '\n';
            ini << "k-min=" << format17(cfg.kickedtop.k_min) << '\n';
            ini << "k-max=" << format17(cfg.kickedtop.k_max) << '\n';
            ini << "tau1=" << format17(cfg.kickedtop.tau1) << '\n';
            ini << "tau2=" << format17(cfg.kickedtop.tau2) << '\n';
            ini << "tau3-min=" << format17(cfg.kickedtop.tau3_min) << '\n';
            ini << "tau3-max=" << format17(cfg.kickedtop.tau3_max) << '\n';
            ini << "tau4-min=" << format17(cfg.kickedtop.tau4_min) << '\n';
            ini << "tau4-max=" << format17(cfg.kickedtop.tau4_max) << '\n';
            if (cfg.kickedtop.oe_half_j_norm) ini << "oe-half-j-norm=true\n";
            ini << "trim-lo-q=" << format17(cfg.kickedtop.trim_lo_q) << '\n';
            ini << "trim-hi-q=" << format17(cfg.kickedtop.trim_hi_q) << '\n';
            knobs();
            break;
        case Command::LogGas:
            ini << "n=" << cfg.loggas.n << '\n';
            ini << "k=" << cfg.loggas.k << '\n';
            ini << "members=" << cfg.loggas.members << '\n';
            ini << "burn-in=" << cfg.loggas.burn_in << '\n';
            ini << "thin=" << cfg.loggas.thin << '\n';
            ini << "proposal-scale=" << format17(cfg.loggas.proposal_scale) << '\n';
            ini << "trim-lo-q=" << format17(cfg.loggas.trim_lo_q) << '\n';
            ini << "trim-hi-q=" << format17(cfg.loggas.trim_hi_q) << '\n';
            ini << "controls=" << (cfg.loggas.controls ? "true" : "false") << '\n';
            knobs();
            break;
        case Command::Stats:
            ini << "input=" << cfg.stats.input_dir << '\n';
            if (cfg.stats.uniform) ini << "uniform=true\n";
            ini << "trim-lo-q=" << format17(cfg.stats.trim_lo_q) << '\n';
            ini << "trim-hi-q=" << format17(cfg.stats.trim_hi_q) << '\n';
            knobs();
            break;
        case Command::Analytic:
            if (cfg.analytic.sigma2_gine) ini << "sigma2-gine=true\n";
            if (cfg.analytic.sigma2_selfdual) ini << "sigma2-selfdual=true\n";
            ini << "n-max=" << format17(cfg.analytic.n_max) << '\n';
            ini << "n-step=" << format17(cfg.analytic.n_step) << '\n';
            break;
    }
    return ini.str();
}

// --- output writing ---

namespace {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // column major
};

fs::path write_table(const fs::path& dir, const Table& table, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        const fs::path path = dir / (table.name + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << table.columns[c];
        }
        out << '\n';
        const std::size_t rows = table.data.empty() ? 0 : table.data.front().size();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < table.data.size(); ++c) {
                out << (c ? "," : "") << format17(table.data[c][r]);
            }
            out << '\n';
        }
        return path;
    }
    const fs::path path = dir / (table.name + ".json");
    json j;
    j["columns"] = table.columns;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        j["data"][table.columns[c]] = table.data[c];
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(1) << '\n';
    return path;
}

fs::path write_spectrum(const fs::path& dir, const std::string& stem, const Spectrum& s,
                        OutputFormat format) {
    if (format == OutputFormat::Csv) {
        const fs::path path = dir / (stem + ".csv");
        write_spectrum_csv(path, s);
        return path;
    }
    json j;
    std::vector<double> re(s.eigenvalues.size()), im(s.eigenvalues.size());
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        re[i] = s.eigenvalues[i].real();
        im[i] = s.eigenvalues[i].imag();
    }
    j["re"] = re;
    j["im"] = im;
    j["meta"] = {{"source_tag", s.source_tag},
                 {"seed", s.seed},
                 {"params_digest", s.params_digest},
                 {"dedup", s.dedup_applied}};
    if (s.trim_window) {
        j["meta"]["trim"] = {s.trim_window->first, s.trim_window->second};
    }
    const fs::path path = dir / (stem + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(1) << '\n';
    return path;
}

Table histogram_table(const std::string& name, const std::string& x_column, const Histogram& h) {
    Table t;
    t.name = name;
    t.columns = {x_column, "pdf"};
    t.data.resize(2);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        t.data[0].push_back(h.bin_center(i));
        t.data[1].push_back(h.counts[i]);
    }
    return t;
}

Table variance_table(const std::string& name, const VarianceCurve& curve) {
    Table t;
    t.name = name;
    t.columns = {"n_mean", "sigma2", "stderr"};
    t.data = {curve.n_mean, curve.sigma2, curve.std_error};
    return t;
}

Table density_table(const RadialDensityModel& model, int points = 256) {
    Table t;
    t.name = "density";
    t.columns = {"r", "r1"};
    t.data.resize(2);
    for (int i = 0; i <= points; ++i) {
        const double r = model.r_min() + (model.r_max() - model.r_min()) * i / points;
        t.data[0].push_back(r);
        t.data[1].push_back(model(r));
    }
    return t;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty set");
    const double pos = q * (values.size() - 1);
    const std::size_t idx = static_cast<std::size_t>(pos);
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    const double lo = values[idx];
    if (idx + 1 >= values.size()) return lo;
    std::nth_element(values.begin(), values.begin() + idx + 1, values.end());
    return lo + (pos - idx) * (values[idx + 1] - lo);
}

std::vector<double> pooled_moduli(std::span<const Spectrum> spectra) {
    std::vector<double> moduli;
    for (const Spectrum& s : spectra) {
        for (const Complex& z : s.eigenvalues) moduli.push_back(std::abs(z));
    }
    return moduli;
}

// Density-fit input: the pooled ensemble with the outermost 0.5% of moduli
// shaved off both ends. The extreme bins hold single eigenvalues over tiny
// annuli and would dominate the histogram as spikes.
std::vector<Spectrum> density_fit_window(std::span<const Spectrum> spectra,
                                         double lo_q = 0.005, double hi_q = 0.995) {
    auto moduli = pooled_moduli(spectra);
    const double lo = quantile(moduli, lo_q);
    const double hi = quantile(moduli, hi_q);
    std::vector<Spectrum> out;
    out.reserve(spectra.size());
    for (const Spectrum& s : spectra) out.push_back(trim(s, lo, hi));
    return out;
}

struct RunContext {
    const RunConfig& cfg;
    fs::path out_dir;
    std::vector<std::string> outputs;
    json results;

    int threads() const { return cfg.threads > 0 ? cfg.threads : default_thread_count(); }

    void add(const fs::path& p) { outputs.push_back(p.filename().string()); }

    void finish() const {
        json manifest;
        manifest["tool"] = "nhrmt";
        manifest["command"] = to_string(cfg.command);
        manifest["config"] = json::parse(config_to_json(cfg));
        manifest["results"] = results;
        manifest["outputs"] = outputs;
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write manifest.json");
        out << manifest.dump(2) << '\n';

        std::ofstream ini(out_dir / "config_resolved.ini", std::ios::binary);
        if (!ini) throw std::runtime_error("cannot write config_resolved.ini");
        ini << config_to_ini(cfg);
    }
};

// Pooled spacing / ratio / variance statistics shared by the generating
// commands. Both density views are null for constant-density spectra;
// otherwise `spacing_density` carries a support margin beyond the statistics
// window (pair midpoints can poke past it) while `variance_density` keeps the
// conservative fit support that isochrone rays must not leave.
void write_fluctuation_stats(RunContext& ctx, std::span<const Spectrum> spectra,
                             const RadialDensityModel* spacing_density,
                             const RadialDensityModel* variance_density, double window_lo,
                             double window_hi, double region_lo, double region_hi) {
    const RunConfig& cfg = ctx.cfg;
    const RadialWindow window = std::make_pair(window_lo, window_hi);

    std::cerr << "nhrmt: statistics over window [" << window_lo << ", " << window_hi << "]\n";
    std::vector<double> spacings, ratios1, ratios2;
    for (const Spectrum& s : spectra) {
        const auto sp = nn_spacings(s, spacing_density, window);
        spacings.insert(spacings.end(), sp.begin(), sp.end());
        const auto r1 = spacing_ratio_type1(s, window);
        ratios1.insert(ratios1.end(), r1.begin(), r1.end());
        const auto r2 = spacing_ratio_type2(s, window);
        ratios2.insert(ratios2.end(), r2.begin(), r2.end());
    }
    if (spacings.size() < 100) {
        throw std::runtime_error("too few spacings (" + std::to_string(spacings.size()) +
                                 ") in the statistics window; enlarge the ensemble");
    }
    // Raw spacings of the constant-density ensembles sit at density 1/pi
    // already; spacings unfolded through the density model are near unit
    // density by construction.
    const Histogram nnsd =
        Histogram::from_samples(spacings, 0.0, cfg.knobs.nnsd_max, cfg.knobs.nnsd_bins).to_pdf();
    ctx.add(write_table(ctx.out_dir, histogram_table("nnsd", "s", nnsd), cfg.format));
    ctx.results["nnsd_samples"] = spacings.size();
    try {
        ctx.results["nnsd_small_s_slope"] = fit_small_s_exponent(nnsd, cfg.knobs.s_max_fit);
    } catch (const std::exception&) {
        ctx.results["nnsd_small_s_slope"] = nullptr; // too few populated bins
    }

    const Histogram h1 =
        Histogram::from_samples(ratios1, 0.0, 1.0, cfg.knobs.ratio_bins).to_pdf();
    const Histogram h2 =
        Histogram::from_samples(ratios2, 0.0, 1.0, cfg.knobs.ratio_bins).to_pdf();
    ctx.add(write_table(ctx.out_dir, histogram_table("ratio1", "r", h1), cfg.format));
    ctx.add(write_table(ctx.out_dir, histogram_table("ratio2", "r", h2), cfg.format));
    ctx.results["ratio1_samples"] = ratios1.size();
    ctx.results["ratio2_samples"] = ratios2.size();

    VarianceOptions vopts;
    vopts.targets = cfg.knobs.target_list();
    vopts.centers = cfg.knobs.centers;
    vopts.batches = cfg.knobs.variance_batches;
    vopts.seed = rng::derive_seed(cfg.seed, kVarianceSalt);
    vopts.threads = ctx.threads();
    vopts.n_dirs = cfg.knobs.isochrone_dirs;
    vopts.region_r_min = region_lo;
    vopts.region_r_max = region_hi;
    const VarianceCurve curve = number_variance(spectra, variance_density, vopts);
    ctx.add(write_table(ctx.out_dir, variance_table("variance", curve), cfg.format));
}

void run_ensemble(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    EnsembleSpec spec;
    spec.ensemble_class = ensemble_class_from_string(cfg.ensemble.ensemble_class);
    spec.n = cfg.ensemble.n;
    spec.seed = cfg.seed;

    std::cerr << "nhrmt: sampling " << cfg.ensemble.members << " " << cfg.ensemble.ensemble_class
              << " members at N = " << spec.n << "\n";
    const auto spectra = ensemble_spectra(spec, cfg.ensemble.members, ctx.threads());
    const fs::path spectra_dir = ctx.out_dir / "spectra";
    fs::create_directories(spectra_dir);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "spectrum_%04zu", i);
        const fs::path p = write_spectrum(spectra_dir, stem, spectra[i], cfg.format);
        ctx.outputs.push_back("spectra/" + p.filename().string());
    }

    const double sqrt_n = std::sqrt(static_cast<double>(spec.n));
    const RadialDensityModel density =
        fit_radial_density(density_fit_window(spectra), cfg.knobs.density_degree);
    ctx.add(write_table(ctx.out_dir, density_table(density), cfg.format));
    ctx.results["eigenvalues_total"] =
        spectra.size() * spectra.front().eigenvalues.size();
    ctx.results["support_quantile_999"] = quantile(pooled_moduli(spectra), 0.999);

    const double bulk = cfg.ensemble.trim_frac * sqrt_n;
    // Constant density: no local unfolding, counting discs.
    write_fluctuation_stats(ctx, spectra, nullptr, nullptr, 0.0, bulk, 0.0, bulk);

    // Analytic reference where one exists.
    if (spec.ensemble_class != EnsembleClass::SymmGinE) {
        Table ref;
        ref.name = "variance_analytic";
        ref.columns = {"n_mean", "sigma2", "stderr"};
        ref.data.resize(3);
        for (double t : cfg.knobs.target_list()) {
            ref.data[0].push_back(t);
            ref.data[1].push_back(spec.ensemble_class == EnsembleClass::GinE
                                      ? sigma2_ginibre_analytic(t)
                                      : sigma2_selfdual_analytic(t));
            ref.data[2].push_back(0.0);
        }
        ctx.add(write_table(ctx.out_dir, ref, cfg.format));
    }
}

void run_kickedtop(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const TopParams params = make_top_params(cfg);
    std::cerr << "nhrmt: sweeping " << params.members << " " << cfg.kickedtop.top_class
              << " tops at J = " << params.j << ", gamma = " << params.gamma << "\n";
    const auto spectra = sweep_ensemble(params, ctx.threads());

    const fs::path spectra_dir = ctx.out_dir / "spectra";
    fs::create_directories(spectra_dir);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "spectrum_%04zu", i);
        const fs::path p = write_spectrum(spectra_dir, stem, spectra[i], cfg.format);
        ctx.outputs.push_back("spectra/" + p.filename().string());
    }

    // Ring spectra have cliff-like edges that a polynomial cannot follow;
    // fit inside them, over a window containing the statistics window.
    const RadialDensityModel density = fit_radial_density(
        density_fit_window(spectra, 0.02, 0.98), cfg.knobs.density_degree);
    ctx.add(write_table(ctx.out_dir, density_table(density), cfg.format));

    auto moduli = pooled_moduli(spectra);
    const double lo = quantile(moduli, cfg.kickedtop.trim_lo_q);
    const double hi = quantile(moduli, cfg.kickedtop.trim_hi_q);
    ctx.results["trim_window"] = {lo, hi};
    ctx.results["eigenvalues_total"] = moduli.size();
    // Extended-support view for pair midpoints just outside the fit window.
    const RadialDensityModel spacing_density =
        density.with_support(quantile(moduli, 0.005), quantile(moduli, 0.995));
    write_fluctuation_stats(ctx, spectra, &spacing_density, &density, lo, hi, lo, hi);
}

void run_loggas(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const LogGasConfig gas_config = make_loggas_config(cfg);
    std::cerr << "nhrmt: log-gas chain, N = " << gas_config.n_points << ", k = "
              << gas_config.k_exponent << ", burn-in " << gas_config.burn_in << " sweeps\n";
    LogGasChain chain(gas_config);
    std::vector<Spectrum> spectra;
    spectra.reserve(cfg.loggas.members);
    for (int i = 0; i < cfg.loggas.members; ++i) spectra.push_back(chain.next());
    ctx.results["acceptance_rate"] = chain.acceptance_rate();
    ctx.results["proposal_scale"] = chain.proposal_scale();

    const fs::path spectra_dir = ctx.out_dir / "spectra";
    fs::create_directories(spectra_dir);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "spectrum_%04zu", i);
        const fs::path p = write_spectrum(spectra_dir, stem, spectra[i], cfg.format);
        ctx.outputs.push_back("spectra/" + p.filename().string());
    }

    const RadialDensityModel density =
        fit_radial_density(density_fit_window(spectra), cfg.knobs.density_degree);
    ctx.add(write_table(ctx.out_dir, density_table(density), cfg.format));

    // Flat unfolding onto k Riemann sheets.
    const int k = cfg.loggas.k;
    std::vector<UnfoldedSpectrum> unfolded(spectra.size());
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        unfolded[i] = unfold_power_law(spectra[i], k);
    }
    {
        Table t;
        t.name = "unfolded";
        t.columns = {"re", "im", "sheet"};
        t.data.resize(3);
        for (const auto& u : unfolded) {
            for (std::size_t i = 0; i < u.points.size(); ++i) {
                const Complex z = u.plane_point(i);
                t.data[0].push_back(z.real());
                t.data[1].push_back(z.imag());
                t.data[2].push_back(u.points[i].sheet);
            }
        }
        ctx.add(write_table(ctx.out_dir, t, cfg.format));
    }

    std::vector<double> unfolded_radii;
    for (const auto& u : unfolded) {
        for (const auto& p : u.points) unfolded_radii.push_back(p.radius);
    }
    VarianceOptions vopts;
    vopts.targets = cfg.knobs.target_list();
    vopts.centers = cfg.knobs.centers;
    vopts.batches = cfg.knobs.variance_batches;
    vopts.seed = rng::derive_seed(cfg.seed, kVarianceSalt);
    vopts.threads = ctx.threads();
    vopts.region_r_min = quantile(unfolded_radii, cfg.loggas.trim_lo_q);
    vopts.region_r_max = quantile(unfolded_radii, cfg.loggas.trim_hi_q);
    const VarianceCurve curve = number_variance_unfolded(unfolded, vopts);
    ctx.add(write_table(ctx.out_dir, variance_table("variance_unfolded", curve), cfg.format));

    {
        Table ref;
        ref.name = "variance_gine_analytic";
        ref.columns = {"n_mean", "sigma2", "stderr"};
        ref.data.resize(3);
        for (double t : vopts.targets) {
            ref.data[0].push_back(t);
            ref.data[1].push_back(sigma2_ginibre_analytic(t));
            ref.data[2].push_back(0.0);
        }
        ctx.add(write_table(ctx.out_dir, ref, cfg.format));
    }

    if (cfg.loggas.controls) {
        // Radial-only control: single plane, same disc counting.
        std::vector<UnfoldedSpectrum> radial(spectra.size());
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            radial[i] = unfold_radial_only(spectra[i], k);
        }
        std::vector<double> radial_radii;
        for (const auto& u : radial) {
            for (const auto& p : u.points) radial_radii.push_back(p.radius);
        }
        VarianceOptions ropts = vopts;
        ropts.seed = rng::derive_seed(cfg.seed, kControlSalt);
        ropts.region_r_min = quantile(radial_radii, cfg.loggas.trim_lo_q);
        ropts.region_r_max = quantile(radial_radii, cfg.loggas.trim_hi_q);
        ctx.add(write_table(ctx.out_dir,
                            variance_table("variance_radial_control",
                                           number_variance_unfolded(radial, ropts)),
                            cfg.format));

        // Cartesian control: the image region is not an annulus; bound it by
        // the mapped trim circle and exclude the central spike region.
        const double r_trim = quantile(pooled_moduli(spectra), cfg.loggas.trim_hi_q);
        std::vector<std::vector<Complex>> mapped(spectra.size());
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            Spectrum inside = trim(spectra[i], 0.0, r_trim);
            const UnfoldedSpectrum u = unfold_cartesian(inside);
            mapped[i].reserve(u.points.size());
            for (std::size_t p = 0; p < u.points.size(); ++p) {
                mapped[i].push_back(u.plane_point(p));
            }
        }
        std::vector<Complex> boundary;
        const int boundary_points = 512;
        boundary.reserve(boundary_points);
        for (int i = 0; i < boundary_points; ++i) {
            const double th = 2.0 * M_PI * i / boundary_points;
            const double x = r_trim * std::cos(th), y = r_trim * std::sin(th);
            boundary.emplace_back(4.0 / 3.0 * x * x * x + 4.0 * x * y * y, y);
        }
        VarianceOptions copts = vopts;
        copts.seed = rng::derive_seed(cfg.seed, kControlSalt + 1);
        const double exclusion = 0.05 * std::pow(r_trim, 3);
        ctx.add(write_table(
            ctx.out_dir,
            variance_table("variance_cartesian_control",
                           number_variance_region(mapped, boundary, exclusion, copts)),
            cfg.format));
    }
}

void run_stats(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.stats.input_dir)) {
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw std::runtime_error("stats: no spectrum CSVs under " + cfg.stats.input_dir);
    }
    std::vector<Spectrum> spectra;
    spectra.reserve(files.size());
    for (const auto& f : files) spectra.push_back(read_spectrum_csv(f));
    for (const Spectrum& s : spectra) {
        if (s.source_tag != spectra.front().source_tag) {
            throw std::runtime_error("stats: mixed source tags in " + cfg.stats.input_dir);
        }
    }
    ctx.results["spectra_read"] = spectra.size();

    auto moduli = pooled_moduli(spectra);
    const double lo = quantile(moduli, cfg.stats.trim_lo_q);
    const double hi = quantile(moduli, cfg.stats.trim_hi_q);
    ctx.results["trim_window"] = {lo, hi};

    if (cfg.stats.uniform) {
        write_fluctuation_stats(ctx, spectra, nullptr, nullptr, lo, hi, lo, hi);
    } else {
        const RadialDensityModel density = fit_radial_density(
            density_fit_window(spectra, 0.02, 0.98), cfg.knobs.density_degree);
        ctx.add(write_table(ctx.out_dir, density_table(density), cfg.format));
        const RadialDensityModel spacing_density =
            density.with_support(quantile(moduli, 0.005), quantile(moduli, 0.995));
        write_fluctuation_stats(ctx, spectra, &spacing_density, &density, lo, hi, lo, hi);
    }
}

void run_analytic(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    auto curve_table = [&](const std::string& name, auto&& f) {
        Table t;
        t.name = name;
        t.columns = {"n_mean", "sigma2", "stderr"};
        t.data.resize(3);
        for (double n = 0.0; n <= cfg.analytic.n_max + 1e-12; n += cfg.analytic.n_step) {
            t.data[0].push_back(n);
            t.data[1].push_back(f(n));
            t.data[2].push_back(0.0);
        }
        return t;
    };
    if (cfg.analytic.sigma2_gine) {
        ctx.add(write_table(ctx.out_dir,
                            curve_table("sigma2_gine",
                                        [](double n) { return sigma2_ginibre_analytic(n); }),
                            cfg.format));
    }
    if (cfg.analytic.sigma2_selfdual) {
        ctx.add(write_table(ctx.out_dir,
                            curve_table("sigma2_selfdual",
                                        [](double n) { return sigma2_selfdual_analytic(n); }),
                            cfg.format));
    }
}

} // namespace

void run(const RunConfig& cfg) {
    RunContext ctx{cfg, fs::path(cfg.out_dir), {}, json::object()};
    fs::create_directories(ctx.out_dir);
    switch (cfg.command) {
        case Command::Ensemble: run_ensemble(ctx); break;
        case Command::KickedTop: run_kickedtop(ctx); break;
        case Command::LogGas: run_loggas(ctx); break;
        case Command::Stats: run_stats(ctx); break;
        case Command::Analytic: run_analytic(ctx); break;
    }
    ctx.finish();
}

} // namespace nhrmt
