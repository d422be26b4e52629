#pragma once

// Command-line pipelines: configuration parsing (flags over config file over
// defaults), orchestration of generate -> dedup/trim -> fit -> unfold ->
// statistics, and CSV/JSON emission. Identical configurations produce
// byte-identical outputs for any thread count.

#include "nhrmt/kickedtop.hpp"
#include "nhrmt/sampler.hpp"
#include "nhrmt/spectra.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhrmt {

enum class Command { Ensemble, KickedTop, LogGas, Stats, Analytic };
enum class OutputFormat { Csv, Json };

std::string to_string(Command c);
std::string to_string(OutputFormat f);

// Statistics knobs shared by the generating commands.
struct StatsKnobs {
    std::vector<double> targets = {1, 2, 3, 4, 6, 8, 10}; // variance mean-count targets
    int centers = 200;
    int variance_batches = 10;
    int density_degree = 8;
    int nnsd_bins = 60;
    double nnsd_max = 3.0;
    int ratio_bins = 40;
    double s_max_fit = 0.5;
    int isochrone_dirs = 256;

    std::vector<double> target_list() const;
    bool operator==(const StatsKnobs&) const = default;
};

struct EnsembleCfg {
    std::string ensemble_class = "gine"; // symm | gine | selfdual
    int n = 1000;
    int members = 20;
    double trim_frac = 0.9; // statistics window: |z| <= trim_frac sqrt(N)
    bool operator==(const EnsembleCfg&) const = default;
};

struct KickedTopCfg {
    std::string top_class = "oe"; // oe | ue | se
    double j = 0.0;               // 0 = scale default (250 or 249.5; paper scale 1000/999.5)
    int members = 50;
    bool paper_scale = false;
    bool desk_scale = true;
    double gamma = -1.0;          // <0 = class default (5/N; 4/N for UE)
    // Point/sweep parameters; NaN = class preset from the dissipative-top study.
    double alpha = nan_sentinel();
    double tau_min = nan_sentinel(), tau_max = nan_sentinel();
    double k_min = nan_sentinel(), k_max = nan_sentinel();
    double tau1 = nan_sentinel(), tau2 = nan_sentinel();
    double tau3_min = nan_sentinel(), tau3_max = nan_sentinel();
    double tau4_min = nan_sentinel(), tau4_max = nan_sentinel();
    bool oe_half_j_norm = false;
    double trim_lo_q = 0.08, trim_hi_q = 0.92; // statistics window quantiles

    static double nan_sentinel();
    bool operator==(const KickedTopCfg&) const = default;
};

struct LogGasCfg {
    int n = 500;
    int k = 2;
    int members = 100;
    int burn_in = 1500;
    int thin = 30;
    double proposal_scale = 0.0; // 0 = auto
    double trim_lo_q = 0.02, trim_hi_q = 0.98; // unfolded-radius window quantiles
    bool controls = true;        // also run the two negative-control unfoldings
    bool operator==(const LogGasCfg&) const = default;
};

struct StatsCfg {
    std::string input_dir;       // directory of spectrum CSVs with .meta sidecars
    bool uniform = false;        // constant-density spectra: discs, no local unfolding
    double trim_lo_q = 0.08, trim_hi_q = 0.92;
    bool operator==(const StatsCfg&) const = default;
};

struct AnalyticCfg {
    bool sigma2_gine = false;
    bool sigma2_selfdual = false;
    double n_max = 20.0;
    double n_step = 0.25;
    bool operator==(const AnalyticCfg&) const = default;
};

struct RunConfig {
    Command command = Command::Ensemble;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    OutputFormat format = OutputFormat::Csv;
    int threads = 0; // 0 = hardware concurrency

    EnsembleCfg ensemble;
    KickedTopCfg kickedtop;
    LogGasCfg loggas;
    StatsCfg stats;
    AnalyticCfg analytic;
    StatsKnobs knobs;

    bool operator==(const RunConfig&) const = default;
};

// Raised by parse_config for --help; what() carries the help text.
struct HelpRequested : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses argv-style arguments (without the program name). Supports
// `--config file` (INI: key = value, [section] headers; flags override file
// values; unknown keys rejected). Throws CLI-layer errors as
// std::invalid_argument (exit code 2 territory). The returned config is fully
// resolved: class presets and scale defaults are substituted.
RunConfig parse_config(const std::vector<std::string>& args);

// JSON round-trip of the resolved configuration (the manifest payload).
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& json_text);

// INI rendering accepted back by parse_config via --config.
std::string config_to_ini(const RunConfig& cfg);

// Resolved sweep parameters for the kicked-top command.
TopParams make_top_params(const RunConfig& cfg);
LogGasConfig make_loggas_config(const RunConfig& cfg);

// Executes the configured pipeline, writing artifacts and manifest.json under
// cfg.out_dir. Throws std::runtime_error on numeric failures (exit code 3).
void run(const RunConfig& cfg);

} // namespace nhrmt
