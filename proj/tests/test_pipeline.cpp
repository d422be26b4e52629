#include "nhrmt/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

using namespace nhrmt;
namespace fs = std::filesystem;

namespace {

RunConfig parse(std::initializer_list<std::string> args) {
    return parse_config(std::vector<std::string>(args));
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "nhrmt_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> hash_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
        }
    }
    return out;
}

} // namespace

TEST_CASE("flag parsing and presets") {
    const RunConfig cfg =
        parse({"ensemble", "--class", "gine", "--n", "1000", "--members", "50", "--seed", "7"});
    CHECK(cfg.command == Command::Ensemble);
    CHECK(cfg.ensemble.ensemble_class == "gine");
    CHECK(cfg.ensemble.n == 1000);
    CHECK(cfg.ensemble.members == 50);
    CHECK(cfg.seed == 7);
    CHECK(cfg.format == OutputFormat::Csv);
}

TEST_CASE("kicked-top class presets resolve") {
    SUBCASE("UE desk scale") {
        const RunConfig cfg = parse({"kickedtop", "--class", "ue"});
        CHECK(cfg.kickedtop.j == 250.0);
        CHECK(cfg.kickedtop.alpha == 25.0);
        CHECK(cfg.kickedtop.tau_min == 40.0);
        CHECK(cfg.kickedtop.tau_max == 50.0);
        CHECK(cfg.kickedtop.k_min == 60.0);
        CHECK(cfg.kickedtop.k_max == 66.0);
        CHECK(cfg.kickedtop.gamma == doctest::Approx(4.0 / 501.0));
    }

    SUBCASE("OE paper scale") {
        const RunConfig cfg = parse({"kickedtop", "--class", "oe", "--paper-scale"});
        CHECK(cfg.kickedtop.j == 1000.0);
        CHECK(cfg.kickedtop.alpha == 7.0);
        CHECK(cfg.kickedtop.gamma == doctest::Approx(5.0 / 2001.0));
        CHECK_FALSE(cfg.kickedtop.desk_scale);
    }

    SUBCASE("SE desk scale uses half-integer J") {
        const RunConfig cfg = parse({"kickedtop", "--class", "se"});
        CHECK(cfg.kickedtop.j == 249.5);
        CHECK(cfg.kickedtop.tau1 == 307.0);
        CHECK(cfg.kickedtop.tau2 == 336.0);
        CHECK(cfg.kickedtop.tau3_min == 506.0);
        CHECK(cfg.kickedtop.tau4_max == 420.0);
    }

    SUBCASE("explicit values override presets") {
        const RunConfig cfg =
            parse({"kickedtop", "--class", "oe", "--alpha", "3.5", "--gamma", "0.01"});
        CHECK(cfg.kickedtop.alpha == 3.5);
        CHECK(cfg.kickedtop.gamma == 0.01);
    }
}

TEST_CASE("configuration errors") {
    // integer J with the SE class names the half-integer requirement
    CHECK_THROWS_WITH_AS(parse({"kickedtop", "--class", "se", "--j", "1000"}),
                         doctest::Contains("half-integer"), std::invalid_argument);
    // unknown flag
    CHECK_THROWS_AS(parse({"ensemble", "--bogus", "1"}), std::invalid_argument);
    // type mismatch
    CHECK_THROWS_AS(parse({"ensemble", "--n", "notanumber"}), std::invalid_argument);
    // missing required option
    CHECK_THROWS_AS(parse({"stats"}), std::invalid_argument);
    // no subcommand
    CHECK_THROWS_AS(parse({"--seed", "4"}), std::invalid_argument);
    // bad enum values
    CHECK_THROWS_AS(parse({"ensemble", "--class", "wat"}), std::invalid_argument);
    CHECK_THROWS_AS(parse({"analytic"}), std::invalid_argument); // no curve selected
    // help is not an error but must surface the text
    CHECK_THROWS_AS(parse({"--help"}), HelpRequested);
}

TEST_CASE("config file values are overridden by flags") {
    const fs::path dir = fresh_dir("cfgfile");
    const fs::path file = dir / "run.ini";
    {
        std::ofstream out(file);
        out << "seed=9\n[ensemble]\nclass=symm\nn=500\nmembers=4\n";
    }
    const RunConfig cfg =
        parse({"ensemble", "--config", file.string(), "--n", "1000"});
    CHECK(cfg.ensemble.n == 1000);          // flag wins
    CHECK(cfg.ensemble.ensemble_class == "symm"); // file value
    CHECK(cfg.ensemble.members == 4);
    CHECK(cfg.seed == 9);

    // unknown keys in the config file are rejected
    {
        std::ofstream out(file);
        out << "[ensemble]\nwat=1\n";
    }
    CHECK_THROWS_AS(parse({"ensemble", "--config", file.string()}), std::invalid_argument);
}

TEST_CASE("JSON and INI round trips") {
    const RunConfig cfg = parse({"--seed", "12345", "--threads", "3", "--format", "json",
                                 "kickedtop", "--class", "ue", "--members", "9",
                                 "--targets", "1,2,4.5", "--centers", "77"});
    const RunConfig from_json = config_from_json(config_to_json(cfg));
    CHECK(from_json == cfg);

    const fs::path dir = fresh_dir("roundtrip");
    const fs::path ini = dir / "resolved.ini";
    {
        std::ofstream out(ini);
        out << config_to_ini(cfg);
    }
    const RunConfig from_ini = parse({"--config", ini.string()});
    CHECK(from_ini == cfg);
}

TEST_CASE("ensemble pipeline end to end: artifacts, determinism, manifest round trip") {
    const fs::path dir = fresh_dir("ensemble_run");
    const RunConfig cfg = parse({"--seed", "3", "--out", (dir / "run").string(), "--threads",
                                 "2", "ensemble", "--class", "gine", "--n", "120",
                                 "--members", "5", "--density-degree", "4", "--targets",
                                 "1,2", "--centers", "50", "--variance-batches", "5"});
    run(cfg);

    const fs::path out = dir / "run";
    for (const char* name :
         {"manifest.json", "config_resolved.ini", "density.csv", "nnsd.csv", "ratio1.csv",
          "ratio2.csv", "variance.csv", "variance_analytic.csv", "spectra/spectrum_0000.csv",
          "spectra/spectrum_0000.meta"}) {
        INFO("missing ", name);
        CHECK(fs::exists(out / name));
    }

    // format contracts
    CHECK(slurp(out / "spectra/spectrum_0000.csv").rfind("re,im\n", 0) == 0);
    CHECK(slurp(out / "variance.csv").rfind("n_mean,sigma2,stderr\n", 0) == 0);
    CHECK(slurp(out / "nnsd.csv").rfind("s,pdf\n", 0) == 0);
    CHECK(slurp(out / "ratio1.csv").rfind("r,pdf\n", 0) == 0);

    // manifest embeds the resolved config and round-trips
    const std::string manifest = slurp(out / "manifest.json");
    const auto config_pos = manifest.find("\"config\"");
    REQUIRE(config_pos != std::string::npos);

    const RunConfig from_ini = parse({"--config", (out / "config_resolved.ini").string()});
    CHECK(from_ini == cfg);

    // byte-identical rerun
    const auto first = hash_dir(out);
    run(cfg);
    const auto second = hash_dir(out);
    CHECK(first == second);

    // thread count must not influence any numeric output (the manifest and
    // resolved config echo the differing threads field, so prune them)
    RunConfig single = cfg;
    single.threads = 1;
    run(single);
    auto pruned_first = first;
    auto pruned_third = hash_dir(out);
    for (const char* meta : {"manifest.json", "config_resolved.ini"}) {
        pruned_first.erase(meta);
        pruned_third.erase(meta);
    }
    CHECK(pruned_first == pruned_third);
}

TEST_CASE("analytic pipeline writes the requested curves") {
    const fs::path dir = fresh_dir("analytic_run");
    const RunConfig cfg = parse({"--out", (dir / "run").string(), "analytic", "--sigma2-gine",
                                 "--n-max", "2", "--n-step", "0.5"});
    run(cfg);
    const std::string csv = slurp(dir / "run" / "sigma2_gine.csv");
    CHECK(csv.rfind("n_mean,sigma2,stderr\n", 0) == 0);
    // 0, 0.5, 1, 1.5, 2 -> five data rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("stats pipeline consumes stored spectra") {
    const fs::path dir = fresh_dir("stats_run");
    const RunConfig gen = parse({"--seed", "4", "--out", (dir / "gen").string(), "ensemble",
                                 "--class", "gine", "--n", "150", "--members", "4",
                                 "--density-degree", "4", "--targets", "1,2", "--centers",
                                 "40", "--variance-batches", "4"});
    run(gen);

    const RunConfig stats_cfg =
        parse({"--seed", "4", "--out", (dir / "stats").string(), "stats", "--input",
               (dir / "gen" / "spectra").string(), "--uniform", "--targets", "1,2",
               "--centers", "40", "--variance-batches", "4", "--trim-lo-q", "0.02",
               "--trim-hi-q", "0.9"});
    run(stats_cfg);
    CHECK(fs::exists(dir / "stats" / "variance.csv"));
    CHECK(fs::exists(dir / "stats" / "nnsd.csv"));
}

TEST_CASE("loggas pipeline smoke test") {
    const fs::path dir = fresh_dir("loggas_run");
    const RunConfig cfg = parse({"--seed", "6", "--out", (dir / "run").string(), "--threads",
                                 "2", "loggas", "--n", "150", "--k", "2", "--members", "10",
                                 "--burn-in", "200", "--thin", "3", "--density-degree", "4",
                                 "--targets", "1,2", "--centers", "40",
                                 "--variance-batches", "4"});
    run(cfg);
    const fs::path out = dir / "run";
    for (const char* name :
         {"manifest.json", "density.csv", "unfolded.csv", "variance_unfolded.csv",
          "variance_gine_analytic.csv", "variance_radial_control.csv",
          "variance_cartesian_control.csv"}) {
        INFO("missing ", name);
        CHECK(fs::exists(out / name));
    }
}

TEST_CASE("CLI binary exit codes") {
    const char* bin = std::getenv("NHRMT_BIN");
    if (bin == nullptr) return; // run through ctest to exercise this
    const fs::path dir = fresh_dir("cli_exit");
    auto exit_code = [&](const std::string& args) {
        const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(exit_code("--help") == 0);
    CHECK(exit_code("ensemble --class wat") == 2);
    CHECK(exit_code("") == 2);
    // run failure: stats over an empty directory
    fs::create_directories(dir / "empty");
    CHECK(exit_code("stats --input " + (dir / "empty").string()) == 3);
    CHECK(exit_code("analytic --sigma2-gine --n-max 1 --n-step 0.5 --out " +
                    (dir / "ok").string()) == 0);
}
