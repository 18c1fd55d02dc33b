// Presets, config parsing, the experiment pipeline, and the scaling probe.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shmm/common.hpp"
#include "shmm/experiment.hpp"
#include "shmm/hierarchy.hpp"
#include "shmm/pde.hpp"

using namespace shmm;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case; removed up front so reruns start clean.
fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("shmm_exp_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(bool(is));
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    REQUIRE(bool(os));
    os << text;
}

// Wall-clock fields vary run to run; everything else must be byte-stable.
nlohmann::json strip_wall(nlohmann::json j) {
    if (j.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (auto& [k, v] : j.items())
            if (k.find("wall") == std::string::npos) out[k] = strip_wall(v);
        return out;
    }
    if (j.is_array()) {
        for (auto& v : j) v = strip_wall(v);
    }
    return j;
}

// One-period cellular flow: every macro window sees an identical restriction,
// so the assembled field is constant and the window solve matches the oracle.
ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig c;
    c.id = "unitcell";
    c.stream.variant = StreamSpec::Variant::cellular_sum;
    c.stream.components = {{1.0, 5, 5}};
    c.alpha = 5;
    c.depth = 1;
    c.macro_n = 10;  // window side 0.2: exactly one vortex period per window
    c.micro.n_micro = 32;
    c.oracle_n = 128;
    c.out_dir = out.string();
    return c;
}

}  // namespace

TEST_CASE("preset: four canonical names, each resolvable") {
    std::vector<std::string> names = preset_names();
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "paper-4.1");
    CHECK(names[3] == "paper-4.4");
    for (const auto& n : names) CHECK(preset(n).id == n);
    CHECK_THROWS_AS(preset("paper-4.5"), InvalidInput);
}

TEST_CASE("preset: paper-4.2 carries two equal-amplitude cells and a DNS run") {
    ExperimentConfig c = preset("paper-4.2");
    CHECK(c.stream.variant == StreamSpec::Variant::cellular_sum);
    REQUIRE(c.stream.components.size() == 2);
    CHECK(c.stream.components[0].amplitude == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(c.stream.components[0].m1 == 5);
    CHECK(c.stream.components[1].m2 == 25);
    CHECK(c.stream.components[1].amplitude == c.stream.components[0].amplitude);
    CHECK(c.alpha == 5);
    CHECK(c.depth == 2);
    CHECK(c.kappa == 1.0);
    CHECK(c.run_dns);
}

TEST_CASE("preset: paper-4.4 widens the first window to the full period") {
    ExperimentConfig c = preset("paper-4.4");
    CHECK(c.stream.variant == StreamSpec::Variant::continuous_spectrum);
    CHECK(c.stream.kmax == 50);
    CHECK(c.stream.decay == doctest::Approx(3.0));
    CHECK(c.stream.seed == 404);
    CHECK(c.macro_n == 2);
    CHECK(c.depth == 3);
    CHECK_FALSE(c.run_dns);
}

TEST_CASE("config file: preset seeding with field overrides") {
    fs::path dir = scratch("cfgfile");
    fs::path ini = dir / "exp.ini";
    write_file(ini,
               "# comment line\n"
               "[experiment]\n"
               "preset = paper-4.2\n"
               "id = tweaked\n"
               "n_micro = 24\n"
               "kappa = 1/4\n"
               "run_dns = false\n");
    ExperimentConfig c = load_config_file(ini.string());
    CHECK(c.id == "tweaked");
    CHECK(c.micro.n_micro == 24);
    CHECK(c.kappa == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_FALSE(c.run_dns);
    REQUIRE(c.stream.components.size() == 2);
    CHECK(c.stream.components[1].m1 == 25);
}

TEST_CASE("config file: component lists parse amplitude and both mode numbers") {
    fs::path dir = scratch("cfgcomp");
    fs::path ini = dir / "exp.ini";
    write_file(ini,
               "[experiment]\n"
               "variant = cellular_sum\n"
               "components = 0.2 5 5; 0.4 5 45\n"
               "depth = 1\n");
    ExperimentConfig c = load_config_file(ini.string());
    REQUIRE(c.stream.components.size() == 2);
    CHECK(c.stream.components[0].amplitude == doctest::Approx(0.2));
    CHECK(c.stream.components[1].amplitude == doctest::Approx(0.4));
    CHECK(c.stream.components[1].m2 == 45);
    CHECK(c.depth == 1);
}

TEST_CASE("config file: unknown keys, stray keys, and missing files are rejected") {
    fs::path dir = scratch("cfgbad");
    write_file(dir / "unknown.ini", "[experiment]\nfrobnicate = 3\n");
    CHECK_THROWS_AS(load_config_file((dir / "unknown.ini").string()), InvalidInput);
    write_file(dir / "stray.ini", "alpha = 5\n[experiment]\n");
    CHECK_THROWS_AS(load_config_file((dir / "stray.ini").string()), InvalidInput);
    CHECK_THROWS_AS(load_config_file((dir / "absent.ini").string()), InvalidInput);
}

TEST_CASE("config json: serialization round-trips every field") {
    ExperimentConfig c = preset("paper-4.3");
    c.micro.method = MicroMethod::forward_euler;
    c.micro.dt_micro = 1e-5;
    c.oracle_n = 96;
    c.out_dir = "elsewhere";
    ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.micro.method == MicroMethod::forward_euler);
    CHECK(back.oracle_n == 96);
}

TEST_CASE("compare_tables: text names the run, CSV parses back numerically") {
    ResultRecord rec;
    rec.id = "demo";
    rec.shmm = DiffTensor2::diagonal(2.0, 1.5);
    rec.oracle = DiffTensor2::diagonal(2.1, 1.6);
    rec.rel_err_11 = 0.1 / 2.1;
    rec.rel_err_22 = 0.1 / 1.6;

    fs::path dir = scratch("table");
    fs::path csv = dir / "table.csv";
    std::string text = compare_tables({rec}, csv.string());
    CHECK(text.find("demo") != std::string::npos);

    std::ifstream is(csv);
    REQUIRE(bool(is));
    std::string header, row;
    REQUIRE(bool(std::getline(is, header)));
    CHECK(header ==
          "experiment,k11_shmm,k22_shmm,k11_oracle,k22_oracle,rel_err_11,rel_err_22,wall_time_s");
    REQUIRE(bool(std::getline(is, row)));
    std::stringstream ss(row);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 8);
    CHECK(cells[0] == "demo");
    CHECK(std::stod(cells[1]) == doctest::Approx(2.0));
    CHECK(std::stod(cells[4]) == doctest::Approx(1.6));
    CHECK(std::stod(cells[5]) == doctest::Approx(0.1 / 2.1));
}

TEST_CASE("scaling_probe: grid-point work doubles from depth 1 to depth 2") {
    ExperimentConfig cfg;
    cfg.micro.n_micro = 16;
    cfg.alpha = 5;
    std::vector<ScalingPoint> pts = scaling_probe({1, 2}, cfg);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].depth == 1);
    CHECK(pts[1].depth == 2);
    CHECK(pts[0].grid_point_work == 16 * 16);
    CHECK(pts[1].grid_point_work == 2 * pts[0].grid_point_work);
    CHECK(pts[0].wall_seconds > 0.0);
}

TEST_CASE("run_experiment: rejects degenerate macro grids and depths") {
    ExperimentConfig c = tiny_config(scratch("reject"));
    c.macro_n = 1;
    CHECK_THROWS_AS(run_experiment(c), InvalidInput);
    c.macro_n = 2;
    c.depth = 0;
    CHECK_THROWS_AS(run_experiment(c), InvalidInput);
}

TEST_CASE("run_experiment: one-cell flow matches its oracle and emits every artifact") {
    fs::path dir = scratch("pipeline");
    ExperimentConfig cfg = tiny_config(dir);
    cfg.run_dns = true;
    cfg.dns_n = 64;
    cfg.dns_dt = 5e-5;
    cfg.t_end = 0.01;

    ResultRecord rec = run_experiment(cfg);
    CHECK(rec.rel_err_11 < 0.01);
    CHECK(rec.rel_err_22 < 0.01);
    CHECK(rec.field_spread < 1e-12);
    CHECK(rec.fingerprint.rfind("shmm1-", 0) == 0);
    REQUIRE(rec.has_profiles);
    CHECK(rec.mixing_width_dns > 0.0);
    CHECK(rec.mixing_width_baseline > 0.0);
    CHECK(rec.dns_stats.steps == 200);
    CHECK(rec.macro_vs_dns.l2_rel < 0.2);

    const std::string prefix = (dir / "unitcell_").string();
    for (const char* tail : {"psi_spectral.csv", "config.json", "keff.csv", "record.json",
                             "profile_dns.csv", "profile_macro.csv", "profile_baseline.csv"})
        CHECK(fs::exists(prefix + tail));

    // Emitted config reloads to the identical serialization.
    ExperimentConfig back = ExperimentConfig::from_json(slurp(prefix + "config.json"));
    CHECK(back.to_json() == cfg.to_json());

    // The tensor field CSV reloads exactly; constant field equals the mean.
    EffDiffField field = EffDiffField::read_csv(prefix + "keff.csv");
    CHECK(field.tensors.size() == 100);
    CHECK(field.at(0, 0).max_abs_diff(rec.shmm) < 1e-12);

    Profile1D dns = Profile1D::read_csv(prefix + "profile_dns.csv");
    REQUIRE(dns.x.size() == 64);
    CHECK(dns.u.front() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(dns.u.back() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("run_experiment: artifacts are byte-identical across repeated runs") {
    fs::path dir = scratch("repeat");
    ExperimentConfig cfg = tiny_config(dir);

    run_experiment(cfg);
    const std::string prefix = (dir / "unitcell_").string();
    std::string psi1 = slurp(prefix + "psi_spectral.csv");
    std::string keff1 = slurp(prefix + "keff.csv");
    std::string rec1 = slurp(prefix + "record.json");

    run_experiment(cfg);
    CHECK(slurp(prefix + "psi_spectral.csv") == psi1);
    CHECK(slurp(prefix + "keff.csv") == keff1);
    CHECK(strip_wall(nlohmann::json::parse(slurp(prefix + "record.json"))) ==
          strip_wall(nlohmann::json::parse(rec1)));
}
