// Experiment orchestration: named presets, the full generate/upscale/solve
// pipeline, result records, and the depth-scaling probe.
#pragma once

#include <string>
#include <vector>

#include "shmm/flowgen.hpp"
#include "shmm/hierarchy.hpp"
#include "shmm/microsolve.hpp"
#include "shmm/pde.hpp"

namespace shmm {

struct ExperimentConfig {
    std::string id = "custom";  // preset name (paper-4.1 .. paper-4.4) or custom
    StreamSpec stream;
    int alpha = 5;
    int depth = 2;
    double kappa = 1.0;
    int macro_n = 10;       // macro grid per side over [0,1]^2
    MicroSolveConfig micro;
    int oracle_n = 256;     // cell-problem collocation grid per side

    bool run_dns = false;   // also run the resolved reference + baseline + macro profile
    int dns_n = 256;
    double dns_dt = 3e-6;
    double t_end = 0.1;

    std::string out_dir = "out";

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
};

// Named parameter sets for the four canonical runs (paper-4.1 .. paper-4.4).
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Config file: an [experiment] section of key = value lines; an optional
// "preset" key seeds the defaults, remaining keys override field by field.
ExperimentConfig load_config_file(const std::string& path);

struct ResultRecord {
    std::string id;
    DiffTensor2 shmm;    // macro mean of the assembled field
    DiffTensor2 oracle;
    double rel_err_11 = 0.0, rel_err_22 = 0.0;  // |shmm-oracle|/|oracle| on the diagonal
    double field_spread = 0.0;                  // max pairwise tensor difference across macro points

    bool has_profiles = false;
    ProfileMetrics macro_vs_dns;     // x2-averaged profiles
    ProfileMetrics baseline_vs_dns;  // no-advection run vs the resolved run
    double mixing_width_dns = 0.0, mixing_width_baseline = 0.0;
    SolveStats dns_stats, macro_stats, baseline_stats;  // populated with profiles

    double wall_shmm_s = 0.0, wall_oracle_s = 0.0, wall_dns_s = 0.0;
    std::string fingerprint;  // hash of the serialized config

    std::string to_json() const;
};

// Generate, decompose, assemble the tensor field, run the oracle, optionally
// run the resolved/baseline/macro profile comparison; writes CSV/JSON
// artifacts under cfg.out_dir.
ResultRecord run_experiment(const ExperimentConfig& cfg);

// Aligned text table plus machine CSV of the per-experiment tensors/errors.
std::string compare_tables(const std::vector<ResultRecord>& records, const std::string& csv_path);

struct ScalingPoint {
    int depth = 0;
    long grid_point_work = 0;
    double wall_seconds = 0.0;
};

// Runs effdiff_recursive at each depth on a synthetic flow whose spectrum
// spans all requested levels; work counts must come out exactly linear.
std::vector<ScalingPoint> scaling_probe(const std::vector<int>& depths, const ExperimentConfig& cfg);

}  // namespace shmm
