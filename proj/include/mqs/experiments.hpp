#pragma once
// Experiment runner: figure-data sweeps written as deterministic CSV plus
// self-contained SVG plots, with JSON configs, operator caching, and
// multithreaded grids.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mqs {

struct ExperimentConfig {
  std::string experiment;
  std::optional<double> g;     // exclusive with nbar
  std::optional<double> nbar;  // mean-photon target
  std::optional<int> cutoff;   // override of the deficit-rule default
  std::vector<double> r_grid;  // reflectivities; empty -> experiment default
  std::vector<int> kappas;     // filter thresholds; empty -> default set
  std::string out_dir = ".";
  int jobs = 1;
  std::string cache_dir;       // empty -> caching off
  std::string pfilt_on = "lossless";  // which state p_filt is reported for
};

// Parses the JSON text of a config file (schema 1) and validates it.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical key=value rendering; the FNV-1a hash of it stamps every CSV.
std::string canonical_config_string(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Runs the named experiment, writing CSV/SVG files under out_dir.
// Throws config_error / integrity_error; returns 0 on success.
int run_experiment(const ExperimentConfig& cfg);

// Individual experiments (run_experiment dispatches on cfg.experiment).
void exp_coherent_curves(const ExperimentConfig& cfg);
void exp_pc_curve(const ExperimentConfig& cfg);
void exp_universal_distributions(const ExperimentConfig& cfg);
void exp_loss_surface(const ExperimentConfig& cfg);
void exp_ofilter_curves(const ExperimentConfig& cfg);

}  // namespace mqs
