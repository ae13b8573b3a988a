#include <algorithm>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mqs/experiments.hpp"
#include "mqs/fock.hpp"

namespace {

// "lo:hi:n" -> n uniform points; otherwise a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' ||
        n < 2 || !in.eof())
      throw mqs::config_error("--grid: expected lo:hi:n, got \"" + text + "\"");
    for (int i = 0; i < n; ++i)
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(n - 1));
    return grid;
  }
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw mqs::config_error("--grid: bad value \"" + item + "\"");
    }
  }
  if (grid.empty()) throw mqs::config_error("--grid: empty grid");
  return grid;
}

std::vector<int> parse_kappas(const std::string& text) {
  std::vector<int> kappas;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      kappas.push_back(v);
    } catch (const std::exception&) {
      throw mqs::config_error("--kappa: bad value \"" + item + "\"");
    }
  }
  if (kappas.empty()) throw mqs::config_error("--kappa: empty list");
  return kappas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Macroscopic-qubit decoherence experiments: amplified single-photon "
      "states through loss, measured by Bures distance"};
  app.name("mqs");

  std::string experiment, config_path, grid_text, kappa_text, out_dir,
      cache_dir, pfilt_on;
  double g = 0.0, nbar = 0.0;
  int cutoff = 0, jobs = 0;

  app.add_option("experiment", experiment,
                 "coherent | pc | distributions | surface | ofilter");
  app.add_option("--config", config_path, "JSON config file (schema 1)");
  const auto* opt_g = app.add_option("--g", g, "squeezing gain");
  const auto* opt_nbar =
      app.add_option("--nbar", nbar, "target mean photon number");
  const auto* opt_cutoff =
      app.add_option("--cutoff", cutoff, "per-mode Fock cutoff");
  const auto* opt_grid = app.add_option(
      "--grid", grid_text, "reflectivity grid: lo:hi:n or comma list");
  const auto* opt_kappa =
      app.add_option("--kappa", kappa_text, "filter thresholds, comma list");
  const auto* opt_out = app.add_option("--out", out_dir, "output directory");
  const auto* opt_jobs = app.add_option("--jobs", jobs, "worker threads");
  const auto* opt_cache =
      app.add_option("--cache-dir", cache_dir, "operator cache directory");
  const auto* opt_pfilt =
      app.add_option("--pfilt-on", pfilt_on,
                     "state the filter success probability is quoted on")
          ->check(CLI::IsMember({"lossless", "lossy"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    mqs::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = mqs::load_config_file(config_path);
    if (*opt_g && *opt_nbar)
      throw mqs::config_error("give exactly one of --g and --nbar");
    if (*opt_g) {
      cfg.g = g;
      cfg.nbar.reset();
    }
    if (*opt_nbar) {
      cfg.nbar = nbar;
      cfg.g.reset();
    }
    if (*opt_cutoff) cfg.cutoff = cutoff;
    if (*opt_grid) cfg.r_grid = parse_grid(grid_text);
    if (*opt_kappa) cfg.kappas = parse_kappas(kappa_text);
    if (*opt_out) cfg.out_dir = out_dir;
    if (*opt_jobs) cfg.jobs = jobs;
    if (*opt_cache) cfg.cache_dir = cache_dir;
    if (*opt_pfilt) cfg.pfilt_on = pfilt_on;
    if (!experiment.empty()) cfg.experiment = experiment;
    if (cfg.experiment.empty())
      throw mqs::config_error(
          "no experiment named (positional argument or config file)");
    return mqs::run_experiment(cfg);
  } catch (const mqs::integrity_error& e) {
    std::fprintf(stderr, "integrity error: %s\n", e.what());
    return 3;
  } catch (const mqs::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
