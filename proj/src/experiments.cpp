#include "mqs/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mqs/amplifiers.hpp"
#include "mqs/loss.hpp"
#include "mqs/metrics.hpp"
#include "mqs/ofilter.hpp"

namespace mqs {

namespace {

// Above this truncation deficit the figure data is untrustworthy; the run
// aborts with an integrity error instead of writing misleading numbers.
constexpr double kDeficitLimit = 1e-3;

constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------- formatting

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// ------------------------------------------------------------------- config

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.g && cfg.nbar)
    throw config_error("config: give exactly one of g and nbar");
  if (cfg.g && *cfg.g < 0.0)
    throw config_error("config: g must be non-negative");
  if (cfg.nbar && *cfg.nbar <= 0.0)
    throw config_error("config: nbar must be positive");
  if (cfg.cutoff && *cfg.cutoff < 1)
    throw config_error("config: cutoff must be at least 1");
  for (double r : cfg.r_grid)
    if (!(r >= 0.0 && r <= 1.0))
      throw config_error("config: reflectivities must lie in [0, 1], got " +
                         fmt(r));
  for (int k : cfg.kappas)
    if (k < 0)
      throw config_error("config: filter thresholds must be non-negative");
  if (cfg.jobs < 1) throw config_error("config: jobs must be at least 1");
  if (cfg.pfilt_on != "lossless" && cfg.pfilt_on != "lossy")
    throw config_error("config: pfilt_on must be \"lossless\" or \"lossy\"");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> grid_or(const ExperimentConfig& cfg,
                            std::vector<double> fallback) {
  return cfg.r_grid.empty() ? std::move(fallback) : cfg.r_grid;
}

void ensure_dirs(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.cache_dir.empty())
    std::filesystem::create_directories(cfg.cache_dir);
}

// ------------------------------------------------------------- deficit book

struct DeficitTracker {
  double max = 0.0;

  void note(double d, const std::string& what) {
    max = std::max(max, d);
    if (d > kDeficitLimit)
      throw integrity_error(what + ": truncation deficit " + fmt(d) +
                            " exceeds " + fmt(kDeficitLimit) +
                            "; raise the cutoff");
  }
};

// ------------------------------------------------------------ parallel grid

// Runs fn(0..n-1) on up to `jobs` threads; the first exception wins and is
// rethrown after the pool drains. Results must be index-addressed by fn.
void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  const long workers = std::max(1L, std::min<long>(jobs, n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

// -------------------------------------------------------------- CSV writing

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const ExperimentConfig& cfg,
               int cutoff, double max_deficit, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open output file " + path);
  f << "# config_hash=" << hex16(config_hash(cfg)) << " cutoff=" << cutoff
    << " max_trace_deficit=" << fmt(max_deficit) << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    f << (c ? "," : "") << t.columns[c];
  f << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      f << (c ? "," : "") << fmt(row[c]);
    f << "\n";
  }
  if (!f) throw config_error("write failed for " + path);
}

// -------------------------------------------------------------- SVG writing

struct Series {
  std::string name;
  std::vector<double> x, y;
};

constexpr const char* kPalette[] = {"#1f6fb4", "#c23b22", "#2e8b57",
                                    "#8a5fbf", "#b8860b", "#d06aa0",
                                    "#5f6a6a"};

void svg_line_plot(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel,
                   const std::vector<Series>& series) {
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  bool seen = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      if (!seen) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        seen = true;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (xhi <= xlo) xhi = xlo + 1.0;
  if (yhi <= ylo) yhi = ylo + 1.0;
  const double x0 = 70, x1 = 610, y0 = 390, y1 = 50;
  const auto px = [&](double x) {
    return x0 + (x1 - x0) * (x - xlo) / (xhi - xlo);
  };
  const auto py = [&](double y) {
    return y0 + (y1 - y0) * (y - ylo) / (yhi - ylo);
  };

  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open output file " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
       "height=\"440\" viewBox=\"0 0 640 440\" font-family=\"sans-serif\">\n"
    << "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n"
    << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << title << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double tx = xlo + (xhi - xlo) * i / 5.0;
    const double ty = ylo + (yhi - ylo) * i / 5.0;
    f << "<line x1=\"" << fmt6(px(tx)) << "\" y1=\"" << y0 << "\" x2=\""
      << fmt6(px(tx)) << "\" y2=\"" << y1
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << fmt6(py(ty)) << "\" x2=\"" << x1
      << "\" y2=\"" << fmt6(py(ty))
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << fmt6(px(tx)) << "\" y=\"410\" text-anchor=\"middle\" "
         "font-size=\"11\">"
      << fmt6(tx) << "</text>\n"
      << "<text x=\"62\" y=\"" << fmt6(py(ty) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt6(ty) << "</text>\n";
  }
  f << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
    << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
    << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n"
    << "<text x=\"340\" y=\"432\" text-anchor=\"middle\" font-size=\"13\">"
    << xlabel << "</text>\n"
    << "<text x=\"16\" y=\"220\" font-size=\"13\" "
       "transform=\"rotate(-90 16 220)\" text-anchor=\"middle\">"
    << ylabel << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    // nan splits the polyline into separate segments
    std::string points;
    const auto flush = [&] {
      if (!points.empty())
        f << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (std::isnan(series[s].x[i]) || std::isnan(series[s].y[i])) {
        flush();
        continue;
      }
      points += fmt6(px(series[s].x[i])) + "," + fmt6(py(series[s].y[i])) + " ";
    }
    flush();
    const double ly = 58.0 + 16.0 * static_cast<double>(s);
    f << "<line x1=\"480\" y1=\"" << fmt6(ly - 4) << "\" x2=\"504\" y2=\""
      << fmt6(ly - 4) << "\" stroke=\"" << color
      << "\" stroke-width=\"1.5\"/>\n"
      << "<text x=\"510\" y=\"" << fmt6(ly) << "\" font-size=\"11\">"
      << series[s].name << "</text>\n";
  }
  f << "</svg>\n";
  if (!f) throw config_error("write failed for " + path);
}

std::string heat_color(double t) {
  // three-stop map: deep violet -> teal -> yellow
  const double stops[3][3] = {{0.267, 0.005, 0.329},
                              {0.128, 0.565, 0.551},
                              {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0);
  const int lo = t < 0.5 ? 0 : 1;
  const double u = t < 0.5 ? 2.0 * t : 2.0 * t - 1.0;
  char buf[12];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<unsigned>(
                    255.0 * (stops[lo][0] + u * (stops[lo + 1][0] - stops[lo][0]))),
                static_cast<unsigned>(
                    255.0 * (stops[lo][1] + u * (stops[lo + 1][1] - stops[lo][1]))),
                static_cast<unsigned>(
                    255.0 * (stops[lo][2] + u * (stops[lo + 1][2] - stops[lo][2]))));
  return buf;
}

// values[r][c]; row r is drawn bottom-up so the origin sits at the lower left.
void svg_heatmap(const std::string& path, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel,
                 const std::vector<std::vector<double>>& values) {
  const std::size_t nr = values.size();
  const std::size_t nc = nr ? values[0].size() : 0;
  double vmax = 0.0;
  for (const auto& row : values)
    for (double v : row)
      if (!std::isnan(v)) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  const double x0 = 70, y0 = 390, side = 520;
  const double cell = side / static_cast<double>(std::max(nr, nc));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open output file " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
       "height=\"440\" viewBox=\"0 0 640 440\" font-family=\"sans-serif\">\n"
    << "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n"
    << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << title << " (max " << fmt6(vmax) << ")</text>\n";
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) {
      const double v = values[r][c];
      const std::string color =
          std::isnan(v) ? std::string("#ffffff") : heat_color(v / vmax);
      f << "<rect x=\"" << fmt6(x0 + cell * static_cast<double>(c)) << "\" y=\""
        << fmt6(y0 - cell * static_cast<double>(r + 1)) << "\" width=\""
        << fmt6(cell) << "\" height=\"" << fmt6(cell) << "\" fill=\"" << color
        << "\"/>\n";
    }
  f << "<text x=\"330\" y=\"432\" text-anchor=\"middle\" font-size=\"13\">"
    << xlabel << "</text>\n"
    << "<text x=\"16\" y=\"220\" font-size=\"13\" "
       "transform=\"rotate(-90 16 220)\" text-anchor=\"middle\">"
    << ylabel << "</text>\n"
    << "</svg>\n";
  if (!f) throw config_error("write failed for " + path);
}

// ------------------------------------------------------- operators & caching

// |psi><psi| assembled directly into complete block-keyed storage. Every
// nonzero amplitude of psi must sit in a single label class (so the
// projector has no cross-class entries); all classes are kept, zero blocks
// included, matching what block_decompose and the loss channel produce.
DensityOperator blocked_projector(const PureState& psi,
                                  const BlockLabel& label) {
  DensityOperator out;
  out.basis = psi.basis;
  out.block_label = label;
  out.block_label_name = label.name;
  out.trace_deficit = psi.truncation_deficit;

  const long dim = psi.basis.dim();
  std::vector<int> occ(static_cast<std::size_t>(psi.basis.num_modes()));
  std::vector<long> labels(static_cast<std::size_t>(dim));
  std::map<long, std::vector<long>> classes;
  long live = 0;
  bool have_live = false;
  for (long i = 0; i < dim; ++i) {
    psi.basis.occupation(i, occ);
    labels[static_cast<std::size_t>(i)] = label(occ);
    classes[labels[static_cast<std::size_t>(i)]].push_back(i);
    if (std::abs(psi.amplitudes(i)) != 0.0) {
      if (have_live && labels[static_cast<std::size_t>(i)] != live)
        throw config_error("blocked_projector: state spans several \"" +
                           label.name + "\" classes");
      live = labels[static_cast<std::size_t>(i)];
      have_live = true;
    }
  }
  out.blocks.reserve(classes.size());
  for (const auto& [value, indices] : classes) {
    DensityOperator::Block blk;
    blk.label = value;
    blk.indices = indices;
    const long n = static_cast<long>(indices.size());
    blk.mat = MatrixXcd::Zero(n, n);
    if (have_live && value == live)
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c)
          blk.mat(r, c) =
              psi.amplitudes(indices[static_cast<std::size_t>(r)]) *
              std::conj(psi.amplitudes(indices[static_cast<std::size_t>(c)]));
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

DensityOperator cached_operator(
    const ExperimentConfig& cfg, const std::string& key,
    const std::function<DensityOperator()>& build) {
  if (cfg.cache_dir.empty()) return build();
  const std::string path = cfg.cache_dir + "/" + key + ".mqsop";
  if (std::filesystem::exists(path)) return load_operator(path);
  DensityOperator op = build();
  save_operator(op, path);
  return op;
}

std::string gain_key(const Gain& gain, int cutoff) {
  return "g" + fmt(gain.g) + "_N" + std::to_string(cutoff);
}

Gain resolve_gain(const ExperimentConfig& cfg, double default_g,
                  Gain (*from_mean)(double)) {
  if (cfg.g) return Gain(*cfg.g);
  if (cfg.nbar) return from_mean(*cfg.nbar);
  return Gain(default_g);
}

}  // namespace

// ------------------------------------------------------------ config plumbing

ExperimentConfig parse_config_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw config_error("config: malformed JSON");
  if (!j.is_object())
    throw config_error("config: top level must be a JSON object");
  static const std::set<std::string> known{
      "schema",  "experiment", "g",    "nbar",      "cutoff",  "r_grid",
      "kappas",  "out_dir",    "jobs", "cache_dir", "pfilt_on"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw config_error("config: unknown key \"" + key + "\"");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1)
    throw config_error("config: missing or unsupported schema (expected 1)");

  ExperimentConfig cfg;
  try {
    if (j.contains("experiment"))
      cfg.experiment = j.at("experiment").get<std::string>();
    if (j.contains("g")) cfg.g = j.at("g").get<double>();
    if (j.contains("nbar")) cfg.nbar = j.at("nbar").get<double>();
    if (j.contains("cutoff")) cfg.cutoff = j.at("cutoff").get<int>();
    if (j.contains("r_grid"))
      cfg.r_grid = j.at("r_grid").get<std::vector<double>>();
    if (j.contains("kappas"))
      cfg.kappas = j.at("kappas").get<std::vector<int>>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
    if (j.contains("cache_dir"))
      cfg.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("pfilt_on"))
      cfg.pfilt_on = j.at("pfilt_on").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  if (j.contains("r_grid") && cfg.r_grid.empty())
    throw config_error("config: r_grid must not be empty");
  if (j.contains("kappas") && cfg.kappas.empty())
    throw config_error("config: kappas must not be empty");
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

// Reproducibility-relevant fields only: out_dir, jobs, and cache_dir change
// where and how fast the data is produced, never the data, so they stay out
// of the hash.
std::string canonical_config_string(const ExperimentConfig& cfg) {
  std::string s = "experiment=" + cfg.experiment;
  s += ";g=" + (cfg.g ? fmt(*cfg.g) : std::string("-"));
  s += ";nbar=" + (cfg.nbar ? fmt(*cfg.nbar) : std::string("-"));
  s += ";cutoff=" + (cfg.cutoff ? std::to_string(*cfg.cutoff) : std::string("-"));
  s += ";r_grid=";
  for (std::size_t i = 0; i < cfg.r_grid.size(); ++i)
    s += (i ? "," : "") + fmt(cfg.r_grid[i]);
  s += ";kappas=";
  for (std::size_t i = 0; i < cfg.kappas.size(); ++i)
    s += (i ? "," : "") + std::to_string(cfg.kappas[i]);
  s += ";pfilt_on=" + cfg.pfilt_on;
  return s;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // FNV-1a, 64-bit
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical_config_string(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ----------------------------------------------------------- the experiments

void exp_coherent_curves(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  if (cfg.g)
    throw config_error(
        "coherent: parameterized by nbar (|alpha|^2), not by a gain");
  const double alpha_sq = cfg.nbar.value_or(12.5);
  const int cutoff = cfg.cutoff.value_or(60);
  const std::vector<double> grid = grid_or(cfg, linspace(0.0, 0.24, 50));

  DeficitTracker deficit;
  const cxd alpha(std::sqrt(alpha_sq), 0.0);
  const PureState even = cat_state(alpha, CatSign::plus, cutoff);
  const PureState odd = cat_state(alpha, CatSign::minus, cutoff);
  deficit.note(even.truncation_deficit, "coherent: even superposition");
  deficit.note(odd.truncation_deficit, "coherent: odd superposition");
  const DensityOperator rho_even = projector(even);
  const DensityOperator rho_odd = projector(odd);
  const ModeLabel mode = even.basis.modes[0];

  struct Row {
    double x, closed, numeric, components, deficit;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(static_cast<long>(grid.size()), cfg.jobs, [&](long i) {
    const double R = grid[static_cast<std::size_t>(i)];
    const double T = 1.0 - R;
    const DensityOperator a = apply_loss_kraus(rho_even, mode, T);
    const DensityOperator b = apply_loss_kraus(rho_odd, mode, T);
    rows[static_cast<std::size_t>(i)] = {
        R * alpha_sq, coherent_mqs_distance_closed(R, alpha_sq),
        bures(a, b).bures, component_distance_coherent(R, alpha_sq),
        std::max(a.trace_deficit, b.trace_deficit)};
  });

  Table t{{"x", "d_cat_closed", "d_cat_numeric", "d_components"}, {}};
  std::vector<Series> series(3);
  series[0].name = "d_cat_closed";
  series[1].name = "d_cat_numeric";
  series[2].name = "d_components";
  for (const Row& r : rows) {
    deficit.note(r.deficit, "coherent: lossy state");
    t.rows.push_back({r.x, r.closed, r.numeric, r.components});
    series[0].x.push_back(r.x);
    series[0].y.push_back(r.closed);
    series[1].x.push_back(r.x);
    series[1].y.push_back(r.numeric);
    series[2].x.push_back(r.x);
    series[2].y.push_back(r.components);
  }
  write_csv(cfg.out_dir + "/coherent_curves.csv", cfg, cutoff, deficit.max, t);
  svg_line_plot(cfg.out_dir + "/coherent_curves.svg",
                "Lossy coherent-superposition distances", "x = R |alpha|^2",
                "Bures distance", series);
}

void exp_pc_curve(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const Gain gain =
      cfg.g ? Gain(*cfg.g) : pc_gain_for_mean(cfg.nbar.value_or(12.5));
  const int cutoff = cfg.cutoff.value_or(40);
  const std::vector<double> grid = grid_or(cfg, linspace(0.0, 0.24, 50));
  const double nbar = pc_total_mean(gain);

  DeficitTracker deficit;
  // Every equatorial state here carries an odd total photon number, and loss
  // keeps any linear occupation label block-diagonal, so total parity halves
  // each eigenproblem for the whole sweep.
  const std::array<std::pair<const char*, PureState>, 6> states{{
      {"phase0", pc_amplified_state(gain, 0.0, cutoff)},
      {"phasepi", pc_amplified_state(gain, pi, cutoff)},
      {"mqs_plus", pc_mqs(gain, CatSign::plus, cutoff)},
      {"mqs_minus", pc_mqs(gain, CatSign::minus, cutoff)},
      {"circ_plus", pc_amplified_state(gain, pi / 2.0, cutoff)},
      {"circ_minus", pc_amplified_state(gain, -pi / 2.0, cutoff)},
  }};
  const BlockLabel parity = total_parity_label(states[0].second.basis);
  std::array<DensityOperator, 6> sources;
  for (std::size_t s = 0; s < states.size(); ++s) {
    deficit.note(states[s].second.truncation_deficit,
                 std::string("pc: ") + states[s].first);
    sources[s] = cached_operator(
        cfg, std::string("pc_") + states[s].first + "_" + gain_key(gain, cutoff),
        [&] { return blocked_projector(states[s].second, parity); });
  }
  const ModeLabel h = states[0].second.basis.modes[0];
  const ModeLabel v = states[0].second.basis.modes[1];

  struct Row {
    double x, d_pc, res_super, res_circ, deficit;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(static_cast<long>(grid.size()), cfg.jobs, [&](long i) {
    const double T = 1.0 - grid[static_cast<std::size_t>(i)];
    std::array<DensityOperator, 6> lossy;
    double local_deficit = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      lossy[s] = apply_loss_kraus(apply_loss_kraus(sources[s], h, T), v, T);
      local_deficit = std::max(local_deficit, lossy[s].trace_deficit);
    }
    const double d_macro = bures(lossy[0], lossy[1]).bures;
    const double d_super = bures(lossy[2], lossy[3]).bures;
    const double d_circ = bures(lossy[4], lossy[5]).bures;
    rows[static_cast<std::size_t>(i)] = {
        grid[static_cast<std::size_t>(i)] * nbar, d_macro,
        std::abs(d_super - d_macro), std::abs(d_circ - d_macro),
        local_deficit};
  });

  Table t{{"x", "d_pc", "residual_superpositions", "residual_circular"}, {}};
  Series line{"d_pc", {}, {}};
  for (const Row& r : rows) {
    deficit.note(r.deficit, "pc: lossy state");
    t.rows.push_back({r.x, r.d_pc, r.res_super, r.res_circ});
    line.x.push_back(r.x);
    line.y.push_back(r.d_pc);
  }
  write_csv(cfg.out_dir + "/pc_curve.csv", cfg, cutoff, deficit.max, t);
  svg_line_plot(cfg.out_dir + "/pc_curve.svg",
                "Lossy phase-covariant macrostate distance", "x = R <n>",
                "Bures distance", {line});
}

void exp_universal_distributions(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const Gain gain = resolve_gain(cfg, 1.5, universal_gain_for_mean);
  const int cutoff = cfg.cutoff.value_or(112);

  DeficitTracker deficit;
  const PureState seeded = tms_seeded(gain, cutoff);  // (k1,psi),(k2,psi_perp)
  const PureState spont = tms_vacuum(gain, cutoff);
  deficit.note(seeded.truncation_deficit, "distributions: seeded pair");
  deficit.note(spont.truncation_deficit, "distributions: spontaneous pair");

  const auto marginal = [](const PureState& s, int mode_pos) {
    std::vector<double> w(static_cast<std::size_t>(s.basis.cutoff) + 1, 0.0);
    for (long i = 0; i < s.basis.dim(); ++i)
      w[static_cast<std::size_t>(s.basis.occupation_of(i, mode_pos))] +=
          std::norm(s.amplitudes(i));
    return w;
  };
  // The seeded squeezer feeds (k1,psi) and (k2,psi_perp); the spontaneous one
  // fills the two remaining modes. Each reduced spatial mode is a product of
  // one marginal from each squeezer.
  const std::vector<double> ws_k1 = marginal(seeded, 0);
  const std::vector<double> ws_k2 = marginal(seeded, 1);
  const std::vector<double> w0_k1 = marginal(spont, 0);
  const std::vector<double> w0_k2 = marginal(spont, 1);

  const auto emit = [&](const std::string& name,
                        const std::vector<double>& wpsi,
                        const std::vector<double>& wperp) {
    const std::size_t n = wpsi.size();
    Table t{{"n_psi", "n_psi_perp", "p"}, {}};
    std::vector<std::vector<double>> cells(
        std::min<std::size_t>(n, 48),
        std::vector<double>(std::min<std::size_t>(n, 48)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double p = wpsi[i] * wperp[j];
        t.rows.push_back(
            {static_cast<double>(i), static_cast<double>(j), p});
        if (i < cells.size() && j < cells.size()) cells[j][i] = p;
      }
    write_csv(cfg.out_dir + "/distributions_" + name + ".csv", cfg, cutoff,
              deficit.max, t);
    svg_heatmap(cfg.out_dir + "/distributions_" + name + ".svg",
                "Photon-number distribution, " + name, "n_psi", "n_psi_perp",
                cells);
  };
  emit("k1_seed_psi", ws_k1, w0_k1);
  emit("k1_seed_psi_perp", w0_k1, ws_k1);
  emit("k2_seed_psi", w0_k2, ws_k2);
  emit("k2_seed_psi_perp", ws_k2, w0_k2);
}

void exp_loss_surface(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const Gain gain = resolve_gain(cfg, 1.2, universal_gain_for_mean);
  const int cutoff = cfg.cutoff.value_or(56);
  const std::vector<double> grid = grid_or(cfg, linspace(0.0, 1.0, 11));
  const QubitDirection dir;  // the distance is independent of the seed basis

  DeficitTracker deficit;
  const PureState seeded = tms_seeded(gain, cutoff);
  const PureState spont = tms_vacuum(gain, cutoff);
  deficit.note(seeded.truncation_deficit, "surface: seeded pair");
  deficit.note(spont.truncation_deficit, "surface: spontaneous pair");
  const BlockLabel diff = photon_difference_label(seeded.basis, "k1", "k2");
  const DensityOperator rho_seeded =
      cached_operator(cfg, "surface_seeded_" + gain_key(gain, cutoff),
                      [&] { return blocked_projector(seeded, diff); });
  const DensityOperator rho_spont =
      cached_operator(cfg, "surface_spont_" + gain_key(gain, cutoff),
                      [&] { return blocked_projector(spont, diff); });
  const ModeLabel m1 = seeded.basis.modes[0];
  const ModeLabel m2 = seeded.basis.modes[1];

  // The four-mode fidelity factorizes over the two squeezer pairs into a
  // square, so D = sqrt(1 - F_pair) for both routes below.
  const auto kraus_distance = [&](double T1, double T2, double& out_deficit) {
    const DensityOperator a = apply_loss_kraus(
        apply_loss_kraus(rho_seeded, m1, T1), m2, T2);
    const DensityOperator b = apply_loss_kraus(
        apply_loss_kraus(rho_spont, m1, T1), m2, T2);
    out_deficit = std::max(a.trace_deficit, b.trace_deficit);
    return std::sqrt(std::max(0.0, 1.0 - fidelity(a, b).fidelity));
  };

  const long n = static_cast<long>(grid.size());
  struct Cell {
    double closed, kraus, deficit;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(n * n));
  parallel_for(n * n, cfg.jobs, [&](long i) {
    const double r1 = grid[static_cast<std::size_t>(i / n)];
    const double r2 = grid[static_cast<std::size_t>(i % n)];
    Cell& cell = cells[static_cast<std::size_t>(i)];
    cell.closed = universal_distance(gain, 1.0 - r1, 1.0 - r2, dir, cutoff).bures;
    cell.kraus = kraus_distance(1.0 - r1, 1.0 - r2, cell.deficit);
  });

  Table t{{"r1", "r2", "d_closed_form", "d_kraus"}, {}};
  std::vector<std::vector<double>> heat(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (long i = 0; i < n * n; ++i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    deficit.note(cell.deficit, "surface: lossy state");
    t.rows.push_back({grid[static_cast<std::size_t>(i / n)],
                      grid[static_cast<std::size_t>(i % n)], cell.closed,
                      cell.kraus});
    heat[static_cast<std::size_t>(i % n)][static_cast<std::size_t>(i / n)] =
        cell.closed;
  }
  write_csv(cfg.out_dir + "/loss_surface.csv", cfg, cutoff, deficit.max, t);
  svg_heatmap(cfg.out_dir + "/loss_surface.svg",
              "Bures distance over the loss plane", "R1 (cloning arm)",
              "R2 (anticloning arm)", heat);

  // Section curves at the reference reflectivities, one file per orientation.
  const std::vector<double> sections{0.9, 0.75, 0.5, 0.2, 0.05};
  Table fixed_r2{{"r1", "r2", "d_closed_form"}, {}};
  Table fixed_r1{{"r1", "r2", "d_closed_form"}, {}};
  for (double s : sections)
    for (double r : grid) {
      fixed_r2.rows.push_back(
          {r, s, universal_distance(gain, 1.0 - r, 1.0 - s, dir, cutoff).bures});
      fixed_r1.rows.push_back(
          {s, r, universal_distance(gain, 1.0 - s, 1.0 - r, dir, cutoff).bures});
    }
  write_csv(cfg.out_dir + "/loss_surface_sections_fixed_r2.csv", cfg, cutoff,
            deficit.max, fixed_r2);
  write_csv(cfg.out_dir + "/loss_surface_sections_fixed_r1.csv", cfg, cutoff,
            deficit.max, fixed_r1);

  // One-abscissa collapses of the surface; the equal-loss diagonal and the
  // cloning-arm-only section are both emitted since the figure being
  // reproduced does not say which collapse it uses.
  const double nbar_total = universal_total_mean(gain);
  Table curve{{"x", "r", "d_equal_loss", "d_k1_loss"}, {}};
  Series eq{"d_equal_loss", {}, {}}, k1only{"d_k1_loss", {}, {}};
  for (double r : grid) {
    const double de =
        universal_distance(gain, 1.0 - r, 1.0 - r, dir, cutoff).bures;
    const double dk = universal_distance(gain, 1.0 - r, 1.0, dir, cutoff).bures;
    curve.rows.push_back({r * nbar_total, r, de, dk});
    eq.x.push_back(r * nbar_total);
    eq.y.push_back(de);
    k1only.x.push_back(r * nbar_total);
    k1only.y.push_back(dk);
  }
  write_csv(cfg.out_dir + "/universal_curve.csv", cfg, cutoff, deficit.max,
            curve);
  svg_line_plot(cfg.out_dir + "/universal_curve.svg",
                "Lossy universal-cloner distance", "x = R <n>",
                "Bures distance", {eq, k1only});
}

void exp_ofilter_curves(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const Gain gain = resolve_gain(cfg, 1.2, universal_gain_for_mean);
  const int cutoff = cfg.cutoff.value_or(90);
  const std::vector<double> grid = grid_or(cfg, linspace(0.0, 0.5, 50));
  const std::vector<int> kappas =
      cfg.kappas.empty() ? std::vector<int>{0, 16, 32, 48, 64} : cfg.kappas;
  const double nbar_k1 = universal_k1_mean(gain);
  const bool lossy_pfilt = cfg.pfilt_on == "lossy";

  for (int kappa : kappas)
    if (kappa > cutoff)
      throw config_error("ofilter: kappa " + std::to_string(kappa) +
                         " exceeds the cutoff " + std::to_string(cutoff));

  DeficitTracker deficit;
  const DensityOperator lossless = reduced_k1_lossy(gain, 1.0, cutoff);
  deficit.note(lossless.trace_deficit, "ofilter: lossless arm");
  // Any config_error past the upfront kappa check means the acceptance
  // region holds no weight for that state; such cells are reported as nan.
  const auto success_prob = [](const DensityOperator& rho, int kappa) {
    if (kappa == 0) return 1.0;
    try {
      return apply_ofilter(rho, FilterSpec{kappa}).p_filt;
    } catch (const config_error&) {
      return std::nan("");
    }
  };
  // With the lossless convention p_filt does not depend on the loss, so one
  // value per threshold covers the whole sweep.
  std::map<int, double> p_lossless;
  for (int kappa : kappas) p_lossless[kappa] = success_prob(lossless, kappa);

  struct Row {
    double d, p, deficit;
  };
  const long n = static_cast<long>(grid.size());
  const long nk = static_cast<long>(kappas.size());
  std::vector<Row> rows(static_cast<std::size_t>(n * nk));
  parallel_for(n * nk, cfg.jobs, [&](long i) {
    const int kappa = kappas[static_cast<std::size_t>(i / n)];
    const double eta = 1.0 - grid[static_cast<std::size_t>(i % n)];
    Row& row = rows[static_cast<std::size_t>(i)];
    const DensityOperator lossy = reduced_k1_lossy(gain, eta, cutoff);
    row.deficit = lossy.trace_deficit;
    row.p = lossy_pfilt ? success_prob(lossy, kappa) : p_lossless.at(kappa);
    try {
      row.d = filtered_distance(gain, eta, FilterSpec{kappa}, cutoff).bures;
    } catch (const config_error&) {
      row.d = std::nan("");
    }
  });

  Table t{{"x", "kappa", "d_filtered", "p_filt"}, {}};
  std::vector<Series> series(kappas.size());
  for (long i = 0; i < n * nk; ++i) {
    const Row& row = rows[static_cast<std::size_t>(i)];
    deficit.note(row.deficit, "ofilter: lossy arm");
    const double x = grid[static_cast<std::size_t>(i % n)] * nbar_k1;
    const int kappa = kappas[static_cast<std::size_t>(i / n)];
    t.rows.push_back({x, static_cast<double>(kappa), row.d, row.p});
    Series& s = series[static_cast<std::size_t>(i / n)];
    if (s.name.empty()) s.name = "kappa " + std::to_string(kappa);
    s.x.push_back(x);
    s.y.push_back(row.d);
  }
  write_csv(cfg.out_dir + "/ofilter_curves.csv", cfg, cutoff, deficit.max, t);
  svg_line_plot(cfg.out_dir + "/ofilter_curves.svg",
                "Filtered reduced-arm distances", "x = R <n>_k1",
                "Bures distance", series);
}

int run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.experiment == "coherent")
    exp_coherent_curves(cfg);
  else if (cfg.experiment == "pc")
    exp_pc_curve(cfg);
  else if (cfg.experiment == "distributions")
    exp_universal_distributions(cfg);
  else if (cfg.experiment == "surface")
    exp_loss_surface(cfg);
  else if (cfg.experiment == "ofilter")
    exp_ofilter_curves(cfg);
  else
    throw config_error("unknown experiment \"" + cfg.experiment +
                       "\" (expected coherent | pc | distributions | surface "
                       "| ofilter)");
  return 0;
}

}  // namespace mqs
