#pragma once

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "diracwalk/dispersion.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/evolve.hpp"
#include "diracwalk/experiment.hpp"
#include "diracwalk/io.hpp"
#include "diracwalk/lattice.hpp"
#include "diracwalk/measure.hpp"

namespace dqw::cli {

/// Relative output paths are resolved against this directory when it is set.
inline constexpr const char* kOutDirEnv = "DIRACWALK_OUT_DIR";

enum class Format { Csv, Json };

/// Where results go. Not part of the recorded config: changing it never
/// changes what is written.
struct Outputs {
  std::string out;
  std::string format;  // empty: from the extension of `out`
  std::string snapshot;
  std::optional<std::size_t> snapshot_at;
  std::string dump_lattice;
  std::string fit_out;
  unsigned jobs = default_jobs();
};

inline std::filesystem::path resolve_path(const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative())
    if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) return std::filesystem::path(dir) / path;
  return path;
}

inline Format output_format(const Outputs& o) {
  if (o.format == "csv") return Format::Csv;
  if (o.format == "json") return Format::Json;
  require(o.format.empty(), "unknown format '" + o.format + "' (expected csv|json)");
  return std::filesystem::path(o.out).extension() == ".json" ? Format::Json : Format::Csv;
}

/// Opens an output file, creating parent directories. An unwritable path is a
/// configuration error.
inline std::ofstream open_output(const std::string& p) {
  const auto path = resolve_path(p);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "cannot write output file '" + path.string() + "'");
  return f;
}

// ---------------------------------------------------------------- parsing helpers

inline Vec2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  require(comma != std::string::npos, "expected a point as x,y (got '" + s + "')");
  return {parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1))};
}

inline int parse_int(const std::string& s) {
  const double v = parse_double(s);
  require(v == std::floor(v) && std::abs(v) < 1e9, "expected an integer (got '" + s + "')");
  return static_cast<int>(v);
}

/// "lo:hi:count" (geometric, even) or a comma list of side lengths.
inline std::vector<int> parse_sizes(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    std::vector<int> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_int(item));
    require(parts.size() == 3, "--sizes expects lo:hi:count (got '" + s + "')");
    return geometric_sizes(parts[0], parts[1], parts[2]);
  }
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(item));
  require(!out.empty(), "--sizes is empty");
  return out;
}

inline double resolve_alpha(GridKind kind, const std::optional<double>& alpha, json& cfg) {
  if (kind == GridKind::Square) {
    cfg["alpha"] = nullptr;
    return 0.0;
  }
  if (alpha) {
    cfg["alpha"] = *alpha;
    cfg["alpha_source"] = "given";
    return *alpha;
  }
  const double a = calibrate_alpha().alpha;
  cfg["alpha"] = a;
  cfg["alpha_source"] = "calibrated";
  return a;
}

// ---------------------------------------------------------------- run

inline RunSetup run_setup_from(const json& c) {
  RunSetup s;
  const int n = c.at("size").get<int>();
  s.grid = GridSpec{parse_grid_kind(c.at("grid").get<std::string>()), n, n, 1.0};
  s.grid.validate();
  s.coin.mass = c.at("mass").get<double>();
  s.coin.alpha = c.at("alpha").is_null() ? 0.0 : c.at("alpha").get<double>();
  s.coin.phase = parse_coin_phase(c.at("coin_phase").get<std::string>());
  s.coin.validate();
  for (const auto& p : c.at("centres")) s.centres.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  s.removal_radius = c.at("removal_radius").get<double>();
  s.measurement_radius = c.at("measurement_radius").get<double>();
  require(s.measurement_radius > 0.0, "measurement radius must be positive");
  const long long steps = c.at("steps").get<long long>();
  require(steps >= 0, "steps must be >= 0");
  s.t_max = static_cast<std::size_t>(steps);
  s.peak_threshold = c.at("peak_threshold").get<double>();
  require(s.peak_threshold > 0.0 && s.peak_threshold <= 1.0, "peak threshold must be in (0, 1]");
  return s;
}

inline int execute_run(const json& cfg, const Outputs& o, std::ostream& out) {
  const RunSetup s = run_setup_from(cfg);
  const Format fmt = output_format(o);
  std::optional<std::ofstream> f;
  if (!o.out.empty()) f = open_output(o.out);

  const RunResult r = run_single(s);
  const bool have_peak = r.per_defect.probabilities.size() >= 3;

  if (f) {
    if (fmt == Format::Csv)
      write_series_csv(*f, r.series, cfg);
    else
      *f << series_json(r.series, r.peak, cfg).dump(2) << '\n';
  }
  if (!o.dump_lattice.empty()) open_output(o.dump_lattice) << lattice_summary(r.lattice).dump(2) << '\n';
  if (!o.snapshot.empty()) {
    const std::size_t at = o.snapshot_at.value_or(have_peak ? r.peak.t_peak : s.t_max);
    WaveState psi = uniform_state(r.lattice);
    Propagator(r.lattice, s.coin).advance(psi, at);
    json sc = cfg;
    sc["snapshot_step"] = at;
    auto sf = open_output(o.snapshot);
    write_snapshot_csv(sf, psi, r.lattice, sc);
  }

  out << to_string(s.grid.kind) << " grid, N = " << r.lattice.total_tiles() << " tiles ("
      << r.lattice.removed_tiles() << " removed, " << r.lattice.boundary_facets().size()
      << " boundary facets), " << s.t_max << " steps\n";
  out << "baseline p(0) = " << format_double(r.per_defect.probabilities.front()) << '\n';
  if (have_peak) {
    out << "peak: t = " << r.peak.t_peak << ", p = " << format_double(r.peak.p_peak);
    if (r.peak.t_global != r.peak.t_peak)
      out << " (window max t = " << r.peak.t_global << ", p = " << format_double(r.peak.p_global) << ")";
    out << '\n';
    if (r.peak.period_estimate) out << "period ~ " << format_double(*r.peak.period_estimate) << " steps\n";
    if (r.peak.no_localization) out << "no localization: series never rises above its baseline\n";
  }
  return 0;
}

// ---------------------------------------------------------------- sweep

inline SweepConfig sweep_config_from(const json& c) {
  SweepConfig s;
  s.kind = parse_grid_kind(c.at("grid").get<std::string>());
  s.sizes = c.at("sizes").get<std::vector<int>>();
  s.masses = c.at("masses").get<std::vector<double>>();
  s.defect_counts = c.at("defects").get<std::vector<int>>();
  s.placement = parse_placement(c.at("placement").get<std::string>());
  s.measurement_radius = c.at("measurement_radius").get<double>();
  s.removal_radius = c.at("removal_radius").get<double>();
  s.t_max_factor = c.at("t_max_factor").get<int>();
  s.alpha = c.at("alpha").is_null() ? 0.0 : c.at("alpha").get<double>();
  s.phase = parse_coin_phase(c.at("coin_phase").get<std::string>());
  s.peak_threshold = c.at("peak_threshold").get<double>();
  s.validate();
  return s;
}

inline int execute_sweep(const json& cfg, const Outputs& o, std::ostream& out) {
  const SweepConfig s = sweep_config_from(cfg);
  const Format fmt = output_format(o);
  std::optional<std::ofstream> f, ff;
  if (!o.out.empty()) f = open_output(o.out);
  if (!o.fit_out.empty()) ff = open_output(o.fit_out);

  const ScalingResult r = run_sweep(s, o.jobs);
  if (f) {
    if (fmt == Format::Csv) {
      write_sweep_csv(*f, r, cfg);
    } else {
      json j = fit_report(r, cfg);
      json pts = json::array();
      for (const auto& p : r.points)
        pts.push_back({{"kind", to_string(p.kind)}, {"mass", p.mass}, {"defects", p.defects},
                       {"N", p.n_tiles}, {"t_peak", p.peak.t_peak}, {"p_peak", p.peak.p_peak}});
      j["points"] = pts;
      *f << j.dump(2) << '\n';
    }
  }
  if (ff) *ff << fit_report(r, cfg).dump(2) << '\n';

  out << "kind,mass,defects,N,t_peak,p_peak\n";
  for (const auto& p : r.points)
    out << to_string(p.kind) << ',' << format_double(p.mass) << ',' << p.defects << ',' << p.n_tiles << ','
        << p.peak.t_peak << ',' << format_double(p.peak.p_peak) << (p.peak.no_localization ? "  (flat)" : "")
        << '\n';
  for (const auto& g : r.groups) {
    out << "mass " << format_double(g.mass) << ", defects " << g.defects << ": ";
    if (!g.time_fit) {
      out << "too few localized points to fit\n";
      continue;
    }
    out << std::setprecision(4) << "t = " << g.time_fit->a << " N^" << g.time_fit->gamma << " (+-"
        << g.time_fit->se_gamma << "), p = " << g.prob_fit->b << " / ln N (+-" << g.prob_fit->se_b << ")";
    if (g.prob_fit->crossover_flag) out << ", low-N segment closer to c/N";
    out << std::setprecision(6) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- disperse / calibrate

inline int execute_disperse(const json& cfg, const Outputs& o, std::ostream& out) {
  const GridKind kind = parse_grid_kind(cfg.at("grid").get<std::string>());
  CoinParams p;
  p.mass = cfg.at("mass").get<double>();
  p.alpha = cfg.at("alpha").is_null() ? 0.0 : cfg.at("alpha").get<double>();
  p.validate();
  const auto eps = cfg.at("eps").get<std::vector<double>>();
  const double kmax = cfg.at("kmax").get<double>();
  for (double e : eps) require(e > 0.0 && e * kmax <= 0.5 + 1e-12, "need 0 < eps and eps*kmax <= 0.5");
  const Format fmt = output_format(o);
  std::optional<std::ofstream> f;
  if (!o.out.empty()) f = open_output(o.out);

  const ConvergenceResult r = convergence_order(kind, p, momentum_probe(kmax), eps);
  if (f) {
    if (fmt == Format::Csv) {
      write_dispersion_csv(*f, r, cfg);
    } else {
      json j{{"config", cfg}, {"order", r.order}, {"rows", json::array()}};
      for (const auto& row : r.rows) j["rows"].push_back({{"eps", row.eps}, {"max_error", row.max_error}});
      *f << j.dump(2) << '\n';
    }
  }
  out << "eps,max_error\n";
  for (const auto& row : r.rows) out << format_double(row.eps) << ',' << format_double(row.max_error) << '\n';
  out << "convergence order " << format_double(r.order) << '\n';
  return 0;
}

inline int execute_calibrate(const json& cfg, const Outputs& o, std::ostream& out) {
  const CalibrationResult c = calibrate_alpha(cfg.at("eps").get<double>(), cfg.at("kmax").get<double>());
  const Format fmt = output_format(o);
  if (!o.out.empty()) {
    auto f = open_output(o.out);
    if (fmt == Format::Csv) {
      write_config_line(f, cfg);
      f << "alpha,objective,max_error\n"
        << format_double(c.alpha) << ',' << format_double(c.objective) << ',' << format_double(c.max_error) << '\n';
    } else {
      f << json{{"config", cfg}, {"alpha", c.alpha}, {"objective", c.objective}, {"max_error", c.max_error}}.dump(2)
        << '\n';
    }
  }
  out << "alpha = " << format_double(c.alpha) << " (max eigenphase error " << format_double(c.max_error)
      << " at eps = " << format_double(c.eps) << ")\n";
  return 0;
}

inline int execute(const json& cfg, const Outputs& o, std::ostream& out) {
  const std::string cmd = cfg.at("command").get<std::string>();
  if (cmd == "run") return execute_run(cfg, o, out);
  if (cmd == "sweep") return execute_sweep(cfg, o, out);
  if (cmd == "disperse") return execute_disperse(cfg, o, out);
  if (cmd == "calibrate") return execute_calibrate(cfg, o, out);
  throw ValidationError("unknown command '" + cmd + "' in config");
}

/// Reads the recorded config of an earlier output (CSV header line or the
/// "config" member of a JSON file).
inline json load_replay(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot read replay file '" + path + "'");
  if (std::filesystem::path(path).extension() == ".json") {
    const json j = json::parse(f);
    require(j.contains("config") && j["config"].is_object(), "replay file has no config object");
    json c = j["config"];
    c.erase("snapshot_step");
    return c;
  }
  json c = read_config_line(f);
  c.erase("snapshot_step");
  return c;
}

// ---------------------------------------------------------------- entry point

/// Full command line front end. Returns the process exit code: 0 success,
/// 2 invalid configuration or usage, 1 runtime failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dirac quantum walk search on square and triangular lattices with missing-tile defects",
               "diracwalk"};
  app.require_subcommand(0, 1);
  Outputs o;
  std::string replay;
  app.add_option("--replay", replay, "Re-run the config recorded in an earlier output file");
  auto add_outputs = [&](CLI::App* sc) {
    sc->add_option("--out", o.out, "Output file (relative paths go under $" + std::string(kOutDirEnv) + ")");
    sc->add_option("--format", o.format, "csv or json (default: from --out extension)")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  add_outputs(&app);
  app.add_option("--jobs", o.jobs, "Parallel sweep points")->check(CLI::PositiveNumber);

  std::string grid = "square";
  double mass = 0.0;
  std::optional<double> alpha;
  std::string coin_phase = "contrast";
  double removal_radius = 1.0, measurement_radius = kMeasurementRadius, threshold = kPeakThreshold;
  std::string placement = "evenly-spaced";

  auto add_physics = [&](CLI::App* sc) {
    sc->add_option("--grid", grid, "square or triangular")->check(CLI::IsMember({"square", "triangular"}));
    sc->add_option("--alpha", alpha, "Triangular coin angle in radians (default: calibrated)");
    sc->add_option("--coin-phase", coin_phase, "Bulk coin phase: contrast or verbatim")
        ->check(CLI::IsMember({"contrast", "verbatim"}));
    sc->add_option("--removal-radius", removal_radius, "Tiles within this distance of a defect centre are removed");
    sc->add_option("--radius", measurement_radius, "Measurement ball radius");
    sc->add_option("--threshold", threshold, "Peak threshold as a fraction of the window maximum");
    sc->add_option("--placement", placement, "Defect placement: evenly-spaced or centred")
        ->check(CLI::IsMember({"evenly-spaced", "centred"}));
  };

  CLI::App* run = app.add_subcommand("run", "Evolve one lattice and record the localization series");
  int size = 50;
  int defects = 1;
  std::vector<std::string> centres;
  std::optional<long long> steps;
  add_physics(run);
  add_outputs(run);
  run->add_option("--size", size, "Torus of n x n tiles");
  run->add_option("--mass", mass, "Mass m");
  run->add_option("--defects", defects, "Number of defects (placed by --placement)")->check(CLI::NonNegativeNumber);
  run->add_option("--centre", centres, "Defect centre x,y (repeatable; overrides --defects)");
  run->add_option("--steps", steps, "Steps to simulate (default 4*ceil(sqrt N))");
  run->add_option("--snapshot", o.snapshot, "Write the probability field (x,y,prob) at the peak step");
  run->add_option("--snapshot-at", o.snapshot_at, "Step of the snapshot instead of the peak");
  run->add_option("--dump-lattice", o.dump_lattice, "Write a JSON summary of the lattice");

  CLI::App* sweep = app.add_subcommand("sweep", "Scan lattice sizes and fit t(N) and p(N)");
  std::string sizes = "20:80:7";
  std::vector<double> masses{0.0};
  std::vector<int> counts{1};
  int t_max_factor = 4;
  add_physics(sweep);
  add_outputs(sweep);
  sweep->add_option("--sizes", sizes, "lo:hi:count (geometric, even) or n1,n2,...");
  sweep->add_option("--mass", masses, "Masses, comma separated")->delimiter(',');
  sweep->add_option("--defects", counts, "Defect counts, comma separated")->delimiter(',');
  sweep->add_option("--t-max-factor", t_max_factor, "Window is factor*ceil(sqrt N) steps");
  sweep->add_option("--fit-out", o.fit_out, "Write the JSON fit report here");
  sweep->add_option("--jobs", o.jobs, "Parallel sweep points")->check(CLI::PositiveNumber);

  CLI::App* disperse = app.add_subcommand("disperse", "Dispersion error of the translation-invariant walk");
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  double kmax = 2.5;
  disperse->add_option("--grid", grid, "square or triangular")->check(CLI::IsMember({"square", "triangular"}));
  disperse->add_option("--mass", mass, "Mass m");
  disperse->add_option("--alpha", alpha, "Triangular coin angle (default: calibrated)");
  disperse->add_option("--eps", eps_list, "Step sizes, comma separated")->delimiter(',');
  disperse->add_option("--kmax", kmax, "Largest momentum modulus");
  add_outputs(disperse);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Fit the triangular coin angle alpha");
  double cal_eps = 1e-3, cal_kmax = 1.0;
  calibrate->add_option("--eps", cal_eps, "Step size used for the fit");
  calibrate->add_option("--kmax", cal_kmax, "Largest momentum modulus");
  add_outputs(calibrate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    json cfg;
    if (!replay.empty()) {
      cfg = load_replay(replay);
    } else if (run->parsed()) {
      cfg["command"] = "run";
      cfg["grid"] = grid;
      cfg["size"] = size;
      cfg["mass"] = mass;
      resolve_alpha(parse_grid_kind(grid), alpha, cfg);
      cfg["coin_phase"] = coin_phase;
      const GridSpec g{parse_grid_kind(grid), size, size, 1.0};
      g.validate();
      std::vector<Vec2> cs;
      if (!centres.empty()) {
        for (const auto& c : centres) cs.push_back(parse_point(c));
      } else if (defects > 0) {
        cs = place_defects(build_lattice(g).torus(), defects, parse_placement(placement));
      }
      json jc = json::array();
      for (const Vec2& c : cs) jc.push_back({c.x, c.y});
      cfg["centres"] = jc;
      cfg["removal_radius"] = removal_radius;
      cfg["measurement_radius"] = measurement_radius;
      require(!steps || *steps >= 0, "--steps must be >= 0");
      cfg["steps"] = steps ? *steps : static_cast<long long>(default_t_max(g.tile_count()));
      cfg["peak_threshold"] = threshold;
    } else if (sweep->parsed()) {
      cfg["command"] = "sweep";
      cfg["grid"] = grid;
      cfg["sizes"] = parse_sizes(sizes);
      cfg["masses"] = masses;
      cfg["defects"] = counts;
      cfg["placement"] = placement;
      cfg["measurement_radius"] = measurement_radius;
      cfg["removal_radius"] = removal_radius;
      cfg["t_max_factor"] = t_max_factor;
      resolve_alpha(parse_grid_kind(grid), alpha, cfg);
      cfg["coin_phase"] = coin_phase;
      cfg["peak_threshold"] = threshold;
    } else if (disperse->parsed()) {
      cfg["command"] = "disperse";
      cfg["grid"] = grid;
      cfg["mass"] = mass;
      resolve_alpha(parse_grid_kind(grid), alpha, cfg);
      cfg["eps"] = eps_list;
      cfg["kmax"] = kmax;
    } else if (calibrate->parsed()) {
      cfg["command"] = "calibrate";
      cfg["eps"] = cal_eps;
      cfg["kmax"] = cal_kmax;
    } else {
      err << "error: a subcommand (run, sweep, disperse, calibrate) or --replay is required\n\n" << app.help();
      return 2;
    }
    return execute(cfg, o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: malformed config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dqw::cli
