#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "diracwalk/dispersion.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/evolve.hpp"
#include "diracwalk/experiment.hpp"
#include "diracwalk/lattice.hpp"
#include "diracwalk/measure.hpp"

namespace dqw {

using json = nlohmann::ordered_json;

/// Lines of exported tables starting with this prefix carry the resolved run
/// configuration as one line of JSON.
inline constexpr std::string_view kConfigPrefix = "# config: ";

/// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  require(r.ec == std::errc{} && r.ptr == s.data() + s.size(), "not a number: '" + std::string(s) + "'");
  return v;
}

inline void write_config_line(std::ostream& os, const json& config) {
  if (!config.is_null()) os << kConfigPrefix << config.dump() << '\n';
}

/// Reads the config line from the head of a table written by this library.
inline json read_config_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(kConfigPrefix, 0) == 0) return json::parse(line.substr(kConfigPrefix.size()));
    if (line.empty() || line[0] != '#') break;
  }
  throw ValidationError("no '" + std::string(kConfigPrefix) + "' metadata line found");
}

// ---------------------------------------------------------------- series

/// `t,probability` where probability is the per-defect signal; with several
/// balls, one column per ball and their union follow.
inline void write_series_csv(std::ostream& os, const MultiSeries& s, const json& config = {}) {
  write_config_line(os, config);
  const LocalizationSeries pd = s.per_defect();
  const bool multi = s.per_ball.size() > 1;
  os << "t,probability";
  if (multi) {
    for (std::size_t b = 0; b < s.per_ball.size(); ++b) os << ",ball_" << b;
    os << ",union";
  }
  os << '\n';
  for (std::size_t t = 0; t < pd.probabilities.size(); ++t) {
    os << t << ',' << format_double(pd.probabilities[t]);
    if (multi) {
      for (const auto& col : s.per_ball) os << ',' << format_double(col[t]);
      os << ',' << format_double(s.union_probability[t]);
    }
    os << '\n';
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated reader (no quoting), skipping '#' lines.
inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty())
      t.header = split(line);
    else
      t.rows.push_back(split(line));
  }
  return t;
}

inline json peak_json(const PeakResult& p) {
  json j;
  j["t_peak"] = p.t_peak;
  j["p_peak"] = p.p_peak;
  j["period_estimate"] = p.period_estimate ? json(*p.period_estimate) : json(nullptr);
  j["no_localization"] = p.no_localization;
  j["t_global"] = p.t_global;
  j["p_global"] = p.p_global;
  return j;
}

inline json series_json(const MultiSeries& s, const PeakResult& peak, const json& config = {}) {
  json j;
  j["config"] = config;
  j["peak"] = peak_json(peak);
  j["probability"] = s.per_defect().probabilities;
  if (s.per_ball.size() > 1) {
    j["per_ball"] = s.per_ball;
    j["union"] = s.union_probability;
  }
  return j;
}

// ---------------------------------------------------------------- snapshot

/// Probability per facet with its midpoint: `x,y,prob`.
inline void write_snapshot_csv(std::ostream& os, const WaveState& psi, const Lattice& lat, const json& config = {}) {
  write_config_line(os, config);
  os << "x,y,prob\n";
  for (std::size_t f = 0; f < lat.facets().size(); ++f) {
    const Vec2 m = lat.facets()[f].midpoint;
    os << format_double(m.x) << ',' << format_double(m.y) << ','
       << format_double(std::norm(psi.amp[2 * f]) + std::norm(psi.amp[2 * f + 1])) << '\n';
  }
}

// ---------------------------------------------------------------- lattice

inline json lattice_summary(const Lattice& lat) {
  json j;
  j["kind"] = std::string(to_string(lat.kind()));
  j["tiles_x"] = lat.spec().tiles_x;
  j["tiles_y"] = lat.spec().tiles_y;
  j["spacing"] = lat.spec().spacing;
  j["torus"] = {{"width", lat.torus().width}, {"height", lat.torus().height}};
  j["tiles"] = lat.tiles().size();
  j["removed_tiles"] = lat.removed_tiles();
  j["facets"] = lat.facets().size();
  j["components"] = lat.component_count();
  j["boundary_facets"] = lat.boundary_facets();
  json centres = json::array();
  for (const Vec2& c : lat.defect_centres()) centres.push_back({c.x, c.y});
  j["defect_centres"] = centres;
  j["removal_radius"] = lat.removal_radius();
  return j;
}

// ---------------------------------------------------------------- sweeps

inline void write_sweep_csv(std::ostream& os, const ScalingResult& r, const json& config = {}) {
  write_config_line(os, config);
  os << "kind,mass,defects,N,t_peak,p_peak\n";
  for (const auto& p : r.points)
    os << to_string(p.kind) << ',' << format_double(p.mass) << ',' << p.defects << ',' << p.n_tiles << ','
       << p.peak.t_peak << ',' << format_double(p.peak.p_peak) << '\n';
}

inline json fit_report(const ScalingResult& r, const json& config = {}) {
  json j;
  j["config"] = config;
  json groups = json::array();
  for (const auto& g : r.groups) {
    json e;
    e["mass"] = g.mass;
    e["defects"] = g.defects;
    e["points"] = g.points.size();
    if (g.time_fit && g.prob_fit) {
      const auto& t = *g.time_fit;
      const auto& p = *g.prob_fit;
      e["a"] = t.a;
      e["gamma"] = t.gamma;
      e["b"] = p.b;
      e["residuals"] = {{"time_log_rms", t.residual}, {"b_over_lnN_rms", p.residual}, {"c_over_N_rms", p.residual_c},
                        {"low_b_over_lnN_rms", p.low_residual_b}, {"low_c_over_N_rms", p.low_residual_c}};
      e["standard_errors"] = {{"a", t.se_a}, {"gamma", t.se_gamma}, {"b", p.se_b}};
      e["c"] = p.c;
      e["crossover_flag"] = p.crossover_flag;
      e["tail_b"] = p.tail ? json(p.tail->coef) : json(nullptr);
    } else {
      e["a"] = e["gamma"] = e["b"] = nullptr;
      e["crossover_flag"] = false;
    }
    groups.push_back(e);
  }
  j["fits"] = groups;
  return j;
}

// ---------------------------------------------------------------- dispersion

inline void write_dispersion_csv(std::ostream& os, const ConvergenceResult& r, const json& config = {}) {
  write_config_line(os, config);
  os << "eps,max_error\n";
  for (const auto& row : r.rows) os << format_double(row.eps) << ',' << format_double(row.max_error) << '\n';
}

}  // namespace dqw
