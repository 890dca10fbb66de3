#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "diracwalk/coin.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/evolve.hpp"
#include "diracwalk/lattice.hpp"
#include "diracwalk/measure.hpp"

namespace dqw {

// ---------------------------------------------------------------- fits

struct PowerLawFit {
  double a = 0.0;
  double gamma = 0.0;
  double residual = 0.0;  // RMS in log space
  double se_a = 0.0;
  double se_gamma = 0.0;
};

struct ThroughOriginFit {
  double coef = 0.0;
  double residual = 0.0;  // RMS
  double se = 0.0;
};

struct LogInverseFit {
  double b = 0.0;  // p = b / ln N over all points
  double residual = 0.0;
  double se_b = 0.0;
  double c = 0.0;  // p = c / N over all points
  double residual_c = 0.0;
  // Low-N segment (lower half of the points): which law fits better there.
  double low_residual_b = 0.0;
  double low_residual_c = 0.0;
  bool crossover_flag = false;
  // When flagged, b refitted on the largest half-decade of N.
  std::optional<ThroughOriginFit> tail;
};

struct XY {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

inline void check_points(const std::vector<XY>& pts, double min_x) {
  require(pts.size() >= 3, "fit needs at least 3 points (got " + std::to_string(pts.size()) + ")");
  for (const auto& p : pts) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "fit points must be finite");
    require(p.x >= min_x, "fit point N=" + std::to_string(p.x) + " below the minimum " + std::to_string(min_x));
    require(p.y > 0.0, "fit values must be positive");
  }
}

/// y = coef * f(x) by least squares.
template <class F>
ThroughOriginFit fit_through_origin(const std::vector<XY>& pts, F f) {
  double sfy = 0, sff = 0;
  for (const auto& p : pts) {
    const double v = f(p.x);
    sfy += v * p.y;
    sff += v * v;
  }
  ThroughOriginFit r;
  r.coef = sfy / sff;
  double ssr = 0;
  for (const auto& p : pts) {
    const double e = p.y - r.coef * f(p.x);
    ssr += e * e;
  }
  const double n = static_cast<double>(pts.size());
  r.residual = std::sqrt(ssr / n);
  r.se = n > 1 ? std::sqrt(ssr / (n - 1) / sff) : 0.0;
  return r;
}

inline double inv_log(double n) { return 1.0 / std::log(n); }
inline double inv(double n) { return 1.0 / n; }

}  // namespace detail

/// t = a N^gamma, least squares on (ln N, ln t).
inline PowerLawFit fit_power_law(const std::vector<XY>& pts) {
  detail::check_points(pts, std::numeric_limits<double>::min());
  const double n = static_cast<double>(pts.size());
  double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += std::log(p.x);
    my += std::log(p.y);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double dx = std::log(p.x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.y) - my);
  }
  require(sxx > 0.0, "fit_power_law: all N are equal");
  PowerLawFit r;
  r.gamma = sxy / sxx;
  const double ln_a = my - r.gamma * mx;
  r.a = std::exp(ln_a);
  double ssr = 0;
  for (const auto& p : pts) {
    const double e = std::log(p.y) - ln_a - r.gamma * std::log(p.x);
    ssr += e * e;
  }
  r.residual = std::sqrt(ssr / n);
  const double s2 = n > 2 ? ssr / (n - 2) : 0.0;
  r.se_gamma = std::sqrt(s2 / sxx);
  r.se_a = r.a * std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return r;
}

/// p = b / ln N through the origin, with the competing p = c / N law checked on
/// the low-N half. If c/N wins there, b is refitted on N >= N_max / sqrt(10).
inline LogInverseFit fit_log_inverse(std::vector<XY> pts) {
  detail::check_points(pts, 8.0);
  std::sort(pts.begin(), pts.end(), [](const XY& l, const XY& r) { return l.x < r.x; });
  LogInverseFit r;
  const auto b = detail::fit_through_origin(pts, detail::inv_log);
  const auto c = detail::fit_through_origin(pts, detail::inv);
  r.b = b.coef;
  r.residual = b.residual;
  r.se_b = b.se;
  r.c = c.coef;
  r.residual_c = c.residual;

  const std::vector<XY> low(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>((pts.size() + 1) / 2));
  r.low_residual_b = detail::fit_through_origin(low, detail::inv_log).residual;
  r.low_residual_c = detail::fit_through_origin(low, detail::inv).residual;
  r.crossover_flag = r.low_residual_c < r.low_residual_b;
  if (r.crossover_flag) {
    const double cut = pts.back().x / std::sqrt(10.0);
    std::vector<XY> hi;
    for (const auto& p : pts)
      if (p.x >= cut) hi.push_back(p);
    r.tail = detail::fit_through_origin(hi, detail::inv_log);
  }
  return r;
}

inline double coefficient_of_variation(const std::vector<double>& v) {
  require(v.size() >= 2, "coefficient_of_variation needs at least 2 values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::abs(mean);
}

// ---------------------------------------------------------------- placement

enum class Placement { Centred, EvenlySpaced };

inline std::string_view to_string(Placement p) { return p == Placement::Centred ? "centred" : "evenly-spaced"; }

inline Placement parse_placement(std::string_view s) {
  if (s == "centred" || s == "centered") return Placement::Centred;
  if (s == "evenly-spaced" || s == "even") return Placement::EvenlySpaced;
  throw ValidationError("unknown placement '" + std::string(s) + "' (expected centred|evenly-spaced)");
}

/// Defect centres on a torus, anchored at its centre.
///
/// EvenlySpaced: the rank-1 pattern (i W/k, (i s mod k) H/k), with the stride s
/// maximizing the smallest pairwise torus distance.
/// Centred: a row along x through the centre at the minimum allowed spacing.
inline std::vector<Vec2> place_defects(const Torus& torus, int count, Placement rule) {
  require(count >= 1, "defect count must be >= 1 (got " + std::to_string(count) + ")");
  const Vec2 c{torus.width / 2.0, torus.height / 2.0};
  std::vector<Vec2> out;
  if (rule == Placement::Centred) {
    const double x0 = -(count - 1) * kMinDefectSeparation / 2.0;
    for (int i = 0; i < count; ++i) out.push_back(torus.wrap(c + Vec2{x0 + i * kMinDefectSeparation, 0.0}));
    return out;
  }
  const double k = count;
  auto pattern = [&](int s) {
    std::vector<Vec2> pts;
    for (int i = 0; i < count; ++i)
      pts.push_back(torus.wrap(c + Vec2{i * torus.width / k, ((i * s) % count) * torus.height / k}));
    return pts;
  };
  auto spread = [&](const std::vector<Vec2>& pts) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) d = std::min(d, torus.distance(pts[a], pts[b]));
    return d;
  };
  out = pattern(0);
  double best = spread(out);
  for (int s = 1; s < count; ++s) {
    auto pts = pattern(s);
    const double d = spread(pts);
    if (d > best + 1e-12) {
      best = d;
      out = std::move(pts);
    }
  }
  return out;
}

// ---------------------------------------------------------------- sizes

/// `count` side lengths spaced geometrically between lo and hi, each rounded
/// to the nearest even integer; duplicates after rounding are dropped.
inline std::vector<int> geometric_sizes(int lo, int hi, int count) {
  require(lo >= 4, "smallest size must be >= 4 (got " + std::to_string(lo) + ")");
  require(hi >= lo, "size range must have hi >= lo");
  require(count >= 1, "size count must be >= 1");
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const double v = lo * std::pow(static_cast<double>(hi) / lo, f);
    int n = 2 * static_cast<int>(std::lround(v / 2.0));
    n = std::max(n, 4);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

/// Window length for a lattice of N tiles: factor * ceil(sqrt N).
inline std::size_t default_t_max(std::size_t n_tiles, int factor = 4) {
  return static_cast<std::size_t>(factor) *
         static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_tiles))));
}

// ---------------------------------------------------------------- single run

struct RunSetup {
  GridSpec grid;
  CoinParams coin;
  std::vector<Vec2> centres;  // empty: no defect
  double removal_radius = 1.0;
  double measurement_radius = kMeasurementRadius;
  std::size_t t_max = 0;
  double peak_threshold = kPeakThreshold;
};

struct RunResult {
  Lattice lattice;
  MultiSeries series;
  LocalizationSeries per_defect;
  PeakResult peak;
};

inline Lattice make_lattice(const GridSpec& grid, const std::vector<Vec2>& centres, double removal_radius) {
  Lattice lat = build_lattice(grid);
  if (!centres.empty()) lat = apply_defects(lat, DefectSpec{centres, removal_radius});
  return lat;
}

/// Builds the lattice, evolves the uniform state and detects the peak of the
/// per-defect series. Without defects the measurement ball sits at the torus
/// centre.
inline RunResult run_single(const RunSetup& s) {
  Lattice lat = make_lattice(s.grid, s.centres, s.removal_radius);
  std::vector<Vec2> centres = lat.defect_centres();
  if (centres.empty()) centres.push_back(Vec2{lat.torus().width / 2.0, lat.torus().height / 2.0});
  MultiSeries ms = run_series(lat, s.coin, centres, s.t_max, s.measurement_radius);
  LocalizationSeries pd = ms.per_defect();
  std::optional<PeakResult> peak;
  if (pd.probabilities.size() >= 3) peak = detect_peak(pd, s.peak_threshold);
  return {std::move(lat), std::move(ms), std::move(pd), peak.value_or(PeakResult{})};
}

// ---------------------------------------------------------------- sweeps

struct SweepConfig {
  GridKind kind = GridKind::Square;
  std::vector<int> sizes;  // side n of an n x n tile torus
  std::vector<double> masses{0.0};
  std::vector<int> defect_counts{1};
  Placement placement = Placement::EvenlySpaced;
  double measurement_radius = kMeasurementRadius;
  double removal_radius = 1.0;
  int t_max_factor = 4;
  double alpha = 0.0;
  CoinPhase phase = CoinPhase::Contrast;
  double peak_threshold = kPeakThreshold;

  void validate() const {
    require(sizes.size() >= 1, "sweep needs at least one size");
    for (std::size_t i = 1; i < sizes.size(); ++i)
      require(sizes[i] > sizes[i - 1], "sweep sizes must be strictly increasing");
    require(!masses.empty(), "sweep needs at least one mass");
    require(!defect_counts.empty(), "sweep needs at least one defect count");
    require(measurement_radius > 0.0, "measurement radius must be positive");
    require(t_max_factor >= 1, "T_max factor must be >= 1");
    require(peak_threshold > 0.0 && peak_threshold <= 1.0, "peak threshold must be in (0, 1]");
  }
};

struct SweepPoint {
  GridKind kind = GridKind::Square;
  double mass = 0.0;
  int defects = 1;
  int side = 0;
  std::size_t n_tiles = 0;
  PeakResult peak;
  double seconds = 0.0;  // wall time; not part of any exported table
};

struct FitGroup {
  double mass = 0.0;
  int defects = 1;
  std::vector<SweepPoint> points;  // ascending N
  std::optional<PowerLawFit> time_fit;
  std::optional<LogInverseFit> prob_fit;
};

struct ScalingResult {
  SweepConfig config;
  std::vector<SweepPoint> points;  // config order: mass, defect count, size
  std::vector<FitGroup> groups;
};

struct SweepTask {
  double mass;
  int defects;
  int side;
};

inline std::vector<SweepTask> sweep_tasks(const SweepConfig& cfg) {
  std::vector<SweepTask> out;
  for (double m : cfg.masses)
    for (int d : cfg.defect_counts)
      for (int n : cfg.sizes) out.push_back({m, d, n});
  return out;
}

inline RunSetup sweep_setup(const SweepConfig& cfg, const SweepTask& t) {
  RunSetup s;
  s.grid = GridSpec{cfg.kind, t.side, t.side, 1.0};
  s.grid.validate();
  s.coin.mass = t.mass;
  s.coin.alpha = cfg.alpha;
  s.coin.phase = cfg.phase;
  s.coin.validate();
  const Lattice plain = build_lattice(s.grid);
  s.centres = place_defects(plain.torus(), t.defects, cfg.placement);
  s.removal_radius = cfg.removal_radius;
  s.measurement_radius = cfg.measurement_radius;
  s.t_max = default_t_max(s.grid.tile_count(), cfg.t_max_factor);
  s.peak_threshold = cfg.peak_threshold;
  return s;
}

inline std::string describe(const SweepConfig& cfg, const SweepTask& t) {
  return std::string(to_string(cfg.kind)) + " n=" + std::to_string(t.side) + " mass=" + std::to_string(t.mass) +
         " defects=" + std::to_string(t.defects);
}

inline std::vector<FitGroup> fit_groups(const std::vector<SweepPoint>& pts) {
  std::vector<FitGroup> groups;
  for (const auto& p : pts) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const FitGroup& g) { return g.mass == p.mass && g.defects == p.defects; });
    if (it == groups.end()) {
      groups.push_back(FitGroup{p.mass, p.defects, {}, {}, {}});
      it = groups.end() - 1;
    }
    it->points.push_back(p);
  }
  for (auto& g : groups) {
    std::sort(g.points.begin(), g.points.end(),
              [](const SweepPoint& l, const SweepPoint& r) { return l.n_tiles < r.n_tiles; });
    std::vector<XY> t, pr;
    for (const auto& p : g.points) {
      if (p.peak.no_localization) continue;
      t.push_back({static_cast<double>(p.n_tiles), static_cast<double>(p.peak.t_peak)});
      pr.push_back({static_cast<double>(p.n_tiles), p.peak.p_peak});
    }
    if (t.size() >= 3) {
      g.time_fit = fit_power_law(t);
      g.prob_fit = fit_log_inverse(pr);
    }
  }
  return groups;
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs every (mass, defect count, size) point, `jobs` at a time. Results are
/// stored by config index, so they do not depend on `jobs`. All points are
/// validated before any simulation starts.
inline ScalingResult run_sweep(const SweepConfig& cfg, unsigned jobs = default_jobs(),
                               const std::function<void(const SweepPoint&)>& on_point = {}) {
  cfg.validate();
  const auto tasks = sweep_tasks(cfg);
  std::vector<RunSetup> setups;
  for (const auto& t : tasks) {
    try {
      setups.push_back(sweep_setup(cfg, t));
      (void)make_lattice(setups.back().grid, setups.back().centres, setups.back().removal_radius);
    } catch (const ValidationError& e) {
      throw ValidationError("sweep point " + describe(cfg, t) + ": " + e.what());
    }
  }

  ScalingResult res;
  res.config = cfg;
  res.points.resize(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto start = std::chrono::steady_clock::now();
        const RunResult r = run_single(setups[i]);
        SweepPoint& p = res.points[i];
        p.kind = cfg.kind;
        p.mass = tasks[i].mass;
        p.defects = tasks[i].defects;
        p.side = tasks[i].side;
        p.n_tiles = setups[i].grid.tile_count();
        p.peak = r.peak;
        p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  if (on_point)
    for (const auto& p : res.points) on_point(p);
  res.groups = fit_groups(res.points);
  return res;
}

}  // namespace dqw
