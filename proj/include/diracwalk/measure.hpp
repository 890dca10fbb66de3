#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "diracwalk/coin.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/evolve.hpp"
#include "diracwalk/lattice.hpp"

namespace dqw {

inline constexpr double kMeasurementRadius = 2.0;

/// Probability of finding the walker within `radius` of each centre, one entry
/// per step t = 0..T_max.
struct LocalizationSeries {
  std::vector<double> probabilities;
  double ball_radius = kMeasurementRadius;
  Vec2 centre;
};

/// Multi-ball run: one column per centre plus their union.
struct MultiSeries {
  std::vector<Vec2> centres;
  double ball_radius = kMeasurementRadius;
  std::vector<std::vector<double>> per_ball;  // [ball][t]
  std::vector<double> union_probability;      // [t]

  /// Mean over balls; the per-defect signal used for peak detection.
  LocalizationSeries per_defect() const {
    LocalizationSeries s;
    s.ball_radius = ball_radius;
    s.centre = centres.empty() ? Vec2{} : centres.front();
    s.probabilities = union_probability;
    const double k = static_cast<double>(std::max<std::size_t>(centres.size(), 1));
    for (double& v : s.probabilities) v /= k;
    return s;
  }
};

struct PeakResult {
  std::size_t t_peak = 0;
  double p_peak = 0.0;
  std::optional<double> period_estimate;
  bool no_localization = false;
  // Global maximum of the window, reported alongside the first peak.
  std::size_t t_global = 0;
  double p_global = 0.0;
};

/// Facets whose midpoint lies within `radius` (torus distance) of `centre`.
inline std::vector<std::int32_t> facets_in_ball(const Lattice& lat, Vec2 centre, double radius) {
  std::vector<std::int32_t> out;
  for (std::size_t f = 0; f < lat.facets().size(); ++f)
    if (lat.torus().distance(lat.facets()[f].midpoint, centre) <= radius + 1e-9)
      out.push_back(static_cast<std::int32_t>(f));
  return out;
}

inline double ball_probability(const WaveState& state, const std::vector<std::int32_t>& ball) {
  double p = 0.0;
  for (const auto f : ball) {
    const auto i = 2 * static_cast<std::size_t>(f);
    p += std::norm(state.amp[i]) + std::norm(state.amp[i + 1]);
  }
  return p;
}

inline double ball_probability(const WaveState& state, const Lattice& lat, Vec2 centre, double radius) {
  require(radius > 0.0, "ball radius must be positive");
  return ball_probability(state, facets_in_ball(lat, centre, radius));
}

inline MultiSeries run_series(const Lattice& lat, const CoinParams& p, const std::vector<Vec2>& centres,
                              std::size_t t_max, double radius = kMeasurementRadius) {
  require(radius > 0.0, "measurement radius must be positive");
  require(!centres.empty(), "run_series: no measurement centres");
  MultiSeries out;
  out.centres = centres;
  out.ball_radius = radius;
  std::vector<std::vector<std::int32_t>> balls;
  std::vector<std::int32_t> all;
  for (const Vec2& c : centres) {
    balls.push_back(facets_in_ball(lat, c, radius));
    all.insert(all.end(), balls.back().begin(), balls.back().end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  out.per_ball.assign(centres.size(), {});
  const Propagator prop(lat, p);
  WaveState psi = uniform_state(lat);
  std::vector<cplx> scratch;
  for (std::size_t t = 0;; ++t) {
    for (std::size_t b = 0; b < balls.size(); ++b) out.per_ball[b].push_back(ball_probability(psi, balls[b]));
    out.union_probability.push_back(ball_probability(psi, all));
    if (t == t_max) break;
    prop.step(psi, scratch);
  }
  return out;
}

/// Evolves the uniform state for t_max steps, recording the probability in
/// the ball around `centre` after each step.
inline LocalizationSeries run_series(const Lattice& lat, const CoinParams& p, Vec2 centre, std::size_t t_max,
                                     double radius = kMeasurementRadius) {
  MultiSeries m = run_series(lat, p, std::vector<Vec2>{centre}, t_max, radius);
  return LocalizationSeries{std::move(m.per_ball.front()), radius, centre};
}

inline constexpr double kPeakThreshold = 0.9;

/// First local maximum reaching `threshold` of the window maximum (t >= 1).
inline PeakResult detect_peak(const LocalizationSeries& series, double threshold = kPeakThreshold) {
  const auto& p = series.probabilities;
  require(p.size() >= 3, "detect_peak: series needs at least 3 samples");
  require(threshold > 0.0 && threshold <= 1.0, "detect_peak: threshold must be in (0, 1]");

  PeakResult r;
  const auto global = std::max_element(p.begin() + 1, p.end());
  r.t_global = static_cast<std::size_t>(global - p.begin());
  r.p_global = *global;
  r.no_localization = r.p_global - p.front() <= 1e-12;

  std::vector<std::size_t> peaks;
  for (std::size_t t = 1; t + 1 < p.size(); ++t)
    if (p[t] > p[t - 1] && p[t] >= p[t + 1] && p[t] >= threshold * r.p_global) peaks.push_back(t);

  if (peaks.empty() || r.no_localization) {
    r.t_peak = r.t_global;
  } else {
    r.t_peak = peaks.front();
    if (peaks.size() >= 2)
      r.period_estimate = static_cast<double>(peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
  }
  r.p_peak = p[r.t_peak];
  return r;
}

}  // namespace dqw
