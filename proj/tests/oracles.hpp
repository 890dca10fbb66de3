#pragma once
// Dense reference operators built from facet geometry alone, independent of
// the rotation tables used by Propagator.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include "diracwalk.hpp"

namespace oracle {

using dqw::CoinMatrix;
using dqw::cplx;
using dqw::Lattice;
using dqw::Vec2;
using Dense = Eigen::MatrixXcd;

inline std::int32_t facet_at(const Lattice& lat, Vec2 p) {
  for (std::size_t f = 0; f < lat.facets().size(); ++f)
    if (lat.torus().distance(lat.facets()[f].midpoint, p) < 1e-9) return static_cast<std::int32_t>(f);
  return -1;
}

inline std::int32_t find_facet(const Lattice& lat, Vec2 p) {
  const auto f = facet_at(lat, p);
  if (f < 0) throw std::runtime_error("no facet at position");
  return f;
}

/// Offset from a facet midpoint to the centre of its white tile.
inline Vec2 white_offset(const Lattice& lat, std::size_t f) {
  const auto& fc = lat.facets()[f];
  return lat.torus().delta(fc.midpoint, lat.tiles()[static_cast<std::size_t>(fc.white)].centre);
}

/// Square facet classes: 0 vertical with white to the west, 1 horizontal with
/// white to the south, 2 vertical white east, 3 horizontal white north.
inline int square_class(const Lattice& lat, std::size_t f) {
  const Vec2 d = white_offset(lat, f);
  if (std::abs(d.y) < 1e-9) return d.x < 0 ? 0 : 2;
  return d.y < 0 ? 1 : 3;
}

/// Triangular facet classes: 0 base (white above), 1 right edge, 2 left edge
/// of the white triangle.
inline int triangle_class(const Lattice& lat, std::size_t f) {
  const Vec2 d = white_offset(lat, f);
  if (std::abs(d.x) < 1e-9) return 0;
  return d.x < 0 ? 1 : 2;
}

/// Direction (as a unit vector) in which psi+ leaves a facet of each class
/// under one rotation, from the tile shapes.
inline Vec2 square_move(int cls) {
  const double h = 0.5;
  switch (cls) {
    case 0: return {-h, h};
    case 1: return {-h, -h};
    case 2: return {h, -h};
    default: return {h, h};
  }
}

inline Vec2 triangle_move(int cls, double s) {
  const double a = std::numbers::pi / 3.0 + cls * 2.0 * std::numbers::pi / 3.0;
  return Vec2{std::cos(a), std::sin(a)} * (s / 2.0);
}

/// Moves psi+ by +d and psi- by -d. Facets whose translate is not a facet
/// (triangle classes the move does not belong to) get a zero column.
inline Dense shift(const Lattice& lat, Vec2 d) {
  const auto n = static_cast<Eigen::Index>(2 * lat.facets().size());
  Dense t = Dense::Zero(n, n);
  for (std::size_t f = 0; f < lat.facets().size(); ++f) {
    const Vec2 m = lat.facets()[f].midpoint;
    const auto up = facet_at(lat, m + d), down = facet_at(lat, m - d);
    if (up >= 0) t(2 * up, static_cast<Eigen::Index>(2 * f)) = 1.0;
    if (down >= 0) t(2 * down + 1, static_cast<Eigen::Index>(2 * f + 1)) = 1.0;
  }
  return t;
}

inline Dense coin_everywhere(const Lattice& lat, const CoinMatrix& w) {
  const auto n = static_cast<Eigen::Index>(2 * lat.facets().size());
  Dense c = Dense::Zero(n, n);
  for (Eigen::Index f = 0; f < n / 2; ++f) c.block(2 * f, 2 * f, 2, 2) = w;
  return c;
}

inline Dense columns_of_class(const Lattice& lat, const Dense& m, const std::function<bool(std::size_t)>& keep) {
  Dense out = Dense::Zero(m.rows(), m.cols());
  for (std::size_t f = 0; f < lat.facets().size(); ++f)
    if (keep(f)) out.middleCols(static_cast<Eigen::Index>(2 * f), 2) = m.middleCols(static_cast<Eigen::Index>(2 * f), 2);
  return out;
}

/// W_+ T_y W_- T_x (square) or W T W T W T (triangle) on a defect-free torus,
/// with psi written in each walker's own frame: sigma_x exchanges the
/// components on square facets of classes 2 and 3.
inline Dense product_form(const Lattice& lat, const dqw::CoinParams& p) {
  using dqw::GridKind;
  const auto kind = lat.kind();
  const auto n = static_cast<Eigen::Index>(2 * lat.facets().size());
  Dense u = Dense::Zero(n, n);
  if (kind == GridKind::Square) {
    const CoinMatrix wm = dqw::bulk_phase(kind, p.phase, 0) * dqw::square_coin(p, dqw::CoinSign::Minus);
    const CoinMatrix wp = dqw::bulk_phase(kind, p.phase, 1) * dqw::square_coin(p, dqw::CoinSign::Plus);
    const Vec2 a = square_move(0), b = square_move(1);
    // Walkers on vertical facets go x = a then y = b; on horizontal facets
    // x = b then y = -a.
    const Dense ue = coin_everywhere(lat, wp) * shift(lat, b) * coin_everywhere(lat, wm) * shift(lat, a);
    const Dense uo = coin_everywhere(lat, wp) * shift(lat, a * -1.0) * coin_everywhere(lat, wm) * shift(lat, b);
    u = columns_of_class(lat, ue, [&](std::size_t f) { return square_class(lat, f) % 2 == 0; }) +
        columns_of_class(lat, uo, [&](std::size_t f) { return square_class(lat, f) % 2 == 1; });
    Dense v = Dense::Identity(n, n);
    for (std::size_t f = 0; f < lat.facets().size(); ++f)
      if (square_class(lat, f) >= 2) v.block(static_cast<Eigen::Index>(2 * f), static_cast<Eigen::Index>(2 * f), 2, 2) = dqw::pauli(dqw::Pauli::X);
    return v.adjoint() * u * v;
  }
  const CoinMatrix w = dqw::bulk_phase(kind, p.phase, 0) * dqw::triangular_coin(p);
  const double s = lat.spec().spacing;
  const Dense wc = coin_everywhere(lat, w);
  for (int c = 0; c < 3; ++c) {
    Dense uc = Dense::Identity(n, n);
    for (int k = 0; k < 3; ++k) uc = wc * shift(lat, triangle_move((c + k) % 3, s)) * uc;
    u += columns_of_class(lat, uc, [&](std::size_t f) { return triangle_class(lat, f) == c; });
  }
  return u;
}

inline dqw::WaveState random_state(const Lattice& lat, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  dqw::WaveState s;
  s.amp.assign(2 * lat.facets().size(), cplx{});
  double norm = 0.0;
  for (std::size_t c = 0; c < s.amp.size(); ++c)
    if (dqw::component_exists(lat, c)) {
      s.amp[c] = {g(rng), g(rng)};
      norm += std::norm(s.amp[c]);
    }
  for (auto& a : s.amp) a /= std::sqrt(norm);
  return s;
}

inline Eigen::VectorXcd as_vector(const dqw::WaveState& s) {
  return Eigen::Map<const Eigen::VectorXcd>(s.amp.data(), static_cast<Eigen::Index>(s.amp.size()));
}

}  // namespace oracle
