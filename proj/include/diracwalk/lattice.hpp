#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "diracwalk/error.hpp"
#include "diracwalk/geometry.hpp"

namespace dqw {

enum class GridKind { Square, Triangular };

inline std::string_view to_string(GridKind k) {
  return k == GridKind::Square ? "square" : "triangular";
}

inline GridKind parse_grid_kind(std::string_view s) {
  if (s == "square") return GridKind::Square;
  if (s == "triangular" || s == "triangle") return GridKind::Triangular;
  throw ValidationError("unknown grid kind '" + std::string(s) + "' (expected square|triangular)");
}

/// Number of rotate+coin substeps making up one time step.
constexpr int substeps_per_step(GridKind k) { return k == GridKind::Square ? 2 : 3; }

struct GridSpec {
  GridKind kind = GridKind::Square;
  int tiles_x = 4;
  int tiles_y = 4;
  double spacing = 1.0;  // tile side length

  std::size_t tile_count() const {
    return static_cast<std::size_t>(tiles_x) * static_cast<std::size_t>(tiles_y);
  }

  void validate() const {
    require(tiles_x >= 4, "tiles_x must be >= 4 (got " + std::to_string(tiles_x) + ")");
    require(tiles_y >= 4, "tiles_y must be >= 4 (got " + std::to_string(tiles_y) + ")");
    require(spacing > 0.0 && std::isfinite(spacing), "spacing must be a positive finite number");
    // Two-colouring on a torus needs an even period in both directions; the
    // triangular tiling additionally repeats every two rows.
    require(tiles_x % 2 == 0, "tiles_x must be even (got " + std::to_string(tiles_x) + ")");
    require(tiles_y % 2 == 0, "tiles_y must be even (got " + std::to_string(tiles_y) + ")");
  }
};

enum class Colour : std::uint8_t { White, Grey };

struct Tile {
  Colour colour = Colour::White;
  Vec2 centre;
  int facet_count = 0;
  std::array<std::int32_t, 4> facets{-1, -1, -1, -1};  // anti-clockwise
};

struct Facet {
  Vec2 midpoint;
  std::int32_t white = -1;
  std::int32_t grey = -1;

  bool complete() const { return white >= 0 && grey >= 0; }
  bool boundary() const { return (white >= 0) != (grey >= 0); }
};

struct DefectSpec {
  std::vector<Vec2> centres;
  double removal_radius = 1.0;
};

/// Separation required between defect centres, so that radius-2 measurement
/// balls around distinct defects never overlap.
inline constexpr double kMinDefectSeparation = 4.0;

class Lattice;
Lattice build_lattice(const GridSpec& spec);
Lattice apply_defects(const Lattice& lat, const DefectSpec& d);

/// Facet/tile incidence of a two-coloured square or triangular tiling of a
/// torus. Immutable once built.
class Lattice {
 public:
  const GridSpec& spec() const { return spec_; }
  GridKind kind() const { return spec_.kind; }
  int substeps() const { return substeps_per_step(spec_.kind); }
  const Torus& torus() const { return torus_; }
  const std::vector<Tile>& tiles() const { return tiles_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<Vec2>& defect_centres() const { return defect_centres_; }
  double removal_radius() const { return removal_radius_; }

  /// Tiles of the original (defect-free) torus, N in the scaling laws.
  std::size_t total_tiles() const { return spec_.tile_count(); }
  std::size_t removed_tiles() const { return total_tiles() - tiles_.size(); }

  std::vector<std::int32_t> boundary_facets() const {
    std::vector<std::int32_t> out;
    for (std::size_t f = 0; f < facets_.size(); ++f)
      if (facets_[f].boundary()) out.push_back(static_cast<std::int32_t>(f));
    return out;
  }

  /// Number of (facet, colour) components that exist.
  std::size_t component_count() const {
    std::size_t n = 0;
    for (const auto& f : facets_) n += (f.white >= 0) + (f.grey >= 0);
    return n;
  }

  /// Surviving tile whose centre is nearest to p (torus distance).
  std::int32_t nearest_tile(Vec2 p) const {
    std::int32_t best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tiles_.size(); ++t) {
      const double d = torus_.distance(p, tiles_[t].centre);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = static_cast<std::int32_t>(t);
      }
    }
    return best;
  }

 private:
  friend Lattice build_lattice(const GridSpec& spec);
  friend Lattice apply_defects(const Lattice& lat, const DefectSpec& d);

  GridSpec spec_;
  Torus torus_;
  std::vector<Tile> tiles_;
  std::vector<Facet> facets_;
  std::vector<Vec2> defect_centres_;
  double removal_radius_ = 0.0;
};

namespace detail {

inline void attach(std::vector<Facet>& facets, const std::vector<Tile>& tiles) {
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    for (int s = 0; s < tiles[t].facet_count; ++s) {
      Facet& f = facets[static_cast<std::size_t>(tiles[t].facets[static_cast<std::size_t>(s)])];
      (tiles[t].colour == Colour::White ? f.white : f.grey) = static_cast<std::int32_t>(t);
    }
  }
}

inline void build_square(const GridSpec& g, Torus& torus, std::vector<Tile>& tiles,
                         std::vector<Facet>& facets) {
  const int nx = g.tiles_x;
  const int ny = g.tiles_y;
  const double s = g.spacing;
  torus = {nx * s, ny * s};
  auto tile_id = [&](int i, int j) { return ((j + ny) % ny) * nx + (i + nx) % nx; };
  // Facet 2*t is the west edge of tile t, 2*t+1 its south edge.
  auto west = [&](int i, int j) { return 2 * tile_id(i, j); };
  auto south = [&](int i, int j) { return 2 * tile_id(i, j) + 1; };

  tiles.resize(g.tile_count());
  facets.resize(2 * g.tile_count());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Tile& t = tiles[static_cast<std::size_t>(tile_id(i, j))];
      t.colour = (i + j) % 2 == 0 ? Colour::White : Colour::Grey;
      t.centre = {(i + 0.5) * s, (j + 0.5) * s};
      t.facet_count = 4;
      t.facets = {west(i + 1, j), south(i, j + 1), west(i, j), south(i, j)};  // E N W S
      facets[static_cast<std::size_t>(west(i, j))].midpoint = {i * s, (j + 0.5) * s};
      facets[static_cast<std::size_t>(south(i, j))].midpoint = {(i + 0.5) * s, j * s};
    }
  }
}

inline void build_triangular(const GridSpec& g, Torus& torus, std::vector<Tile>& tiles,
                             std::vector<Facet>& facets) {
  const int nx = g.tiles_x;
  const int ny = g.tiles_y;
  const double s = g.spacing;
  const double h = s * std::sqrt(3.0) / 2.0;
  torus = {nx * s / 2.0, ny * h};
  auto tile_id = [&](int i, int j) { return ((j + ny) % ny) * nx + (i + nx) % nx; };
  // Every facet belongs to exactly one up-pointing triangle: base, right or left edge.
  auto up_facet = [&](int i, int j, int which) {
    const int ii = (i + nx) % nx;
    const int jj = (j + ny) % ny;
    return 3 * (jj * (nx / 2) + ii / 2) + which;
  };
  enum { Base = 0, Right = 1, Left = 2 };

  tiles.resize(g.tile_count());
  facets.resize(3 * g.tile_count() / 2);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Tile& t = tiles[static_cast<std::size_t>(tile_id(i, j))];
      const double x0 = i * s / 2.0;
      const double y0 = j * h;
      t.facet_count = 3;
      if ((i + j) % 2 == 0) {
        t.colour = Colour::White;
        t.centre = {x0 + s / 2.0, y0 + h / 3.0};
        t.facets = {up_facet(i, j, Base), up_facet(i, j, Right), up_facet(i, j, Left), -1};
        facets[static_cast<std::size_t>(up_facet(i, j, Base))].midpoint = {x0 + s / 2.0, y0};
        facets[static_cast<std::size_t>(up_facet(i, j, Right))].midpoint = {x0 + 0.75 * s, y0 + h / 2.0};
        facets[static_cast<std::size_t>(up_facet(i, j, Left))].midpoint = {x0 + 0.25 * s, y0 + h / 2.0};
      } else {
        t.colour = Colour::Grey;
        t.centre = {x0 + s / 2.0, y0 + 2.0 * h / 3.0};
        // top, left, right
        t.facets = {up_facet(i, j + 1, Base), up_facet(i - 1, j, Right), up_facet(i + 1, j, Left), -1};
      }
    }
  }
  for (auto& f : facets) f.midpoint = torus.wrap(f.midpoint);
  for (auto& t : tiles) t.centre = torus.wrap(t.centre);
}

}  // namespace detail

inline Lattice build_lattice(const GridSpec& spec) {
  spec.validate();
  Lattice lat;
  lat.spec_ = spec;
  if (spec.kind == GridKind::Square)
    detail::build_square(spec, lat.torus_, lat.tiles_, lat.facets_);
  else
    detail::build_triangular(spec, lat.torus_, lat.tiles_, lat.facets_);
  detail::attach(lat.facets_, lat.tiles_);
  return lat;
}

/// Removes every tile whose centre lies within `removal_radius` (torus
/// distance) of a defect centre. Centres are first snapped to the nearest
/// tile centre. Facets left with no tile disappear; facets left with one tile
/// become boundary facets.
inline Lattice apply_defects(const Lattice& lat, const DefectSpec& d) {
  require(d.removal_radius >= 0.0 && std::isfinite(d.removal_radius),
          "removal_radius must be a non-negative finite number");
  const Torus& torus = lat.torus_;
  require(2.0 * d.removal_radius < std::min(torus.width, torus.height),
          "removal ball of radius " + std::to_string(d.removal_radius) +
              " overlaps its own wrap-around image");

  std::vector<Vec2> centres = lat.defect_centres_;
  for (const Vec2& c : d.centres) {
    const std::int32_t t = lat.nearest_tile(c);
    require(t >= 0, "lattice has no tiles left to place a defect on");
    centres.push_back(lat.tiles_[static_cast<std::size_t>(t)].centre);
  }
  for (std::size_t a = 0; a < centres.size(); ++a) {
    for (std::size_t b = a + 1; b < centres.size(); ++b) {
      const double dist = torus.distance(centres[a], centres[b]);
      require(dist >= kMinDefectSeparation - 1e-9,
              "defect centres " + std::to_string(a) + " and " + std::to_string(b) +
                  " are at torus distance " + std::to_string(dist) + " < " +
                  std::to_string(kMinDefectSeparation));
    }
  }

  std::vector<std::int32_t> new_tile(lat.tiles_.size(), -1);
  std::vector<Tile> tiles;
  for (std::size_t t = 0; t < lat.tiles_.size(); ++t) {
    bool removed = false;
    if (d.removal_radius > 0.0) {
      for (std::size_t c = lat.defect_centres_.size(); c < centres.size() && !removed; ++c)
        removed = torus.distance(lat.tiles_[t].centre, centres[c]) <= d.removal_radius + 1e-9;
    }
    if (!removed) {
      new_tile[t] = static_cast<std::int32_t>(tiles.size());
      tiles.push_back(lat.tiles_[t]);
    }
  }
  require(!tiles.empty(), "defects remove every tile of the lattice");

  std::vector<std::int32_t> new_facet(lat.facets_.size(), -1);
  std::vector<Facet> facets;
  for (std::size_t f = 0; f < lat.facets_.size(); ++f) {
    const Facet& old = lat.facets_[f];
    const bool keep = (old.white >= 0 && new_tile[static_cast<std::size_t>(old.white)] >= 0) ||
                      (old.grey >= 0 && new_tile[static_cast<std::size_t>(old.grey)] >= 0);
    if (keep) {
      new_facet[f] = static_cast<std::int32_t>(facets.size());
      facets.push_back(Facet{old.midpoint, -1, -1});
    }
  }
  for (auto& t : tiles)
    for (int s = 0; s < t.facet_count; ++s) {
      auto& id = t.facets[static_cast<std::size_t>(s)];
      id = new_facet[static_cast<std::size_t>(id)];
    }
  detail::attach(facets, tiles);

  Lattice out;
  out.spec_ = lat.spec_;
  out.torus_ = torus;
  out.tiles_ = std::move(tiles);
  out.facets_ = std::move(facets);
  out.defect_centres_ = std::move(centres);
  out.removal_radius_ = d.removal_radius;
  return out;
}

}  // namespace dqw
