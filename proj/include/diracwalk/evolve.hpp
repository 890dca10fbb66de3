#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "diracwalk/coin.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/lattice.hpp"

namespace dqw {

/// Spinor field over the facets of a lattice. Components are interleaved per
/// facet: amp[2f] is psi+ (white-tile side), amp[2f+1] is psi- (grey side).
/// A component whose tile is missing is held at exactly zero.
struct WaveState {
  std::vector<cplx> amp;
  int substep_phase = 0;

  cplx plus(std::size_t facet) const { return amp[2 * facet]; }
  cplx minus(std::size_t facet) const { return amp[2 * facet + 1]; }

  double norm_squared() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return s;
  }
};

struct StepReport {
  std::size_t steps_applied = 0;
  double norm_drift = 0.0;  // |norm - 1| after stepping
};

inline bool component_exists(const Lattice& lat, std::size_t component) {
  const Facet& f = lat.facets()[component / 2];
  return (component % 2 == 0 ? f.white : f.grey) >= 0;
}

/// Equal positive amplitude on every existing component, zero elsewhere.
inline WaveState uniform_state(const Lattice& lat) {
  const std::size_t n = lat.component_count();
  if (n == 0) throw ValidationError("uniform_state: lattice has no facets");
  WaveState s;
  s.amp.assign(2 * lat.facets().size(), cplx{});
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t c = 0; c < s.amp.size(); ++c)
    if (component_exists(lat, c)) s.amp[c] = a;
  return s;
}

/// Precomputed sparse form of one step: the rotation as a gather table and the
/// list of facets that receive a coin.
class Propagator {
 public:
  Propagator(const Lattice& lat, const CoinParams& p) : substeps_(lat.substeps()) {
    p.validate();
    const std::size_t ncomp = 2 * lat.facets().size();
    source_.resize(ncomp);
    for (std::size_t c = 0; c < ncomp; ++c) source_[c] = static_cast<std::int32_t>(c);
    for (const Tile& t : lat.tiles()) {
      const int side = t.colour == Colour::White ? 0 : 1;
      for (int s = 0; s < t.facet_count; ++s) {
        const auto from = t.facets[static_cast<std::size_t>(s)];
        const auto to = t.facets[static_cast<std::size_t>((s + 1) % t.facet_count)];
        source_[static_cast<std::size_t>(2 * to + side)] = 2 * from + side;
      }
    }
    for (std::size_t f = 0; f < lat.facets().size(); ++f)
      if (lat.facets()[f].complete()) complete_.push_back(static_cast<std::int32_t>(f));
    for (int k = 0; k < substeps_; ++k) coins_.push_back(substep_coin(lat.kind(), p, k));
  }

  int substeps() const { return substeps_; }

  void rotate(WaveState& s, std::vector<cplx>& scratch) const {
    scratch.resize(s.amp.size());
    for (std::size_t c = 0; c < scratch.size(); ++c)
      scratch[c] = s.amp[static_cast<std::size_t>(source_[c])];
    s.amp.swap(scratch);
  }

  void apply_coin(WaveState& s, int k) const {
    const CoinMatrix& w = coins_.at(static_cast<std::size_t>(k));
    const cplx w00 = w(0, 0), w01 = w(0, 1), w10 = w(1, 0), w11 = w(1, 1);
    for (const auto f : complete_) {
      cplx& up = s.amp[2 * static_cast<std::size_t>(f)];
      cplx& dn = s.amp[2 * static_cast<std::size_t>(f) + 1];
      const cplx a = up;
      const cplx b = dn;
      up = w00 * a + w01 * b;
      dn = w10 * a + w11 * b;
    }
  }

  void substep(WaveState& s, std::vector<cplx>& scratch) const {
    rotate(s, scratch);
    apply_coin(s, s.substep_phase);
    s.substep_phase = (s.substep_phase + 1) % substeps_;
  }

  void step(WaveState& s, std::vector<cplx>& scratch) const {
    require(s.substep_phase == 0, "step: state is mid-step (substep_phase != 0)");
    for (int k = 0; k < substeps_; ++k) substep(s, scratch);
  }

  StepReport advance(WaveState& s, std::size_t steps) const {
    check_size(s);
    std::vector<cplx> scratch;
    for (std::size_t n = 0; n < steps; ++n) step(s, scratch);
    return {steps, std::abs(std::sqrt(s.norm_squared()) - 1.0)};
  }

  void check_size(const WaveState& s) const {
    require(s.amp.size() == source_.size(), "state size does not match lattice");
  }

 private:
  int substeps_;
  std::vector<std::int32_t> source_;
  std::vector<std::int32_t> complete_;
  std::vector<CoinMatrix> coins_;
};

/// Synchronous anti-clockwise rotation of every surviving tile: psi+ cycles
/// around white tiles, psi- around grey tiles.
inline WaveState rotate(const WaveState& state, const Lattice& lat) {
  const Propagator prop(lat, CoinParams{});
  WaveState out = state;
  prop.check_size(out);
  std::vector<cplx> scratch;
  prop.rotate(out, scratch);
  return out;
}

/// Coin of substep k on every complete facet; boundary facets are left alone.
inline WaveState apply_coin(const WaveState& state, const Lattice& lat, int k, const CoinParams& p) {
  require(k >= 0 && k < lat.substeps(), "apply_coin: substep index " + std::to_string(k) + " out of range");
  const Propagator prop(lat, p);
  WaveState out = state;
  prop.check_size(out);
  prop.apply_coin(out, k);
  return out;
}

/// One full time step: l substeps of rotate-then-coin.
inline WaveState step(const WaveState& state, const Lattice& lat, const CoinParams& p) {
  const Propagator prop(lat, p);
  WaveState out = state;
  prop.check_size(out);
  std::vector<cplx> scratch;
  prop.step(out, scratch);
  return out;
}

inline constexpr std::size_t kDenseComponentCap = 4096;

/// One-step unitary in the storage basis (2 slots per facet), built column by
/// column by stepping basis vectors. Slots of missing components are fixed
/// points.
inline Eigen::MatrixXcd dense_step_matrix(const Lattice& lat, const CoinParams& p) {
  const std::size_t n = 2 * lat.facets().size();
  require(n <= kDenseComponentCap, "dense_step_matrix: " + std::to_string(n) +
                                       " components exceeds cap of " + std::to_string(kDenseComponentCap));
  const Propagator prop(lat, p);
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<cplx> scratch;
  WaveState e;
  for (std::size_t j = 0; j < n; ++j) {
    e.amp.assign(n, cplx{});
    e.amp[j] = 1.0;
    e.substep_phase = 0;
    prop.step(e, scratch);
    for (std::size_t i = 0; i < n; ++i)
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.amp[i];
  }
  return u;
}

}  // namespace dqw
