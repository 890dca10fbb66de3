#pragma once

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "diracwalk/coin.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/geometry.hpp"
#include "diracwalk/lattice.hpp"

namespace dqw {

/// Unit shift direction of substep k in the momentum-space picture: x then y
/// for the square walk, cos(2k pi/3) u_x + sin(2k pi/3) u_y for the triangle.
inline Vec2 shift_direction(GridKind kind, int k) {
  require(k >= 0 && k < substeps_per_step(kind), "shift_direction: substep out of range");
  if (kind == GridKind::Square) return k == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  const double a = 2.0 * std::numbers::pi * k / 3.0;
  return {std::cos(a), std::sin(a)};
}

/// diag(e^{i k.u eps}, e^{-i k.u eps})
inline CoinMatrix momentum_shift(Vec2 momentum, Vec2 u, double eps) {
  const double phi = dot(momentum, u) * eps;
  CoinMatrix t = CoinMatrix::Zero();
  t(0, 0) = std::polar(1.0, phi);
  t(1, 1) = std::polar(1.0, -phi);
  return t;
}

/// One-step operator of the translation-invariant walk at a fixed momentum:
/// W_+ T_y W_- T_x (square) or W T_2 W T_1 W T_0 (triangular). The bulk phase
/// convention is left out; it only offsets every quasi-energy by a constant.
inline CoinMatrix momentum_step(GridKind kind, const CoinParams& p, Vec2 momentum) {
  p.validate();
  CoinMatrix u = CoinMatrix::Identity();
  for (int k = 0; k < substeps_per_step(kind); ++k) {
    CoinMatrix w;
    if (kind == GridKind::Triangular)
      w = triangular_coin(p);
    else
      w = square_coin(p, k == 0 ? CoinSign::Minus : CoinSign::Plus);
    u = w * momentum_shift(momentum, shift_direction(kind, k), p.eps) * u;
  }
  return u;
}

/// Eigenphases of a 2x2 unitary in (-pi, pi], ascending.
inline std::array<double, 2> eigenphases(const CoinMatrix& u) {
  const cplx tr = u.trace();
  const cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  std::array<double, 2> ph{std::arg((tr + disc) / 2.0), std::arg((tr - disc) / 2.0)};
  std::sort(ph.begin(), ph.end());
  return ph;
}

/// Mass appearing in the continuum Dirac Hamiltonian of the walk. The square
/// coin pair rotates by theta_+ + theta_- = 2 eps m per step; the triangular
/// coin gives (9/sqrt5) cos(alpha) m, which is 3m at the calibrated angle.
inline double effective_mass(GridKind kind, const CoinParams& p) {
  if (kind == GridKind::Square) return 2.0 * p.mass;
  return 9.0 / std::sqrt(5.0) * std::cos(p.alpha) * p.mass;
}

/// Largest |eigenphase - (+-eps sqrt(k^2 + m_eff^2))| over the given momenta.
inline double dispersion_check(GridKind kind, const CoinParams& p, const std::vector<Vec2>& momenta) {
  const double me = effective_mass(kind, p);
  double worst = 0.0;
  for (const Vec2& k : momenta) {
    const auto ph = eigenphases(momentum_step(kind, p, k));
    const double w = p.eps * std::sqrt(dot(k, k) + me * me);
    worst = std::max({worst, std::abs(ph[0] + w), std::abs(ph[1] - w)});
  }
  return worst;
}

/// Fixed momenta on three rings and eight directions, the largest of modulus
/// kmax.
inline std::vector<Vec2> momentum_probe(double kmax) {
  require(kmax > 0.0, "momentum_probe: kmax must be positive");
  std::vector<Vec2> out;
  for (int r = 1; r <= 3; ++r)
    for (int d = 0; d < 8; ++d) {
      const double a = std::numbers::pi * d / 4.0 + 0.1;
      out.push_back(Vec2{std::cos(a), std::sin(a)} * (kmax * r / 3.0));
    }
  return out;
}

struct ConvergenceRow {
  double eps = 0.0;
  double max_error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double order = 0.0;  // slope of ln(error) against ln(eps)
};

/// Dispersion error at fixed momenta for each eps, and the fitted convergence
/// order.
inline ConvergenceResult convergence_order(GridKind kind, CoinParams p, const std::vector<Vec2>& momenta,
                                           const std::vector<double>& eps_values) {
  require(eps_values.size() >= 2, "convergence_order: need at least two eps values");
  ConvergenceResult r;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps_values) {
    p.eps = e;
    const double err = dispersion_check(kind, p, momenta);
    r.rows.push_back({e, err});
    const double x = std::log(e);
    const double y = std::log(std::max(err, std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(eps_values.size());
  r.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

struct CalibrationResult {
  double alpha = 0.0;
  double objective = 0.0;  // sum of squared eigenphase errors at the optimum
  double max_error = 0.0;  // dispersion_check at the optimum
  double eps = 0.0;
};

/// Picks alpha in (0, pi/2] minimizing the squared dispersion error of the
/// massless triangular walk at small eps (Brent search).
inline CalibrationResult calibrate_alpha(double eps = 1e-3, double kmax = 1.0) {
  require(eps > 0.0 && eps * kmax <= 0.5, "calibrate_alpha: need 0 < eps*kmax <= 0.5");
  const auto momenta = momentum_probe(kmax);
  auto objective = [&](double a) {
    CoinParams p;
    p.eps = eps;
    p.alpha = a;
    double s = 0.0;
    for (const Vec2& k : momenta) {
      const auto ph = eigenphases(momentum_step(GridKind::Triangular, p, k));
      const double w = eps * std::sqrt(dot(k, k));
      s += (ph[0] + w) * (ph[0] + w) + (ph[1] - w) * (ph[1] - w);
    }
    return s / (eps * eps);
  };
  const auto [a, f] = boost::math::tools::brent_find_minima(objective, 1e-6, std::numbers::pi / 2.0, 52);
  CoinParams p;
  p.eps = eps;
  p.alpha = a;
  return {a, f, dispersion_check(GridKind::Triangular, p, momenta), eps};
}

}  // namespace dqw
