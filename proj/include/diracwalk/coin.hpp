#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>

#include "diracwalk/error.hpp"
#include "diracwalk/lattice.hpp"

namespace dqw {

using cplx = std::complex<double>;
using CoinMatrix = Eigen::Matrix2cd;

/// Global phase of the bulk coin relative to the identity applied on boundary
/// facets. On a defect-free torus it is a constant quasi-energy offset; next to
/// a defect it is not, because boundary facets do not pick it up.
///
/// Verbatim: the coins exactly as written (the walk is the identity at zero
/// momentum and zero mass).
/// Contrast: extra phases e^{i pi/4}, e^{i 3pi/4} on the two square substeps and
/// e^{i pi/3} on each triangular substep, so that a full step multiplies the
/// zero-momentum bulk modes by -1 while the defect rim stays put.
enum class CoinPhase { Verbatim, Contrast };

inline std::string_view to_string(CoinPhase c) { return c == CoinPhase::Verbatim ? "verbatim" : "contrast"; }

inline CoinPhase parse_coin_phase(std::string_view s) {
  if (s == "verbatim") return CoinPhase::Verbatim;
  if (s == "contrast") return CoinPhase::Contrast;
  throw ValidationError("unknown coin phase '" + std::string(s) + "' (expected verbatim|contrast)");
}

struct CoinParams {
  double mass = 0.0;
  double eps = 1.0;
  double alpha = 0.0;  // triangular coin only, radians
  CoinPhase phase = CoinPhase::Contrast;

  void validate() const {
    require(std::isfinite(mass) && mass >= 0.0, "mass must be a non-negative finite number");
    require(std::isfinite(eps) && eps > 0.0, "eps must be a positive finite number");
    require(std::isfinite(alpha), "alpha must be finite");
  }
};

enum class Pauli { X, Y, Z };

inline CoinMatrix pauli(Pauli a) {
  const cplx i{0.0, 1.0};
  CoinMatrix m;
  switch (a) {
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// exp(i * angle * sigma_axis) = cos(angle) I + i sin(angle) sigma_axis.
inline CoinMatrix pauli_exp(Pauli axis, double angle) {
  return std::cos(angle) * CoinMatrix::Identity() + cplx{0.0, std::sin(angle)} * pauli(axis);
}

/// Largest entry of |M^dagger M - I|.
inline double unitarity_residual(const CoinMatrix& m) {
  return (m.adjoint() * m - CoinMatrix::Identity()).cwiseAbs().maxCoeff();
}

enum class CoinSign { Plus, Minus };

/// W_+- = exp(i sigma_x theta_+-), theta_+- = +-(pi/4 +- eps*m).
inline CoinMatrix square_coin(const CoinParams& p, CoinSign sign) {
  p.validate();
  const double em = p.eps * p.mass;
  require(em < std::numbers::pi / 4.0,
          "square coin needs eps*mass < pi/4 (got " + std::to_string(em) + ")");
  const double theta = sign == CoinSign::Plus ? std::numbers::pi / 4.0 + em
                                              : -(std::numbers::pi / 4.0 - em);
  return pauli_exp(Pauli::X, theta);
}

/// W = e^{i pi/3} e^{-i a/2 sy} e^{-i pi/3 sz} e^{i a/2 sy} e^{-i eps 3/sqrt5 m sz},
/// multiplied left to right.
inline CoinMatrix triangular_coin(const CoinParams& p) {
  p.validate();
  const double pi = std::numbers::pi;
  const cplx phase = std::polar(1.0, pi / 3.0);
  return phase * pauli_exp(Pauli::Y, -p.alpha / 2.0) * pauli_exp(Pauli::Z, -pi / 3.0) *
         pauli_exp(Pauli::Y, p.alpha / 2.0) *
         pauli_exp(Pauli::Z, -p.eps * 3.0 / std::sqrt(5.0) * p.mass);
}

/// Extra phase multiplying the coin of substep k (see CoinPhase).
inline cplx bulk_phase(GridKind kind, CoinPhase phase, int k) {
  if (phase == CoinPhase::Verbatim) return 1.0;
  const double pi = std::numbers::pi;
  if (kind == GridKind::Triangular) return std::polar(1.0, pi / 3.0);
  return std::polar(1.0, k == 0 ? pi / 4.0 : 3.0 * pi / 4.0);
}

/// Coin applied to every complete facet after rotation number k of a step,
/// including the bulk phase.
///
/// Triangular: the single coin W for every k.
/// Square: k = 0 (x substep) applies W_-. On the y substep the rotation
/// delivers each spinor to a facet whose white/grey sides are exchanged
/// relative to the walker's frame, so W_+ is followed by sigma_x to restore
/// the labels (sigma_x W_+ = i W_-).
inline CoinMatrix substep_coin(GridKind kind, const CoinParams& p, int k) {
  require(k >= 0 && k < substeps_per_step(kind),
          "substep index " + std::to_string(k) + " out of range for " + std::string(to_string(kind)) +
              " grid");
  const cplx phase = bulk_phase(kind, p.phase, k);
  if (kind == GridKind::Triangular) return phase * triangular_coin(p);
  if (k == 0) return phase * square_coin(p, CoinSign::Minus);
  return phase * pauli(Pauli::X) * square_coin(p, CoinSign::Plus);
}

}  // namespace dqw
