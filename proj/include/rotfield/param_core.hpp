#pragma once

// Physical inputs, reduction to the constants that appear in the stationary
// Pauli equation, and the fixed Pauli/Dirac matrix algebra.
//
// Units: every formula keeps hbar, m, e and c explicit. The default values
// give natural units hbar = m = c = 1 with an electron-like charge e = -1.

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace rotfield {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double charge = -1.0;
  double light_speed = 1.0;
  double H_z = 0.0;    // axial field
  double H = 0.0;      // rotating transverse amplitude, >= 0
  double Omega = 0.0;  // rotation frequency, signed
  double p = 0.0;      // axial momentum
  double g_factor = 2.0;

  /// Magnetic moment mu = g e hbar / (2 m c). Always derived, never stored.
  double mu() const;

  /// Throws Error(InvalidArgument) if hbar, mass, light_speed <= 0, H < 0 or
  /// any field is not finite.
  void validate() const;
};

double mu_from_g(double g, const PhysicalParams& params);

// Constants of the stationary equation
//   psi_xx + psi_yy - i f (x psi_y - y psi_x) - (g1 x^2 + g2 y^2 - b y - eps) psi = 0
// plus the spin-diagonalization data Delta, gamma, rho.
struct ReducedPauliParams {
  double g1 = 0.0;
  double g2 = 0.0;
  double b = 0.0;
  double f = 0.0;
  double Delta = 0.0;
  double gamma = 0.0;  // atan2((2m/hbar^2) mu H, Delta), in (-pi, pi]
  double rho = 0.0;
  double spin_coupling = 0.0;  // (2m/hbar^2) mu H, the off-diagonal entry
};

ReducedPauliParams reduce_pauli(const PhysicalParams& params);

// Standard (Dirac) representation: beta = diag(1, 1, -1, -1), alpha_k has
// sigma_k in both off-diagonal blocks.
namespace spinor {

const Matrix2c& identity2();
const Matrix2c& sigma(int k);  // k = 1, 2, 3
const Matrix4c& identity4();
const Matrix4c& alpha(int k);  // k = 1, 2, 3
const Matrix4c& beta();
/// alpha_1 alpha_2, equal to i diag(sigma_3, sigma_3).
Matrix4c rotation_generator();
/// Sigma_3 = diag(sigma_3, sigma_3).
const Matrix4c& spin_z();

}  // namespace spinor

}  // namespace rotfield
