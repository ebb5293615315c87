#pragma once

// Exact Gaussian-ansatz states of the Pauli equation in a magnetic field that
// rotates in the transverse plane on top of a constant axial component.
//
// In the co-rotating, spin-diagonal frame each spinor component solves
//   psi_xx + psi_yy - i f (x psi_y - y psi_x) - (g1 x^2 + g2 y^2 - b y - eps) psi = 0
// and the ground solutions are psi = exp(D) with
//   D = d11 x^2/2 + d12 x y + d22 y^2/2 + d1 x + d2 y.

#include "rotfield/observables.hpp"
#include "rotfield/param_core.hpp"

#include <array>
#include <vector>

namespace rotfield {

struct QuadraticForm {
  cplx d11{0.0, 0.0};
  cplx d12{0.0, 0.0};
  cplx d22{0.0, 0.0};
  cplx d1{0.0, 0.0};
  cplx d2{0.0, 0.0};

  cplx exponent(double x, double y) const;

  /// Real parts of the quadratic and linear coefficients of 2 Re D, i.e.
  /// |exp D|^2 = exp(x^T Q x + 2 l^T x).
  Eigen::Matrix2d envelope_quadratic() const;
  Eigen::Vector2d envelope_linear() const;

  /// Re [[d11, d12], [d12, d22]] negative definite.
  bool square_integrable() const;

  double max_magnitude() const;
};

/// Left-hand sides of the five coefficient equations, in order
/// (x^2, y^2, xy, x, y) of the stationary equation after substituting exp(D).
std::array<cplx, 5> coefficient_residuals(const QuadraticForm& qf, const ReducedPauliParams& rp);

struct DSystemOptions {
  double residual_tol = 1e-12;  // scaled by 1 + max |coefficient|
  double boundary_tol = 1e-10;  // absolute, in f^2
};

/// Throws ForbiddenBand for 4 g1 < f^2 < 4 g2 and DegenerateBoundary within
/// boundary_tol of either end.
void check_band(const ReducedPauliParams& rp, double boundary_tol = 1e-10);

/// All four roots of the eliminated system (two values of (d11 + d22)^2, two
/// signs each), before any filtering. Roots are polished by Newton on the
/// raw equations.
std::vector<QuadraticForm> elimination_candidates(const ReducedPauliParams& rp);

/// The unique square-integrable root with real energies.
QuadraticForm solve_quadratic_system(const ReducedPauliParams& rp, const DSystemOptions& options = {});

enum class TauBranch { None, Plus, Minus };

struct EnergyLevel {
  int n = 0;
  int sigma = 1;  // sign of the sigma_3 block
  TauBranch tau_branch = TauBranch::None;
  double E = 0.0;
};

// Verified: splitting sqrt((d11-d22)^2 + 4 d12^2 + f^2), n = 2 side levels at
// +-2 tau, both confirmed by substituting polynomial states into the
// stationary equation. AsPrinted: d12^2 under the root and +-tau for n = 2.
enum class LevelFormula { Verified, AsPrinted };

/// eps_n = -(hbar^2/2m) [(n+1)(d11+d22) + d1^2 + d2^2]  (complex until checked)
cplx level_shift(const QuadraticForm& qf, int n, const PhysicalParams& params);
/// tau = (hbar^2/2m) sqrt(...) (principal root of a complex radicand)
cplx level_splitting(const QuadraticForm& qf, const ReducedPauliParams& rp, const PhysicalParams& params,
                     LevelFormula formula = LevelFormula::Verified);

/// 2, 4 or 6 levels for n = 0, 1, 2. Throws ComplexEnergy if any level has
/// |Im E| > 1e-9 (1 + |Re E|).
std::vector<EnergyLevel> energy_levels(const ReducedPauliParams& rp, const QuadraticForm& qf,
                                       const PhysicalParams& params, int n,
                                       LevelFormula formula = LevelFormula::Verified);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct GZone {
  Interval lower;  // [1 - sqrt(1 + 4 (H/Hz)^2), 0]
  Interval upper;  // [2, 1 + sqrt(1 + 4 (H/Hz)^2)]
  bool contains(double g) const;
};

GZone forbidden_g_zone(double H_over_Hz);

/// Omega* = -mu H_z / hbar, the printed resonance condition hbar Omega + mu H_z = 0.
double resonance_condition(const PhysicalParams& params);
/// hbar Omega + mu H_z for the Omega stored in params.
double resonance_residual(const PhysicalParams& params);
/// Omega at which Delta = 0, i.e. gamma = +-pi/2: Omega = -2 mu H_z / hbar.
double diagonal_resonance_frequency(const PhysicalParams& params);

struct PauliState {
  QuadraticForm form;
  cplx C_plus{0.0, 0.0};
  cplx C_minus{0.0, 0.0};
  double gamma = 0.0;
  double E_plus = 0.0;   // sigma_3 = +1 branch
  double E_minus = 0.0;  // sigma_3 = -1 branch
  double p = 0.0;
  double Omega = 0.0;
  double hbar = 1.0;
};

/// Solves the coefficient system for params and scales (c_plus, c_minus) so
/// that the lab-frame wavefunction has unit norm.
PauliState make_pauli_state(const PhysicalParams& params, cplx c_plus, cplx c_minus,
                            const DSystemOptions& options = {});

/// Lab-frame two-component wavefunction for the n = 0 state.
Vector2c evaluate_wavefunction(const PauliState& state, double x, double y, double z, double t);

/// Exact value of the integral of |exp D|^2 over the plane.
double gaussian_norm(const QuadraticForm& qf);

/// |C+|^2 + |C-|^2 required for unit norm: 1 / gaussian_norm(qf).
/// Throws NonPositiveNorm when the form is not square integrable.
double normalization_constraint(const QuadraticForm& qf);

/// The literal expression sqrt(d11 d22)/pi exp(d2^2/d22) with the principal
/// square root. Equals normalization_constraint on the solver's branch.
/// Throws NonPositiveNorm unless the value is real positive.
double normalization_constraint_as_printed(const QuadraticForm& qf, double tol = 1e-10);

/// s3(t) from the closed form valid for any state:
///   s3 = N/2 [cos(gamma)(|C+|^2 - |C-|^2) - 2 sin(gamma) Re(conj(C+) C- e^{i(E+ - E-)t/hbar})]
SpinTrace spin_trace(const PauliState& state, const std::vector<double>& times);

/// Resonance form -1/2 sin(gamma) sgn(C+/C-) cos(2 mu H t / hbar). Requires
/// gamma = +-pi/2 and C+ = +-C- (within tol); throws InvalidArgument otherwise.
SpinTrace spin_trace_resonance(const PauliState& state, const PhysicalParams& params,
                               const std::vector<double>& times, double tol = 1e-9);

/// s3(t) = (1/2) Int Psi^dag sigma_3 Psi dx dy by Gauss-Hermite quadrature of
/// evaluate_wavefunction. Throws QuadratureNotConverged.
SpinTrace spin_trace_quadrature(const PauliState& state, const std::vector<double>& times,
                                double rel_tol = 1e-6);

}  // namespace rotfield
