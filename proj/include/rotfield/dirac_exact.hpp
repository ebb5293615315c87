#pragma once

// Ground-state (n = 0) solutions of the Dirac equation in a circularly
// polarized travelling wave plus a constant axial field, taken in the frame
// that co-rotates with the wave (phase Omega t - k z).
//
// Dimensionless energy E = (E_lab - c p eps)/(m c^2) solves
//   E^3 - (P - nu) E^2 - (1 + P nu + h^2) E + P = 0
// where P (the "pole") is E0 = 2 hbar d/(Omega m) when e H_z < 0 and -E0 when
// e H_z > 0 (see Case2Convention).

#include "rotfield/observables.hpp"
#include "rotfield/param_core.hpp"

#include <array>
#include <vector>

namespace rotfield {

// How the e H_z > 0 field case is built.
//   Consistent: width d = e H_z / (2 hbar c), pole -E0, nu = (2 c p eps + hbar Omega)/(m c^2).
//     This family satisfies the Dirac equation exactly.
//   AsPrinted:  width d = e H_z / (4 hbar c) with the e H_z < 0 cubic and spinor
//     reused verbatim. Kept for comparison; it does not solve the equation.
enum class Case2Convention { Consistent, AsPrinted };

struct DiracParams {
  PhysicalParams physical;
  int epsilon_dir = 1;  // +1: particle and wave co-propagate, -1: counter-propagate
  Case2Convention case2 = Case2Convention::Consistent;

  double k() const { return epsilon_dir * physical.Omega / physical.light_speed; }
};

struct DiracReduced {
  DiracParams source;
  int field_case = 1;  // 1: e H_z < 0, 2: e H_z > 0
  double d = 0.0;      // Gaussian width, > 0
  double h = 0.0;      // e H / (k m c^2)
  double E0 = 0.0;     // 2 hbar d / (Omega m)
  double nu = 0.0;
  double pole = 0.0;   // E0 or -E0, the value entering the cubic and the spinor
};

DiracReduced reduce_dirac(const DiracParams& dp);

/// Same reduction with (E0, nu, h) replaced; d and the unit scales are kept.
DiracReduced with_scalars(DiracReduced dr, double E0, double nu, double h);

struct CubicRoots {
  std::array<cplx, 3> roots;       // sorted by real part, descending
  std::array<double, 3> residuals; // |p(E)|
  std::vector<double> positive;    // real positive roots, descending
};

/// Monic coefficients (a2, a1, a0) of E^3 + a2 E^2 + a1 E + a0.
std::array<double, 3> cubic_coefficients(double pole, double nu, double h);

/// Companion-matrix roots with Newton polishing; near-double roots are
/// refined as roots of the derivative. Never throws.
CubicRoots cubic_roots(double pole, double nu, double h);

/// Roots for dr; throws NoTwoPositiveRoots when fewer than two positive
/// real roots exist.
CubicRoots solve_cubic(const DiracReduced& dr);

struct DiracBranch {
  double E_script = 0.0;
  double energy = 0.0;  // lab energy m c^2 E + c p eps
  cplx d1{0.0, 0.0};
  cplx d2{0.0, 0.0};
  double N = 0.0;
  Vector4c spinor;      // N times the raw polynomial bispinor, |spinor|^2 = 2
  Vector4c amplitudes;  // spinor * sqrt(d / 2 pi): unit norm after the Gaussian weight
};

/// Throws SpectralPole when E sits on the pole of d2.
DiracBranch build_branch(const DiracReduced& dr, double E_script);

/// exp(-alpha1 alpha2 angle / 2) = diag(e^{-i a/2}, e^{i a/2}, e^{-i a/2}, e^{i a/2}).
Matrix4c rotation_operator(double angle);

struct TwoBranchState {
  DiracBranch branch1;  // larger positive root
  DiracBranch branch2;
  double cos2theta = 0.0;
  double theta = 0.0;  // C1 = cos(theta), C2 = sin(theta)
  double Pi = 0.0;
  double E_sum = 0.0;
  double E_diff = 0.0;  // >= 0
};

/// cos 2theta = h^2 Pi^2 E- / ((Pi+1)^2 [(P^2 - Pi^2) E+ + 2 Pi (Pi - 1) P]).
/// Throws DenominatorZero or UnphysicalMixing (|cos 2theta| > 1, never clamped).
double mixing_cos2theta(const DiracBranch& b1, const DiracBranch& b2, const DiracReduced& dr);
double mixing_angle(const DiracBranch& b1, const DiracBranch& b2, const DiracReduced& dr);

/// cos 2theta from the spinor expectations <Sigma_3>_1, <Sigma_3>_2 alone:
/// the value that cancels the constant part of s3. Independent of the formula above.
double mixing_cos2theta_from_moments(const DiracBranch& b1, const DiracBranch& b2);

TwoBranchState make_two_branch_state(const DiracReduced& dr);

Vector4c evaluate_lab_wavefunction(const DiracBranch& branch, const DiracReduced& dr, double x, double y,
                                   double z, double t);
Vector4c evaluate_lab_wavefunction(const TwoBranchState& state, const DiracReduced& dr, double x, double y,
                                   double z, double t);

// Verified: Gaussian overlap exp[-(d2' - d2'')^2 / (2d)]. AsPrinted: divides by d.
enum class AmplitudeFormula { Verified, AsPrinted };
// Physical: omega = m c^2 E- / hbar. Literal: E- / hbar.
enum class FrequencyFormula { Physical, Literal };

struct SpinOscillationOptions {
  AmplitudeFormula amplitude = AmplitudeFormula::Verified;
  FrequencyFormula frequency = FrequencyFormula::Physical;
};

double spin_amplitude(const TwoBranchState& state, const DiracReduced& dr,
                      AmplitudeFormula formula = AmplitudeFormula::Verified);
double spin_frequency(const TwoBranchState& state, const DiracReduced& dr,
                      FrequencyFormula formula = FrequencyFormula::Physical);

/// s3(t) = A cos(omega t).
SpinTrace spin_oscillation(const TwoBranchState& state, const DiracReduced& dr, const std::vector<double>& times,
                           const SpinOscillationOptions& options = {});

/// s3(t) = -(i/2) Int Psi^dag alpha1 alpha2 Psi dx dy from the lab-frame
/// wavefunction by Gauss-Hermite quadrature at z = 0.
SpinTrace spin_oscillation_quadrature(const TwoBranchState& state, const DiracReduced& dr,
                                      const std::vector<double>& times, double rel_tol = 1e-10);

}  // namespace rotfield
