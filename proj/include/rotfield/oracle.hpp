#pragma once

// Independent checks of the exact states: residuals of the governing
// equations (analytic derivatives and centered finite differences), Gaussian
// norms by quadrature, and a multistart Newton re-solve of the coefficient
// system.

#include "rotfield/dirac_exact.hpp"
#include "rotfield/pauli_exact.hpp"
#include "rotfield/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rotfield {

struct ResidualReport {
  double max_abs_residual = 0.0;   // analytic path
  double relative_residual = 0.0;  // analytic, pointwise |R| / sum of |term|, max over samples
  double grid_spacing = 0.0;       // coarse finite-difference step (spatial)
  double convergence_order = 0.0;  // log2(fd_coarse / fd_fine)
  std::string sign_variant = "standard";
  double fd_relative_coarse = 0.0;
  double fd_relative_fine = 0.0;
  int samples = 0;
  bool analytic = true;  // false when only the finite-difference path ran

  /// Analytic residual below tol, or (no analytic path) finite-difference
  /// residual shrinking at order 2 +- 0.3.
  bool annihilates(double tol = 1e-10) const;
};

struct FiniteDifferenceOptions {
  double step = 1e-3;  // in units of the Gaussian width (time: of the fastest period / 2 pi)
};

/// Deterministic Halton(2, 3) points filling the disc of radius `radius`
/// around `center`.
std::vector<Eigen::Vector2d> sample_disc(const Eigen::Vector2d& center, double radius, int count = 64);

struct Event {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;
};

/// Halton(2, 3, 5, 7) events: (x, y) in the disc, z in [-zr, zr], t in [0, t_max].
std::vector<Event> sample_events(const Eigen::Vector2d& center, double radius, double z_range, double t_max,
                                 int count = 64);

/// Gaussian width of |exp D|: 1/sqrt of the smallest eigenvalue of -Re Q, and
/// the centre of the envelope.
double envelope_width(const QuadraticForm& qf);
Eigen::Vector2d envelope_center(const QuadraticForm& qf);

/// Separation constant of the stationary equation for exp(D):
/// -(d11 + d22 + d1^2 + d2^2). Complex when the form is off the real branch.
cplx stationary_eigenvalue(const QuadraticForm& qf);

ResidualReport pauli_stationary_residual(const QuadraticForm& qf, const ReducedPauliParams& rp, cplx epsilon,
                                         const std::vector<Eigen::Vector2d>& points,
                                         const FiniteDifferenceOptions& fd = {});

/// Residual of i hbar dPsi/dt = (1/2m)(p - eA/c)^2 Psi - mu (sigma.H) Psi for the
/// lab-frame state, with A = (-H_z y/2, H_z x/2, H(-x sin Wt + y cos Wt)).
ResidualReport pauli_time_dependent_residual(const PauliState& state, const PhysicalParams& params,
                                             const std::vector<Event>& events,
                                             const FiniteDifferenceOptions& fd = {});

/// The four operators i hbar d_t Psi + sa alpha.(c p - e A) Psi + sb beta m c^2 Psi.
/// (+, +) is the form used to build the exact states; (-, -) is the textbook
/// i hbar d_t = H_D.
struct DiracSignVariant {
  int alpha_sign = 1;
  int beta_sign = 1;
  std::string name() const;
};

std::vector<DiracSignVariant> all_sign_variants();

using SpinorField4 = std::function<Vector4c(double x, double y, double z, double t)>;
using VectorPotential = std::function<Eigen::Vector3d(double x, double y, double z, double t)>;

/// A_x = -H_z y/2 + (H/k) cos(W t - k z), A_y = H_z x/2 + (H/k) sin(W t - k z), A_z = 0.
VectorPotential dirac_wave_potential(const DiracParams& dp);

struct DiracScales {
  double length = 1.0;  // transverse
  double axial = 1.0;
  double time = 1.0;
};

/// Finite-difference residual only, for any field and potential. One report
/// per variant.
std::vector<ResidualReport> dirac_residual_fd(const SpinorField4& psi, const VectorPotential& A,
                                              const PhysicalParams& params, const std::vector<Event>& events,
                                              const DiracScales& scales, const FiniteDifferenceOptions& fd = {});

/// Analytic and finite-difference residual for the constructed states. One
/// report per variant, in all_sign_variants() order.
std::vector<ResidualReport> dirac_residual(const DiracBranch& branch, const DiracReduced& dr,
                                           const std::vector<Event>& events, const FiniteDifferenceOptions& fd = {});
std::vector<ResidualReport> dirac_residual(const TwoBranchState& state, const DiracReduced& dr,
                                           const std::vector<Event>& events, const FiniteDifferenceOptions& fd = {});

/// Names of the variants that annihilate; throws NoAnnihilatingVariant when empty.
std::vector<std::string> annihilating_variants(const std::vector<ResidualReport>& reports, double tol = 1e-10);

/// Integral of |exp D|^2 over the plane. Throws NonPositiveNorm for an
/// indefinite real part, before evaluating anything.
QuadratureResult gaussian_norm_quadrature(const QuadraticForm& qf, double tolerance = 1e-12);
/// Integral of |exp(D - d2^2/2d)|^2 for a Dirac branch (rotated coordinates).
QuadratureResult gaussian_norm_quadrature(const DiracBranch& branch, const DiracReduced& dr,
                                          double tolerance = 1e-12);

struct BruteForceOptions {
  int n_starts = 64;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  double residual_tol = 1e-12;
};

/// Multistart damped Newton on the five raw coefficient equations.
/// Deduplicated; includes non-integrable roots.
std::vector<QuadraticForm> brute_force_d_system(const ReducedPauliParams& rp, const BruteForceOptions& options = {});

/// Square integrable with a real separation constant.
bool integrable_with_real_energy(const QuadraticForm& qf, double tol = 1e-9);

bool same_form(const QuadraticForm& a, const QuadraticForm& b, double tol = 1e-8);

}  // namespace rotfield
