#pragma once

// Crank-Nicolson propagation of the two-component Pauli equation on a 2D grid
// in the lab frame. The axial dependence exp(i p z / hbar) is factored out, so
// the grid holds phi(x, y) with Psi = exp(i p z / hbar) phi.
//
// Grid: interior points of [-L, L]^2 with homogeneous Dirichlet walls,
// spacing h = 2L/(n+1).

#include "rotfield/observables.hpp"
#include "rotfield/param_core.hpp"
#include "rotfield/pauli_exact.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace rotfield {

struct Grid2D {
  int nx = 128;
  int ny = 128;
  double extent = 8.0;  // half-width L, physical length

  double hx() const { return 2.0 * extent / (nx + 1); }
  double hy() const { return 2.0 * extent / (ny + 1); }
  double x(int i) const { return -extent + (i + 1) * hx(); }
  double y(int j) const { return -extent + (j + 1) * hy(); }
  int points() const { return nx * ny; }
};

/// Square grid of n x n points wide enough for `widths` Gaussian widths
/// around the state's centre, wherever it rotates to.
Grid2D grid_for_state(const PauliState& state, int n, double widths = 8.0);

/// Throws InvalidArgument if the grid does not cover 5 widths around the
/// centre or resolves the state's local wavelength by fewer than 8 points.
void check_grid(const Grid2D& grid, const PauliState& state);

struct SpinorField {
  Eigen::VectorXcd values;  // [up(0..N), down(0..N)], index j * nx + i
  double time = 0.0;
  double norm = 0.0;        // sum |phi|^2 hx hy
};

double discrete_norm(const SpinorField& field, const Grid2D& grid);
/// <a, b> = sum conj(a) b hx hy over both components.
cplx inner_product(const SpinorField& a, const SpinorField& b, const Grid2D& grid);
/// (1/2) sum phi^dag sigma_3 phi hx hy.
double spin_z(const SpinorField& field, const Grid2D& grid);

using SpinorProfile = std::function<Vector2c(double x, double y)>;
SpinorField sample_field(const SpinorProfile& profile, const Grid2D& grid, double time);
/// The exact state at time t on the grid (z = 0).
SpinorField sample_state(const PauliState& state, const Grid2D& grid, double time);

struct EvolveOptions {
  int stencil_order = 4;         // 2 or 4
  double solver_tol = 1e-12;     // relative residual of the implicit solve
  int max_iterations = 2000;
  double scalar_offset = 0.0;    // constant added to the Hamiltonian
};

class CrankNicolson {
 public:
  CrankNicolson(const Grid2D& grid, const PhysicalParams& params, const EvolveOptions& options = {});

  /// One step with H evaluated at field.time + dt/2. Throws SolverDiverged.
  SpinorField step(const SpinorField& field, double dt);

  /// H(t) phi on the grid.
  Eigen::VectorXcd apply_hamiltonian(const Eigen::VectorXcd& phi, double t);

  int last_iterations() const { return last_iterations_; }
  double last_error() const { return last_error_; }
  const Grid2D& grid() const { return grid_; }

 private:
  using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  void update_hamiltonian(double t);

  Grid2D grid_;
  PhysicalParams params_;
  EvolveOptions options_;
  SparseMatrix H_;
  SparseMatrix A_;
  Eigen::VectorXcd static_diag_;
  std::vector<Eigen::Index> diag_pos_;     // per row
  std::vector<Eigen::Index> coupling_pos_; // per row, the opposite spin component at the same site
  int last_iterations_ = 0;
  double last_error_ = 0.0;
};

/// Convenience wrapper building a propagator for a single step.
SpinorField step(const SpinorField& field, const Grid2D& grid, const PhysicalParams& params, double dt,
                 const EvolveOptions& options = {});

struct Checkpoint {
  double time = 0.0;
  double overlap = 0.0;  // |<exact, numerical>| with both discretely normalized
  double s3 = 0.0;
  double norm = 0.0;
};

struct RunOptions {
  int steps = 400;
  int checkpoints = 8;  // evenly spaced, plus t = 0
  EvolveOptions evolve;
};

/// Evolves the sampled exact state and compares with the exact state at the
/// checkpoints. Throws SolverDiverged.
std::vector<Checkpoint> fidelity_run(const PauliState& initial, const PhysicalParams& params, double t_final,
                                     const Grid2D& grid, const RunOptions& options = {});

/// Grid-dynamics s3(t) from the exact state with C+ = C- built for params.
/// frequency and amplitude carry the Rabi model 2 mu H / hbar and
/// -(1/2) sin(gamma).
SpinTrace resonance_demo(const PhysicalParams& params, const Grid2D& grid, double t_final,
                         const RunOptions& options = {});

}  // namespace rotfield
