#include "rotfield/evolve.hpp"

#include "rotfield/errors.hpp"
#include "rotfield/oracle.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <string>

namespace rotfield {

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> second;  // d^2/dx^2 weights, times 1/h^2
  std::vector<double> first;   // d/dx weights, times 1/h
  double centre = 0.0;         // d^2/dx^2 weight at offset 0
};

Stencil stencil_for(int order) {
  if (order == 2) return {{-1, 1}, {1.0, 1.0}, {-0.5, 0.5}, -2.0};
  if (order == 4) {
    return {{-2, -1, 1, 2},
            {-1.0 / 12.0, 4.0 / 3.0, 4.0 / 3.0, -1.0 / 12.0},
            {1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0},
            -2.5};
  }
  throw Error(ErrorKind::InvalidArgument, "stencil order must be 2 or 4");
}

}  // namespace

Grid2D grid_for_state(const PauliState& state, int n, double widths) {
  Grid2D g;
  g.nx = g.ny = n;
  g.extent = envelope_center(state.form).norm() + widths * envelope_width(state.form);
  return g;
}

void check_grid(const Grid2D& grid, const PauliState& state) {
  const double width = envelope_width(state.form);
  const double reach = envelope_center(state.form).norm() + 5.0 * width;
  if (grid.extent < reach) {
    throw Error(ErrorKind::InvalidArgument, "grid half-width " + std::to_string(grid.extent) +
                                                " is below 5 Gaussian widths around the centre (" +
                                                std::to_string(reach) + ")");
  }
  const QuadraticForm& q = state.form;
  Eigen::Matrix2d im_q;
  im_q << q.d11.imag(), q.d12.imag(), q.d12.imag(), q.d22.imag();
  const double k_max = im_q.norm() * reach + std::hypot(q.d1.imag(), q.d2.imag());
  const double h = std::max(grid.hx(), grid.hy());
  if (k_max * h > 2.0 * kPi / 8.0) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing resolves the local wavelength by fewer than 8 points");
  }
}

double discrete_norm(const SpinorField& field, const Grid2D& grid) {
  return field.values.squaredNorm() * grid.hx() * grid.hy();
}

cplx inner_product(const SpinorField& a, const SpinorField& b, const Grid2D& grid) {
  return a.values.dot(b.values) * grid.hx() * grid.hy();
}

double spin_z(const SpinorField& field, const Grid2D& grid) {
  const Eigen::Index n = grid.points();
  return 0.5 * (field.values.head(n).squaredNorm() - field.values.tail(n).squaredNorm()) * grid.hx() * grid.hy();
}

SpinorField sample_field(const SpinorProfile& profile, const Grid2D& grid, double time) {
  SpinorField f;
  const int n = grid.points();
  f.values.resize(2 * n);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Vector2c v = profile(grid.x(i), grid.y(j));
      f.values(j * grid.nx + i) = v(0);
      f.values(n + j * grid.nx + i) = v(1);
    }
  }
  f.time = time;
  f.norm = discrete_norm(f, grid);
  return f;
}

SpinorField sample_state(const PauliState& state, const Grid2D& grid, double time) {
  return sample_field([&](double x, double y) { return evaluate_wavefunction(state, x, y, 0.0, time); }, grid, time);
}

CrankNicolson::CrankNicolson(const Grid2D& grid, const PhysicalParams& params, const EvolveOptions& options)
    : grid_(grid), params_(params), options_(options) {
  params_.validate();
  if (grid.nx < 4 || grid.ny < 4 || !(grid.extent > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 4 x 4 points and a positive extent");
  }
  const Stencil st = stencil_for(options.stencil_order);
  const int n = grid.points();
  const double hb = params.hbar;
  const double m = params.mass;
  const double ec = params.charge / params.light_speed;
  const double hx = grid.hx();
  const double hy = grid.hy();
  const double kin = hb * hb / (2.0 * m);
  const double mu = params.mu();

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(2 * n) * (2 * st.offsets.size() + 2));
  static_diag_.resize(2 * n);
  for (int s = 0; s < 2; ++s) {
    const double zeeman = s == 0 ? -mu * params.H_z : mu * params.H_z;
    for (int j = 0; j < grid.ny; ++j) {
      const double y = grid.y(j);
      for (int i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        const int row = s * n + j * grid.nx + i;
        const double diag = -kin * st.centre * (1.0 / (hx * hx) + 1.0 / (hy * hy)) +
                            ec * ec * params.H_z * params.H_z * (x * x + y * y) / (8.0 * m) +
                            params.p * params.p / (2.0 * m) + zeeman + options.scalar_offset;
        static_diag_(row) = diag;
        trip.emplace_back(row, row, diag);
        trip.emplace_back(row, (1 - s) * n + j * grid.nx + i, cplx{0.0, 0.0});
        // (1/2m) 2 i hbar (e/c) A.grad with A = H_z (-y, x) / 2
        const double drift = hb * ec * params.H_z / (2.0 * m);
        for (std::size_t k = 0; k < st.offsets.size(); ++k) {
          const int o = st.offsets[k];
          if (i + o >= 0 && i + o < grid.nx) {
            trip.emplace_back(row, row + o, -kin * st.second[k] / (hx * hx) + kI * drift * (-y) * st.first[k] / hx);
          }
          if (j + o >= 0 && j + o < grid.ny) {
            trip.emplace_back(row, row + o * grid.nx,
                              -kin * st.second[k] / (hy * hy) + kI * drift * x * st.first[k] / hy);
          }
        }
      }
    }
  }
  H_.resize(2 * n, 2 * n);
  H_.setFromTriplets(trip.begin(), trip.end());
  H_.makeCompressed();

  diag_pos_.assign(static_cast<std::size_t>(2 * n), -1);
  coupling_pos_.assign(static_cast<std::size_t>(2 * n), -1);
  for (Eigen::Index r = 0; r < H_.outerSize(); ++r) {
    const Eigen::Index partner = r < n ? r + n : r - n;
    for (Eigen::Index p = H_.outerIndexPtr()[r]; p < H_.outerIndexPtr()[r + 1]; ++p) {
      const Eigen::Index c = H_.innerIndexPtr()[p];
      if (c == r) diag_pos_[static_cast<std::size_t>(r)] = p;
      if (c == partner) coupling_pos_[static_cast<std::size_t>(r)] = p;
    }
  }
  A_ = H_;
}

void CrankNicolson::update_hamiltonian(double t) {
  const int n = grid_.points();
  const double m = params_.mass;
  const double ec = params_.charge / params_.light_speed;
  const double c = std::cos(params_.Omega * t);
  const double s = std::sin(params_.Omega * t);
  const cplx coupling_up = -params_.mu() * params_.H * std::exp(-kI * params_.Omega * t);
  cplx* values = H_.valuePtr();
  for (int j = 0; j < grid_.ny; ++j) {
    const double y = grid_.y(j);
    for (int i = 0; i < grid_.nx; ++i) {
      const double x = grid_.x(i);
      const double Az = params_.H * (-x * s + y * c);
      const double v = (-2.0 * params_.p * ec * Az + ec * ec * Az * Az) / (2.0 * m);
      const int site = j * grid_.nx + i;
      values[diag_pos_[static_cast<std::size_t>(site)]] = static_diag_(site) + v;
      values[diag_pos_[static_cast<std::size_t>(n + site)]] = static_diag_(n + site) + v;
      values[coupling_pos_[static_cast<std::size_t>(site)]] = coupling_up;
      values[coupling_pos_[static_cast<std::size_t>(n + site)]] = std::conj(coupling_up);
    }
  }
}

Eigen::VectorXcd CrankNicolson::apply_hamiltonian(const Eigen::VectorXcd& phi, double t) {
  update_hamiltonian(t);
  return H_ * phi;
}

SpinorField CrankNicolson::step(const SpinorField& field, double dt) {
  const double t_mid = field.time + 0.5 * dt;
  update_hamiltonian(t_mid);
  const cplx kappa = kI * dt / (2.0 * params_.hbar);
  const Eigen::VectorXcd rhs = field.values - kappa * (H_ * field.values);

  const Eigen::Index nnz = H_.nonZeros();
  const cplx* hv = H_.valuePtr();
  cplx* av = A_.valuePtr();
  for (Eigen::Index p = 0; p < nnz; ++p) av[p] = kappa * hv[p];
  for (Eigen::Index p : diag_pos_) av[p] += 1.0;

  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<cplx>> solver;
  solver.setTolerance(options_.solver_tol);
  solver.setMaxIterations(options_.max_iterations);
  solver.compute(A_);
  SpinorField out;
  out.values = solver.solveWithGuess(rhs, field.values);
  last_iterations_ = static_cast<int>(solver.iterations());
  last_error_ = solver.error();
  if (solver.info() != Eigen::Success || !out.values.allFinite()) {
    throw Error(ErrorKind::SolverDiverged, "implicit solve stopped at relative residual " +
                                               std::to_string(last_error_) + " after " +
                                               std::to_string(last_iterations_) + " iterations");
  }
  out.time = field.time + dt;
  out.norm = discrete_norm(out, grid_);
  return out;
}

SpinorField step(const SpinorField& field, const Grid2D& grid, const PhysicalParams& params, double dt,
                 const EvolveOptions& options) {
  CrankNicolson cn(grid, params, options);
  return cn.step(field, dt);
}

namespace {

Checkpoint compare(const PauliState& state, const SpinorField& num, const Grid2D& grid) {
  const SpinorField exact = sample_state(state, grid, num.time);
  Checkpoint cp;
  cp.time = num.time;
  cp.overlap = std::abs(inner_product(exact, num, grid)) / std::sqrt(exact.norm * num.norm);
  cp.s3 = spin_z(num, grid) / num.norm;
  cp.norm = num.norm;
  return cp;
}

template <class Visit>
void run_steps(CrankNicolson& cn, SpinorField field, double t_final, const RunOptions& options, Visit visit) {
  visit(field);
  if (t_final == 0.0) return;
  const int steps = std::max(1, options.steps);
  const int marks = std::max(1, options.checkpoints);
  const double dt = t_final / steps;
  int next_mark = 1;
  const double t0 = field.time;
  for (int k = 1; k <= steps; ++k) {
    field = cn.step(field, dt);
    field.time = t0 + k * dt;
    if (static_cast<long long>(k) * marks >= static_cast<long long>(next_mark) * steps) {
      visit(field);
      ++next_mark;
    }
  }
}

}  // namespace

std::vector<Checkpoint> fidelity_run(const PauliState& initial, const PhysicalParams& params, double t_final,
                                     const Grid2D& grid, const RunOptions& options) {
  CrankNicolson cn(grid, params, options.evolve);
  SpinorField start = sample_state(initial, grid, 0.0);
  std::vector<Checkpoint> out;
  run_steps(cn, start, t_final, options, [&](const SpinorField& f) { out.push_back(compare(initial, f, grid)); });
  return out;
}

SpinTrace resonance_demo(const PhysicalParams& params, const Grid2D& grid, double t_final, const RunOptions& options) {
  const PauliState state = make_pauli_state(params, 1.0, 1.0);
  CrankNicolson cn(grid, params, options.evolve);
  SpinTrace trace;
  trace.source = TraceSource::GridDynamics;
  trace.frequency = 2.0 * params.mu() * params.H / params.hbar;
  trace.amplitude = -0.5 * std::sin(state.gamma);
  run_steps(cn, sample_state(state, grid, 0.0), t_final, options, [&](const SpinorField& f) {
    trace.times.push_back(f.time);
    trace.s3.push_back(spin_z(f, grid) / f.norm);
  });
  return trace;
}

}  // namespace rotfield
