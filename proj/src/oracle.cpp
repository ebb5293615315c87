#include "rotfield/oracle.hpp"

#include "rotfield/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace rotfield {

namespace {

double halton(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

double order_of(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return 0.0;
  return std::log2(coarse / fine);
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : (num > 0.0 ? 1.0 : 0.0); }

// Value and first derivatives of a spinor field at one event.
template <class V>
struct Jet {
  V psi;
  V dx;
  V dy;
  V dz;
  V dt;
  V lap;  // full 3D Laplacian (only filled where needed)
};

// ---- stationary Pauli -------------------------------------------------------

struct StationaryTerms {
  cplx residual;
  double magnitude;
};

StationaryTerms stationary_terms(cplx psi, cplx px, cplx py, cplx pxx, cplx pyy, double x, double y,
                                 const ReducedPauliParams& rp, cplx eps) {
  const cplx rot = -kI * rp.f * (x * py - y * px);
  const cplx pot = -(rp.g1 * x * x + rp.g2 * y * y - rp.b * y - eps) * psi;
  return {pxx + pyy + rot + pot, std::abs(pxx) + std::abs(pyy) + std::abs(rot) + std::abs(pot)};
}

double stationary_fd(const QuadraticForm& qf, const ReducedPauliParams& rp, cplx eps,
                     const std::vector<Eigen::Vector2d>& points, double h) {
  double worst = 0.0;
  for (const auto& pt : points) {
    const double x = pt(0);
    const double y = pt(1);
    auto psi = [&](double a, double b) { return std::exp(qf.exponent(a, b)); };
    const cplx c = psi(x, y);
    const cplx xp = psi(x + h, y), xm = psi(x - h, y), yp = psi(x, y + h), ym = psi(x, y - h);
    const cplx px = (xp - xm) / (2.0 * h);
    const cplx py = (yp - ym) / (2.0 * h);
    const cplx pxx = (xp - 2.0 * c + xm) / (h * h);
    const cplx pyy = (yp - 2.0 * c + ym) / (h * h);
    const auto t = stationary_terms(c, px, py, pxx, pyy, x, y, rp, eps);
    worst = std::max(worst, safe_ratio(std::abs(t.residual), t.magnitude));
  }
  return worst;
}

// ---- time-dependent Pauli ---------------------------------------------------

struct PauliFieldAt {
  Eigen::Vector3d A;
  Matrix2c sigma_H;
};

PauliFieldAt pauli_field(const PhysicalParams& params, double x, double y, double t) {
  const double c = std::cos(params.Omega * t);
  const double s = std::sin(params.Omega * t);
  PauliFieldAt f;
  f.A = Eigen::Vector3d(-0.5 * params.H_z * y, 0.5 * params.H_z * x, params.H * (-x * s + y * c));
  f.sigma_H = params.H * c * spinor::sigma(1) + params.H * s * spinor::sigma(2) + params.H_z * spinor::sigma(3);
  return f;
}

StationaryTerms pauli_terms(const Jet<Vector2c>& j, const PhysicalParams& params, const Event& ev) {
  const auto field = pauli_field(params, ev.x, ev.y, ev.t);
  const double hb = params.hbar;
  const double m = params.mass;
  const double ec = params.charge / params.light_speed;
  const Vector2c time_term = kI * hb * j.dt;
  const Vector2c lap_term = (hb * hb / (2.0 * m)) * j.lap;
  const Vector2c drift = -(kI * hb * ec / m) * (field.A(0) * j.dx + field.A(1) * j.dy + field.A(2) * j.dz);
  const Vector2c diamag = -(ec * ec * field.A.squaredNorm() / (2.0 * m)) * j.psi;
  const Vector2c zeeman = params.mu() * (field.sigma_H * j.psi);
  const Vector2c r = time_term + lap_term + drift + diamag + zeeman;
  return {cplx(r.norm(), 0.0),
          time_term.norm() + lap_term.norm() + drift.norm() + diamag.norm() + zeeman.norm()};
}

Jet<Vector2c> pauli_jet_analytic(const PauliState& s, const PhysicalParams& params, const Event& ev) {
  const double W = s.Omega;
  const double c = std::cos(W * ev.t);
  const double sn = std::sin(W * ev.t);
  const double xr = ev.x * c + ev.y * sn;
  const double yr = -ev.x * sn + ev.y * c;
  const QuadraticForm& q = s.form;
  const cplx Dx = q.d11 * xr + q.d12 * yr + q.d1;
  const cplx Dy = q.d12 * xr + q.d22 * yr + q.d2;

  const Vector2c psi = evaluate_wavefunction(s, ev.x, ev.y, ev.z, ev.t);

  const cplx a_plus = s.C_plus * std::exp(-kI * s.E_plus * ev.t / s.hbar);
  const cplx a_minus = s.C_minus * std::exp(-kI * s.E_minus * ev.t / s.hbar);
  const cplx da_plus = -kI * s.E_plus / s.hbar * a_plus;
  const cplx da_minus = -kI * s.E_minus / s.hbar * a_minus;
  const double ch = std::cos(0.5 * s.gamma);
  const double sh = std::sin(0.5 * s.gamma);
  const cplx phase = std::exp(-0.5 * kI * W * ev.t);
  const cplx envelope = std::exp(kI * s.p * ev.z / s.hbar + q.exponent(xr, yr));
  const Vector2c spinor_rate(phase * (ch * da_plus - sh * da_minus), std::conj(phase) * (sh * da_plus + ch * da_minus));
  Vector2c frame_rate = psi;
  frame_rate(0) *= -0.5 * kI * W;
  frame_rate(1) *= 0.5 * kI * W;

  Jet<Vector2c> j;
  j.psi = psi;
  j.dx = (Dx * c - Dy * sn) * psi;
  j.dy = (Dx * sn + Dy * c) * psi;
  j.dz = (kI * s.p / s.hbar) * psi;
  j.dt = W * (Dx * yr - Dy * xr) * psi + frame_rate + envelope * spinor_rate;
  j.lap = (q.d11 + q.d22 + Dx * Dx + Dy * Dy - s.p * s.p / (s.hbar * s.hbar)) * psi;
  (void)params;
  return j;
}

Jet<Vector2c> pauli_jet_fd(const PauliState& s, const Event& ev, double hs, double hz, double ht) {
  auto f = [&](double x, double y, double z, double t) { return evaluate_wavefunction(s, x, y, z, t); };
  const Vector2c c = f(ev.x, ev.y, ev.z, ev.t);
  const Vector2c xp = f(ev.x + hs, ev.y, ev.z, ev.t), xm = f(ev.x - hs, ev.y, ev.z, ev.t);
  const Vector2c yp = f(ev.x, ev.y + hs, ev.z, ev.t), ym = f(ev.x, ev.y - hs, ev.z, ev.t);
  const Vector2c zp = f(ev.x, ev.y, ev.z + hz, ev.t), zm = f(ev.x, ev.y, ev.z - hz, ev.t);
  const Vector2c tp = f(ev.x, ev.y, ev.z, ev.t + ht), tm = f(ev.x, ev.y, ev.z, ev.t - ht);
  Jet<Vector2c> j;
  j.psi = c;
  j.dx = (xp - xm) / (2.0 * hs);
  j.dy = (yp - ym) / (2.0 * hs);
  j.dz = (zp - zm) / (2.0 * hz);
  j.dt = (tp - tm) / (2.0 * ht);
  j.lap = (xp + xm + yp + ym - 4.0 * c) / (hs * hs) + (zp - 2.0 * c + zm) / (hz * hz);
  return j;
}

// ---- Dirac ------------------------------------------------------------------

StationaryTerms dirac_terms(const Jet<Vector4c>& j, const Eigen::Vector3d& A, const PhysicalParams& params,
                            const DiracSignVariant& v) {
  const double hb = params.hbar;
  const double c = params.light_speed;
  const double e = params.charge;
  const Vector4c time_term = kI * hb * j.dt;
  const Vector4c kinetic =
      -kI * hb * c * (spinor::alpha(1) * j.dx + spinor::alpha(2) * j.dy + spinor::alpha(3) * j.dz);
  const Vector4c potential =
      -e * (A(0) * (spinor::alpha(1) * j.psi) + A(1) * (spinor::alpha(2) * j.psi) + A(2) * (spinor::alpha(3) * j.psi));
  const Vector4c mass_term = params.mass * c * c * (spinor::beta() * j.psi);
  const Vector4c r = time_term + static_cast<double>(v.alpha_sign) * (kinetic + potential) +
                     static_cast<double>(v.beta_sign) * mass_term;
  return {cplx(r.norm(), 0.0), time_term.norm() + kinetic.norm() + potential.norm() + mass_term.norm()};
}

Jet<Vector4c> dirac_jet_fd(const SpinorField4& f, const Event& ev, double hl, double hz, double ht) {
  Jet<Vector4c> j;
  j.psi = f(ev.x, ev.y, ev.z, ev.t);
  j.dx = (f(ev.x + hl, ev.y, ev.z, ev.t) - f(ev.x - hl, ev.y, ev.z, ev.t)) / (2.0 * hl);
  j.dy = (f(ev.x, ev.y + hl, ev.z, ev.t) - f(ev.x, ev.y - hl, ev.z, ev.t)) / (2.0 * hl);
  j.dz = (f(ev.x, ev.y, ev.z + hz, ev.t) - f(ev.x, ev.y, ev.z - hz, ev.t)) / (2.0 * hz);
  j.dt = (f(ev.x, ev.y, ev.z, ev.t + ht) - f(ev.x, ev.y, ev.z, ev.t - ht)) / (2.0 * ht);
  return j;
}

Jet<Vector4c> dirac_jet_analytic(const DiracBranch& br, const DiracReduced& dr, const Event& ev) {
  const PhysicalParams& ph = dr.source.physical;
  const double k = dr.source.k();
  const double angle = ph.Omega * ev.t - k * ev.z;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double xr = ev.x * c + ev.y * s;
  const double yr = -ev.x * s + ev.y * c;
  const cplx Dx = -dr.d * xr + br.d1;
  const cplx Dy = -dr.d * yr + br.d2;
  const cplx Dangle = Dx * yr - Dy * xr;

  Jet<Vector4c> j;
  j.psi = evaluate_lab_wavefunction(br, dr, ev.x, ev.y, ev.z, ev.t);
  const Vector4c spin_part = -0.5 * kI * (spinor::spin_z() * j.psi);
  j.dx = (Dx * c - Dy * s) * j.psi;
  j.dy = (Dx * s + Dy * c) * j.psi;
  j.dt = (-kI * br.energy / ph.hbar + ph.Omega * Dangle) * j.psi + ph.Omega * spin_part;
  j.dz = (kI * ph.p / ph.hbar - k * Dangle) * j.psi - k * spin_part;
  return j;
}

Jet<Vector4c> combine(const Jet<Vector4c>& a, double ca, const Jet<Vector4c>& b, double cb) {
  return {ca * a.psi + cb * b.psi, ca * a.dx + cb * b.dx, ca * a.dy + cb * b.dy,
          ca * a.dz + cb * b.dz,   ca * a.dt + cb * b.dt, Vector4c::Zero()};
}

DiracScales scales_for(const DiracReduced& dr, double max_energy) {
  const PhysicalParams& ph = dr.source.physical;
  DiracScales sc;
  sc.length = 1.0 / std::sqrt(dr.d);
  const double kz = std::max(std::abs(dr.source.k()), std::abs(ph.p) / ph.hbar);
  sc.axial = kz > 0.0 ? std::min(sc.length, 1.0 / kz) : sc.length;
  const double rate = std::max({std::abs(ph.Omega), std::abs(max_energy) / ph.hbar, 1e-300});
  sc.time = 1.0 / rate;
  return sc;
}

std::vector<ResidualReport> dirac_reports(const std::function<Jet<Vector4c>(const Event&)>& analytic,
                                          const SpinorField4& field, const DiracReduced& dr, double max_energy,
                                          const std::vector<Event>& events, const FiniteDifferenceOptions& fd) {
  const auto A = dirac_wave_potential(dr.source);
  auto reports = dirac_residual_fd(field, A, dr.source.physical, events, scales_for(dr, max_energy), fd);
  const auto variants = all_sign_variants();
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    double worst_abs = 0.0;
    double worst_rel = 0.0;
    for (const auto& ev : events) {
      const auto t = dirac_terms(analytic(ev), A(ev.x, ev.y, ev.z, ev.t), dr.source.physical, variants[vi]);
      worst_abs = std::max(worst_abs, t.residual.real());
      worst_rel = std::max(worst_rel, safe_ratio(t.residual.real(), t.magnitude));
    }
    reports[vi].max_abs_residual = worst_abs;
    reports[vi].relative_residual = worst_rel;
    reports[vi].analytic = true;
  }
  return reports;
}

}  // namespace

bool ResidualReport::annihilates(double tol) const {
  if (analytic) return relative_residual < tol;
  return std::abs(convergence_order - 2.0) <= 0.3 && fd_relative_fine < 1e-6;
}

std::vector<Eigen::Vector2d> sample_disc(const Eigen::Vector2d& center, double radius, int count) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    const double r = radius * std::sqrt(halton(i, 2));
    const double a = 2.0 * kPi * halton(i, 3);
    pts.emplace_back(center(0) + r * std::cos(a), center(1) + r * std::sin(a));
  }
  return pts;
}

std::vector<Event> sample_events(const Eigen::Vector2d& center, double radius, double z_range, double t_max,
                                 int count) {
  std::vector<Event> evs;
  evs.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    const double r = radius * std::sqrt(halton(i, 2));
    const double a = 2.0 * kPi * halton(i, 3);
    evs.push_back({center(0) + r * std::cos(a), center(1) + r * std::sin(a), z_range * (2.0 * halton(i, 5) - 1.0),
                   t_max * halton(i, 7)});
  }
  return evs;
}

double envelope_width(const QuadraticForm& qf) {
  const Eigen::Matrix2d neg = -qf.envelope_quadratic();
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(neg).eigenvalues().minCoeff();
  if (!(lo > 0.0)) throw Error(ErrorKind::NonPositiveNorm, "exp(D) is not square integrable");
  return 1.0 / std::sqrt(lo);
}

Eigen::Vector2d envelope_center(const QuadraticForm& qf) {
  return (-qf.envelope_quadratic()).ldlt().solve(qf.envelope_linear());
}

cplx stationary_eigenvalue(const QuadraticForm& qf) {
  return -(qf.d11 + qf.d22 + qf.d1 * qf.d1 + qf.d2 * qf.d2);
}

ResidualReport pauli_stationary_residual(const QuadraticForm& qf, const ReducedPauliParams& rp, cplx epsilon,
                                         const std::vector<Eigen::Vector2d>& points,
                                         const FiniteDifferenceOptions& fd) {
  ResidualReport rep;
  rep.samples = static_cast<int>(points.size());
  for (const auto& pt : points) {
    const double x = pt(0);
    const double y = pt(1);
    const cplx psi = std::exp(qf.exponent(x, y));
    const cplx Dx = qf.d11 * x + qf.d12 * y + qf.d1;
    const cplx Dy = qf.d12 * x + qf.d22 * y + qf.d2;
    const auto t = stationary_terms(psi, Dx * psi, Dy * psi, (qf.d11 + Dx * Dx) * psi, (qf.d22 + Dy * Dy) * psi, x,
                                    y, rp, epsilon);
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(t.residual));
    rep.relative_residual = std::max(rep.relative_residual, safe_ratio(std::abs(t.residual), t.magnitude));
  }
  double width = 1.0;
  if (qf.square_integrable()) width = envelope_width(qf);
  rep.grid_spacing = fd.step * width;
  rep.fd_relative_coarse = stationary_fd(qf, rp, epsilon, points, rep.grid_spacing);
  rep.fd_relative_fine = stationary_fd(qf, rp, epsilon, points, 0.5 * rep.grid_spacing);
  rep.convergence_order = order_of(rep.fd_relative_coarse, rep.fd_relative_fine);
  return rep;
}

ResidualReport pauli_time_dependent_residual(const PauliState& state, const PhysicalParams& params,
                                             const std::vector<Event>& events, const FiniteDifferenceOptions& fd) {
  ResidualReport rep;
  rep.samples = static_cast<int>(events.size());
  for (const auto& ev : events) {
    const auto t = pauli_terms(pauli_jet_analytic(state, params, ev), params, ev);
    rep.max_abs_residual = std::max(rep.max_abs_residual, t.residual.real());
    rep.relative_residual = std::max(rep.relative_residual, safe_ratio(t.residual.real(), t.magnitude));
  }

  const double width = envelope_width(state.form);
  const double hs = fd.step * width;
  const double hz = std::abs(state.p) > 0.0 ? fd.step * std::min(width, state.hbar / std::abs(state.p)) : hs;
  const double rate = std::max({std::abs(state.Omega), std::abs(state.E_plus) / state.hbar,
                                std::abs(state.E_minus) / state.hbar, state.hbar / (params.mass * width * width)});
  const double ht = fd.step / rate;
  auto fd_pass = [&](double scale) {
    double worst = 0.0;
    for (const auto& ev : events) {
      const auto t = pauli_terms(pauli_jet_fd(state, ev, scale * hs, scale * hz, scale * ht), params, ev);
      worst = std::max(worst, safe_ratio(t.residual.real(), t.magnitude));
    }
    return worst;
  };
  rep.grid_spacing = hs;
  rep.fd_relative_coarse = fd_pass(1.0);
  rep.fd_relative_fine = fd_pass(0.5);
  rep.convergence_order = order_of(rep.fd_relative_coarse, rep.fd_relative_fine);
  return rep;
}

std::string DiracSignVariant::name() const {
  std::string s = alpha_sign > 0 ? "+alpha" : "-alpha";
  s += beta_sign > 0 ? "+beta" : "-beta";
  return s;
}

std::vector<DiracSignVariant> all_sign_variants() { return {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}; }

VectorPotential dirac_wave_potential(const DiracParams& dp) {
  const PhysicalParams ph = dp.physical;
  const double k = dp.k();
  return [ph, k](double x, double y, double z, double t) {
    const double angle = ph.Omega * t - k * z;
    const double amp = k != 0.0 ? ph.H / k : 0.0;
    return Eigen::Vector3d(-0.5 * ph.H_z * y + amp * std::cos(angle), 0.5 * ph.H_z * x + amp * std::sin(angle), 0.0);
  };
}

std::vector<ResidualReport> dirac_residual_fd(const SpinorField4& psi, const VectorPotential& A,
                                              const PhysicalParams& params, const std::vector<Event>& events,
                                              const DiracScales& scales, const FiniteDifferenceOptions& fd) {
  const double hl = fd.step * scales.length;
  const double hz = fd.step * scales.axial;
  const double ht = fd.step * scales.time;
  std::vector<Jet<Vector4c>> coarse, fine;
  for (const auto& ev : events) {
    coarse.push_back(dirac_jet_fd(psi, ev, hl, hz, ht));
    fine.push_back(dirac_jet_fd(psi, ev, 0.5 * hl, 0.5 * hz, 0.5 * ht));
  }
  std::vector<ResidualReport> reports;
  for (const auto& v : all_sign_variants()) {
    ResidualReport rep;
    rep.sign_variant = v.name();
    rep.samples = static_cast<int>(events.size());
    rep.grid_spacing = hl;
    rep.analytic = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const Event& ev = events[i];
      const Eigen::Vector3d a = A(ev.x, ev.y, ev.z, ev.t);
      const auto tc = dirac_terms(coarse[i], a, params, v);
      const auto tf = dirac_terms(fine[i], a, params, v);
      rep.fd_relative_coarse = std::max(rep.fd_relative_coarse, safe_ratio(tc.residual.real(), tc.magnitude));
      rep.fd_relative_fine = std::max(rep.fd_relative_fine, safe_ratio(tf.residual.real(), tf.magnitude));
      rep.max_abs_residual = std::max(rep.max_abs_residual, tf.residual.real());
    }
    rep.relative_residual = rep.fd_relative_fine;
    rep.convergence_order = order_of(rep.fd_relative_coarse, rep.fd_relative_fine);
    reports.push_back(rep);
  }
  return reports;
}

std::vector<ResidualReport> dirac_residual(const DiracBranch& branch, const DiracReduced& dr,
                                           const std::vector<Event>& events, const FiniteDifferenceOptions& fd) {
  return dirac_reports([&](const Event& ev) { return dirac_jet_analytic(branch, dr, ev); },
                       [&](double x, double y, double z, double t) {
                         return evaluate_lab_wavefunction(branch, dr, x, y, z, t);
                       },
                       dr, branch.energy, events, fd);
}

std::vector<ResidualReport> dirac_residual(const TwoBranchState& state, const DiracReduced& dr,
                                           const std::vector<Event>& events, const FiniteDifferenceOptions& fd) {
  const double c1 = std::cos(state.theta);
  const double c2 = std::sin(state.theta);
  const double emax = std::max(std::abs(state.branch1.energy), std::abs(state.branch2.energy));
  return dirac_reports(
      [&](const Event& ev) {
        return combine(dirac_jet_analytic(state.branch1, dr, ev), c1, dirac_jet_analytic(state.branch2, dr, ev), c2);
      },
      [&](double x, double y, double z, double t) { return evaluate_lab_wavefunction(state, dr, x, y, z, t); }, dr,
      emax, events, fd);
}

std::vector<std::string> annihilating_variants(const std::vector<ResidualReport>& reports, double tol) {
  std::vector<std::string> names;
  for (const auto& r : reports) {
    if (r.annihilates(tol)) names.push_back(r.sign_variant);
  }
  if (names.empty()) throw Error(ErrorKind::NoAnnihilatingVariant, "no operator sign variant annihilates the state");
  return names;
}

QuadratureResult gaussian_norm_quadrature(const QuadraticForm& qf, double tolerance) {
  if (!qf.square_integrable()) throw Error(ErrorKind::NonPositiveNorm, "exp(D) is not square integrable");
  const GaussianFrame frame = frame_for_envelope(qf.envelope_quadratic(), qf.envelope_linear());
  QuadratureOptions opts;
  opts.rel_tol = tolerance;
  return integrate_plane([&](double x, double y) { return cplx(std::norm(std::exp(qf.exponent(x, y))), 0.0); },
                         frame, opts);
}

QuadratureResult gaussian_norm_quadrature(const DiracBranch& branch, const DiracReduced& dr, double tolerance) {
  if (!(dr.d > 0.0)) throw Error(ErrorKind::NonPositiveNorm, "Gaussian width must be positive");
  const Eigen::Vector2d l(branch.d1.real(), branch.d2.real());
  const GaussianFrame frame = frame_for_envelope(-dr.d * Eigen::Matrix2d::Identity(), l);
  QuadratureOptions opts;
  opts.rel_tol = tolerance;
  const cplx shift = branch.d2 * branch.d2 / (2.0 * dr.d);
  return integrate_plane(
      [&](double x, double y) {
        const cplx D = -0.5 * dr.d * (x * x + y * y) + branch.d1 * x + branch.d2 * y - shift;
        return cplx(std::norm(std::exp(D)), 0.0);
      },
      frame, opts);
}

namespace {

using Vec5 = Eigen::Matrix<cplx, 5, 1>;
using Mat5 = Eigen::Matrix<cplx, 5, 5>;

Vec5 residual_vector(const Vec5& z, const ReducedPauliParams& rp) {
  const auto r = coefficient_residuals({z(0), z(1), z(2), z(3), z(4)}, rp);
  Vec5 v;
  v << r[0], r[1], r[2], r[3], r[4];
  return v;
}

// Central differences are exact (up to rounding) for the quadratic system.
Mat5 numeric_jacobian(const Vec5& z, const ReducedPauliParams& rp) {
  Mat5 J;
  for (int k = 0; k < 5; ++k) {
    const double h = 1e-4 * (1.0 + std::abs(z(k)));
    Vec5 zp = z, zm = z;
    zp(k) += h;
    zm(k) -= h;
    J.col(k) = (residual_vector(zp, rp) - residual_vector(zm, rp)) / (2.0 * h);
  }
  return J;
}

}  // namespace

std::vector<QuadraticForm> brute_force_d_system(const ReducedPauliParams& rp, const BruteForceOptions& options) {
  if (options.n_starts < 32) throw Error(ErrorKind::InvalidArgument, "brute force needs at least 32 starts");
  const double scale = std::max({std::abs(rp.g1), std::abs(rp.g2), std::abs(rp.b), rp.f * rp.f, 1e-300});
  const double box = 2.0 * (1.0 + std::sqrt(std::max(std::abs(rp.g1), std::abs(rp.g2))) + std::abs(rp.f) +
                            std::sqrt(std::abs(rp.b)));
  const double tol = options.residual_tol * (1.0 + scale);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-box, box);

  std::vector<QuadraticForm> roots;
  for (int s = 0; s < options.n_starts; ++s) {
    Vec5 z;
    for (int k = 0; k < 5; ++k) {
      const double re = uni(rng);
      const double im = uni(rng);
      z(k) = cplx(re, im);
    }
    Vec5 r = residual_vector(z, rp);
    double rn = r.norm();
    for (int it = 0; it < options.max_iterations && r.cwiseAbs().maxCoeff() > tol; ++it) {
      const Vec5 step = numeric_jacobian(z, rp).fullPivLu().solve(r);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Vec5 trial = z - lambda * step;
        const Vec5 rt = residual_vector(trial, rp);
        if (rt.norm() < (1.0 - 0.25 * lambda) * rn || (lambda < 1e-6 && rt.norm() < rn)) {
          z = trial;
          r = rt;
          rn = rt.norm();
          moved = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!moved) break;
    }
    if (!(r.cwiseAbs().maxCoeff() <= tol)) continue;
    const QuadraticForm q{z(0), z(1), z(2), z(3), z(4)};
    const bool seen = std::any_of(roots.begin(), roots.end(), [&](const QuadraticForm& o) { return same_form(o, q); });
    if (!seen) roots.push_back(q);
  }
  return roots;
}

bool integrable_with_real_energy(const QuadraticForm& qf, double tol) {
  if (!qf.square_integrable()) return false;
  const cplx eps = stationary_eigenvalue(qf);
  return std::abs(eps.imag()) <= tol * (1.0 + std::abs(eps.real()));
}

bool same_form(const QuadraticForm& a, const QuadraticForm& b, double tol) {
  const double s = tol * (1.0 + std::max(a.max_magnitude(), b.max_magnitude()));
  return std::abs(a.d11 - b.d11) <= s && std::abs(a.d12 - b.d12) <= s && std::abs(a.d22 - b.d22) <= s &&
         std::abs(a.d1 - b.d1) <= s && std::abs(a.d2 - b.d2) <= s;
}

}  // namespace rotfield
