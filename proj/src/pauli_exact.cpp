#include "rotfield/pauli_exact.hpp"

#include "rotfield/errors.hpp"
#include "rotfield/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rotfield {

cplx QuadraticForm::exponent(double x, double y) const {
  return 0.5 * d11 * x * x + d12 * x * y + 0.5 * d22 * y * y + d1 * x + d2 * y;
}

Eigen::Matrix2d QuadraticForm::envelope_quadratic() const {
  Eigen::Matrix2d q;
  q << d11.real(), d12.real(), d12.real(), d22.real();
  return q;
}

Eigen::Vector2d QuadraticForm::envelope_linear() const { return {d1.real(), d2.real()}; }

bool QuadraticForm::square_integrable() const {
  const double a = d11.real();
  const double c = d22.real();
  const double b = d12.real();
  return a < 0.0 && c < 0.0 && a * c - b * b > 0.0;
}

double QuadraticForm::max_magnitude() const {
  return std::max({std::abs(d11), std::abs(d12), std::abs(d22), std::abs(d1), std::abs(d2)});
}

std::array<cplx, 5> coefficient_residuals(const QuadraticForm& q, const ReducedPauliParams& rp) {
  const cplx f = rp.f;
  return {
      q.d11 * q.d11 + q.d12 * q.d12 - kI * f * q.d12 - rp.g1,
      q.d22 * q.d22 + q.d12 * q.d12 + kI * f * q.d12 - rp.g2,
      2.0 * q.d11 * q.d12 + 2.0 * q.d22 * q.d12 - kI * f * (q.d22 - q.d11),
      2.0 * q.d11 * q.d1 + 2.0 * q.d12 * q.d2 - kI * f * q.d2,
      2.0 * q.d22 * q.d2 + 2.0 * q.d12 * q.d1 + kI * f * q.d1 + rp.b,
  };
}

namespace {

double max_abs(const std::array<cplx, 5>& r) {
  double m = 0.0;
  for (const auto& v : r) m = std::max(m, std::abs(v));
  return m;
}

using Vector5c = Eigen::Matrix<cplx, 5, 1>;
using Matrix5c = Eigen::Matrix<cplx, 5, 5>;

Vector5c pack(const QuadraticForm& q) {
  Vector5c z;
  z << q.d11, q.d12, q.d22, q.d1, q.d2;
  return z;
}

QuadraticForm unpack(const Vector5c& z) { return {z(0), z(1), z(2), z(3), z(4)}; }

Matrix5c jacobian(const QuadraticForm& q, const ReducedPauliParams& rp) {
  const cplx f = rp.f;
  Matrix5c J = Matrix5c::Zero();
  J(0, 0) = 2.0 * q.d11;
  J(0, 1) = 2.0 * q.d12 - kI * f;
  J(1, 1) = 2.0 * q.d12 + kI * f;
  J(1, 2) = 2.0 * q.d22;
  J(2, 0) = 2.0 * q.d12 + kI * f;
  J(2, 1) = 2.0 * (q.d11 + q.d22);
  J(2, 2) = 2.0 * q.d12 - kI * f;
  J(3, 0) = 2.0 * q.d1;
  J(3, 1) = 2.0 * q.d2;
  J(3, 3) = 2.0 * q.d11;
  J(3, 4) = 2.0 * q.d12 - kI * f;
  J(4, 1) = 2.0 * q.d1;
  J(4, 2) = 2.0 * q.d2;
  J(4, 3) = 2.0 * q.d12 + kI * f;
  J(4, 4) = 2.0 * q.d22;
  return J;
}

QuadraticForm polish(QuadraticForm q, const ReducedPauliParams& rp) {
  double best = max_abs(coefficient_residuals(q, rp));
  for (int it = 0; it < 3 && best > 0.0; ++it) {
    const auto r = coefficient_residuals(q, rp);
    Vector5c rv;
    rv << r[0], r[1], r[2], r[3], r[4];
    const Vector5c step = jacobian(q, rp).fullPivLu().solve(rv);
    if (!step.allFinite()) break;
    const QuadraticForm next = unpack(pack(q) - step);
    const double res = max_abs(coefficient_residuals(next, rp));
    if (!(res < best)) break;
    q = next;
    best = res;
  }
  return q;
}

// Linear pair for (d1, d2) given the quadratic part.
bool solve_linear_part(QuadraticForm& q, const ReducedPauliParams& rp) {
  const cplx f = rp.f;
  Matrix2c M;
  M << 2.0 * q.d11, 2.0 * q.d12 - kI * f, 2.0 * q.d12 + kI * f, 2.0 * q.d22;
  const cplx det = M.determinant();
  if (std::abs(det) == 0.0) return false;
  const Vector2c sol = M.inverse() * Vector2c(0.0, -rp.b);
  q.d1 = sol(0);
  q.d2 = sol(1);
  return true;
}

}  // namespace

void check_band(const ReducedPauliParams& rp, double boundary_tol) {
  const double f2 = rp.f * rp.f;
  const double lo = 4.0 * rp.g1;
  const double hi = 4.0 * rp.g2;
  if (std::abs(f2 - lo) <= boundary_tol || std::abs(f2 - hi) <= boundary_tol) {
    throw Error(ErrorKind::DegenerateBoundary,
                "f^2 = " + std::to_string(f2) + " lies on the edge of [4 g1, 4 g2]; the state is not square integrable");
  }
  if (f2 > lo && f2 < hi) {
    throw Error(ErrorKind::ForbiddenBand, "4 g1 < f^2 < 4 g2: energies are complex");
  }
}

std::vector<QuadraticForm> elimination_candidates(const ReducedPauliParams& rp) {
  // u = d11 + d22, v = d11 - d22, d12 = -i f v / (2u). The remaining equations
  // reduce to w^2 - (f^2 + 2G) w + (g1 - g2)^2 + 2 G f^2 = 0 for w = u^2 with
  // discriminant (f^2 - 4 g1)(f^2 - 4 g2).
  const double f2 = rp.f * rp.f;
  const double G = rp.g1 + rp.g2;
  const cplx root_disc = std::sqrt(cplx((f2 - 4.0 * rp.g1) * (f2 - 4.0 * rp.g2), 0.0));
  std::vector<QuadraticForm> out;
  for (int s : {1, -1}) {
    const cplx w = 0.5 * (f2 + 2.0 * G + static_cast<double>(s) * root_disc);
    const cplx gap = w - f2;
    if (std::abs(gap) <= 1e-14 * (1.0 + std::abs(w))) continue;
    for (int us : {1, -1}) {
      const cplx u = static_cast<double>(us) * std::sqrt(w);
      if (std::abs(u) == 0.0) continue;
      const cplx v = (rp.g1 - rp.g2) * u / gap;
      QuadraticForm q;
      q.d11 = 0.5 * (u + v);
      q.d22 = 0.5 * (u - v);
      q.d12 = -kI * rp.f * v / (2.0 * u);
      if (!solve_linear_part(q, rp)) continue;
      out.push_back(polish(q, rp));
    }
  }
  return out;
}

QuadraticForm solve_quadratic_system(const ReducedPauliParams& rp, const DSystemOptions& options) {
  check_band(rp, options.boundary_tol);

  const QuadraticForm* chosen = nullptr;
  const auto candidates = elimination_candidates(rp);
  for (const auto& q : candidates) {
    const double tol = options.residual_tol * (1.0 + q.max_magnitude());
    if (max_abs(coefficient_residuals(q, rp)) >= tol) continue;
    if (!q.square_integrable()) continue;
    const cplx eps0 = q.d11 + q.d22 + q.d1 * q.d1 + q.d2 * q.d2;
    if (std::abs(eps0.imag()) > 1e-9 * (1.0 + std::abs(eps0.real()))) continue;
    // At most one candidate passes the definiteness filter away from the
    // band edges; near an edge prefer the better-conditioned one.
    if (chosen == nullptr ||
        q.envelope_quadratic().determinant() > chosen->envelope_quadratic().determinant()) {
      chosen = &q;
    }
  }
  if (chosen == nullptr) {
    throw Error(ErrorKind::NoIntegrableBranch, "no root of the coefficient system is square integrable");
  }
  return *chosen;
}

cplx level_shift(const QuadraticForm& qf, int n, const PhysicalParams& params) {
  const double scale = params.hbar * params.hbar / (2.0 * params.mass);
  return -scale * (static_cast<double>(n + 1) * (qf.d11 + qf.d22) + qf.d1 * qf.d1 + qf.d2 * qf.d2);
}

cplx level_splitting(const QuadraticForm& qf, const ReducedPauliParams& rp, const PhysicalParams& params,
                     LevelFormula formula) {
  const double scale = params.hbar * params.hbar / (2.0 * params.mass);
  const double cross = formula == LevelFormula::Verified ? 4.0 : 1.0;
  const cplx diff = qf.d11 - qf.d22;
  return scale * std::sqrt(diff * diff + cross * qf.d12 * qf.d12 + rp.f * rp.f);
}

std::vector<EnergyLevel> energy_levels(const ReducedPauliParams& rp, const QuadraticForm& qf,
                                       const PhysicalParams& params, int n, LevelFormula formula) {
  if (n < 0 || n > 2) throw Error(ErrorKind::InvalidArgument, "energy levels are available for n = 0, 1, 2");
  const double scale = params.hbar * params.hbar / (2.0 * params.mass);
  const double kinetic = params.p * params.p / (2.0 * params.mass);
  const cplx shift = level_shift(qf, n, params);
  const cplx tau = level_splitting(qf, rp, params, formula);
  const double side = (n == 2 && formula == LevelFormula::Verified) ? 2.0 : 1.0;

  std::vector<std::pair<TauBranch, cplx>> offsets;
  if (n == 0) {
    offsets = {{TauBranch::None, 0.0}};
  } else if (n == 1) {
    offsets = {{TauBranch::Plus, tau}, {TauBranch::Minus, -tau}};
  } else {
    offsets = {{TauBranch::None, 0.0}, {TauBranch::Plus, side * tau}, {TauBranch::Minus, -side * tau}};
  }

  std::vector<EnergyLevel> levels;
  for (const auto& [branch, offset] : offsets) {
    for (int sigma : {1, -1}) {
      const cplx E = kinetic - static_cast<double>(sigma) * scale * rp.rho + shift + offset;
      if (std::abs(E.imag()) > 1e-9 * (1.0 + std::abs(E.real()))) {
        throw Error(ErrorKind::ComplexEnergy, "level n=" + std::to_string(n) + " has Im E = " +
                                                  std::to_string(E.imag()));
      }
      levels.push_back({n, sigma, branch, E.real()});
    }
  }
  return levels;
}

bool GZone::contains(double g) const {
  return (g >= lower.lo && g <= lower.hi) || (g >= upper.lo && g <= upper.hi);
}

GZone forbidden_g_zone(double H_over_Hz) {
  if (!std::isfinite(H_over_Hz)) throw Error(ErrorKind::InvalidArgument, "H/H_z must be finite");
  const double root = std::sqrt(1.0 + 4.0 * H_over_Hz * H_over_Hz);
  return {{1.0 - root, 0.0}, {2.0, 1.0 + root}};
}

double resonance_condition(const PhysicalParams& params) {
  if (params.H_z == 0.0) throw Error(ErrorKind::InvalidArgument, "resonance needs H_z != 0");
  return -params.mu() * params.H_z / params.hbar;
}

double resonance_residual(const PhysicalParams& params) {
  return params.hbar * params.Omega + params.mu() * params.H_z;
}

double diagonal_resonance_frequency(const PhysicalParams& params) {
  if (params.H_z == 0.0) throw Error(ErrorKind::InvalidArgument, "resonance needs H_z != 0");
  return -2.0 * params.mu() * params.H_z / params.hbar;
}

PauliState make_pauli_state(const PhysicalParams& params, cplx c_plus, cplx c_minus,
                            const DSystemOptions& options) {
  const auto rp = reduce_pauli(params);
  PauliState state;
  state.form = solve_quadratic_system(rp, options);
  const auto levels = energy_levels(rp, state.form, params, 0);
  for (const auto& lv : levels) (lv.sigma > 0 ? state.E_plus : state.E_minus) = lv.E;
  state.gamma = rp.gamma;
  state.p = params.p;
  state.Omega = params.Omega;
  state.hbar = params.hbar;

  const double weight = std::norm(c_plus) + std::norm(c_minus);
  if (!(weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "C+ and C- cannot both vanish");
  const double scale = std::sqrt(normalization_constraint(state.form) / weight);
  state.C_plus = scale * c_plus;
  state.C_minus = scale * c_minus;
  return state;
}

Vector2c evaluate_wavefunction(const PauliState& s, double x, double y, double z, double t) {
  const double c = std::cos(s.Omega * t);
  const double sn = std::sin(s.Omega * t);
  const double xr = x * c + y * sn;
  const double yr = -x * sn + y * c;
  const cplx envelope = std::exp(kI * s.p * z / s.hbar + s.form.exponent(xr, yr));

  const cplx a_plus = s.C_plus * std::exp(-kI * s.E_plus * t / s.hbar);
  const cplx a_minus = s.C_minus * std::exp(-kI * s.E_minus * t / s.hbar);
  const double ch = std::cos(0.5 * s.gamma);
  const double sh = std::sin(0.5 * s.gamma);
  const cplx phase = std::exp(-0.5 * kI * s.Omega * t);
  return Vector2c(phase * (ch * a_plus - sh * a_minus), std::conj(phase) * (sh * a_plus + ch * a_minus)) *
         envelope;
}

double gaussian_norm(const QuadraticForm& qf) {
  if (!qf.square_integrable()) {
    throw Error(ErrorKind::NonPositiveNorm, "exp(D) is not square integrable");
  }
  const Eigen::Matrix2d neg = -qf.envelope_quadratic();
  const Eigen::Vector2d l = qf.envelope_linear();
  return kPi / std::sqrt(neg.determinant()) * std::exp(l.dot(neg.inverse() * l));
}

double normalization_constraint(const QuadraticForm& qf) { return 1.0 / gaussian_norm(qf); }

double normalization_constraint_as_printed(const QuadraticForm& qf, double tol) {
  const cplx value = std::sqrt(qf.d11 * qf.d22) / kPi * std::exp(qf.d2 * qf.d2 / qf.d22);
  if (!(value.real() > 0.0) || std::abs(value.imag()) > tol * std::abs(value)) {
    throw Error(ErrorKind::NonPositiveNorm, "sqrt(d11 d22)/pi exp(d2^2/d22) is not real positive");
  }
  return value.real();
}

SpinTrace spin_trace(const PauliState& s, const std::vector<double>& times) {
  const double norm = gaussian_norm(s.form);
  const double splitting = (s.E_plus - s.E_minus) / s.hbar;
  const cplx mix = std::conj(s.C_plus) * s.C_minus;

  SpinTrace trace;
  trace.source = TraceSource::ClosedForm;
  trace.times = times;
  trace.constant_part = 0.5 * norm * std::cos(s.gamma) * (std::norm(s.C_plus) - std::norm(s.C_minus));
  trace.amplitude = norm * std::abs(std::sin(s.gamma)) * std::abs(mix);
  trace.frequency = std::abs(splitting);
  trace.s3.reserve(times.size());
  for (double t : times) {
    const double cross = (mix * std::exp(kI * splitting * t)).real();
    trace.s3.push_back(trace.constant_part - norm * std::sin(s.gamma) * cross);
  }
  return trace;
}

SpinTrace spin_trace_resonance(const PauliState& s, const PhysicalParams& params, const std::vector<double>& times,
                               double tol) {
  if (std::abs(std::cos(s.gamma)) > tol) {
    throw Error(ErrorKind::InvalidArgument, "resonance form needs gamma = +-pi/2");
  }
  int pairing = 0;
  if (std::abs(s.C_plus - s.C_minus) <= tol * std::abs(s.C_plus)) pairing = 1;
  if (std::abs(s.C_plus + s.C_minus) <= tol * std::abs(s.C_plus)) pairing = -1;
  if (pairing == 0) throw Error(ErrorKind::InvalidArgument, "resonance form needs C+ = +-C-");

  const double omega = 2.0 * params.mu() * params.H / params.hbar;
  const double sign = -std::sin(s.gamma) * pairing;
  SpinTrace trace;
  trace.source = TraceSource::ClosedForm;
  trace.times = times;
  trace.frequency = std::abs(omega);
  trace.amplitude = 0.5;
  trace.constant_part = 0.0;
  for (double t : times) trace.s3.push_back(0.5 * sign * std::cos(omega * t));
  return trace;
}

SpinTrace spin_trace_quadrature(const PauliState& s, const std::vector<double>& times, double rel_tol) {
  SpinTrace trace = spin_trace(s, {});
  trace.source = TraceSource::Quadrature;
  trace.times = times;
  const Eigen::Matrix2d Q = s.form.envelope_quadratic();
  const Eigen::Vector2d l = s.form.envelope_linear();
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  for (double t : times) {
    // x_rot = R x; the envelope in lab coordinates is R^T Q R, R^T l.
    Eigen::Matrix2d R;
    R << std::cos(s.Omega * t), std::sin(s.Omega * t), -std::sin(s.Omega * t), std::cos(s.Omega * t);
    const GaussianFrame frame = frame_for_envelope(R.transpose() * Q * R, R.transpose() * l);
    const auto result = integrate_plane(
        [&](double x, double y) {
          const Vector2c psi = evaluate_wavefunction(s, x, y, 0.0, t);
          return cplx(0.5 * (std::norm(psi(0)) - std::norm(psi(1))), 0.0);
        },
        frame, opts);
    trace.s3.push_back(result.value.real());
  }
  return trace;
}

}  // namespace rotfield
