#include "rotfield/dirac_exact.hpp"

#include "rotfield/errors.hpp"
#include "rotfield/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace rotfield {

namespace {

bool consistent_case2(const DiracReduced& dr) {
  return dr.field_case == 2 && dr.source.case2 == Case2Convention::Consistent;
}

double pole_for(const DiracReduced& dr) { return consistent_case2(dr) ? -dr.E0 : dr.E0; }

cplx eval_cubic(const std::array<double, 3>& a, cplx x) { return ((x + a[0]) * x + a[1]) * x + a[2]; }
cplx eval_cubic_derivative(const std::array<double, 3>& a, cplx x) { return (3.0 * x + 2.0 * a[0]) * x + a[1]; }

}  // namespace

DiracReduced reduce_dirac(const DiracParams& dp) {
  const PhysicalParams& ph = dp.physical;
  ph.validate();
  if (dp.epsilon_dir != 1 && dp.epsilon_dir != -1) {
    throw Error(ErrorKind::InvalidArgument, "epsilon_dir must be +1 or -1");
  }
  if (ph.Omega == 0.0) throw Error(ErrorKind::ZeroFrequency, "Omega = 0 leaves k and E0 undefined");
  const double eHz = ph.charge * ph.H_z;
  if (eHz == 0.0) throw Error(ErrorKind::InvalidArgument, "the Dirac states need e H_z != 0");

  const double hb = ph.hbar;
  const double m = ph.mass;
  const double c = ph.light_speed;
  const double rest = m * c * c;

  DiracReduced dr;
  dr.source = dp;
  dr.field_case = eHz < 0.0 ? 1 : 2;
  if (dr.field_case == 1) {
    dr.d = -eHz / (2.0 * hb * c);
  } else {
    dr.d = eHz / ((dp.case2 == Case2Convention::Consistent ? 2.0 : 4.0) * hb * c);
  }
  dr.h = ph.charge * ph.H / (dp.k() * rest);
  dr.E0 = 2.0 * hb * dr.d / (ph.Omega * m);
  const double spin_shift = consistent_case2(dr) ? hb * ph.Omega : -hb * ph.Omega;
  dr.nu = (2.0 * c * ph.p * dp.epsilon_dir + spin_shift) / rest;
  dr.pole = pole_for(dr);
  return dr;
}

DiracReduced with_scalars(DiracReduced dr, double E0, double nu, double h) {
  dr.E0 = E0;
  dr.nu = nu;
  dr.h = h;
  dr.pole = pole_for(dr);
  return dr;
}

std::array<double, 3> cubic_coefficients(double pole, double nu, double h) {
  return {-(pole - nu), -(1.0 + pole * nu + h * h), pole};
}

CubicRoots cubic_roots(double pole, double nu, double h) {
  const auto a = cubic_coefficients(pole, nu, h);
  Eigen::Matrix3d companion;
  companion << -a[0], -a[1], -a[2], 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  const Eigen::Vector3cd eig = Eigen::EigenSolver<Eigen::Matrix3d>(companion, false).eigenvalues();

  std::array<cplx, 3> r{eig(0), eig(1), eig(2)};
  for (auto& x : r) {
    for (int it = 0; it < 4; ++it) {
      const cplx dp = eval_cubic_derivative(a, x);
      if (std::abs(dp) == 0.0) break;
      const cplx next = x - eval_cubic(a, x) / dp;
      if (!(std::abs(eval_cubic(a, next)) < std::abs(eval_cubic(a, x)))) break;
      x = next;
    }
  }
  // A double root is a simple root of p'; Newton on p' pins it down far
  // better than the O(sqrt(eps)) eigenvalue pair.
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(r[i] - r[j]) > 1e-5 * (1.0 + std::abs(r[i]))) continue;
      double x = 0.5 * (r[i] + r[j]).real();
      for (int it = 0; it < 50; ++it) {
        const double d1 = (3.0 * x + 2.0 * a[0]) * x + a[1];
        const double d2 = 6.0 * x + 2.0 * a[0];
        if (d2 == 0.0) break;
        const double step = d1 / d2;
        x -= step;
        if (std::abs(step) <= 1e-17 * (1.0 + std::abs(x))) break;
      }
      if (std::abs(eval_cubic(a, x)) <= std::abs(eval_cubic(a, r[i])) + 1e-14 * (1.0 + std::pow(std::abs(x), 3))) {
        r[i] = r[j] = x;
      }
    }
  }
  std::sort(r.begin(), r.end(), [](cplx lhs, cplx rhs) { return lhs.real() > rhs.real(); });

  CubicRoots out;
  out.roots = r;
  for (int i = 0; i < 3; ++i) {
    out.residuals[static_cast<std::size_t>(i)] = std::abs(eval_cubic(a, r[static_cast<std::size_t>(i)]));
    const cplx x = r[static_cast<std::size_t>(i)];
    if (x.real() > 0.0 && std::abs(x.imag()) <= 1e-9 * (1.0 + std::abs(x.real()))) {
      out.positive.push_back(x.real());
    }
  }
  return out;
}

CubicRoots solve_cubic(const DiracReduced& dr) {
  CubicRoots roots = cubic_roots(dr.pole, dr.nu, dr.h);
  if (roots.positive.size() < 2) {
    throw Error(ErrorKind::NoTwoPositiveRoots,
                "the spectral cubic has " + std::to_string(roots.positive.size()) + " positive real root(s)");
  }
  return roots;
}

DiracBranch build_branch(const DiracReduced& dr, double E) {
  const PhysicalParams& ph = dr.source.physical;
  const double eps = dr.source.epsilon_dir;
  const double P = dr.pole;
  const double h = dr.h;

  const double denom = dr.field_case == 1 ? E - dr.E0 : E + dr.E0;
  if (std::abs(denom) < 1e-10) {
    throw Error(ErrorKind::SpectralPole, "E = " + std::to_string(E) + " sits on the pole of d2");
  }
  const double weight = (E * E + 1.0) * (E - P) * (E - P) + h * h * E * E;
  if (!(weight > 0.0)) throw Error(ErrorKind::SpectralPole, "bispinor vanishes at E = " + std::to_string(E));

  DiracBranch br;
  br.E_script = E;
  br.energy = ph.mass * ph.light_speed * ph.light_speed * E + ph.light_speed * ph.p * eps;
  br.d2 = ph.mass * ph.light_speed * h * dr.E0 / (2.0 * ph.hbar * denom);
  br.d1 = dr.field_case == 1 ? -kI * br.d2 : kI * br.d2;
  br.N = 1.0 / std::sqrt(weight);

  Vector4c raw(-eps * h * E, (E - 1.0) * (E - P), h * E, -eps * (E + 1.0) * (E - P));
  if (dr.field_case == 2) raw = -spinor::alpha(1) * spinor::alpha(3) * spinor::beta() * raw;
  br.spinor = br.N * raw;
  br.amplitudes = std::sqrt(dr.d / (2.0 * kPi)) * br.spinor;
  return br;
}

Matrix4c rotation_operator(double angle) {
  const cplx down = std::exp(-0.5 * kI * angle);
  const cplx up = std::conj(down);
  Matrix4c r = Matrix4c::Zero();
  r.diagonal() << down, up, down, up;
  return r;
}

double mixing_cos2theta(const DiracBranch& b1, const DiracBranch& b2, const DiracReduced& dr) {
  const double E1 = b1.E_script;
  const double E2 = b2.E_script;
  const double Pi = E1 * E2;
  const double P = dr.pole;
  const double num = dr.h * dr.h * Pi * Pi * (E1 - E2);
  const double den = (Pi + 1.0) * (Pi + 1.0) * ((P * P - Pi * Pi) * (E1 + E2) + 2.0 * Pi * (Pi - 1.0) * P);
  const double scale = (Pi + 1.0) * (Pi + 1.0) * (std::abs(P * P) + Pi * Pi + 1.0) * (std::abs(E1) + std::abs(E2));
  if (std::abs(den) <= 1e-14 * scale) throw Error(ErrorKind::DenominatorZero, "mixing-angle denominator vanishes");
  const double value = num / den;
  if (std::abs(value) > 1.0) {
    throw Error(ErrorKind::UnphysicalMixing, "cos 2theta = " + std::to_string(value) + " lies outside [-1, 1]");
  }
  return value;
}

double mixing_angle(const DiracBranch& b1, const DiracBranch& b2, const DiracReduced& dr) {
  return 0.5 * std::acos(mixing_cos2theta(b1, b2, dr));
}

double mixing_cos2theta_from_moments(const DiracBranch& b1, const DiracBranch& b2) {
  const Matrix4c& sz = spinor::spin_z();
  const double s1 = 0.5 * (b1.spinor.adjoint() * sz * b1.spinor)(0).real();
  const double s2 = 0.5 * (b2.spinor.adjoint() * sz * b2.spinor)(0).real();
  if (s1 == s2) throw Error(ErrorKind::DenominatorZero, "equal spin moments");
  return (s1 + s2) / (s2 - s1);
}

TwoBranchState make_two_branch_state(const DiracReduced& dr) {
  const CubicRoots roots = solve_cubic(dr);
  TwoBranchState st;
  st.branch1 = build_branch(dr, roots.positive[0]);
  st.branch2 = build_branch(dr, roots.positive[1]);
  st.cos2theta = mixing_cos2theta(st.branch1, st.branch2, dr);
  st.theta = 0.5 * std::acos(st.cos2theta);
  st.Pi = roots.positive[0] * roots.positive[1];
  st.E_sum = roots.positive[0] + roots.positive[1];
  st.E_diff = roots.positive[0] - roots.positive[1];
  return st;
}

Vector4c evaluate_lab_wavefunction(const DiracBranch& br, const DiracReduced& dr, double x, double y, double z,
                                   double t) {
  const PhysicalParams& ph = dr.source.physical;
  const double angle = ph.Omega * t - dr.source.k() * z;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double xr = x * c + y * s;
  const double yr = -x * s + y * c;
  const cplx D = -0.5 * dr.d * (xr * xr + yr * yr) + br.d1 * xr + br.d2 * yr - br.d2 * br.d2 / (2.0 * dr.d);
  const cplx phase = std::exp(-kI * br.energy * t / ph.hbar + kI * ph.p * z / ph.hbar + D);
  return phase * (rotation_operator(angle) * br.amplitudes);
}

Vector4c evaluate_lab_wavefunction(const TwoBranchState& st, const DiracReduced& dr, double x, double y, double z,
                                   double t) {
  return std::cos(st.theta) * evaluate_lab_wavefunction(st.branch1, dr, x, y, z, t) +
         std::sin(st.theta) * evaluate_lab_wavefunction(st.branch2, dr, x, y, z, t);
}

double spin_amplitude(const TwoBranchState& st, const DiracReduced& dr, AmplitudeFormula formula) {
  const double width = formula == AmplitudeFormula::Verified ? 2.0 * dr.d : dr.d;
  const cplx gap = st.branch1.d2 - st.branch2.d2;
  const double overlap = std::exp(-(gap * gap).real() / width);
  const double sign = consistent_case2(dr) ? -1.0 : 1.0;
  return sign * dr.h * dr.h * st.Pi * st.branch1.N * st.branch2.N * overlap * std::sin(2.0 * st.theta);
}

double spin_frequency(const TwoBranchState& st, const DiracReduced& dr, FrequencyFormula formula) {
  const PhysicalParams& ph = dr.source.physical;
  const double scale = formula == FrequencyFormula::Physical ? ph.mass * ph.light_speed * ph.light_speed : 1.0;
  return scale * st.E_diff / ph.hbar;
}

SpinTrace spin_oscillation(const TwoBranchState& st, const DiracReduced& dr, const std::vector<double>& times,
                           const SpinOscillationOptions& options) {
  SpinTrace trace;
  trace.source = TraceSource::ClosedForm;
  trace.times = times;
  trace.amplitude = spin_amplitude(st, dr, options.amplitude);
  trace.frequency = spin_frequency(st, dr, options.frequency);
  trace.constant_part = 0.0;
  for (double t : times) trace.s3.push_back(trace.amplitude * std::cos(trace.frequency * t));
  return trace;
}

SpinTrace spin_oscillation_quadrature(const TwoBranchState& st, const DiracReduced& dr,
                                      const std::vector<double>& times, double rel_tol) {
  SpinTrace trace = spin_oscillation(st, dr, {});
  trace.source = TraceSource::Quadrature;
  trace.times = times;
  const PhysicalParams& ph = dr.source.physical;
  const Matrix4c gen = spinor::rotation_generator();
  const double c1 = std::cos(st.theta);
  const double c2 = std::sin(st.theta);
  const Eigen::Vector2d l1(st.branch1.d1.real(), st.branch1.d2.real());
  const Eigen::Vector2d l2(st.branch2.d1.real(), st.branch2.d2.real());
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;

  // The branch envelopes can be centred far apart, so the density is split
  // into its two diagonal pieces and the cross piece, each on its own frame.
  auto piece = [&](const DiracBranch& a, const DiracBranch& b, const Eigen::Vector2d& l_rot, double t) {
    const double angle = ph.Omega * t;
    Eigen::Matrix2d R;
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const GaussianFrame frame = frame_for_envelope(-dr.d * Eigen::Matrix2d::Identity(), R * l_rot);
    return integrate_plane(
               [&](double x, double y) {
                 const Vector4c pa = evaluate_lab_wavefunction(a, dr, x, y, 0.0, t);
                 const Vector4c pb = evaluate_lab_wavefunction(b, dr, x, y, 0.0, t);
                 return -0.5 * kI * (pa.adjoint() * gen * pb)(0);
               },
               frame, opts)
        .value;
  };
  // |Psi1^dag G Psi2| <= |Psi1| |Psi2| / 2, whose integral is a real Gaussian.
  const double cross_bound =
      0.5 * st.branch1.amplitudes.norm() * st.branch2.amplitudes.norm() * kPi / dr.d *
      std::exp((l1 + l2).squaredNorm() / (4.0 * dr.d) -
               ((st.branch1.d2 * st.branch1.d2).real() + (st.branch2.d2 * st.branch2.d2).real()) / (2.0 * dr.d));
  for (double t : times) {
    const cplx s11 = piece(st.branch1, st.branch1, l1, t);
    const cplx s22 = piece(st.branch2, st.branch2, l2, t);
    const cplx s12 = cross_bound > rel_tol * (std::abs(s11) + std::abs(s22) + 1e-300)
                         ? piece(st.branch1, st.branch2, 0.5 * (l1 + l2), t)
                         : cplx{0.0, 0.0};
    trace.s3.push_back(c1 * c1 * s11.real() + c2 * c2 * s22.real() + 2.0 * c1 * c2 * s12.real());
  }
  return trace;
}

}  // namespace rotfield
