#include <doctest.h>

#include "rotfield/dirac_exact.hpp"
#include "rotfield/errors.hpp"

#include <cmath>
#include <random>

using namespace rotfield;

namespace {

DiracReduced near_resonance(int field_case) {
  DiracParams dp;
  dp.physical.H_z = field_case == 1 ? 1.0 : -1.0;
  dp.physical.H = 0.05;
  dp.physical.Omega = field_case == 1 ? 1.0 : -1.0;
  return with_scalars(reduce_dirac(dp), field_case == 1 ? 0.996 : -0.996, 0.005, 0.01);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("cubic roots against an independent high-precision solve") {
  const CubicRoots r = cubic_roots(0.7, 0.01, 0.05);
  CHECK(std::abs(r.roots[0] - cplx(0.99917844622211172833, 0.0)) < 1e-13);
  CHECK(std::abs(r.roots[1] - cplx(0.69657080203139846273, 0.0)) < 1e-13);
  CHECK(std::abs(r.roots[2] - cplx(-1.0057492482535101911, 0.0)) < 1e-13);
  REQUIRE(r.positive.size() == 2);
  for (double res : r.residuals) CHECK(res < 1e-14);
}

TEST_CASE("without detuning and wave the roots are 1, P and -1") {
  for (double P : {-0.8, 0.3, 0.5, 2.5}) {
    const CubicRoots r = cubic_roots(P, 0.0, 0.0);
    std::vector<double> got;
    for (const auto& z : r.roots) {
      CHECK(std::abs(z.imag()) < 1e-12);
      got.push_back(z.real());
    }
    std::vector<double> want = {1.0, P, -1.0};
    std::sort(want.rbegin(), want.rend());
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  // double root at E = 1 is still found
  const CubicRoots d = cubic_roots(1.0, 0.0, 0.0);
  CHECK(d.roots[0].real() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(d.roots[1].real() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("random cubics: polished roots satisfy the polynomial") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double P = 2.0 * u(rng), nu = 0.2 * u(rng), h = 0.5 * u(rng);
    const CubicRoots r = cubic_roots(P, nu, h);
    const auto c = cubic_coefficients(P, nu, h);
    for (const auto& z : r.roots) {
      const cplx p = ((z + c[0]) * z + c[1]) * z + c[2];
      CHECK(std::abs(p) < 1e-12 * (1.0 + std::pow(std::abs(z), 3)));
    }
    CHECK(r.roots[0].real() >= r.roots[1].real());
    CHECK(r.roots[1].real() >= r.roots[2].real());
  }
}

TEST_CASE("branch bispinor normalization") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const DiracReduced base = near_resonance(1);
  for (int trial = 0; trial < 200; ++trial) {
    const DiracReduced dr = with_scalars(base, 0.2 + 1.5 * u(rng), 0.1 * u(rng), 0.3 * u(rng));
    const double E = 0.1 + 2.0 * u(rng);
    if (std::abs(E - dr.E0) < 1e-3) continue;
    const DiracBranch b = build_branch(dr, E);
    const double weight = (E * E + 1.0) * (E - dr.pole) * (E - dr.pole) + dr.h * dr.h * E * E;
    CHECK(b.N * b.N * weight == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.spinor.squaredNorm() == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("at h = 0 the E = 1 state is a single lower component") {
  const DiracReduced dr = with_scalars(near_resonance(1), 0.5, 0.0, 0.0);
  const DiracBranch b = build_branch(dr, 1.0);
  CHECK(std::abs(b.spinor(0)) < 1e-15);
  CHECK(std::abs(b.spinor(1)) < 1e-15);
  CHECK(std::abs(b.spinor(2)) < 1e-15);
  CHECK(std::abs(b.spinor(3)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(b.d2) < 1e-15);
}

TEST_CASE("mixing formula agrees with the spin-moment route") {
  for (int c : {1, 2}) {
    const DiracReduced dr = near_resonance(c);
    const TwoBranchState st = make_two_branch_state(dr);
    CHECK(st.branch1.E_script > st.branch2.E_script);
    CHECK(st.cos2theta == doctest::Approx(mixing_cos2theta_from_moments(st.branch1, st.branch2)).epsilon(1e-10));
    CHECK(std::cos(2.0 * st.theta) == doctest::Approx(st.cos2theta));
  }
}

TEST_CASE("mixed state cancels the constant part of s3") {
  const DiracReduced dr = near_resonance(1);
  const TwoBranchState st = make_two_branch_state(dr);
  const double w = spin_frequency(st, dr);
  std::vector<double> t;
  for (int i = 0; i < 48; ++i) t.push_back(i * 4.0 * kPi / w / 47.0);
  const auto tr = spin_oscillation_quadrature(st, dr, t);
  const CosineFit fit = fit_cosine(tr.times, tr.s3, 0.9 * w, 1.1 * w, 200);
  CHECK(std::abs(fit.constant) < 1e-8);
  CHECK(fit.omega == doctest::Approx(w).epsilon(1e-6));
  CHECK(fit.a == doctest::Approx(spin_amplitude(st, dr)).epsilon(1e-6));
}

TEST_CASE("closed-form s3 matches quadrature of the lab wavefunction") {
  for (int c : {1, 2}) {
    const DiracReduced dr = near_resonance(c);
    const TwoBranchState st = make_two_branch_state(dr);
    const std::vector<double> t = {0.0, 0.7, 13.0, 100.0};
    const auto a = spin_oscillation(st, dr, t);
    const auto b = spin_oscillation_quadrature(st, dr, t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(a.s3[i] - b.s3[i]) < 1e-10);
    CHECK(spin_frequency(st, dr) == doctest::Approx(st.E_diff));
    CHECK(spin_frequency(st, dr, FrequencyFormula::Literal) == doctest::Approx(st.E_diff));
  }
}

TEST_CASE("case-two amplitude has the opposite sign") {
  const DiracReduced d1 = near_resonance(1);
  const DiracReduced d2 = near_resonance(2);
  const double a1 = spin_amplitude(make_two_branch_state(d1), d1);
  const double a2 = spin_amplitude(make_two_branch_state(d2), d2);
  CHECK(a1 * a2 < 0.0);
}

TEST_CASE("rotation operator") {
  const Matrix4c r = rotation_operator(0.8);
  const Matrix4c g = spinor::rotation_generator();
  Matrix4c expect = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) expect(i, i) = std::exp(-0.4 * g(i, i));
  CHECK((r - expect).norm() < 1e-14);
  CHECK((rotation_operator(0.3) * rotation_operator(-0.3) - Matrix4c::Identity()).norm() < 1e-15);
}

TEST_CASE("Dirac error kinds") {
  DiracParams dp;
  dp.physical.H_z = 1.0;
  dp.physical.H = 0.05;
  dp.physical.Omega = 0.0;
  CHECK(kind_of([&] { reduce_dirac(dp); }) == ErrorKind::ZeroFrequency);

  const DiracReduced base = near_resonance(1);
  // P < 0 without wave: only E = 1 is positive
  CHECK(kind_of([&] { solve_cubic(with_scalars(base, -0.5, 0.0, 0.0)); }) == ErrorKind::NoTwoPositiveRoots);
  CHECK(kind_of([&] { build_branch(with_scalars(base, 0.5, 0.0, 0.0), 0.5); }) == ErrorKind::SpectralPole);
}
