#include <doctest.h>

#include "rotfield/errors.hpp"
#include "rotfield/param_core.hpp"

#include <cmath>
#include <random>

using namespace rotfield;

TEST_CASE("magnetic moment follows g e hbar / 2 m c") {
  PhysicalParams p;
  CHECK(p.mu() == doctest::Approx(-1.0));
  p.g_factor = 2.4;
  p.hbar = 2.0;
  p.mass = 4.0;
  CHECK(p.mu() == doctest::Approx(2.4 * -1.0 * 2.0 / 8.0));
  CHECK(mu_from_g(1.0, p) == doctest::Approx(-0.25));
}

TEST_CASE("validate rejects unphysical inputs") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = PhysicalParams{};
  p.H = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = PhysicalParams{};
  p.Omega = std::nan("");
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("reduced constants for a reference field") {
  PhysicalParams p;
  p.H_z = 1.0;
  p.H = 0.3;
  p.Omega = 0.4;
  p.p = 0.5;
  const auto rp = reduce_pauli(p);
  CHECK(rp.g1 == doctest::Approx(0.25));
  CHECK(rp.g2 == doctest::Approx(0.34));
  CHECK(rp.f == doctest::Approx(-0.2));
  CHECK(rp.b == doctest::Approx(2.0 * 0.5 * -1.0 * 0.3));
  CHECK(rp.Delta == doctest::Approx(0.4 - 2.0));
  CHECK(rp.spin_coupling == doctest::Approx(-0.6));
  CHECK(rp.rho == doctest::Approx(std::hypot(0.6, 1.6)));
  CHECK(rp.gamma == doctest::Approx(std::atan2(-0.6, -1.6)));
}

TEST_CASE("gamma and rho diagonalize the spin block") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    PhysicalParams p;
    p.H_z = u(rng);
    p.H = std::abs(u(rng));
    p.Omega = u(rng);
    p.g_factor = 2.0 + u(rng);
    const auto rp = reduce_pauli(p);
    Eigen::Matrix2d M;
    M << rp.Delta, rp.spin_coupling, rp.spin_coupling, -rp.Delta;
    Eigen::Matrix2d R;
    const double c = std::cos(0.5 * rp.gamma), s = std::sin(0.5 * rp.gamma);
    R << c, -s, s, c;
    const Eigen::Matrix2d D = R.transpose() * M * R;
    CHECK(std::abs(D(0, 1)) < 1e-12);
    CHECK(D(0, 0) == doctest::Approx(rp.rho));
    CHECK(D(1, 1) == doctest::Approx(-rp.rho));
  }
}

TEST_CASE("Dirac matrices satisfy the Clifford relations") {
  const Matrix4c I = spinor::identity4();
  for (int a = 1; a <= 3; ++a) {
    CHECK((spinor::alpha(a) * spinor::beta() + spinor::beta() * spinor::alpha(a)).norm() < 1e-15);
    for (int b = 1; b <= 3; ++b) {
      const Matrix4c anti = spinor::alpha(a) * spinor::alpha(b) + spinor::alpha(b) * spinor::alpha(a);
      CHECK((anti - (a == b ? 2.0 : 0.0) * I).norm() < 1e-15);
    }
  }
  CHECK((spinor::beta() * spinor::beta() - I).norm() < 1e-15);
  CHECK((spinor::rotation_generator() - kI * spinor::spin_z()).norm() < 1e-15);
  CHECK((spinor::sigma(1) * spinor::sigma(2) - kI * spinor::sigma(3)).norm() < 1e-15);
}
