#include "rotfield/param_core.hpp"

#include "rotfield/errors.hpp"

#include <cmath>
#include <string>

namespace rotfield {

double PhysicalParams::mu() const { return mu_from_g(g_factor, *this); }

void PhysicalParams::validate() const {
  const double fields[] = {hbar, mass, charge, light_speed, H_z, H, Omega, p, g_factor};
  for (double v : fields) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite physical parameter");
  }
  if (hbar <= 0.0) throw Error(ErrorKind::InvalidArgument, "hbar must be positive");
  if (mass <= 0.0) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (light_speed <= 0.0) throw Error(ErrorKind::InvalidArgument, "light_speed must be positive");
  if (H < 0.0) throw Error(ErrorKind::InvalidArgument, "transverse amplitude H must be >= 0");
}

double mu_from_g(double g, const PhysicalParams& params) {
  return g * params.charge * params.hbar / (2.0 * params.mass * params.light_speed);
}

ReducedPauliParams reduce_pauli(const PhysicalParams& params) {
  params.validate();
  const double hb = params.hbar;
  const double m = params.mass;
  const double e = params.charge;
  const double c = params.light_speed;
  const double mu = params.mu();

  const double coupling = e * e / (hb * hb * c * c);
  ReducedPauliParams rp;
  rp.g1 = coupling * 0.25 * params.H_z * params.H_z;
  rp.g2 = rp.g1 + coupling * params.H * params.H;
  rp.b = 2.0 * params.p * e * params.H / (hb * hb * c);
  rp.f = 2.0 * m * params.Omega / hb + e * params.H_z / (hb * c);
  rp.Delta = m * params.Omega / hb + 2.0 * m * mu * params.H_z / (hb * hb);
  rp.spin_coupling = 2.0 * m * mu * params.H / (hb * hb);
  rp.rho = std::hypot(rp.spin_coupling, rp.Delta);
  rp.gamma = std::atan2(rp.spin_coupling, rp.Delta);
  return rp;
}

namespace spinor {
namespace {

Matrix4c block_offdiag(const Matrix2c& s) {
  Matrix4c a = Matrix4c::Zero();
  a.topRightCorner<2, 2>() = s;
  a.bottomLeftCorner<2, 2>() = s;
  return a;
}

struct Tables {
  Matrix2c id2 = Matrix2c::Identity();
  std::array<Matrix2c, 3> s;
  Matrix4c id4 = Matrix4c::Identity();
  std::array<Matrix4c, 3> a;
  Matrix4c b = Matrix4c::Zero();
  Matrix4c sz = Matrix4c::Zero();

  Tables() {
    s[0] << 0, 1, 1, 0;
    s[1] << 0, -kI, kI, 0;
    s[2] << 1, 0, 0, -1;
    for (int k = 0; k < 3; ++k) a[k] = block_offdiag(s[k]);
    b.diagonal() << 1, 1, -1, -1;
    sz.diagonal() << 1, -1, 1, -1;
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

const Matrix2c& identity2() { return tables().id2; }
const Matrix2c& sigma(int k) { return tables().s.at(static_cast<std::size_t>(k - 1)); }
const Matrix4c& identity4() { return tables().id4; }
const Matrix4c& alpha(int k) { return tables().a.at(static_cast<std::size_t>(k - 1)); }
const Matrix4c& beta() { return tables().b; }
Matrix4c rotation_generator() { return alpha(1) * alpha(2); }
const Matrix4c& spin_z() { return tables().sz; }

}  // namespace spinor

}  // namespace rotfield
