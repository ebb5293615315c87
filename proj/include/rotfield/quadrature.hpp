#pragma once

// Tensor-product Gauss-Hermite integration over the plane for integrands that
// decay like a Gaussian. The caller supplies an affine frame x = center + S u
// that roughly matches the integrand's envelope; accuracy is checked by node
// doubling, never assumed.

#include "rotfield/param_core.hpp"

#include <functional>
#include <vector>

namespace rotfield {

struct QuadratureResult {
  cplx value{0.0, 0.0};
  double estimated_error = 0.0;
  int nodes_used = 0;  // per dimension
};

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight function exp(-u^2)
};

/// Golub-Welsch rule with n nodes. Cached; safe to call concurrently.
const GaussHermiteRule& gauss_hermite(int n);

struct GaussianFrame {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Matrix2d scale = Eigen::Matrix2d::Identity();
};

/// Frame for an envelope exp(x^T Q x + 2 l^T x) with Q negative definite,
/// sized so that the weight exp(-|u|^2) matches exp(x^T Q x) exactly.
GaussianFrame frame_for_envelope(const Eigen::Matrix2d& Q, const Eigen::Vector2d& l);

struct QuadratureOptions {
  double rel_tol = 1e-10;
  int n_start = 16;
  int n_max = 256;
};

using PlaneIntegrand = std::function<cplx(double x, double y)>;

/// Integrates over R^2 with doubling n -> 2n until the change is below
/// rel_tol times the integral of |F|. Throws QuadratureNotConverged.
QuadratureResult integrate_plane(const PlaneIntegrand& integrand, const GaussianFrame& frame,
                                 const QuadratureOptions& options = {});

}  // namespace rotfield
