#include "rotfield/quadrature.hpp"

#include "rotfield/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace rotfield {

namespace {

GaussHermiteRule build_rule(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double sqrt_pi = std::sqrt(kPi);
  for (int i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = sqrt_pi * v0 * v0;
  }
  return rule;
}

struct PlaneSum {
  cplx value;
  double magnitude;
};

PlaneSum sum_plane(const PlaneIntegrand& integrand, const GaussianFrame& frame, int n) {
  const auto& rule = gauss_hermite(n);
  const double jac = std::abs(frame.scale.determinant());
  cplx total{0.0, 0.0};
  double magnitude = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ui = rule.nodes[static_cast<std::size_t>(i)];
    const double wi = rule.weights[static_cast<std::size_t>(i)] * std::exp(ui * ui);
    for (int j = 0; j < n; ++j) {
      const double uj = rule.nodes[static_cast<std::size_t>(j)];
      const double wj = rule.weights[static_cast<std::size_t>(j)] * std::exp(uj * uj);
      const Eigen::Vector2d x = frame.center + frame.scale * Eigen::Vector2d(ui, uj);
      const cplx v = integrand(x(0), x(1));
      total += wi * wj * v;
      magnitude += wi * wj * std::abs(v);
    }
  }
  return {jac * total, jac * magnitude};
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Hermite rule needs n >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1) {
      slot = std::make_unique<GaussHermiteRule>(GaussHermiteRule{{0.0}, {std::sqrt(kPi)}});
    } else {
      slot = std::make_unique<GaussHermiteRule>(build_rule(n));
    }
  }
  return *slot;
}

GaussianFrame frame_for_envelope(const Eigen::Matrix2d& Q, const Eigen::Vector2d& l) {
  const Eigen::Matrix2d neg = -0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(neg);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "envelope quadratic form is not negative definite");
  }
  GaussianFrame frame;
  frame.center = neg.ldlt().solve(l);
  frame.scale = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  return frame;
}

QuadratureResult integrate_plane(const PlaneIntegrand& integrand, const GaussianFrame& frame,
                                 const QuadratureOptions& options) {
  int n = std::max(2, options.n_start);
  PlaneSum previous = sum_plane(integrand, frame, n);
  while (2 * n <= options.n_max) {
    n *= 2;
    const PlaneSum current = sum_plane(integrand, frame, n);
    const double change = std::abs(current.value - previous.value);
    if (change <= options.rel_tol * current.magnitude) {
      return {current.value, change, n};
    }
    previous = current;
  }
  throw Error(ErrorKind::QuadratureNotConverged,
              "no convergence with " + std::to_string(n) + " nodes per dimension");
}

}  // namespace rotfield
