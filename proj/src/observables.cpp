#include "rotfield/observables.hpp"

#include "rotfield/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rotfield {

namespace {

CosineFit fit_at(const std::vector<double>& t, const std::vector<double>& v, double omega) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd M(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    M(i, 0) = 1.0;
    M(i, 1) = std::cos(omega * ti);
    M(i, 2) = std::sin(omega * ti);
    y(i) = v[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = M.colPivHouseholderQr().solve(y);
  CosineFit fit;
  fit.omega = omega;
  fit.constant = c(0);
  fit.a = c(1);
  fit.b = c(2);
  fit.rms_residual = std::sqrt((M * c - y).squaredNorm() / static_cast<double>(n));
  return fit;
}

}  // namespace

CosineFit fit_cosine(const std::vector<double>& times, const std::vector<double>& values, double omega_lo,
                     double omega_hi, int scan_points) {
  if (times.size() != values.size() || times.size() < 4) {
    throw Error(ErrorKind::InvalidArgument, "cosine fit needs at least 4 matching samples");
  }
  if (!(omega_hi > omega_lo) || scan_points < 3) throw Error(ErrorKind::InvalidArgument, "empty frequency window");
  const double step = (omega_hi - omega_lo) / (scan_points - 1);
  CosineFit best = fit_at(times, values, omega_lo);
  int best_k = 0;
  for (int k = 1; k < scan_points; ++k) {
    const CosineFit f = fit_at(times, values, omega_lo + k * step);
    if (f.rms_residual < best.rms_residual) {
      best = f;
      best_k = k;
    }
  }
  double lo = omega_lo + std::max(0, best_k - 1) * step;
  double hi = omega_lo + std::min(scan_points - 1, best_k + 1) * step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = fit_at(times, values, x1).rms_residual;
  double f2 = fit_at(times, values, x2).rms_residual;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = fit_at(times, values, x1).rms_residual;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = fit_at(times, values, x2).rms_residual;
    }
  }
  const CosineFit refined = fit_at(times, values, 0.5 * (lo + hi));
  return refined.rms_residual <= best.rms_residual ? refined : best;
}

}  // namespace rotfield
