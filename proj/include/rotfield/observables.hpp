#pragma once

#include <string_view>
#include <vector>

namespace rotfield {

enum class TraceSource { ClosedForm, Quadrature, GridDynamics };

constexpr std::string_view to_string(TraceSource s) {
  switch (s) {
    case TraceSource::ClosedForm: return "closed-form";
    case TraceSource::Quadrature: return "quadrature";
    case TraceSource::GridDynamics: return "grid-dynamics";
  }
  return "unknown";
}

/// Time series of the spin expectation s3(t) = constant + amplitude cos(frequency t)
/// (the last three fields describe the model the trace was produced from; a
/// quadrature trace carries the closed-form frequency it was sampled against).
struct SpinTrace {
  std::vector<double> times;
  std::vector<double> s3;
  double frequency = 0.0;
  double amplitude = 0.0;
  double constant_part = 0.0;
  TraceSource source = TraceSource::ClosedForm;
};

/// Least-squares fit values ~ constant + a cos(omega t) + b sin(omega t), with
/// omega searched on [omega_lo, omega_hi] (coarse scan, then golden section).
struct CosineFit {
  double omega = 0.0;
  double constant = 0.0;
  double a = 0.0;
  double b = 0.0;
  double rms_residual = 0.0;
};

CosineFit fit_cosine(const std::vector<double>& times, const std::vector<double>& values, double omega_lo,
                     double omega_hi, int scan_points = 2000);

}  // namespace rotfield
