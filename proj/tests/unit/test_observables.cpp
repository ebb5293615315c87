#include <doctest.h>

#include "rotfield/observables.hpp"

#include <cmath>

using namespace rotfield;

TEST_CASE("cosine fit recovers a noiseless signal") {
  std::vector<double> t, v;
  for (int i = 0; i < 200; ++i) {
    t.push_back(0.05 * i);
    v.push_back(0.1 + 0.4 * std::cos(1.7 * t.back()) - 0.2 * std::sin(1.7 * t.back()));
  }
  const CosineFit fit = fit_cosine(t, v, 1.0, 3.0);
  CHECK(fit.omega == doctest::Approx(1.7).epsilon(1e-9));
  CHECK(fit.constant == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(fit.a == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(fit.b == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(fit.rms_residual < 1e-10);
}

TEST_CASE("trace source names") {
  CHECK(to_string(TraceSource::GridDynamics) == "grid-dynamics");
  CHECK(to_string(TraceSource::ClosedForm) == "closed-form");
}
