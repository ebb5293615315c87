#include "rotfield/cli.hpp"

#include "rotfield/dirac_exact.hpp"
#include "rotfield/evolve.hpp"
#include "rotfield/oracle.hpp"
#include "rotfield/pauli_exact.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace rotfield::cli {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kModes = {"pauli-spectrum", "pauli-zone", "pauli-spin", "dirac-spectrum",
                                         "dirac-spin",     "verify",     "evolve",     "sweep"};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class J>
void dump_into(std::ostringstream& os, const J& v, int indent, int depth) {
  const bool pretty = indent >= 0;
  const std::string pad = pretty ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string pad_end = pretty ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = pretty ? "\n" : "";
  switch (v.type()) {
    case J::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << J(it.key()).dump() << (pretty ? ": " : ":");
        dump_into(os, it.value(), indent, depth + 1);
      }
      os << nl << pad_end << '}';
      return;
    }
    case J::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& e : v) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        dump_into(os, e, indent, depth + 1);
      }
      os << nl << pad_end << ']';
      return;
    }
    case J::value_t::number_float: {
      const double d = v.template get<double>();
      os << (std::isfinite(d) ? fmt17(d) : std::string("null"));
      return;
    }
    default:
      os << v.dump();
  }
}

template <class J>
std::string dump_any(const J& v, int indent) {
  std::ostringstream os;
  dump_into(os, v, indent, 0);
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string at_time(const std::string& name, double t) { return name + "(t=" + fmt17(t) + ")"; }

// ---- config readers ---------------------------------------------------------

PhysicalParams physical_from(const json& cfg) {
  const json& p = cfg.at("physical");
  PhysicalParams ph;
  ph.hbar = p.at("hbar").get<double>();
  ph.mass = p.at("mass").get<double>();
  ph.charge = p.at("charge").get<double>();
  ph.light_speed = p.at("light_speed").get<double>();
  ph.H_z = p.at("H_z").get<double>();
  ph.H = p.at("H").get<double>();
  ph.Omega = p.at("Omega").get<double>();
  ph.p = p.at("p").get<double>();
  ph.g_factor = p.at("g_factor").get<double>();
  ph.validate();
  return ph;
}

cplx complex_from(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw UsageError("complex values are a number or [re, im]");
}

DiracReduced dirac_from(const json& cfg) {
  const json& d = cfg.at("dirac");
  DiracParams dp;
  dp.physical = physical_from(cfg);
  dp.epsilon_dir = d.at("epsilon_dir").get<int>();
  const std::string conv = d.at("case2").get<std::string>();
  if (conv == "consistent") {
    dp.case2 = Case2Convention::Consistent;
  } else if (conv == "as-printed") {
    dp.case2 = Case2Convention::AsPrinted;
  } else {
    throw UsageError("dirac.case2 must be consistent or as-printed");
  }
  DiracReduced dr = reduce_dirac(dp);
  if (!d.at("E0").is_null() || !d.at("nu").is_null() || !d.at("h").is_null()) {
    dr = with_scalars(dr, d.at("E0").is_null() ? dr.E0 : d.at("E0").get<double>(),
                      d.at("nu").is_null() ? dr.nu : d.at("nu").get<double>(),
                      d.at("h").is_null() ? dr.h : d.at("h").get<double>());
  }
  return dr;
}

std::vector<double> times_from(const json& cfg) {
  const json& t = cfg.at("times");
  const double a = t.at("start").get<double>();
  const double b = t.at("stop").get<double>();
  const int n = t.at("count").get<int>();
  if (n < 1) throw UsageError("times.count must be >= 1");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return out;
}

struct ModeOutput {
  std::vector<Row> rows;
  json diagnostics = json::array();
  bool verification_failed = false;
};

void add(ModeOutput& out, const std::string& label, double value, double residual = 0.0, double imag = 0.0) {
  out.rows.push_back({{}, label, value, imag, residual});
}

void add(ModeOutput& out, const std::string& label, cplx value, double residual = 0.0) {
  out.rows.push_back({{}, label, value.real(), value.imag(), residual});
}

void fail(ModeOutput& out, const std::string& what) {
  out.verification_failed = true;
  out.diagnostics.push_back({{"kind", "VerificationFailure"}, {"message", what}});
}

// ---- modes ------------------------------------------------------------------

ModeOutput pauli_spectrum(const json& cfg) {
  ModeOutput out;
  const PhysicalParams ph = physical_from(cfg);
  const ReducedPauliParams rp = reduce_pauli(ph);
  DSystemOptions opts;
  opts.residual_tol = cfg.at("numeric").at("residual_tol").get<double>();
  const QuadraticForm qf = solve_quadratic_system(rp, opts);
  const std::string formula_name = cfg.at("pauli").at("level_formula").get<std::string>();
  if (formula_name != "verified" && formula_name != "as-printed") {
    throw UsageError("pauli.level_formula must be verified or as-printed");
  }
  const LevelFormula formula = formula_name == "verified" ? LevelFormula::Verified : LevelFormula::AsPrinted;

  add(out, "g1", rp.g1);
  add(out, "g2", rp.g2);
  add(out, "f", rp.f);
  add(out, "b", rp.b);
  add(out, "Delta", rp.Delta);
  add(out, "gamma", rp.gamma);
  add(out, "rho", rp.rho);

  const auto res = coefficient_residuals(qf, rp);
  double worst = 0.0;
  for (const auto& r : res) worst = std::max(worst, std::abs(r));
  const double scale = 1.0 + std::max({std::abs(rp.g1), std::abs(rp.g2), std::abs(rp.b), rp.f * rp.f});
  if (!(worst <= opts.residual_tol * scale)) fail(out, "coefficient residual " + fmt17(worst));
  add(out, "d11", qf.d11, worst);
  add(out, "d12", qf.d12, worst);
  add(out, "d22", qf.d22, worst);
  add(out, "d1", qf.d1, worst);
  add(out, "d2", qf.d2, worst);
  add(out, "tau", level_splitting(qf, rp, ph, formula));

  const double split = ph.hbar * ph.hbar * rp.rho / ph.mass;
  const int max_level = cfg.at("pauli").at("max_level").get<int>();
  if (max_level < 0 || max_level > 2) throw UsageError("pauli.max_level must be 0, 1 or 2");
  for (int n = 0; n <= max_level; ++n) {
    const auto levels = energy_levels(rp, qf, ph, n, formula);
    for (std::size_t i = 0; i + 1 < levels.size(); i += 2) {
      const EnergyLevel& up = levels[i];
      const EnergyLevel& down = levels[i + 1];
      const double denom = std::max({std::abs(split), std::abs(up.E), std::abs(down.E), 1e-300});
      const double identity = std::abs((up.E - down.E) + split) / denom;
      if (!(identity <= 1e-12)) fail(out, "level identity violated at n=" + std::to_string(n));
      const char* tb = up.tau_branch == TauBranch::Plus ? "+" : (up.tau_branch == TauBranch::Minus ? "-" : "0");
      const std::string base = "E(n=" + std::to_string(n) + ";tau=" + tb;
      add(out, base + ";sigma=+)", up.E, identity);
      add(out, base + ";sigma=-)", down.E, identity);
    }
  }
  return out;
}

ModeOutput pauli_zone(const json& cfg) {
  ModeOutput out;
  const json& z = cfg.at("zone").at("H_over_Hz");
  double ratio = 0.0;
  if (z.is_null()) {
    const PhysicalParams ph = physical_from(cfg);
    if (ph.H_z == 0.0) throw UsageError("zone.H_over_Hz is unset and physical.H_z = 0");
    ratio = ph.H / ph.H_z;
  } else {
    ratio = z.get<double>();
  }
  const GZone zone = forbidden_g_zone(ratio);
  add(out, "H_over_Hz", ratio);
  add(out, "lower.lo", zone.lower.lo);
  add(out, "lower.hi", zone.lower.hi);
  add(out, "upper.lo", zone.upper.lo);
  add(out, "upper.hi", zone.upper.hi);
  const double g = cfg.at("physical").at("g_factor").get<double>();
  add(out, "g_factor_in_zone", zone.contains(g) ? 1.0 : 0.0);
  return out;
}

ModeOutput pauli_spin(const json& cfg) {
  ModeOutput out;
  const PhysicalParams ph = physical_from(cfg);
  const PauliState st =
      make_pauli_state(ph, complex_from(cfg.at("pauli").at("C_plus")), complex_from(cfg.at("pauli").at("C_minus")));
  const auto times = times_from(cfg);
  const SpinTrace closed = spin_trace(st, times);
  std::vector<double> check(times.size(), 0.0);
  if (cfg.at("numeric").at("quadrature").get<bool>()) {
    const SpinTrace quad = spin_trace_quadrature(st, times, cfg.at("numeric").at("quadrature_tol").get<double>());
    for (std::size_t i = 0; i < times.size(); ++i) check[i] = std::abs(quad.s3[i] - closed.s3[i]);
  }
  add(out, "gamma", st.gamma);
  add(out, "E_plus", st.E_plus);
  add(out, "E_minus", st.E_minus);
  add(out, "C_plus", st.C_plus);
  add(out, "C_minus", st.C_minus);
  for (std::size_t i = 0; i < times.size(); ++i) add(out, at_time("s3", times[i]), closed.s3[i], check[i]);
  return out;
}

ModeOutput dirac_spectrum(const json& cfg) {
  ModeOutput out;
  const DiracReduced dr = dirac_from(cfg);
  add(out, "d", dr.d);
  add(out, "h", dr.h);
  add(out, "E0", dr.E0);
  add(out, "nu", dr.nu);
  add(out, "pole", dr.pole);
  const CubicRoots roots = cubic_roots(dr.pole, dr.nu, dr.h);
  const auto a = cubic_coefficients(dr.pole, dr.nu, dr.h);
  for (std::size_t k = 0; k < 3; ++k) {
    const double mag = std::abs(roots.roots[k]);
    const double scale = mag * mag * mag + std::abs(a[0]) * mag * mag + std::abs(a[1]) * mag + std::abs(a[2]);
    const double rel = roots.residuals[k] / std::max(scale, 1e-300);
    if (!(rel <= 1e-12)) fail(out, "cubic residual " + fmt17(rel) + " at root " + std::to_string(k));
    add(out, "root[" + std::to_string(k) + "]", roots.roots[k], rel);
  }
  try {
    const TwoBranchState st = make_two_branch_state(dr);
    add(out, "energy[1]", st.branch1.energy);
    add(out, "energy[2]", st.branch2.energy);
    add(out, "d2[1]", st.branch1.d2);
    add(out, "d2[2]", st.branch2.d2);
    const double moments = mixing_cos2theta_from_moments(st.branch1, st.branch2);
    add(out, "cos2theta", st.cos2theta, std::abs(st.cos2theta - moments));
    add(out, "theta", st.theta);
  } catch (const Error& e) {
    out.diagnostics.push_back({{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"fatal", false}});
  }
  return out;
}

SpinOscillationOptions oscillation_options(const json& cfg) {
  SpinOscillationOptions o;
  const std::string amp = cfg.at("dirac").at("amplitude_formula").get<std::string>();
  const std::string freq = cfg.at("dirac").at("frequency_formula").get<std::string>();
  if (amp != "verified" && amp != "as-printed") throw UsageError("dirac.amplitude_formula: verified or as-printed");
  if (freq != "physical" && freq != "literal") throw UsageError("dirac.frequency_formula: physical or literal");
  o.amplitude = amp == "verified" ? AmplitudeFormula::Verified : AmplitudeFormula::AsPrinted;
  o.frequency = freq == "physical" ? FrequencyFormula::Physical : FrequencyFormula::Literal;
  return o;
}

ModeOutput dirac_spin(const json& cfg) {
  ModeOutput out;
  const DiracReduced dr = dirac_from(cfg);
  const TwoBranchState st = make_two_branch_state(dr);
  const auto times = times_from(cfg);
  const SpinTrace closed = spin_oscillation(st, dr, times, oscillation_options(cfg));
  std::vector<double> check(times.size(), 0.0);
  if (cfg.at("numeric").at("quadrature").get<bool>()) {
    const SpinTrace quad =
        spin_oscillation_quadrature(st, dr, times, cfg.at("numeric").at("quadrature_tol").get<double>());
    for (std::size_t i = 0; i < times.size(); ++i) check[i] = std::abs(quad.s3[i] - closed.s3[i]);
  }
  add(out, "cos2theta", st.cos2theta);
  add(out, "theta", st.theta);
  add(out, "amplitude", closed.amplitude);
  add(out, "frequency", closed.frequency);
  for (std::size_t i = 0; i < times.size(); ++i) add(out, at_time("s3", times[i]), closed.s3[i], check[i]);
  return out;
}

void verify_pauli(const json& cfg, ModeOutput& out) {
  const PhysicalParams ph = physical_from(cfg);
  const ReducedPauliParams rp = reduce_pauli(ph);
  const PauliState st =
      make_pauli_state(ph, complex_from(cfg.at("pauli").at("C_plus")), complex_from(cfg.at("pauli").at("C_minus")));
  const json& num = cfg.at("numeric");
  FiniteDifferenceOptions fd;
  fd.step = num.at("fd_step").get<double>();
  const int samples = num.at("samples").get<int>();
  const double width = envelope_width(st.form);
  const Eigen::Vector2d centre = envelope_center(st.form);

  auto report = [&](const std::string& name, const ResidualReport& r) {
    add(out, name + ".relative", r.relative_residual, r.fd_relative_fine);
    add(out, name + ".order", r.convergence_order);
    if (!(r.relative_residual < 1e-10)) fail(out, name + " analytic residual " + fmt17(r.relative_residual));
    if (!(std::abs(r.convergence_order - 2.0) <= 0.3)) fail(out, name + " order " + fmt17(r.convergence_order));
  };
  report("stationary", pauli_stationary_residual(st.form, rp, stationary_eigenvalue(st.form),
                                                 sample_disc(centre, 4.0 * width, samples), fd));
  const double period = ph.Omega != 0.0 ? 2.0 * kPi / std::abs(ph.Omega) : 1.0;
  report("time_dependent",
         pauli_time_dependent_residual(
             st, ph, sample_events(Eigen::Vector2d::Zero(), centre.norm() + 4.0 * width, width, period, samples), fd));

  BruteForceOptions bf;
  bf.n_starts = num.at("brute_force_starts").get<int>();
  bf.seed = cfg.at("seed").get<std::uint64_t>();
  const auto roots = brute_force_d_system(rp, bf);
  int integrable = 0;
  bool matched = false;
  for (const auto& q : roots) {
    if (!integrable_with_real_energy(q)) continue;
    ++integrable;
    matched = matched || same_form(q, st.form);
  }
  add(out, "brute_force.roots", static_cast<double>(roots.size()));
  add(out, "brute_force.integrable", static_cast<double>(integrable));
  add(out, "brute_force.matches_solver", matched ? 1.0 : 0.0);
  if (!matched) fail(out, "multistart Newton did not reproduce the solver's root");
  if (integrable > 1) fail(out, "multistart Newton found an extra integrable root");

  const QuadratureResult q = gaussian_norm_quadrature(st.form, num.at("quadrature_tol").get<double>());
  const double closed = gaussian_norm(st.form);
  const double rel = std::abs(q.value.real() - closed) / closed;
  add(out, "norm.quadrature", q.value.real(), rel);
  add(out, "norm.closed_form", closed);
  if (!(rel <= 1e-8)) fail(out, "norm mismatch " + fmt17(rel));
}

void verify_dirac(const json& cfg, ModeOutput& out) {
  const DiracReduced dr = dirac_from(cfg);
  const TwoBranchState st = make_two_branch_state(dr);
  FiniteDifferenceOptions fd;
  fd.step = cfg.at("numeric").at("fd_step").get<double>();
  const double width = 1.0 / std::sqrt(dr.d);
  const double t_max = std::abs(2.0 * kPi / dr.source.physical.Omega);
  const auto events = sample_events(Eigen::Vector2d::Zero(), 4.0 * width, width, t_max,
                                    cfg.at("numeric").at("samples").get<int>());
  const auto reports = dirac_residual(st, dr, events, fd);
  for (const auto& r : reports) {
    add(out, "dirac." + r.sign_variant + ".relative", r.relative_residual, r.fd_relative_fine);
    add(out, "dirac." + r.sign_variant + ".order", r.convergence_order);
  }
  std::vector<std::string> names;
  for (const auto& r : reports) {
    if (r.annihilates()) names.push_back(r.sign_variant);
  }
  if (names.empty()) {
    fail(out, "no Dirac sign variant annihilates the state");
  } else {
    for (const auto& n : names) add(out, "dirac.annihilating." + n, 1.0);
  }
  int index = 1;
  for (const DiracBranch* b : {&st.branch1, &st.branch2}) {
    const QuadratureResult q = gaussian_norm_quadrature(*b, dr, cfg.at("numeric").at("quadrature_tol").get<double>());
    const double closed = kPi / dr.d;
    const double rel = std::abs(q.value.real() - closed) / closed;
    add(out, "dirac.norm[" + std::to_string(index++) + "]", q.value.real(), rel);
    if (!(rel <= 1e-8)) fail(out, "Dirac branch norm mismatch " + fmt17(rel));
  }
}

ModeOutput verify(const json& cfg) {
  ModeOutput out;
  const std::string target = cfg.at("verify").at("target").get<std::string>();
  if (target != "pauli" && target != "dirac" && target != "both") {
    throw UsageError("verify.target must be pauli, dirac or both");
  }
  if (target != "dirac") verify_pauli(cfg, out);
  if (target != "pauli") verify_dirac(cfg, out);
  return out;
}

ModeOutput evolve_mode(const json& cfg) {
  ModeOutput out;
  const json& e = cfg.at("evolve");
  PhysicalParams ph = physical_from(cfg);
  RunOptions ro;
  ro.steps = e.at("steps").get<int>();
  ro.checkpoints = e.at("checkpoints").get<int>();
  ro.evolve.stencil_order = e.at("stencil_order").get<int>();
  const int n = e.at("grid").get<int>();
  const double widths = e.at("widths").get<double>();
  const std::string kind = e.at("kind").get<std::string>();
  if (kind == "fidelity") {
    const PauliState st = make_pauli_state(ph, complex_from(cfg.at("pauli").at("C_plus")),
                                           complex_from(cfg.at("pauli").at("C_minus")));
    const Grid2D grid = grid_for_state(st, n, widths);
    check_grid(grid, st);
    double t_final = 0.0;
    if (e.at("t_final").is_null()) {
      if (ph.Omega == 0.0) throw UsageError("evolve.t_final is required when Omega = 0");
      t_final = 2.0 * kPi / std::abs(ph.Omega);
    } else {
      t_final = e.at("t_final").get<double>();
    }
    for (const auto& cp : fidelity_run(st, ph, t_final, grid, ro)) {
      add(out, at_time("overlap", cp.time), cp.overlap);
      add(out, at_time("s3", cp.time), cp.s3);
      add(out, at_time("norm", cp.time), cp.norm);
    }
  } else if (kind == "resonance") {
    if (e.at("at_resonance").get<bool>()) ph.Omega = diagonal_resonance_frequency(ph);
    const PauliState st = make_pauli_state(ph, 1.0, 1.0);
    const Grid2D grid = grid_for_state(st, n, widths);
    check_grid(grid, st);
    double t_final = 0.0;
    if (e.at("t_final").is_null()) {
      if (ph.H == 0.0) throw UsageError("evolve.t_final is required when H = 0");
      t_final = kPi * ph.hbar / std::abs(ph.mu() * ph.H);
    } else {
      t_final = e.at("t_final").get<double>();
    }
    const SpinTrace grid_trace = resonance_demo(ph, grid, t_final, ro);
    const SpinTrace closed = spin_trace(st, grid_trace.times);
    add(out, "Omega", ph.Omega);
    add(out, "gamma", st.gamma);
    for (std::size_t i = 0; i < grid_trace.times.size(); ++i) {
      add(out, at_time("s3", grid_trace.times[i]), grid_trace.s3[i], std::abs(grid_trace.s3[i] - closed.s3[i]));
    }
  } else {
    throw UsageError("evolve.kind must be fidelity or resonance");
  }
  return out;
}

ModeOutput run_mode(const std::string& mode, const json& cfg) {
  if (mode == "pauli-spectrum") return pauli_spectrum(cfg);
  if (mode == "pauli-zone") return pauli_zone(cfg);
  if (mode == "pauli-spin") return pauli_spin(cfg);
  if (mode == "dirac-spectrum") return dirac_spectrum(cfg);
  if (mode == "dirac-spin") return dirac_spin(cfg);
  if (mode == "verify") return verify(cfg);
  if (mode == "evolve") return evolve_mode(cfg);
  throw UsageError("unknown mode " + mode);
}

json error_record(const Error& e) {
  return {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"fatal", true}};
}

struct Axis {
  std::string param;
  std::vector<double> values;
};

std::vector<Axis> axes_from(const json& cfg) {
  std::vector<Axis> axes;
  for (const auto& a : cfg.at("sweep").at("axes")) {
    Axis ax;
    ax.param = a.at("param").get<std::string>();
    if (a.contains("values")) {
      ax.values = a.at("values").get<std::vector<double>>();
    } else {
      const double lo = a.at("start").get<double>();
      const double hi = a.at("stop").get<double>();
      const int n = a.at("count").get<int>();
      if (n < 1) throw UsageError("sweep axis count must be >= 1");
      for (int i = 0; i < n; ++i) ax.values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
    if (ax.values.empty()) throw UsageError("sweep axis " + ax.param + " has no values");
    axes.push_back(ax);
  }
  return axes;
}

json::json_pointer pointer_for(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ForbiddenBand:
    case ErrorKind::DegenerateBoundary:
    case ErrorKind::NoIntegrableBranch:
    case ErrorKind::ComplexEnergy:
    case ErrorKind::NonPositiveNorm:
    case ErrorKind::ZeroFrequency:
    case ErrorKind::NoTwoPositiveRoots:
    case ErrorKind::SpectralPole:
    case ErrorKind::DenominatorZero:
    case ErrorKind::UnphysicalMixing:
      return kDomain;
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::SolverDiverged:
    case ErrorKind::NoAnnihilatingVariant:
      return kVerification;
    case ErrorKind::InvalidArgument:
      return kUsage;
  }
  return kUsage;
}

json default_config() {
  return json::parse(R"({
    "mode": "pauli-spectrum",
    "physical": {"hbar": 1.0, "mass": 1.0, "charge": -1.0, "light_speed": 1.0,
                 "H_z": 1.0, "H": 0.3, "Omega": 0.4, "p": 0.0, "g_factor": 2.0},
    "pauli": {"max_level": 2, "level_formula": "verified", "C_plus": [1.0, 0.0], "C_minus": [0.0, 0.0]},
    "dirac": {"epsilon_dir": 1, "case2": "consistent", "E0": null, "nu": null, "h": null,
              "amplitude_formula": "verified", "frequency_formula": "physical"},
    "zone": {"H_over_Hz": null},
    "times": {"start": 0.0, "stop": 10.0, "count": 11},
    "numeric": {"quadrature": false, "quadrature_tol": 1e-10, "fd_step": 1e-3, "samples": 64,
                "brute_force_starts": 64, "residual_tol": 1e-12},
    "verify": {"target": "pauli"},
    "evolve": {"kind": "fidelity", "grid": 128, "widths": 8.0, "steps": 400, "checkpoints": 8,
               "t_final": null, "stencil_order": 4, "at_resonance": true},
    "sweep": {"mode": "pauli-spectrum", "axes": []},
    "output": {"format": "json", "path": "-"},
    "seed": 0,
    "jobs": 1
  })");
}

void merge_config(json& base, const json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw UsageError("config " + (path.empty() ? "root" : path) + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown config key " + key);
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_config(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

void apply_set(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  const auto ptr = pointer_for(key);
  if (!config.contains(ptr)) throw UsageError("unknown config key " + key);
  if (config.at(ptr).is_object()) throw UsageError("config key " + key + " is a section");
  config[ptr] = value;
}

void validate_config(const json& config) {
  const std::string mode = config.at("mode").get<std::string>();
  if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end()) throw UsageError("unknown mode " + mode);
  const std::string fmt = config.at("output").at("format").get<std::string>();
  if (fmt != "json" && fmt != "csv") throw UsageError("output.format must be json or csv");
  if (config.at("jobs").get<int>() < 1) throw UsageError("jobs must be >= 1");
  const std::string inner = config.at("sweep").at("mode").get<std::string>();
  if (inner == "sweep" || std::find(kModes.begin(), kModes.end(), inner) == kModes.end()) {
    throw UsageError("sweep.mode must name a non-sweep mode");
  }
  const json defaults = default_config();
  for (const auto& a : config.at("sweep").at("axes")) {
    const std::string param = a.at("param").get<std::string>();
    const auto ptr = pointer_for(param);
    const std::string head = param.substr(0, param.find('.'));
    if (head == "sweep" || head == "output" || head == "mode" || !defaults.contains(ptr)) {
      throw UsageError("sweep axis references unknown parameter " + param);
    }
    const json& leaf = defaults.at(ptr);
    if (!(leaf.is_number() || leaf.is_null())) throw UsageError("sweep axis " + param + " is not numeric");
  }
  if (mode == "sweep" && config.at("sweep").at("axes").empty()) throw UsageError("sweep needs at least one axis");
}

RunResult run(const json& config) {
  RunResult result;
  const std::string mode = config.at("mode").get<std::string>();
  auto absorb = [&](ModeOutput& mo, const std::vector<double>& point) {
    for (auto& r : mo.rows) {
      r.point = point;
      result.rows.push_back(std::move(r));
    }
    for (auto& d : mo.diagnostics) {
      if (!point.empty()) {
        json p = json::object();
        for (std::size_t i = 0; i < point.size(); ++i) p[result.point_names[i]] = point[i];
        d["point"] = p;
      }
      result.diagnostics.push_back(d);
    }
    if (mo.verification_failed) result.exit_code = std::max(result.exit_code, static_cast<int>(kVerification));
  };

  if (mode != "sweep") {
    ModeOutput mo;
    try {
      mo = run_mode(mode, config);
    } catch (const Error& e) {
      mo.diagnostics.push_back(error_record(e));
      result.exit_code = exit_code_for(e.kind());
    }
    absorb(mo, {});
    return result;
  }

  const auto axes = axes_from(config);
  for (const auto& a : axes) result.point_names.push_back(a.param);
  std::vector<std::vector<double>> points(1);
  for (const auto& a : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points) {
      for (double v : a.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(q);
      }
    }
    points = std::move(next);
  }

  const std::string inner = config.at("sweep").at("mode").get<std::string>();
  std::vector<ModeOutput> outputs(points.size());
  std::vector<std::string> usage_errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      json cfg = config;
      for (std::size_t k = 0; k < axes.size(); ++k) cfg[pointer_for(axes[k].param)] = points[i][k];
      try {
        outputs[i] = run_mode(inner, cfg);
      } catch (const Error& e) {
        outputs[i].diagnostics.push_back(error_record(e));
      } catch (const UsageError& e) {
        usage_errors[i] = e.what();
      } catch (const json::exception& e) {
        usage_errors[i] = e.what();
      }
    }
  };
  const int jobs = std::min<int>(config.at("jobs").get<int>(), static_cast<int>(points.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!usage_errors[i].empty()) throw UsageError(usage_errors[i]);
    absorb(outputs[i], points[i]);
  }
  return result;
}

std::string dump_fixed(const json& value) { return dump_any(value, -1); }

std::string render_json(const RunResult& result, const json& config) {
  ojson doc;
  doc["header"]["config"] = ojson::parse(config.dump());
  doc["header"]["version"] = kVersion;
  doc["results"] = ojson::array();
  for (const auto& r : result.rows) {
    ojson row;
    for (std::size_t i = 0; i < r.point.size(); ++i) row[result.point_names[i]] = r.point[i];
    row["label"] = r.label;
    row["value"] = r.value;
    row["imag"] = r.imag;
    row["residual"] = r.residual;
    doc["results"].push_back(row);
  }
  doc["diagnostics"] = ojson::parse(result.diagnostics.dump());
  return dump_any(doc, 2) + "\n";
}

std::string render_csv(const RunResult& result, const json& config) {
  std::ostringstream os;
  os << "# version: " << kVersion << "\n";
  os << "# config: " << dump_any(config, -1) << "\n";
  for (const auto& d : result.diagnostics) os << "# diagnostic: " << dump_any(d, -1) << "\n";
  for (const auto& n : result.point_names) os << csv_field(n) << ",";
  os << "label,value,imag,residual\n";
  for (const auto& r : result.rows) {
    for (double p : r.point) os << fmt17(p) << ",";
    os << csv_field(r.label) << "," << fmt17(r.value) << "," << fmt17(r.imag) << "," << fmt17(r.residual) << "\n";
  }
  return os.str();
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Exact Pauli and Dirac states in a rotating magnetic field"};
  std::string config_path;
  std::string mode;
  std::vector<std::string> sets;
  std::string out_path;
  std::string format;
  long long seed = -1;
  int jobs = 0;
  bool version = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--mode", mode, "pauli-spectrum | pauli-zone | pauli-spin | dirac-spectrum | dirac-spin | "
                                 "verify | evolve | sweep");
  app.add_option("--set", sets, "override a config entry, key.path=value (repeatable)");
  app.add_option("--out", out_path, "output file, '-' for stdout");
  app.add_option("--format", format, "json | csv");
  app.add_option("--seed", seed, "seed for randomized procedures");
  app.add_option("--jobs", jobs, "worker threads for sweeps");
  app.add_flag("--version", version, "print the version and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsage;
  }
  if (version) {
    std::cout << kVersion << "\n";
    return kSuccess;
  }

  json config = default_config();
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config " + config_path);
      merge_config(config, json::parse(in));
    }
    for (const auto& s : sets) apply_set(config, s);
    if (!mode.empty()) config["mode"] = mode;
    if (!out_path.empty()) config["output"]["path"] = out_path;
    if (!format.empty()) config["output"]["format"] = format;
    if (seed >= 0) config["seed"] = seed;
    if (jobs > 0) config["jobs"] = jobs;
    validate_config(config);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  RunResult result;
  try {
    result = run(config);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  const std::string text = config.at("output").at("format").get<std::string>() == "csv"
                               ? render_csv(result, config)
                               : render_json(result, config);
  std::string path = config.at("output").at("path").get<std::string>();
  if (path == "-") {
    std::cout << text;
  } else {
    if (const char* dir = std::getenv("ROTFIELD_OUTPUT_DIR"); dir && std::filesystem::path(path).is_relative()) {
      path = (std::filesystem::path(dir) / path).string();
    }
    std::ofstream out(path);
    if (!out) {
      std::cerr << "cannot write " << path << "\n";
      return kUsage;
    }
    out << text;
  }
  for (const auto& d : result.diagnostics) {
    if (d.value("fatal", false) || d.at("kind") == "VerificationFailure") {
      std::cerr << d.at("message").get<std::string>() << "\n";
    }
  }
  return result.exit_code;
}

}  // namespace rotfield::cli
