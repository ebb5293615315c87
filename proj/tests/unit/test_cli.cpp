#include <doctest.h>

#include "rotfield/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rotfield;
using nlohmann::json;

namespace {

json config_with(const json& overlay) {
  json c = cli::default_config();
  cli::merge_config(c, overlay);
  cli::validate_config(c);
  return c;
}

const cli::Row* find_row(const cli::RunResult& r, const std::string& label) {
  for (const auto& row : r.rows) {
    if (row.label == label) return &row;
  }
  return nullptr;
}

int call_main(std::vector<std::string> args) {
  args.insert(args.begin(), "rotfield_cli");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("zone mode") {
  const auto r = cli::run(config_with({{"mode", "pauli-zone"}, {"zone", {{"H_over_Hz", 1.0}}}}));
  CHECK(r.exit_code == cli::kSuccess);
  REQUIRE(find_row(r, "lower.lo"));
  CHECK(find_row(r, "lower.lo")->value == doctest::Approx(1.0 - std::sqrt(5.0)));
  CHECK(find_row(r, "upper.lo")->value == 2.0);
  CHECK(find_row(r, "upper.hi")->value == doctest::Approx(1.0 + std::sqrt(5.0)));
}

TEST_CASE("pauli spectrum rows carry their level identity residuals") {
  const auto r = cli::run(config_with({{"mode", "pauli-spectrum"}}));
  CHECK(r.exit_code == cli::kSuccess);
  CHECK(r.rows.size() >= 12);
  for (const auto& row : r.rows) CHECK(row.residual <= 1e-12);
}

TEST_CASE("forbidden band is a domain error with a diagnostic") {
  const auto r = cli::run(config_with({{"mode", "verify"}, {"physical", {{"Omega", -0.04}}}}));
  CHECK(r.exit_code == cli::kDomain);
  REQUIRE(r.diagnostics.size() >= 1);
  CHECK(r.diagnostics[0].at("kind") == "ForbiddenBand");
}

TEST_CASE("verify passes on a regular point") {
  const auto r = cli::run(config_with({{"mode", "verify"}, {"verify", {{"target", "both"}}}}));
  CHECK(r.exit_code == cli::kSuccess);
}

TEST_CASE("dirac spectrum without wave reports the roots") {
  const auto r = cli::run(
      config_with({{"mode", "dirac-spectrum"}, {"dirac", {{"E0", 0.5}, {"nu", 0.0}, {"h", 0.0}}}}));
  CHECK(r.exit_code == cli::kSuccess);
  int roots = 0;
  for (const auto& row : r.rows) {
    if (row.label.rfind("root", 0) == 0) ++roots;
  }
  CHECK(roots == 3);
  const std::string csv = cli::render_csv(r, config_with({{"mode", "dirac-spectrum"}}));
  CHECK(csv.rfind("# version", 0) == 0);
  CHECK(csv.find("label,value,imag,residual") != std::string::npos);
}

TEST_CASE("config errors are usage errors") {
  json c = cli::default_config();
  CHECK_THROWS_AS(cli::merge_config(c, {{"nonsense", 1}}), cli::UsageError);
  CHECK_THROWS_AS(cli::apply_set(c, "physical.nope=1"), cli::UsageError);
  CHECK_THROWS_AS(cli::apply_set(c, "physical"), cli::UsageError);
  cli::apply_set(c, "physical.H=0.25");
  CHECK(c["physical"]["H"] == 0.25);
  c["mode"] = "bogus";
  CHECK_THROWS_AS(cli::validate_config(c), cli::UsageError);
  CHECK(call_main({"--mode", "bogus"}) == cli::kUsage);
}

TEST_CASE("sweeps are ordered and independent of the worker count") {
  json overlay = {{"mode", "sweep"},
                  {"sweep", {{"mode", "pauli-zone"}, {"axes", json::array({{{"param", "zone.H_over_Hz"}, {"start", 0.1}, {"stop", 1.0}, {"count", 7}}})}}}};
  json one = config_with(overlay);
  json many = one;
  many["jobs"] = 4;
  const auto a = cli::run(one);
  const auto b = cli::run(many);
  CHECK(cli::render_json(a, one).size() > 0);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].point == b.rows[i].point);
    CHECK(a.rows[i].value == b.rows[i].value);
  }
  CHECK(a.rows.front().point[0] == doctest::Approx(0.1));
  CHECK(a.rows.back().point[0] == doctest::Approx(1.0));
}

TEST_CASE("fixed float rendering round-trips") {
  const json v = {{"x", 0.1}, {"y", 1.0 / 3.0}, {"n", 3}};
  const json back = json::parse(cli::dump_fixed(v));
  CHECK(back["x"].get<double>() == 0.1);
  CHECK(back["y"].get<double>() == 1.0 / 3.0);
  CHECK(back["n"] == 3);
}

TEST_CASE("command line writes identical output on repeated runs") {
  const auto dir = std::filesystem::temp_directory_path() / "rotfield_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "a.json").string();
  CHECK(call_main({"--mode", "pauli-spin", "--out", path}) == cli::kSuccess);
  const std::string a = slurp(path);
  CHECK(!a.empty());
  CHECK(call_main({"--mode", "pauli-spin", "--out", path}) == cli::kSuccess);
  CHECK(a == slurp(path));
  const json doc = json::parse(a);
  CHECK(doc.at("header").at("version") == cli::kVersion);
  std::filesystem::remove_all(dir);
}
