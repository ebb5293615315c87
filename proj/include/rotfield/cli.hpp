#pragma once

// Command-line front end. Configuration is a JSON document merged over
// default_config(); --set and the dedicated flags override it.
//
// Exit codes: 0 ok, 1 usage, 2 domain error, 3 verification failure.

#include "rotfield/errors.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rotfield::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDomain = 2, kVerification = 3 };

int exit_code_for(ErrorKind kind);

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json default_config();

/// Deep merge of `overlay` into `base`; unknown keys are a UsageError.
void merge_config(nlohmann::json& base, const nlohmann::json& overlay, const std::string& path = "");

/// "a.b.c=value"; the value is read as JSON when it parses, else as a string.
void apply_set(nlohmann::json& config, const std::string& assignment);

/// Checks mode, format and sweep axes. Throws UsageError.
void validate_config(const nlohmann::json& config);

struct Row {
  std::vector<double> point;  // sweep coordinates, empty outside sweeps
  std::string label;
  double value = 0.0;
  double imag = 0.0;
  double residual = 0.0;
};

struct RunResult {
  int exit_code = kSuccess;
  std::vector<std::string> point_names;
  std::vector<Row> rows;
  nlohmann::json diagnostics = nlohmann::json::array();
};

/// Runs a resolved, validated config. Library errors become diagnostics
/// records and the matching exit code; nothing is thrown for them.
RunResult run(const nlohmann::json& config);

/// JSON document {header, results, diagnostics} with 17 significant digits.
std::string render_json(const RunResult& result, const nlohmann::json& config);
/// '#' header lines, then columns: sweep parameters, label, value, imag, residual.
std::string render_csv(const RunResult& result, const nlohmann::json& config);

/// JSON text with every floating-point number printed as %.17g.
std::string dump_fixed(const nlohmann::json& value);

/// Full command line entry point.
int main_entry(int argc, char** argv);

}  // namespace rotfield::cli
