#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotfield {

// Every recoverable failure in the library is one of these kinds. The CLI maps
// them onto exit codes (see cli.hpp), so keep the list in sync with exit_code_for.
enum class ErrorKind {
  ForbiddenBand,
  DegenerateBoundary,
  NoIntegrableBranch,
  ComplexEnergy,
  NonPositiveNorm,
  ZeroFrequency,
  NoTwoPositiveRoots,
  SpectralPole,
  DenominatorZero,
  UnphysicalMixing,
  QuadratureNotConverged,
  SolverDiverged,
  NoAnnihilatingVariant,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ForbiddenBand: return "ForbiddenBand";
    case ErrorKind::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorKind::NoIntegrableBranch: return "NoIntegrableBranch";
    case ErrorKind::ComplexEnergy: return "ComplexEnergy";
    case ErrorKind::NonPositiveNorm: return "NonPositiveNorm";
    case ErrorKind::ZeroFrequency: return "ZeroFrequency";
    case ErrorKind::NoTwoPositiveRoots: return "NoTwoPositiveRoots";
    case ErrorKind::SpectralPole: return "SpectralPole";
    case ErrorKind::DenominatorZero: return "DenominatorZero";
    case ErrorKind::UnphysicalMixing: return "UnphysicalMixing";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::NoAnnihilatingVariant: return "NoAnnihilatingVariant";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rotfield
