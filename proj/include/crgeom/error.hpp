#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crgeom {

enum class ErrorKind {
  Parse,
  Domain,
  NotOnSurface,
  DegenerateFrame,
  NotStrictlyPseudoconvex,
  SingularSystem,
  NonpositiveJ,
  RankDeficientNormalBasis,
  InvalidImmersion,
  NotPluriharmonic,
  NotEigenmap,
  ZeroEnergy,
  NoCrossing,
  NonTransversal,
  UnknownSurface,
  BadParams,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NotOnSurface: return "NotOnSurface";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::NotStrictlyPseudoconvex: return "NotStrictlyPseudoconvex";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonpositiveJ: return "NonpositiveJ";
    case ErrorKind::RankDeficientNormalBasis: return "RankDeficientNormalBasis";
    case ErrorKind::InvalidImmersion: return "InvalidImmersion";
    case ErrorKind::NotPluriharmonic: return "NotPluriharmonic";
    case ErrorKind::NotEigenmap: return "NotEigenmap";
    case ErrorKind::ZeroEnergy: return "ZeroEnergy";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::NonTransversal: return "NonTransversal";
    case ErrorKind::UnknownSurface: return "UnknownSurface";
    case ErrorKind::BadParams: return "BadParams";
  }
  return "Error";
}

/// Input errors (bad DSL, bad parameters) as opposed to geometric failures at a point.
inline bool is_input_error(ErrorKind kind) {
  return kind == ErrorKind::Parse || kind == ErrorKind::UnknownSurface ||
         kind == ErrorKind::BadParams;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace crgeom
