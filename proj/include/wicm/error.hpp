#pragma once

#include <stdexcept>
#include <string>

namespace wicm {

enum class ErrorKind {
  InvalidArgument,
  RankDeficient,
  NoConvergence,
  ZeroVariance,
  SingularGram,
  SingularSigma,
  DegenerateResponse,
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  ConfigInvalid,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind so callers (the CLI in
/// particular) can map failures onto stable exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::SingularSigma: return "SingularSigma";
    case ErrorKind::DegenerateResponse: return "DegenerateResponse";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace wicm
