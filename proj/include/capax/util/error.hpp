#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capax {

enum class ErrorCode {
  InsufficientImages,
  NonIntegralSplit,
  SizeExceedsRoot,
  InsufficientGroups,
  DegenerateImage,
  EmptyFactor,
  RegistryCorrupt,
  UnknownLevel,
  RankDeficient,
  IrlsDiverged,
  QuantileNoConverge,
  ProtocolViolation,
  InvalidArgument,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RegistryCorrupt : public Error {
 public:
  RegistryCorrupt(std::size_t line, const std::string& detail)
      : Error(ErrorCode::RegistryCorrupt, "line " + std::to_string(line) + ": " + detail),
        line_(line),
        detail_(detail) {}

  /// 1-based line number of the offending record, 0 when unknown.
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::vector<std::string> columns, const std::string& what)
      : Error(ErrorCode::RankDeficient, what), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class IrlsDiverged : public Error {
 public:
  IrlsDiverged(std::vector<double> deviance_trace, const std::string& what)
      : Error(ErrorCode::IrlsDiverged, what), trace_(std::move(deviance_trace)) {}

  const std::vector<double>& deviance_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace capax
