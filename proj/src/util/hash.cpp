#include "capax/util/hash.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "capax/util/error.hpp"

namespace capax {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex16(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf.data(), end);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientImages: return "InsufficientImages";
    case ErrorCode::NonIntegralSplit: return "NonIntegralSplit";
    case ErrorCode::SizeExceedsRoot: return "SizeExceedsRoot";
    case ErrorCode::InsufficientGroups: return "InsufficientGroups";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::EmptyFactor: return "EmptyFactor";
    case ErrorCode::RegistryCorrupt: return "RegistryCorrupt";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::IrlsDiverged: return "IrlsDiverged";
    case ErrorCode::QuantileNoConverge: return "QuantileNoConverge";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace capax
