#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace capax {

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text);

/// Lower-case 16-digit hex rendering.
std::string to_hex16(std::uint64_t value);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace capax
