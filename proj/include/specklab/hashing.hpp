#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace specklab {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace specklab
