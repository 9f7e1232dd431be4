#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace formeval {

/// 64-bit FNV-1a over the bytes of `data`. Fixed offset basis and prime,
/// so results are stable across runs and platforms. This is the hash behind
/// the deterministic stub judge channel.
std::uint64_t fnv1a64(std::string_view data);

/// Lowercase hex SHA-256 digest of `data`. Used for cache keys and
/// content-addressed verdict ids.
std::string sha256_hex(std::string_view data);

} // namespace formeval
