#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gauntlet::util {

std::string base64_encode(std::string_view data);

/// Returns false on malformed input instead of throwing.
bool base64_decode(std::string_view data, std::string& out);

/// FNV-1a 64-bit digest, hex encoded. Used for audit-log before/after digests.
std::string fnv1a_hex(std::string_view data);

std::vector<std::string> split(std::string_view s, char sep);

std::string trim(std::string_view s);

/// Dotted-quad test: exactly four decimal octets, each 0-255.
bool is_ipv4(std::string_view s);

/// a.b.c.d -> a*2^24 + b*2^16 + c*2^8 + d. Precondition: is_ipv4(s).
uint32_t ipv4_to_u32(std::string_view s);

std::string u32_to_ipv4(uint32_t v);

} // namespace gauntlet::util
