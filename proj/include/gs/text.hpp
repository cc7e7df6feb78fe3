#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gs {

// FNV-1a, pinned so hashed token buckets are identical on every platform.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercase alphanumeric runs; ASCII punctuation acts as a separator.
// Bytes >= 0x80 are kept so non-ASCII words survive as tokens.
std::vector<std::string> tokenize_text(std::string_view text);

// Splits on the first occurrence of `delim`, or returns false.
bool split_once(std::string_view s, char delim, std::string_view& left, std::string_view& right);

} // namespace gs
