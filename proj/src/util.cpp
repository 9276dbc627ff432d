#include "gauntlet/util.hpp"

#include <array>
#include <charconv>

namespace gauntlet::util {

namespace {
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int8_t, 256> make_b64_reverse() {
    std::array<int8_t, 256> rev{};
    rev.fill(-1);
    for (int i = 0; i < 64; ++i)
        rev[static_cast<unsigned char>(kB64Alphabet[i])] = static_cast<int8_t>(i);
    return rev;
}
} // namespace

std::string base64_encode(std::string_view data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= data.size()) {
        uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
        i += 3;
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        uint32_t v = static_cast<unsigned char>(data[i]) << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rem == 2) {
        uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

bool base64_decode(std::string_view data, std::string& out) {
    static const std::array<int8_t, 256> rev = make_b64_reverse();
    out.clear();
    if (data.size() % 4 != 0)
        return false;
    size_t len = data.size();
    size_t pad = 0;
    while (pad < 2 && len > 0 && data[len - 1 - pad] == '=')
        ++pad;
    for (size_t i = 0; i < len; i += 4) {
        int8_t a = rev[static_cast<unsigned char>(data[i])];
        int8_t b = rev[static_cast<unsigned char>(data[i + 1])];
        bool last = i + 4 == len;
        int8_t c = (last && pad >= 2) ? 0 : rev[static_cast<unsigned char>(data[i + 2])];
        int8_t d = (last && pad >= 1) ? 0 : rev[static_cast<unsigned char>(data[i + 3])];
        if (a < 0 || b < 0 || c < 0 || d < 0)
            return false;
        uint32_t v = (static_cast<uint32_t>(a) << 18) | (static_cast<uint32_t>(b) << 12) |
                     (static_cast<uint32_t>(c) << 6) | static_cast<uint32_t>(d);
        out += static_cast<char>((v >> 16) & 0xff);
        if (!last || pad < 2)
            out += static_cast<char>((v >> 8) & 0xff);
        if (!last || pad < 1)
            out += static_cast<char>(v & 0xff);
    }
    return true;
}

std::string fnv1a_hex(std::string_view data) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            break;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

bool is_ipv4(std::string_view s) {
    auto parts = split(s, '.');
    if (parts.size() != 4)
        return false;
    for (const auto& p : parts) {
        if (p.empty() || p.size() > 3)
            return false;
        for (char c : p)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                return false;
        int v = 0;
        std::from_chars(p.data(), p.data() + p.size(), v);
        if (v > 255)
            return false;
        if (p.size() > 1 && p[0] == '0')
            return false;
    }
    return true;
}

uint32_t ipv4_to_u32(std::string_view s) {
    auto parts = split(s, '.');
    uint32_t v = 0;
    for (const auto& p : parts) {
        int octet = 0;
        std::from_chars(p.data(), p.data() + p.size(), octet);
        v = (v << 8) | static_cast<uint32_t>(octet);
    }
    return v;
}

std::string u32_to_ipv4(uint32_t v) {
    return std::to_string((v >> 24) & 0xff) + "." + std::to_string((v >> 16) & 0xff) + "." +
           std::to_string((v >> 8) & 0xff) + "." + std::to_string(v & 0xff);
}

} // namespace gauntlet::util
