#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lingphy {

// Malformed input (files, Newick strings, command-line values).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Request exceeds a hard capability limit (e.g. exhaustive enumeration cap).
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Taxon names must survive a round trip through Newick unquoted.
inline bool valid_taxon_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';') return false;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return false;
    }
    return true;
}

inline void require_valid_taxon_name(std::string_view name) {
    if (!valid_taxon_name(name))
        throw ParseError("invalid taxon name: \"" + std::string(name) +
                         "\" (must be non-empty, no whitespace or any of \"(),:;\")");
}

// Shortest decimal form that round-trips the exact double value.
inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return buf;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Fixed key derivation: stream seeds depend only on (master, a, b), never on
// execution order, so concurrent consumers stay reproducible.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s ^= (a + 0x9e3779b97f4a7c15ULL) * 0xff51afd7ed558ccdULL;
    h ^= splitmix64(s);
    s ^= (b + 0x2545f4914f6cdd1dULL) * 0xc4ceb9fe1a85ec53ULL;
    h ^= splitmix64(s);
    return h;
}

} // namespace lingphy
