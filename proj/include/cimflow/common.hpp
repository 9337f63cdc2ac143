#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cimflow {

// Tool version, reported in run manifests.
inline constexpr const char* kVersion = "0.1.0";

// Input file or schema problem (bad JSON, unknown field, missing field).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Semantically invalid value (non-positive dimension, inconsistent macro).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The accelerator cannot run the operator at all (SRAMs below the minimum
// working set). The explorer treats this as a rejected candidate.
struct InfeasiblePlanError : std::runtime_error {
    explicit InfeasiblePlanError(const std::string& msg) : std::runtime_error(msg) {}
};

// No candidate in the search space fits the area budget.
struct InfeasibleBudgetError : std::runtime_error {
    explicit InfeasibleBudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pruning removed every candidate; message names the violated rule.
struct EmptySpaceError : std::runtime_error {
    explicit EmptySpaceError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
    return (a + b - 1) / b;
}

inline constexpr std::int64_t ceil_div_i(std::int64_t a, std::int64_t b) {
    return (a + b - 1) / b;
}

inline constexpr bool is_pow2(std::int64_t v) {
    return v > 0 && (v & (v - 1)) == 0;
}

// ceil(log2(v)) for v >= 1.
inline constexpr int ceil_log2(std::int64_t v) {
    int bits = 0;
    std::int64_t p = 1;
    while (p < v) { p <<= 1; ++bits; }
    return bits;
}

// Reduces v modulo 2^width into the signed range of a width-bit register.
inline std::int64_t wrap_signed(std::int64_t v, int width) {
    if (width >= 64) return v;
    std::uint64_t mask = (1ull << width) - 1;
    std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
    if (u & (1ull << (width - 1))) u |= ~mask;
    return static_cast<std::int64_t>(u);
}

// SRAM sizes are stored in bits; file formats accept a KB suffix.
inline constexpr std::uint64_t kBitsPerKB = 8ull * 1024ull;

inline double bits_to_kb(std::uint64_t bits) {
    return static_cast<double>(bits) / static_cast<double>(kBitsPerKB);
}

// FNV-1a, used for config fingerprints in flow headers.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a_append(std::uint64_t h, std::uint64_t v) {
    return fnv1a(&v, sizeof(v), h);
}

}  // namespace cimflow
