// gf256.hpp -- arithmetic over GF(2^8) with reduction polynomial 0x11B.
//
// Addition is XOR.  Multiplication and inversion go through log/antilog
// tables built on generator 0x03 (0x02 is not a generator for this
// polynomial: its multiplicative order is only 51).  At first use the
// tables are validated against a bitwise shift-and-xor product over all
// 65536 operand pairs; any mismatch aborts via std::logic_error, so a
// miscompiled table can never silently corrupt coded data.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace feclab {

using FieldElement = std::uint8_t;

// Payload/coding symbol: a byte vector; arithmetic is applied per position.
using SymbolVector = std::vector<std::uint8_t>;

namespace detail {

// Russian-peasant product in GF(2^8)/0x11B.  Slow but obviously correct;
// used to build the tables and as the validation oracle.
constexpr std::uint8_t gf_mul_bitwise(std::uint8_t a, std::uint8_t b) {
    std::uint8_t acc = 0;
    while (b) {
        if (b & 1u) acc ^= a;
        const bool carry = (a & 0x80u) != 0;
        a = static_cast<std::uint8_t>(a << 1);
        if (carry) a ^= 0x1Bu;  // x^8 == x^4 + x^3 + x + 1 (mod 0x11B)
        b >>= 1;
    }
    return acc;
}

struct Gf256Tables {
    // exp_ is doubled so mul can skip the "mod 255" on the summed logs.
    std::array<std::uint8_t, 510> exp{};
    std::array<std::uint8_t, 256> log{};

    Gf256Tables() {
        std::uint8_t x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[static_cast<std::size_t>(i)] = x;
            log[x] = static_cast<std::uint8_t>(i);
            x = gf_mul_bitwise(x, 0x03);
        }
        if (x != 1)
            throw std::logic_error("gf256: 0x03 failed to generate the multiplicative group");
        for (int i = 255; i < 510; ++i)
            exp[static_cast<std::size_t>(i)] = exp[static_cast<std::size_t>(i - 255)];

        // Full table-vs-oracle sweep, mandated self-check.
        for (int a = 0; a < 256; ++a) {
            for (int b = 0; b < 256; ++b) {
                const std::uint8_t want =
                    gf_mul_bitwise(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
                const std::uint8_t got =
                    (a == 0 || b == 0)
                        ? std::uint8_t{0}
                        : exp[static_cast<std::size_t>(log[static_cast<std::size_t>(a)]) +
                              log[static_cast<std::size_t>(b)]];
                if (want != got)
                    throw std::logic_error("gf256: log/antilog tables disagree with bitwise product");
            }
        }
    }
};

inline const Gf256Tables& gf_tables() {
    static const Gf256Tables tables;
    return tables;
}

}  // namespace detail

inline FieldElement gf_add(FieldElement a, FieldElement b) {
    return a ^ b;  // also subtraction: the field has characteristic 2
}

inline FieldElement gf_mul(FieldElement a, FieldElement b) {
    if (a == 0 || b == 0) return 0;
    const auto& t = detail::gf_tables();
    return t.exp[static_cast<std::size_t>(t.log[a]) + t.log[b]];
}

inline FieldElement gf_inv(FieldElement a) {
    if (a == 0) throw std::domain_error("gf_inv: zero has no multiplicative inverse");
    const auto& t = detail::gf_tables();
    return t.exp[static_cast<std::size_t>(255 - t.log[a])];
}

inline FieldElement gf_div(FieldElement a, FieldElement b) {
    return gf_mul(a, gf_inv(b));
}

inline FieldElement gf_pow(FieldElement a, unsigned e) {
    FieldElement acc = 1;
    while (e) {
        if (e & 1u) acc = gf_mul(acc, a);
        a = gf_mul(a, a);
        e >>= 1;
    }
    return acc;
}

// y[i] ^= alpha * x[i] for all i.  Lengths must match.
inline void vec_axpy_inplace(FieldElement alpha, const SymbolVector& x, SymbolVector& y) {
    if (x.size() != y.size())
        throw std::domain_error("vec_axpy: length mismatch");
    if (alpha == 0) return;
    if (alpha == 1) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] ^= x[i];
        return;
    }
    const auto& t = detail::gf_tables();
    const std::uint8_t la = t.log[alpha];
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::uint8_t xi = x[i];
        if (xi) y[i] ^= t.exp[static_cast<std::size_t>(la) + t.log[xi]];
    }
}

inline SymbolVector vec_axpy(FieldElement alpha, const SymbolVector& x, SymbolVector y) {
    vec_axpy_inplace(alpha, x, y);
    return y;
}

inline void vec_scale_inplace(FieldElement alpha, SymbolVector& v) {
    if (alpha == 1) return;
    if (alpha == 0) {
        std::fill(v.begin(), v.end(), std::uint8_t{0});
        return;
    }
    const auto& t = detail::gf_tables();
    const std::uint8_t la = t.log[alpha];
    for (auto& b : v)
        if (b) b = t.exp[static_cast<std::size_t>(la) + t.log[b]];
}

}  // namespace feclab
