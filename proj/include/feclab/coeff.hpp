// coeff.hpp -- deterministic repair-coefficient generation.
//
// A repair packet does not carry its combination coefficients; it carries a
// 32-bit coeff_seed and both window bounds, and each side expands the same
// coefficient vector from those.  The expansion is a pure function of
// (coeff_seed, window_start, window_end):
//
//   state <- murmur3-finalizer(coeff_seed), forced nonzero
//   for seq = window_start .. window_end:
//       repeat: state <- xorshift32(state); byte <- state & 0xFF
//       until byte != 0
//       coefficient(seq) <- byte
//
// xorshift32 fixes the all-zero state, hence the finalizer remix and the
// nonzero clamp; the zero-byte redraw makes coefficients uniform on
// [1, 255] so every windowed seq actually participates in every repair.

#pragma once

#include <cstdint>
#include <vector>

#include "feclab/errors.hpp"
#include "feclab/gf256.hpp"

namespace feclab {

namespace detail {

inline std::uint32_t mix32(std::uint32_t x) {
    x += 0x9E3779B9u;
    x ^= x >> 16;
    x *= 0x85EBCA6Bu;
    x ^= x >> 13;
    x *= 0xC2B2AE35u;
    x ^= x >> 16;
    return x;
}

}  // namespace detail

class CoeffPrng {
public:
    explicit CoeffPrng(std::uint32_t seed) : state_(detail::mix32(seed)) {
        if (state_ == 0) state_ = 0x9E3779B9u;
    }

    std::uint32_t next() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 17;
        state_ ^= state_ << 5;
        return state_;
    }

    FieldElement next_nonzero_coefficient() {
        for (;;) {
            const auto b = static_cast<std::uint8_t>(next() & 0xFFu);
            if (b != 0) return b;
        }
    }

private:
    std::uint32_t state_;
};

// One coefficient per seq in [window_start, window_end], in seq order.
inline std::vector<FieldElement> expand_coefficients(std::uint32_t coeff_seed,
                                                     std::uint32_t window_start,
                                                     std::uint32_t window_end) {
    if (window_end < window_start)
        throw ConfigError("expand_coefficients: window_end < window_start");
    CoeffPrng prng(coeff_seed);
    std::vector<FieldElement> coefficients;
    coefficients.reserve(static_cast<std::size_t>(window_end) - window_start + 1);
    for (std::uint64_t s = window_start; s <= window_end; ++s)
        coefficients.push_back(prng.next_nonzero_coefficient());
    return coefficients;
}

}  // namespace feclab
