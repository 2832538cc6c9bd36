#pragma once

#include <cstdint>

namespace fxa {

// IEEE-style binary float formats used for the W-bit and 2W-bit float
// encodings at each machine width:
//   W=32: float = binary32, double = binary64
//   W=16: float = binary16, double = binary32
//   W=8:  float = 1-4-3 minifloat, double = binary16
// Encode/decode go through binary64, with round-to-nearest-even on encode.
struct FloatFormat {
    int exp_bits;
    int man_bits;

    int total_bits() const { return 1 + exp_bits + man_bits; }
    int bias() const { return (1 << (exp_bits - 1)) - 1; }

    static FloatFormat for_bits(int bits);
};

// Exact widening of an encoded value to binary64 (all formats here are
// strictly narrower than binary64, so no rounding happens).
double decode_float(FloatFormat fmt, std::uint64_t bits);

// Round-to-nearest-even demotion of a binary64 value into the format.
// Overflow goes to infinity, NaN to the quiet NaN pattern.
std::uint64_t encode_float(FloatFormat fmt, double value);

} // namespace fxa
