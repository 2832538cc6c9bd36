#pragma once

#include "fxa/floatcodec.hpp"

#include <cstdint>
#include <stdexcept>

namespace fxa {

struct DivideByZero : std::runtime_error {
    DivideByZero() : std::runtime_error("division by zero") {}
};

// Plaintext semantics of the machine's primitive operations on W-bit cells
// and 2W-bit pairs. Both the reference interpreter and the emulator call
// these, so the two sides agree on every edge case by construction.
namespace wordops {

inline std::uint64_t mask_bits(int bits) {
    return bits >= 64 ? ~0ull : ((1ull << bits) - 1);
}

// Two's-complement value of a `bits`-wide word as a signed 64-bit integer.
inline std::int64_t to_signed(std::uint64_t v, int bits) {
    std::uint64_t sign = 1ull << (bits - 1);
    return static_cast<std::int64_t>(((v & mask_bits(bits)) ^ sign) - sign);
}

inline std::uint64_t add(std::uint64_t a, std::uint64_t b, int bits) { return (a + b) & mask_bits(bits); }
inline std::uint64_t sub(std::uint64_t a, std::uint64_t b, int bits) { return (a - b) & mask_bits(bits); }
inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, int bits) { return (a * b) & mask_bits(bits); }
inline std::uint64_t xor_(std::uint64_t a, std::uint64_t b, int bits) { return (a ^ b) & mask_bits(bits); }

// Signed division truncating toward zero; the INT_MIN / -1 overflow wraps.
std::uint64_t sdiv(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t udiv(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t srem(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t urem(std::uint64_t a, std::uint64_t b, int bits);

// Comparison outcomes used by branch instructions and the interpreter.
inline bool eq(std::uint64_t a, std::uint64_t b, int bits) { return (a & mask_bits(bits)) == (b & mask_bits(bits)); }
inline bool slt(std::uint64_t a, std::uint64_t b, int bits) { return to_signed(a, bits) < to_signed(b, bits); }
inline bool sgt(std::uint64_t a, std::uint64_t b, int bits) { return to_signed(a, bits) > to_signed(b, bits); }
inline bool ult(std::uint64_t a, std::uint64_t b, int bits) { return (a & mask_bits(bits)) < (b & mask_bits(bits)); }

// Float helpers on encoded values (`bits`-wide IEEE-style encodings).
double fdecode(std::uint64_t enc, int bits);
std::uint64_t fencode(double v, int bits);
std::uint64_t fadd(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t fsub(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t fmul(std::uint64_t a, std::uint64_t b, int bits);
std::uint64_t fdiv(std::uint64_t a, std::uint64_t b, int bits);
// Negation is defined as -0.0 - x so both execution paths share it.
std::uint64_t fneg(std::uint64_t a, int bits);
bool feq(std::uint64_t a, std::uint64_t b, int bits);
bool flt(std::uint64_t a, std::uint64_t b, int bits);
bool fgt(std::uint64_t a, std::uint64_t b, int bits);

// Conversions between integer values and float encodings. Out-of-range and
// NaN float-to-int conversions saturate (NaN goes to zero); this is the
// platform definition shared by interpreter and emulator.
std::uint64_t int_to_float(std::uint64_t v, int int_bits, bool int_signed, int float_bits);
std::uint64_t float_to_int(std::uint64_t enc, int float_bits, int int_bits, bool int_signed);
std::uint64_t float_to_float(std::uint64_t enc, int from_bits, int to_bits);

} // namespace wordops
} // namespace fxa
