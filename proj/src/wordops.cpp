#include "fxa/wordops.hpp"

#include <cmath>

namespace fxa::wordops {

std::uint64_t sdiv(std::uint64_t a, std::uint64_t b, int bits) {
    if ((b & mask_bits(bits)) == 0) throw DivideByZero{};
    std::int64_t x = to_signed(a, bits), y = to_signed(b, bits);
    std::int64_t min = -(std::int64_t{1} << (bits - 1));
    if (x == min && y == -1) return static_cast<std::uint64_t>(min) & mask_bits(bits);
    return static_cast<std::uint64_t>(x / y) & mask_bits(bits);
}

std::uint64_t udiv(std::uint64_t a, std::uint64_t b, int bits) {
    b &= mask_bits(bits);
    if (b == 0) throw DivideByZero{};
    return (a & mask_bits(bits)) / b;
}

std::uint64_t srem(std::uint64_t a, std::uint64_t b, int bits) {
    if ((b & mask_bits(bits)) == 0) throw DivideByZero{};
    std::int64_t x = to_signed(a, bits), y = to_signed(b, bits);
    std::int64_t min = -(std::int64_t{1} << (bits - 1));
    if (x == min && y == -1) return 0;
    return static_cast<std::uint64_t>(x % y) & mask_bits(bits);
}

std::uint64_t urem(std::uint64_t a, std::uint64_t b, int bits) {
    b &= mask_bits(bits);
    if (b == 0) throw DivideByZero{};
    return (a & mask_bits(bits)) % b;
}

double fdecode(std::uint64_t enc, int bits) {
    return decode_float(FloatFormat::for_bits(bits), enc & mask_bits(bits));
}

std::uint64_t fencode(double v, int bits) {
    return encode_float(FloatFormat::for_bits(bits), v);
}

std::uint64_t fadd(std::uint64_t a, std::uint64_t b, int bits) { return fencode(fdecode(a, bits) + fdecode(b, bits), bits); }
std::uint64_t fsub(std::uint64_t a, std::uint64_t b, int bits) { return fencode(fdecode(a, bits) - fdecode(b, bits), bits); }
std::uint64_t fmul(std::uint64_t a, std::uint64_t b, int bits) { return fencode(fdecode(a, bits) * fdecode(b, bits), bits); }
std::uint64_t fdiv(std::uint64_t a, std::uint64_t b, int bits) { return fencode(fdecode(a, bits) / fdecode(b, bits), bits); }
std::uint64_t fneg(std::uint64_t a, int bits) { return fencode(-0.0 - fdecode(a, bits), bits); }

bool feq(std::uint64_t a, std::uint64_t b, int bits) { return fdecode(a, bits) == fdecode(b, bits); }
bool flt(std::uint64_t a, std::uint64_t b, int bits) { return fdecode(a, bits) < fdecode(b, bits); }
bool fgt(std::uint64_t a, std::uint64_t b, int bits) { return fdecode(a, bits) > fdecode(b, bits); }

std::uint64_t int_to_float(std::uint64_t v, int int_bits, bool int_signed, int float_bits) {
    double d = int_signed ? static_cast<double>(to_signed(v, int_bits))
                          : static_cast<double>(v & mask_bits(int_bits));
    return fencode(d, float_bits);
}

std::uint64_t float_to_int(std::uint64_t enc, int float_bits, int int_bits, bool int_signed) {
    double d = fdecode(enc, float_bits);
    if (std::isnan(d)) return 0;
    d = std::trunc(d);
    if (int_signed) {
        double lo = -std::ldexp(1.0, int_bits - 1);
        double hi = std::ldexp(1.0, int_bits - 1) - 1.0;
        if (d <= lo) return static_cast<std::uint64_t>(-(std::int64_t{1} << (int_bits - 1))) & mask_bits(int_bits);
        if (d >= hi) return mask_bits(int_bits) >> 1;
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(d)) & mask_bits(int_bits);
    }
    double hi = std::ldexp(1.0, int_bits);
    if (d <= 0.0) return 0;
    if (d >= hi) return mask_bits(int_bits);
    return static_cast<std::uint64_t>(d) & mask_bits(int_bits);
}

std::uint64_t float_to_float(std::uint64_t enc, int from_bits, int to_bits) {
    return fencode(fdecode(enc, from_bits), to_bits);
}

} // namespace fxa::wordops
