#include "fxa/floatcodec.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fxa {

FloatFormat FloatFormat::for_bits(int bits) {
    switch (bits) {
        case 8: return {4, 3};
        case 16: return {5, 10};
        case 32: return {8, 23};
        case 64: return {11, 52};
        default: throw std::invalid_argument("no float format for this cell width");
    }
}

namespace {

std::uint64_t bits_of_double(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    return u;
}

double double_of_bits(std::uint64_t u) {
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

} // namespace

double decode_float(FloatFormat fmt, std::uint64_t bits) {
    if (fmt.exp_bits == 11 && fmt.man_bits == 52) return double_of_bits(bits);

    const std::uint64_t man_mask = (1ull << fmt.man_bits) - 1;
    const std::uint64_t exp_mask = (1ull << fmt.exp_bits) - 1;
    std::uint64_t sign = (bits >> (fmt.exp_bits + fmt.man_bits)) & 1;
    std::uint64_t exp = (bits >> fmt.man_bits) & exp_mask;
    std::uint64_t man = bits & man_mask;

    std::uint64_t out_sign = sign << 63;
    if (exp == exp_mask) { // inf / nan
        std::uint64_t out_man = man == 0 ? 0 : (1ull << 51); // quiet nan
        return double_of_bits(out_sign | (0x7ffull << 52) | out_man);
    }
    if (exp == 0) {
        if (man == 0) return double_of_bits(out_sign);
        // subnormal: value = man * 2^(1 - bias - man_bits)
        double v = std::ldexp(static_cast<double>(man), 1 - fmt.bias() - fmt.man_bits);
        return sign ? -v : v;
    }
    double v = std::ldexp(static_cast<double>(man | (1ull << fmt.man_bits)),
                          static_cast<int>(exp) - fmt.bias() - fmt.man_bits);
    return sign ? -v : v;
}

std::uint64_t encode_float(FloatFormat fmt, double value) {
    if (fmt.exp_bits == 11 && fmt.man_bits == 52) return bits_of_double(value);

    const std::uint64_t src = bits_of_double(value);
    const std::uint64_t sign = src >> 63;
    const int src_exp = static_cast<int>((src >> 52) & 0x7ff);
    const std::uint64_t src_man = src & ((1ull << 52) - 1);

    const std::uint64_t out_sign = sign << (fmt.exp_bits + fmt.man_bits);
    const std::uint64_t exp_mask = (1ull << fmt.exp_bits) - 1;

    if (src_exp == 0x7ff) {
        std::uint64_t man = src_man == 0 ? 0 : (1ull << (fmt.man_bits - 1)); // quiet nan
        return out_sign | (exp_mask << fmt.man_bits) | man;
    }
    if (src_exp == 0 && src_man == 0) return out_sign;

    // Normalised significand in 53 bits (binary64 subnormal inputs are far
    // below every target's subnormal range, so they round to zero below).
    int e = src_exp - 1023;                            // unbiased exponent
    std::uint64_t sig = src_man | (1ull << 52);        // 1.man in 53 bits
    if (src_exp == 0) { e = -1022; sig = src_man; }

    int target_exp = e + fmt.bias();
    int shift; // how far right to shift sig so that man_bits remain
    if (target_exp >= 1) {
        shift = 52 - fmt.man_bits;
    } else {
        // subnormal in the target: shift further by the exponent deficit
        shift = 52 - fmt.man_bits + (1 - target_exp);
        target_exp = 0;
    }
    if (shift >= 64) return out_sign; // rounds to zero

    std::uint64_t kept = sig >> shift;
    std::uint64_t rem = shift == 0 ? 0 : (sig & ((1ull << shift) - 1));
    std::uint64_t half = shift == 0 ? 0 : (1ull << (shift - 1));
    if (shift > 0 && (rem > half || (rem == half && (kept & 1)))) kept += 1;

    // Renormalise if rounding overflowed the significand.
    if (target_exp == 0) {
        if (kept >> fmt.man_bits) { target_exp = 1; kept &= (1ull << fmt.man_bits) - 1; }
    } else {
        if (kept >> (fmt.man_bits + 1)) { kept >>= 1; target_exp += 1; }
        kept &= (1ull << fmt.man_bits) - 1;
    }
    if (target_exp >= static_cast<int>(exp_mask)) // overflow -> inf
        return out_sign | (exp_mask << fmt.man_bits);
    return out_sign | (static_cast<std::uint64_t>(target_exp) << fmt.man_bits) | kept;
}

} // namespace fxa
