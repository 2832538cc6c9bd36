#include "fxa/cipher.hpp"

#include "fxa/floatcodec.hpp"

#include <cassert>

namespace fxa {

namespace {

// splitmix64 finalizer, used as the Feistel round function and key schedule.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr int kMaxConstCells = 8;

} // namespace

DomainTag DomainTag::constant(int opcode_index, int cell_position) {
    assert(cell_position >= 0 && cell_position < kMaxConstCells);
    return DomainTag{static_cast<std::uint16_t>(1 + opcode_index * kMaxConstCells + cell_position)};
}

Key::Key(std::uint64_t seed_lo, std::uint64_t seed_hi, int width) : width_(width) {
    if (width != 4 && width != 8 && width != 16 && width != 32)
        throw std::invalid_argument("unsupported word width");
    half_bits_ = block_bits() / 2;
    std::uint64_t s = seed_lo;
    for (int i = 0; i < 8; ++i) {
        s = mix64(s + (i % 2 ? seed_hi : seed_lo));
        round_key_[i] = s;
    }
}

std::uint64_t Key::feistel(std::uint64_t block, bool forward) const {
    const std::uint64_t half_mask = (1ull << half_bits_) - 1;
    std::uint64_t left = block >> half_bits_;
    std::uint64_t right = block & half_mask;
    for (int i = 0; i < 8; ++i) {
        const std::uint64_t k = round_key_[forward ? i : 7 - i];
        if (forward) {
            std::uint64_t next = left ^ (mix64(right ^ k) & half_mask);
            left = right;
            right = next;
        } else {
            std::uint64_t prev = right ^ (mix64(left ^ k) & half_mask);
            right = left;
            left = prev;
        }
    }
    return (left << half_bits_) | right;
}

Ciphertext Key::encrypt(Word w, DomainTag tag) const {
    assert((w & ~word_mask()) == 0);
    std::uint64_t block = (w << (kTagBits + kCheckBits))
                        | (static_cast<std::uint64_t>(tag.code) << kCheckBits)
                        | kCheckValue;
    return Ciphertext{feistel(block, true)};
}

std::pair<Word, DomainTag> Key::decrypt(Ciphertext c) const {
    const std::uint64_t block_mask = block_bits() == 64 ? ~0ull : ((1ull << block_bits()) - 1);
    if ((c.bits & ~block_mask) != 0) throw CorruptCiphertext{};
    std::uint64_t block = feistel(c.bits, false);
    if ((block & ((1ull << kCheckBits) - 1)) != kCheckValue) throw CorruptCiphertext{};
    Word w = block >> (kTagBits + kCheckBits);
    auto tag = static_cast<std::uint16_t>((block >> kCheckBits) & ((1ull << kTagBits) - 1));
    return {w, DomainTag{tag}};
}

Word Key::decrypt_expect(Ciphertext c, DomainTag expected, const char* context) const {
    auto [w, tag] = decrypt(c);
    if (!(tag == expected)) throw TagMismatch{context};
    return w;
}

Word Key::junk_word(std::uint64_t address_bits) const {
    return mix64(address_bits ^ round_key_[0] ^ 0x6a09e667f3bcc908ull) & word_mask();
}

Ciphertext homomorphic_op(const Key& key, HomOp op, Ciphertext a, Ciphertext b) {
    Word x = key.decrypt_expect(a, DomainTag::data(), "homomorphic operand");
    Word y = key.decrypt_expect(b, DomainTag::data(), "homomorphic operand");
    const Word mask = key.word_mask();
    Word r = 0;
    const FloatFormat fmt = (op >= HomOp::FAdd) ? FloatFormat::for_bits(key.width())
                                                : FloatFormat{0, 0};
    switch (op) {
        case HomOp::Add: r = (x + y) & mask; break;
        case HomOp::Sub: r = (x - y) & mask; break;
        case HomOp::Mul: r = (x * y) & mask; break;
        case HomOp::Div:
            if (y == 0) throw std::domain_error("division by zero");
            // signed division with truncation; operate on sign-extended values
            {
                auto sext = [&](Word v) {
                    std::uint64_t sign = 1ull << (key.width() - 1);
                    return static_cast<std::int64_t>((v ^ sign) - sign);
                };
                std::int64_t q = sext(y) == -1 && sext(x) == -(1ll << (key.width() - 1))
                                     ? sext(x)
                                     : sext(x) / sext(y);
                r = static_cast<Word>(q) & mask;
            }
            break;
        case HomOp::Xor: r = x ^ y; break;
        case HomOp::FAdd: r = encode_float(fmt, decode_float(fmt, x) + decode_float(fmt, y)); break;
        case HomOp::FSub: r = encode_float(fmt, decode_float(fmt, x) - decode_float(fmt, y)); break;
        case HomOp::FMul: r = encode_float(fmt, decode_float(fmt, x) * decode_float(fmt, y)); break;
        case HomOp::FDiv: r = encode_float(fmt, decode_float(fmt, x) / decode_float(fmt, y)); break;
    }
    return key.encrypt(r, DomainTag::data());
}

std::string to_hex(const Key& key, Ciphertext c) {
    static const char digits[] = "0123456789abcdef";
    std::string out(key.hex_digits(), '0');
    std::uint64_t v = c.bits;
    for (int i = key.hex_digits() - 1; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

Ciphertext ciphertext_from_hex(const Key& key, const std::string& hex) {
    if (static_cast<int>(hex.size()) != key.hex_digits())
        throw std::invalid_argument("ciphertext hex has wrong length");
    std::uint64_t v = 0;
    for (char ch : hex) {
        v <<= 4;
        if (ch >= '0' && ch <= '9') v |= ch - '0';
        else if (ch >= 'a' && ch <= 'f') v |= ch - 'a' + 10;
        else throw std::invalid_argument("bad hex digit in ciphertext");
    }
    return Ciphertext{v};
}

} // namespace fxa
