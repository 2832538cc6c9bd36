#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fxa {

// Plaintext machine word, always kept masked to the configured width.
using Word = std::uint64_t;

// Domain tag separating runtime data from per-opcode, per-slot instruction
// constants. Encoded in 16 bits: 0 is Data, everything else identifies one
// constant cell of one opcode.
struct DomainTag {
    std::uint16_t code = 0;

    static constexpr DomainTag data() { return DomainTag{0}; }
    static DomainTag constant(int opcode_index, int cell_position);

    bool is_data() const { return code == 0; }
    bool operator==(const DomainTag&) const = default;
};

// Opaque encryption of (word, tag). The bit width is W + 32: W payload bits,
// 16 tag bits, 16 check bits, all permuted together. Only the bits are ever
// shown to the operator side.
struct Ciphertext {
    std::uint64_t bits = 0;

    bool operator==(const Ciphertext&) const = default;
    bool operator<(const Ciphertext& o) const { return bits < o.bits; }
};

struct CorruptCiphertext : std::runtime_error {
    CorruptCiphertext() : std::runtime_error("corrupt ciphertext: check bits failed") {}
};

struct TagMismatch : std::runtime_error {
    explicit TagMismatch(const std::string& what) : std::runtime_error("tag mismatch: " + what) {}
};

// Keyed bijection between (word, tag) and ciphertext blocks. A Feistel
// permutation over the word||tag||check block, seeded from a 128-bit value.
// Deliberately not cryptographically strong: the security story lives in the
// compiler's across-recompilation variation, not in this mock.
class Key {
public:
    Key(std::uint64_t seed_lo, std::uint64_t seed_hi, int width);

    int width() const { return width_; }
    int block_bits() const { return width_ + kTagBits + kCheckBits; }
    int hex_digits() const { return block_bits() / 4; }
    Word word_mask() const { return width_ == 64 ? ~0ull : ((1ull << width_) - 1); }

    Ciphertext encrypt(Word w, DomainTag tag) const;
    // Inverts encrypt. Throws CorruptCiphertext when the check bits fail.
    std::pair<Word, DomainTag> decrypt(Ciphertext c) const;
    // decrypt + tag assertion, the form the ALU uses.
    Word decrypt_expect(Ciphertext c, DomainTag expected, const char* context) const;

    // Deterministic junk word for uninitialised memory cells, keyed off the
    // address ciphertext so repeated reads agree.
    Word junk_word(std::uint64_t address_bits) const;

    static constexpr int kTagBits = 16;
    static constexpr int kCheckBits = 16;
    static constexpr std::uint16_t kCheckValue = 0xa5a5;

private:
    std::uint64_t feistel(std::uint64_t block, bool forward) const;

    int width_;
    int half_bits_;
    std::uint64_t round_key_[8];
};

// Plaintext binary operations available homomorphically. Integer ops work
// mod 2^W; the float ops act on the W-bit IEEE-style encodings.
enum class HomOp { Add, Sub, Mul, Div, Xor, FAdd, FSub, FMul, FDiv };

// x^E [o] y^E = E[x o y]. Both operands must carry the Data tag and the
// result does too. Throws TagMismatch otherwise and CorruptCiphertext on
// forged inputs; Div throws std::domain_error on zero divisor.
Ciphertext homomorphic_op(const Key& key, HomOp op, Ciphertext a, Ciphertext b);

std::string to_hex(const Key& key, Ciphertext c);
Ciphertext ciphertext_from_hex(const Key& key, const std::string& hex);

} // namespace fxa
