#include "fxa/cipher.hpp"
#include "fxa/wordops.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace fxa;

TEST_CASE("round trip at every width") {
    for (int w : {4, 8, 16, 32}) {
        Key key(0x1234, 0x5678, w);
        for (Word v : {Word{0}, Word{1}, Word{7}, key.word_mask()}) {
            auto [pv, tag] = key.decrypt(key.encrypt(v, DomainTag::data()));
            CHECK(pv == v);
            CHECK(tag.is_data());
        }
    }
}

TEST_CASE("bijection over words, exhaustive at W=8") {
    Key key(99, 100, 8);
    std::set<std::uint64_t> seen;
    for (Word v = 0; v < 256; ++v) {
        Ciphertext c = key.encrypt(v, DomainTag::data());
        CHECK(seen.insert(c.bits).second);
        auto [pv, tag] = key.decrypt(c);
        CHECK(pv == v);
        CHECK(tag.is_data());
    }
}

TEST_CASE("domain separation between data and instruction constants") {
    Key key(7, 8, 8);
    Ciphertext data = key.encrypt(5, DomainTag::data());
    Ciphertext c0 = key.encrypt(5, DomainTag::constant(0, 0));
    Ciphertext c1 = key.encrypt(5, DomainTag::constant(0, 1));
    Ciphertext d0 = key.encrypt(5, DomainTag::constant(3, 0));
    CHECK(data != c0);
    CHECK(c0 != c1);
    CHECK(c0 != d0);
    // exhaustive at W=8: images of two domains never collide
    std::set<std::uint64_t> a, b;
    for (Word v = 0; v < 256; ++v) {
        a.insert(key.encrypt(v, DomainTag::data()).bits);
        b.insert(key.encrypt(v, DomainTag::constant(2, 1)).bits);
    }
    for (std::uint64_t x : a) CHECK(!b.count(x));
}

TEST_CASE("deterministic: same key, same mapping") {
    Key k1(42, 43, 16), k2(42, 43, 16);
    for (Word v : {Word{0}, Word{1000}, Word{65535}})
        CHECK(k1.encrypt(v, DomainTag::data()) == k2.encrypt(v, DomainTag::data()));
}

TEST_CASE("forged ciphertext detection rate matches the check width") {
    // random bit strings decrypt with probability ~ 2^-16
    Key key(11, 12, 8);
    std::mt19937_64 rng(7);
    const int trials = 200000;
    int accepted = 0;
    const std::uint64_t block_mask = (1ull << key.block_bits()) - 1;
    for (int i = 0; i < trials; ++i) {
        Ciphertext c{rng() & block_mask};
        try {
            key.decrypt(c);
            ++accepted;
        } catch (const CorruptCiphertext&) {
        }
    }
    // expectation ~ trials * 2^-16 = 3.05; generous bound
    CHECK(accepted <= 20);
}

TEST_CASE("homomorphic integer and float operations") {
    Key key(21, 22, 32);
    auto E = [&](Word v) { return key.encrypt(v & key.word_mask(), DomainTag::data()); };
    auto D = [&](Ciphertext c) { return key.decrypt(c).first; };

    CHECK(D(homomorphic_op(key, HomOp::Add, E(2), E(3))) == 5);
    CHECK(D(homomorphic_op(key, HomOp::Sub, E(2), E(3))) == (Word(0) - 1 & key.word_mask()));
    CHECK(D(homomorphic_op(key, HomOp::Mul, E(7), E(6))) == 42);
    CHECK(D(homomorphic_op(key, HomOp::Xor, E(0xf0), E(0x0f))) == 0xff);

    // [*.] on encodings of 1.5 and 2.0 is the encoding of 3.0
    Word a = wordops::fencode(1.5, 32), b = wordops::fencode(2.0, 32);
    Ciphertext r = homomorphic_op(key, HomOp::FMul, E(a), E(b));
    CHECK(wordops::fdecode(D(r), 32) == 3.0);

    // determinism: equal inputs, equal output ciphertexts
    CHECK(homomorphic_op(key, HomOp::Add, E(2), E(3)) ==
          homomorphic_op(key, HomOp::Add, E(2), E(3)));
}

TEST_CASE("tag mismatch on constants used as data") {
    Key key(31, 32, 8);
    Ciphertext c = key.encrypt(5, DomainTag::constant(2, 1));
    CHECK_THROWS_AS(homomorphic_op(key, HomOp::Add, c, key.encrypt(1, DomainTag::data())),
                    TagMismatch);
}

TEST_CASE("hex serialization is fixed width and round-trips") {
    for (int w : {4, 8, 16, 32}) {
        Key key(5, 6, w);
        Ciphertext c = key.encrypt(3, DomainTag::data());
        std::string hex = to_hex(key, c);
        CHECK(static_cast<int>(hex.size()) == key.hex_digits());
        CHECK(ciphertext_from_hex(key, hex) == c);
    }
}
