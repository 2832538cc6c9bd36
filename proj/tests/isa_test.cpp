#include "fxa/assembler.hpp"
#include "fxa/wordops.hpp"

#include <doctest.h>

#include <random>

using namespace fxa;

namespace {
Key test_key(int w = 32) { return Key(111, 222, w); }
}

TEST_CASE("constant layout is total and within the tag budget") {
    for (int i = 0; i < kOpCount; ++i) {
        Op op = static_cast<Op>(i);
        const OpInfo& info = op_info(op);
        int cells = info.const_cells + (info.has_diddle ? 1 : 0);
        CHECK(cells <= 8);
        for (int c = 0; c < info.const_cells; ++c)
            CHECK(!const_cell_tag(op, c).is_data());
        CHECK(op_by_name(info.name) == op);
    }
}

TEST_CASE("assemble the trace fragment mnemonics") {
    Key key = test_key();
    ObjectProgram p = assemble(
        "add t0 a0 zer E[-86921031]\n"
        "nop\n"
        "beq t0 t1 2 E[240236822]\n"
        "mull v0 a0 a1 E[7] E[8] E[9]\n"
        "nop\n"
        "nop\n",
        key, 32);
    CHECK(p.code.size() == 6);
    CHECK(p.code[0].op == Op::Add);
    CHECK(p.code[0].regs[0] == *reg_by_name("t0"));
    CHECK(p.code[0].regs[1] == *reg_by_name("a0"));
    CHECK(p.code[0].regs[2] == *reg_by_name("zer"));
    Word v = key.decrypt_expect(p.code[0].consts[0], const_cell_tag(Op::Add, 0), "k");
    CHECK(v == (static_cast<Word>(-86921031) & key.word_mask()));

    CHECK(p.code[1].op == Op::Nop);
    CHECK(p.code[1].consts.empty());

    CHECK(p.code[2].op == Op::Beq);
    CHECK(p.code[2].disp == 2);
    CHECK(p.code[2].diddle.has_value());
    CHECK(key.decrypt_expect(*p.code[2].diddle, diddle_tag(Op::Beq), "d") == 0);

    CHECK(p.code[3].op == Op::Mull);
    CHECK(p.code[3].consts.size() == 6);
    // 64-bit constant 7 split hi.lo
    CHECK(key.decrypt_expect(p.code[3].consts[0], const_cell_tag(Op::Mull, 0), "k") == 0);
    CHECK(key.decrypt_expect(p.code[3].consts[1], const_cell_tag(Op::Mull, 1), "k") == 7);
}

TEST_CASE("diddled mnemonics set the encrypted bit") {
    Key key = test_key();
    ObjectProgram p = assemble("bne t0 t1 1 E[5]\nbge a0 a1 -1 E[1] E[2]\nnop\n", key, 32);
    CHECK(p.code[0].op == Op::Beq);
    CHECK(key.decrypt_expect(*p.code[0].diddle, diddle_tag(Op::Beq), "d") == 1);
    CHECK(p.code[1].op == Op::Blt);
    CHECK(key.decrypt_expect(*p.code[1].diddle, diddle_tag(Op::Blt), "d") == 1);
}

TEST_CASE("assembler errors") {
    Key key = test_key();
    CHECK_THROWS_AS(assemble("frob t0 t1\n", key, 32), AsmError);
    CHECK_THROWS_AS(assemble("add t0 a0 E[1]\n", key, 32), AsmError);         // missing reg
    CHECK_THROWS_AS(assemble("b nowhere\n", key, 32), AsmError);              // unresolved label
    CHECK_THROWS_AS(assemble("add t0 a0 zer E[1] E[2]\n", key, 32), AsmError); // extra const
}

TEST_CASE("labels resolve to displacements") {
    Key key = test_key();
    ObjectProgram p = assemble(
        "top:\n"
        "add t0 t0 zer E[1]\n"
        "beq t0 zer top E[0]\n"
        "b done\n"
        "nop\n"
        "done:\n"
        "nop\n",
        key, 32);
    CHECK(p.code[1].disp == -2);
    CHECK(p.code[2].disp == 1);
}

TEST_CASE("empty program round trips") {
    Key key = test_key();
    ObjectProgram p = assemble("", key, 32);
    CHECK(disassemble(p, key).empty());
}

TEST_CASE("disassemble keyed shows the trace fragment text") {
    Key key = test_key();
    ObjectProgram p = assemble("beq t0 t1 2 E[240236822]\nnop\nnop\n", key, 32);
    std::string text = disassemble(p, key, true);
    CHECK(text.find("beq t0 t1 2") != std::string::npos);
    CHECK(text.find("E[240236822]") != std::string::npos);
}

TEST_CASE("random programs round trip through both text forms") {
    Key key = test_key();
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        ObjectProgram p;
        p.width = 32;
        int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            Op op = static_cast<Op>(rng() % kOpCount);
            const OpInfo& info = op_info(op);
            Instruction ins;
            ins.op = op;
            for (int r = 0; r < info.reg_count; ++r) {
                int reg = static_cast<int>(rng() % kNumRegs);
                if ((info.pair_mask >> r) & 1) reg %= 16;
                ins.regs[r] = static_cast<std::uint8_t>(reg);
            }
            for (int c = 0; c < info.const_cells; ++c)
                ins.consts.push_back(key.encrypt(rng() & key.word_mask(), const_cell_tag(op, c)));
            if (info.has_diddle)
                ins.diddle = key.encrypt(rng() & 1, diddle_tag(op));
            if (info.has_disp)
                ins.disp = static_cast<std::int32_t>(rng() % (n + 1)) - static_cast<std::int32_t>(i) - 1;
            if (info.has_target) ins.target = static_cast<std::uint32_t>(rng() % (n + 1));
            p.code.push_back(std::move(ins));
        }
        p.validate();

        // keyless text preserves ciphertext bits exactly
        ObjectProgram q = assemble(disassemble(p, key, false), key, 32);
        CHECK(q.code == p.code);
        // keyed text re-encrypts to the same ciphertexts deterministically
        ObjectProgram q2 = assemble(disassemble(p, key, true), key, 32);
        CHECK(q2.code == p.code);
        // object file round trip
        ObjectProgram q3 = load_object(save_object(p, key), key);
        CHECK(q3.code == p.code);
        CHECK(q3.width == p.width);
    }
}
