#pragma once

#include "fxa/cipher.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fxa {

// Physical opcodes. Note that the relational branch set only carries the
// base classes beq/blt/bgt (per operand width): the "not" forms bne/bge/ble
// are the same physical instruction with the encrypted diddle bit set, so
// they differ from the base form only in ciphertext. The assembler accepts
// both mnemonics.
enum class Op : std::uint8_t {
    Add, Sub, Mul, Div, Divu, Xor, Mov,
    Addl, Subl, Mull, Divl, Divul, Xorl, Movl,
    Addf, Subf, Mulf, Divf,
    Addd, Subd, Muld, Divd,
    Beq, Blt, Bgt,
    Beql, Bltl, Bgtl,
    Beqf, Bltf, Bgtf,
    Beqd, Bltd, Bgtd,
    B, J, Jal, Jr,
    Sw, Lw,
    Nop,
    Cvtif, Cvtuf, Cvtid, Cvtud, Cvtlf, Cvtulf, Cvtld, Cvtuld,
    Cvtfi, Cvtfu, Cvtfl, Cvtful, Cvtdi, Cvtdu, Cvtdl, Cvtdul,
    Cvtfd, Cvtdf,
    Count
};

constexpr int kOpCount = static_cast<int>(Op::Count);

enum class OpKind : std::uint8_t { Alu, Copy, Branch, Jump, JumpReg, Load, Store, Nop, Cvt };

struct OpInfo {
    const char* name;        // canonical mnemonic
    OpKind kind;
    std::uint8_t reg_count;
    std::uint8_t pair_mask;  // bit i set: operand i names a register pair
    std::uint8_t const_cells;
    bool has_diddle;
    bool has_disp;           // signed instruction-count displacement
    bool has_target;         // absolute instruction index
    // Cvt metadata (cells of destination and source operands).
    std::uint8_t out_cells = 1, in_cells = 1;
};

const OpInfo& op_info(Op op);
std::optional<Op> op_by_name(const std::string& name);
inline int op_index(Op op) { return static_cast<int>(op); }

// Domain tag of one constant cell. The diddle bit occupies the cell position
// right after the declared constants.
DomainTag const_cell_tag(Op op, int cell);
DomainTag diddle_tag(Op op);

bool is_arithmetic_write(Op op); // Alu or Cvt: one fresh output offset each

// 32 general purpose registers. Pair operands name registers 0..15 and span
// (r, r+16) with the high word in r+16. Registers 0 and 16 read as E[0] and
// are not writable, so pair 0 is a 2W-bit zero.
constexpr int kNumRegs = 32;
constexpr int kRegZero = 0;
constexpr int kRegRa = 1;
constexpr int kRegSp = 2;
constexpr int kRegFp = 3;
constexpr int kRegA0 = 4;
constexpr int kRegV0 = 8;
constexpr int kRegV1 = 9;
constexpr int kRegT0 = 10;
constexpr int kRegZeroHi = 16;

const char* reg_name(int index);
std::optional<int> reg_by_name(const std::string& name);
inline int pair_high(int reg) { return reg + 16; }

struct Instruction {
    Op op = Op::Nop;
    std::array<std::uint8_t, 3> regs{};   // reg_count of them are meaningful
    std::vector<Ciphertext> consts;       // const_cells entries, in cell order
    std::optional<Ciphertext> diddle;     // branches only
    std::int32_t disp = 0;
    std::uint32_t target = 0;

    bool operator==(const Instruction&) const = default;
};

enum class ArrayMode { PerEntry, Shared };
const char* array_mode_name(ArrayMode m);
std::optional<ArrayMode> array_mode_by_name(const std::string& s);

// One scheduled program input or output: where it lives, its nominal type,
// and the plaintext offsets (one per cell) the user side must apply.
struct IfaceEntry {
    enum class Kind { Param, Ret, Env } kind;
    int index = 0;                  // parameter position (Param only)
    std::string location;           // register name
    std::string type_name;
    std::vector<Word> offsets;      // per cell
};

// Compile-time trailer annotation: instructions constrained to land one
// common offset at a control-flow join. Their fresh draw counts once.
struct TrailerSet {
    std::vector<std::uint32_t> members; // instruction indices
};

struct ObjectProgram {
    int width = 32;
    ArrayMode array_mode = ArrayMode::PerEntry;
    std::uint32_t entry = 0;
    std::vector<Instruction> code;
    std::vector<IfaceEntry> iface;
    std::vector<TrailerSet> trailer_sets;
    std::string source_name;

    // Throws std::runtime_error when operand shapes or control targets are
    // malformed (branches must resolve inside the sequence; one-past-the-end
    // is the halt address for jumps through registers only).
    void validate() const;
};

// Structured object file, line oriented:
//   FXA 1 / WIDTH / MODE / ENTRY / SRC? / IFACE* / TRAILER* /
//   INS <index> <opcode> <regs...> <consts-as-hex...> [disp|target]
// The diddle travels as the last hex field of its instruction.
std::string save_object(const ObjectProgram& prog, const Key& key);
ObjectProgram load_object(const std::string& text, const Key& key);

} // namespace fxa
