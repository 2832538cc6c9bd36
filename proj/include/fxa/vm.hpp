#pragma once

#include "fxa/isa.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace fxa {

enum class FaultKind : std::uint8_t {
    None, DivideByZero, CorruptCiphertext, TagMismatch, InvalidPc, StepBudget, BadWrite
};
const char* fault_name(FaultKind k);

struct VmError : std::runtime_error {
    VmError(FaultKind kind, std::uint32_t pc)
        : std::runtime_error(std::string("vm fault: ") + fault_name(kind) +
                             " at pc " + std::to_string(pc)),
          kind(kind), pc(pc) {}
    FaultKind kind;
    std::uint32_t pc;
};

// One observable event. Everything here except `value` bits is plaintext to
// the operator; `value` (and memory addresses) are ciphertext bits.
struct TraceEvent {
    enum class Kind : std::uint8_t { Write, Input, Branch };
    Kind kind;
    std::uint64_t step;
    std::uint32_t pc;
    Op op;
    std::uint8_t nregs = 0;
    std::array<std::uint8_t, 3> regs{};   // instruction register specifiers
    bool dest_is_mem = false;
    std::uint8_t dest_reg = 0;
    std::uint64_t dest_addr_bits = 0;     // address ciphertext for memory
    Ciphertext value;                     // written / input ciphertext
    bool taken = false;                   // branches
    // Copy provenance (mov/lw/sw): source location, for dependence analysis.
    bool is_copy = false;
    bool src_is_mem = false;
    std::uint8_t src_reg = 0;
    std::uint64_t src_addr_bits = 0;
};

struct Trace {
    std::vector<TraceEvent> events;
    std::uint64_t steps = 0;
    FaultKind fault = FaultKind::None;
    std::uint32_t fault_pc = 0;
};

// Registers and memory hold ciphertexts only; memory is keyed by the address
// ciphertext bits and never by a decrypted address.
struct MachineState {
    std::uint32_t pc = 0;
    bool halted = false;
    std::array<Ciphertext, kNumRegs> regs{};
    std::array<bool, kNumRegs> reg_written{};
    std::array<bool, kNumRegs> reg_input_logged{};
    std::unordered_map<std::uint64_t, Ciphertext> mem;
    std::unordered_map<std::uint64_t, bool> mem_input_logged;
};

struct RunOptions {
    std::uint64_t step_budget = 50'000'000;
    bool record_trace = true;
};

struct RunResult {
    Trace trace;
    bool faulted = false;
    FaultKind fault = FaultKind::None;
    std::vector<Ciphertext> ret_cells;       // raw ciphertext outputs
    std::vector<std::uint64_t> ret_plain;    // schedule-deoffset plaintext cells
    std::uint64_t ret_value = 0;             // cells joined, high first
    std::uint64_t steps = 0;
};

// Executes one instruction, atomically: a faulting instruction throws VmError
// before any state or trace mutation. `trace` may be null.
void vm_step(MachineState& state, const ObjectProgram& prog, const Key& key,
             Trace* trace, std::uint64_t step_index);

// User-side driver: encrypts `args` (one logical value per parameter, pairs
// packed high.low in one uint64) with the interface-schedule offsets, runs to
// halt, and deoffsets the scheduled outputs. Faults are reported in the
// result with the trace collected so far.
RunResult run_program(const ObjectProgram& prog, const Key& key,
                      const std::vector<std::uint64_t>& args,
                      const RunOptions& opts = {});

// Nominal top-of-stack value for width W (the stack grows downward from it).
Word stack_top(int width);

// Trace file: `W <step> <pc> <opcode> <dest> <ct-hex>`,
// `I <step> <loc> <ct-hex>`, `B <step> <pc> <opcode> <taken>`.
// Byte-deterministic given (program, key, args); contains only what the
// operator may see.
std::string save_trace(const Trace& trace, const Key& key);

// The redacted structure the operator sees: strips copy provenance, keeps
// pc, opcodes, register specifiers, branch directions and ciphertext bits.
Trace adversary_view(const Trace& trace);

} // namespace fxa
