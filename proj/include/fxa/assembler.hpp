#pragma once

#include "fxa/isa.hpp"

#include <string>

namespace fxa {

struct AsmError : std::runtime_error {
    AsmError(int line, const std::string& msg)
        : std::runtime_error("asm line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

// One instruction per line, `#` comments, optional `label:` prefixes.
// Operands: register names, plaintext constants `E[n]` (encrypted under the
// key; a 2W-bit constant covers two cells), raw ciphertext cells `$hex`,
// an explicit diddle `!$hex`, and numbers or labels for branch targets.
// Branch mnemonics bne/bge/ble (any width suffix) assemble to the beq/blt/bgt
// classes with the diddle bit set.
ObjectProgram assemble(const std::string& text, const Key& key, int width,
                       ArrayMode mode = ArrayMode::PerEntry);

// With `keyed` the constants print as E[value] and branch mnemonics reflect
// the decrypted diddle; without it everything prints as raw hex cells.
// Both forms reassemble to a structurally equal program.
std::string disassemble(const ObjectProgram& prog, const Key& key, bool keyed = true);

} // namespace fxa
