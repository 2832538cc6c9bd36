#pragma once

#include "fxa/isa.hpp"
#include "fxa/obfuscate.hpp"
#include "fxa/typecheck.hpp"

namespace fxa {

struct CodegenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CodegenOptions {
    int width = 32;
    ArrayMode array_mode = ArrayMode::PerEntry;
    std::uint64_t seed = 0;
    bool zero_offsets = false; // all-zero scheme, for nominal runs
    std::string entry;         // empty: last function in the unit
};

// Compiles the typed unit to an object program. The instruction sequence is
// a function of the source alone; the seed only reaches the encrypted
// constants (and the interface schedule), so two compilations of one source
// differ exactly in those fields.
ObjectProgram compile_unit(const TypedUnit& unit, const Key& key, const CodegenOptions& opts);

} // namespace fxa
