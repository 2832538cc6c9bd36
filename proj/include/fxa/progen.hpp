#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fxa {

// Feature flags of one generated program, for corpus coverage accounting.
struct ProgramFeatures {
    bool arrays = false;
    bool structs = false;
    bool unions = false;
    bool pointers = false;
    bool casts = false;
    bool loops = false;
    bool recursion = false;
    bool calls = false;
    std::uint32_t base_types = 0; // bit per BaseType
};

struct GeneratedProgram {
    std::string source;
    int param_count = 0;
    ProgramFeatures features;
};

// Deterministic, always-terminating mini-C program with two int parameters:
// loops are bounded counters, recursion is depth-bounded, array indices stay
// in range, every variable is written before it is read. Integer division
// and remainder may still fault, which differential runs compare as
// verdicts. The same seed yields the same program.
GeneratedProgram generate_program(std::uint64_t seed);

} // namespace fxa
