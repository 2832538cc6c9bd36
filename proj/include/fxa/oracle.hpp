#pragma once

#include "fxa/typecheck.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fxa {

enum class OracleFault : std::uint8_t { None, DivideByZero, OutOfBounds, StepBudget };
const char* oracle_fault_name(OracleFault f);

struct OracleResult {
    bool faulted = false;
    OracleFault fault = OracleFault::None;
    std::uint64_t value = 0; // entry result, cell image (pairs packed high.low)
    std::uint64_t steps = 0;
    // Nominal write log: one record per source-level scalar write.
    std::vector<std::pair<std::string, std::uint64_t>> write_log;
};

// Reference interpreter over the typed Ast; all arithmetic mod 2^W
// two's-complement and IEEE-style on the width-W encodings, matching the
// platform word semantics exactly.
OracleResult interpret(const TypedUnit& unit, const std::string& entry,
                       const std::vector<std::uint64_t>& args, int width,
                       std::uint64_t step_budget = 10'000'000);

} // namespace fxa
