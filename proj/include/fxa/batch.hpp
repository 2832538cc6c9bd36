#pragma once

#include "fxa/analysis.hpp"
#include "fxa/codegen.hpp"
#include "fxa/oracle.hpp"

#include <string>
#include <vector>

namespace fxa {

struct BatchConfig {
    int width = 8;
    ArrayMode array_mode = ArrayMode::PerEntry;
    std::string entry;                 // empty: last function
    std::uint64_t key_lo = 1, key_hi = 2;
    std::uint64_t seed_begin = 1;
    std::uint32_t count = 100;
    std::vector<std::uint64_t> args;
    std::uint64_t step_budget = 1'000'000;
};

// One recompile/run/extract sweep. Row r of `deltas` holds the per-point
// offsets of seed_begin + r; per-seed diddle bits (keyed) and a hash of the
// branch-taken sequence support the boolean-coding and invariance checks.
struct BatchResult {
    ObjectProgram nominal_object;      // zero-offset compilation
    Trace nominal_trace;
    ShapeSignature shape;
    std::vector<PointInfo> points;
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint32_t> deltas; // row-major rows x cols
    std::vector<std::uint32_t> branch_pcs;
    std::vector<std::vector<std::uint8_t>> diddles; // per seed, per branch site
    std::vector<std::uint64_t> taken_hash;          // per seed
    bool shapes_ok = true;
    std::uint32_t first_bad_seed = 0;
};

// The sweep kernel. The parallel variant distributes seeds over OpenMP
// threads; each worker owns its rows, so the two variants produce identical
// results (covered by tests and timed by the benchmark tool).
BatchResult run_batch(const TypedUnit& unit, const BatchConfig& cfg, bool parallel);

} // namespace fxa
