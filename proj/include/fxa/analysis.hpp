#pragma once

#include "fxa/stats.hpp"
#include "fxa/vm.hpp"

#include <string>
#include <vector>

namespace fxa {

// Everything structural about one trace event: plaintext fields only, with
// ciphertext bits (values and memory addresses) projected away. Equal for
// traces of one source under different compilation seeds.
struct ShapeEvent {
    std::uint8_t kind;
    std::uint32_t pc;
    Op op;
    std::uint8_t nregs;
    std::array<std::uint8_t, 3> regs;
    bool dest_is_mem;
    std::uint8_t dest_reg; // register destinations only
    bool taken;

    bool operator==(const ShapeEvent&) const = default;
};

using ShapeSignature = std::vector<ShapeEvent>;

ShapeSignature shape(const Trace& trace);
bool shapes_equal(const ShapeSignature& a, const ShapeSignature& b);

// A delta point: one write or input event of the common shape.
struct PointInfo {
    std::uint32_t event_index; // index into the trace event list
    std::uint32_t pc;
    Op op;
    bool is_input;
    bool is_mem;
    std::uint8_t dest_reg;
    Word nominal; // plaintext under the all-zero scheme
};

// Identifies the delta points of a shape and their nominal values. The
// nominal trace comes from a zero-offset compilation run and must share the
// shape.
std::vector<PointInfo> delta_points(const Trace& nominal_trace, const Key& key);

// Extracts one delta row from a trace that shares the shape: per point,
// (decrypted value - nominal) mod 2^W.
std::vector<std::uint32_t> extract_deltas(const Trace& trace, const Key& key,
                                          const std::vector<PointInfo>& points);

enum class DependReason : std::uint8_t { SamePoint, Copy, TrailerJoin };

struct DependencePair {
    std::uint32_t a, b; // indices into the point list
    DependReason reason;
};

// The observable dependence relation over the points of a trace: repeats of
// one static instruction, copy in/out pairs, and members of one trailer set.
std::vector<DependencePair> dependence_pairs(const ObjectProgram& prog,
                                             const Trace& nominal_trace,
                                             const std::vector<PointInfo>& points);

// W*(n+m) bits: n distinct arithmetic write instructions reached by the
// trace with trailer sets counted once, m input words.
struct EntropyBudget {
    int n_arithmetic = 0;
    int m_inputs = 0;
    int bits = 0;
    int loop_repeated = 0; // static instructions seen more than once
};
EntropyBudget entropy_budget(const ObjectProgram& prog, const Trace& trace);

} // namespace fxa
