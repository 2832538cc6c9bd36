#pragma once

#include "fxa/ast.hpp"
#include "fxa/cipher.hpp"
#include "fxa/isa.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace fxa {

// Deterministic offset stream. Every fresh offset and coin of a compilation
// comes from one of these, so (source, seed) fixes the object code exactly.
// The zero variant stands in for the all-zero obfuscation scheme used to
// produce nominal traces.
class OffsetRng {
public:
    OffsetRng(std::uint64_t seed, int width, bool zero = false);

    Word word();      // uniform W-bit offset (0 in zero mode)
    bool coin();      // equiprobable bit (0 in zero mode)
    std::uint64_t wide(int cells); // cells*W bits, high cell first

private:
    std::uint64_t state_;
    Word mask_;
    bool zero_;
};

// A storage cell the compiler tracks an offset for.
struct Loc {
    enum class Kind : std::uint8_t { Reg, Slot } kind;
    int index;

    bool operator<(const Loc& o) const {
        return kind != o.kind ? kind < o.kind : index < o.index;
    }
    bool operator==(const Loc&) const = default;

    static Loc reg(int r) { return {Kind::Reg, r}; }
    static Loc slot(int s) { return {Kind::Slot, s}; }
};

// Per-location planned offset. Boolean-coded cells carry the truthteller/
// liar sense bit alongside the full-width delta; `bool_coded` is structural
// (the location holds a boolean) while `parity` is the per-compilation coin.
// `definer` remembers the instruction that last established the offset
// (trailer-set bookkeeping).
struct SchemeEntry {
    Word delta = 0;
    bool parity = false;
    bool bool_coded = false;
    int definer = -1;
};

// The obfuscation scheme at one program point: Loc -> offset. Immutable
// value semantics; forks at branches are plain copies.
class Scheme {
public:
    const SchemeEntry& get(const Loc& l) const;
    const SchemeEntry* find(const Loc& l) const;
    void set(const Loc& l, SchemeEntry e);
    void erase(const Loc& l);
    bool contains(const Loc& l) const { return map_.count(l) != 0; }
    const std::map<Loc, SchemeEntry>& entries() const { return map_; }

private:
    std::map<Loc, SchemeEntry> map_;
};

// Offset-class partition of a union's word-granular layout: cells that must
// share one offset are in one class.
struct OffsetClassSet {
    std::vector<int> class_of;        // per cell, class id (dense, by first cell)
    int class_count = 0;

    std::vector<std::vector<int>> classes() const;
};

// The coarsest-freedom partition forced by member overlap for a union type:
// per-entry array mode constrains nothing beyond cell identity; shared mode
// additionally forces one offset per contained array (componentwise for
// pair-celled elements). Throws on non-word-aligned overlap, which the cell
// type model cannot express.
OffsetClassSet unify_union(const TypePtr& union_type, ArrayMode mode);

// One location's required adjustment on one joining path.
struct SchemeAdjustment {
    Loc loc;
    Word from_delta = 0;
    bool from_parity = false;
};

struct JoinResult {
    Scheme target;
    std::vector<std::vector<SchemeAdjustment>> per_path; // parallel to inputs
};

// Joins control paths. `sync_locs` names the locations written on at least
// one path since the fork — a structural property, so the emitted trailer
// pattern is identical across seeds (including the all-zero scheme). Each
// sync location gets a freshly drawn common target offset and one adjustment
// per path; everything else keeps its (necessarily common) offset. With
// `forced_target` the common scheme is prescribed instead (loop back edges
// join to the loop head scheme).
JoinResult join_schemes(const std::vector<Scheme>& paths,
                        const std::vector<Loc>& sync_locs, OffsetRng& rng,
                        const Scheme* forced_target = nullptr);

} // namespace fxa
