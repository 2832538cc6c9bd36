// Differential testing: randomly generated mini-C programs run through the
// obfuscating compiler + emulator and through the reference interpreter, and
// the deoffset results (or fault verdicts) must agree. The acceptance suite
// runs the full 500-program corpus; this is a faster slice for ctest.

#include "fxa/codegen.hpp"
#include "fxa/oracle.hpp"
#include "fxa/progen.hpp"
#include "fxa/vm.hpp"
#include "fxa/wordops.hpp"

#include <doctest.h>

using namespace fxa;

namespace {

struct Verdict {
    bool faulted;
    std::string kind;
    std::uint64_t value;
};

Verdict run_vm(const TypedUnit& unit, const Key& key, std::uint64_t seed,
               const std::vector<std::uint64_t>& args) {
    CodegenOptions opts;
    opts.width = key.width();
    opts.seed = seed;
    ObjectProgram prog = compile_unit(unit, key, opts);
    RunOptions ro;
    ro.step_budget = 2'000'000;
    ro.record_trace = false;
    RunResult r = run_program(prog, key, args, ro);
    if (r.faulted) return {true, fault_name(r.fault), 0};
    return {false, "", r.ret_value};
}

Verdict run_oracle(const TypedUnit& unit, int width, const std::vector<std::uint64_t>& args) {
    OracleResult r = interpret(unit, "main", args, width, 2'000'000);
    if (r.faulted) return {true, oracle_fault_name(r.fault), 0};
    return {false, "", r.value};
}

} // namespace

TEST_CASE("generated corpus agrees with the interpreter at both widths") {
    int checked = 0, faults = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        GeneratedProgram gp = generate_program(seed);
        CAPTURE(seed);
        CAPTURE(gp.source);
        TypedUnit unit = typecheck_source(gp.source, "gen" + std::to_string(seed));
        for (int width : {8, 32}) {
            Key key(1000 + seed, 77, width);
            std::uint64_t mask = wordops::mask_bits(width);
            std::vector<std::uint64_t> args = {(seed * 37 + 11) & mask & 0x7f,
                                               (seed * 53 + 5) & mask & 0x3f};
            Verdict vm = run_vm(unit, key, seed * 3 + 1, args);
            Verdict oracle = run_oracle(unit, width, args);
            CHECK(vm.faulted == oracle.faulted);
            if (vm.faulted != oracle.faulted) continue;
            if (vm.faulted) {
                ++faults;
                CHECK(vm.kind == oracle.kind);
            } else {
                CHECK(vm.value == oracle.value);
            }
            ++checked;
        }
    }
    CHECK(checked > 100);
    MESSAGE("checked=", checked, " faulting=", faults);
}

TEST_CASE("the generator is deterministic and covers the feature matrix") {
    GeneratedProgram a = generate_program(17);
    GeneratedProgram b = generate_program(17);
    CHECK(a.source == b.source);

    ProgramFeatures all;
    std::uint32_t types = 0;
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        ProgramFeatures f = generate_program(seed).features;
        all.arrays |= f.arrays;
        all.structs |= f.structs;
        all.unions |= f.unions;
        all.pointers |= f.pointers;
        all.casts |= f.casts;
        all.loops |= f.loops;
        all.recursion |= f.recursion;
        types |= f.base_types;
    }
    CHECK(all.arrays);
    CHECK(all.structs);
    CHECK(all.unions);
    CHECK(all.pointers);
    CHECK(all.casts);
    CHECK(all.loops);
    CHECK(all.recursion);
    CHECK(types == (1u << kBaseTypeCount) - 1); // all 13 basic types appear
}
