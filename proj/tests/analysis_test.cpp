#include "fxa/analysis.hpp"
#include "fxa/assembler.hpp"
#include "fxa/batch.hpp"
#include "fxa/codegen.hpp"
#include "fxa/typecheck.hpp"

#include <doctest.h>

using namespace fxa;

namespace {

Key test_key(int w = 8) { return Key(41, 43, w); }

RunResult run_src(const std::string& src, const Key& key, std::uint64_t seed,
                  const std::vector<std::uint64_t>& args, ObjectProgram* out_prog = nullptr,
                  bool zero = false) {
    TypedUnit unit = typecheck_source(src);
    CodegenOptions opts;
    opts.width = key.width();
    opts.seed = seed;
    opts.zero_offsets = zero;
    ObjectProgram prog = compile_unit(unit, key, opts);
    RunResult r = run_program(prog, key, args);
    REQUIRE(!r.faulted);
    if (out_prog) *out_prog = std::move(prog);
    return r;
}

} // namespace

TEST_CASE("shape equality across seeds, inequality across sources") {
    Key key = test_key();
    const char* src = "int f(int a) { if (a > 2) { return a * 3; } return a + 1; }";
    RunResult r1 = run_src(src, key, 1, {5});
    RunResult r2 = run_src(src, key, 2, {5});
    CHECK(shapes_equal(shape(r1.trace), shape(r1.trace)));
    CHECK(shapes_equal(shape(r1.trace), shape(r2.trace)));

    RunResult other = run_src("int f(int a) { return a - 1; }", key, 1, {5});
    CHECK(!shapes_equal(shape(r1.trace), shape(other.trace)));
}

TEST_CASE("zero-offset compilation extracts all-zero deltas") {
    Key key = test_key();
    const char* src = "int f(int a) { int s; s = a + 3; return s * 2; }";
    ObjectProgram zprog;
    RunResult z = run_src(src, key, 0, {9}, &zprog, true);
    auto points = delta_points(z.trace, key);
    auto row = extract_deltas(z.trace, key, points);
    for (std::uint32_t d : row) CHECK(d == 0);
    CHECK(!points.empty());
}

TEST_CASE("copy and trailer deltas are equal in every row") {
    const char* src =
        "int f(int a, int b) {\n"
        "  int s;\n"
        "  s = a;\n"
        "  int i;\n"
        "  for (i = 0; i < 3; i = i + 1) {\n"
        "    if (s > b) { s = s - b; } else { s = s + a; }\n"
        "  }\n"
        "  return s ^ b;\n"
        "}\n";
    TypedUnit unit = typecheck_source(src);
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = 64;
    cfg.args = {23, 5};
    BatchResult res = run_batch(unit, cfg, false);
    REQUIRE(res.shapes_ok);

    auto pairs = dependence_pairs(res.nominal_object, res.nominal_trace, res.points);
    int copy_pairs = 0, trailer_pairs = 0, same_point = 0;
    for (const DependencePair& p : pairs) {
        for (std::size_t r = 0; r < res.rows; ++r) {
            CHECK(res.deltas[r * res.cols + p.a] == res.deltas[r * res.cols + p.b]);
        }
        switch (p.reason) {
            case DependReason::Copy: ++copy_pairs; break;
            case DependReason::TrailerJoin: ++trailer_pairs; break;
            case DependReason::SamePoint: ++same_point; break;
        }
    }
    CHECK(copy_pairs > 0);     // the mov
    CHECK(trailer_pairs > 0);  // loop head/back adjustments
    CHECK(same_point > 0);     // loop repeats
}

TEST_CASE("straight-line code without copies has only same-point pairs") {
    Key key = test_key();
    const char* src = "int f(int a) { return a + 1 + 2; }";
    ObjectProgram prog;
    RunResult r = run_src(src, key, 1, {5}, &prog);
    auto points = delta_points(r.trace, key);
    auto pairs = dependence_pairs(prog, r.trace, points);
    for (const DependencePair& p : pairs) CHECK(p.reason != DependReason::Copy);
}

TEST_CASE("entropy budget formulas") {
    Key key = test_key(8);
    // three arithmetic writes, no inputs, no trailers: 8 * 3 = 24 bits
    ObjectProgram p = assemble(
        "add t0 zer zer E[3]\nadd t1 t0 zer E[5]\nadd t2 t1 t0 E[7]\n", key, 8);
    RunResult r = run_program(p, key, {});
    REQUIRE(!r.faulted);
    EntropyBudget b = entropy_budget(p, r.trace);
    CHECK(b.n_arithmetic == 3);
    CHECK(b.m_inputs == 0);
    CHECK(b.bits == 24);

    // two instructions in one trailer set count once
    ObjectProgram p2 = assemble(
        "add t0 zer zer E[3]\nadd t1 zer zer E[5]\nadd t1 t1 zer E[2]\n", key, 8);
    p2.trailer_sets.push_back({{1, 2}});
    RunResult r2 = run_program(p2, key, {});
    EntropyBudget b2 = entropy_budget(p2, r2.trace);
    CHECK(b2.n_arithmetic == 2); // the free add, plus the set counted once
    CHECK(b2.bits == 16);

    // only inputs: copies of two unwritten registers, m = 2
    ObjectProgram p3 = assemble("mov t0 a0\nmov t1 a1\n", key, 8);
    RunResult r3 = run_program(p3, key, {});
    EntropyBudget b3 = entropy_budget(p3, r3.trace);
    CHECK(b3.n_arithmetic == 0);
    CHECK(b3.m_inputs == 2);
    CHECK(b3.bits == 16);
}

TEST_CASE("budget is seed-invariant and loop repeats are flagged") {
    Key key = test_key();
    const char* src =
        "int f(int a) { int s; s = 0; int i; "
        "for (i = 0; i < 3; i = i + 1) { s = s + a; } return s; }";
    ObjectProgram p1, p2;
    RunResult r1 = run_src(src, key, 1, {4}, &p1);
    RunResult r2 = run_src(src, key, 9, {4}, &p2);
    EntropyBudget b1 = entropy_budget(p1, r1.trace);
    EntropyBudget b2 = entropy_budget(p2, r2.trace);
    CHECK(b1.bits == b2.bits);
    CHECK(b1.loop_repeated > 0);
}

TEST_CASE("adversary view hides copy provenance") {
    Key key = test_key();
    RunResult r = run_src("int f(int a) { int s; s = a; return s + 1; }", key, 3, {7});
    Trace view = adversary_view(r.trace);
    for (const TraceEvent& ev : view.events) {
        CHECK(!ev.is_copy);
        CHECK(ev.src_reg == 0);
    }
    CHECK(shapes_equal(shape(view), shape(r.trace)));
}
