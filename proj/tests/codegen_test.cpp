#include "fxa/codegen.hpp"
#include "fxa/oracle.hpp"
#include "fxa/vm.hpp"
#include "fxa/wordops.hpp"

#include <doctest.h>

#include <set>

using namespace fxa;

namespace {

struct Pipeline {
    Key key;
    TypedUnit unit;
    explicit Pipeline(const std::string& src, int w = 32)
        : key(777, 888, w), unit(typecheck_source(src)) {}

    ObjectProgram compile(std::uint64_t seed, ArrayMode mode = ArrayMode::PerEntry,
                          bool zero = false) {
        CodegenOptions opts;
        opts.width = key.width();
        opts.seed = seed;
        opts.array_mode = mode;
        opts.zero_offsets = zero;
        return compile_unit(unit, key, opts);
    }

    RunResult run(const ObjectProgram& prog, const std::vector<std::uint64_t>& args) {
        return run_program(prog, key, args);
    }

    std::uint64_t oracle(const std::vector<std::uint64_t>& args) {
        OracleResult r = interpret(unit, unit.unit.functions.back().name, args, key.width());
        REQUIRE(!r.faulted);
        return r.value;
    }
};

void check_matches_oracle(const std::string& src, const std::vector<std::uint64_t>& args,
                          int width = 32, ArrayMode mode = ArrayMode::PerEntry) {
    Pipeline p(src, width);
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        ObjectProgram prog = p.compile(seed, mode);
        RunResult r = p.run(prog, args);
        REQUIRE(!r.faulted);
        CHECK(r.ret_value == p.oracle(args));
    }
}

} // namespace

TEST_CASE("straight-line arithmetic") {
    check_matches_oracle("int f(int a) { return a + 1; }", {41});
    check_matches_oracle("int f(int a, int b) { return a * b - 3; }", {6, 7});
    check_matches_oracle("int f(int a, int b) { return a / b + a % b; }", {17, 5});
    check_matches_oracle("int f(int a, int b) { return a ^ b; }", {0xf0, 0x3c});
    check_matches_oracle("int f(int a) { return -a; }", {5});
}

TEST_CASE("assignment emits one fresh write and the expected constant form") {
    // z = e: after the expression lands in a temp with offset de, one
    // arithmetic write re-codes it to a fresh d'
    Pipeline p("int f(int a) { int z; z = a + 2; return z; }");
    ObjectProgram prog = p.compile(5);
    RunResult r = p.run(prog, {40});
    REQUIRE(!r.faulted);
    CHECK(r.ret_value == 42);
}

TEST_CASE("comparisons, logic and conditionals") {
    check_matches_oracle("int f(int a, int b) { if (a == b) { return 1; } return 0; }", {3, 3});
    check_matches_oracle("int f(int a, int b) { if (a == b) { return 1; } return 0; }", {3, 4});
    check_matches_oracle("int f(int a, int b) { if (a < b) { return 1; } return 2; }", {3, 4});
    check_matches_oracle("int f(int a, int b) { if (a < b) { return 1; } return 2; }", {4, 3});
    check_matches_oracle("int f(int a, int b) { return a <= b ? 10 : 20; }", {5, 5});
    check_matches_oracle("int f(int a, int b) { return (a > 1 && b > 1) ? 1 : 0; }", {2, 2});
    check_matches_oracle("int f(int a, int b) { return (a > 1 || b > 1) ? 1 : 0; }", {0, 2});
    check_matches_oracle("int f(int a) { return !a; }", {0});
    check_matches_oracle("int f(int a) { _Bool b; b = a > 2; return (int)b; }", {5});
    // signed comparison near the wraparound boundary
    check_matches_oracle("int f(int a, int b) { if (a < b) { return 1; } return 0; }",
                         {0x7fffffff, 0x80000000});
    // unsigned comparison uses the bias trick
    check_matches_oracle("int f(int a, int b) { unsigned int x; x = (unsigned int)a; "
                         "unsigned int y; y = (unsigned int)b; "
                         "if (x < y) { return 1; } return 0; }",
                         {0x7fffffff, 0x80000000});
}

TEST_CASE("loops") {
    check_matches_oracle(
        "int f(int a) { int s; s = 0; int i; "
        "for (i = 0; i < 5; i = i + 1) { s = s + a; } return s; }", {7});
    check_matches_oracle(
        "int f(int a) { int s; s = a; while (s > 10) { s = s - 10; } return s; }", {37});
}

TEST_CASE("calls and recursion") {
    check_matches_oracle(
        "int helper(int x) { return x * 2; }\n"
        "int f(int a) { return helper(a) + helper(a + 1); }", {5});
    check_matches_oracle(
        "int fib(int n) { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); }\n"
        "int f(int a) { return fib(a); }", {10});
}

TEST_CASE("ackermann end to end") {
    Pipeline p(
        "int A(int m, int n) {\n"
        "  if (m == 0) { return n + 1; }\n"
        "  if (n == 0) { return A(m - 1, 1); }\n"
        "  return A(m - 1, A(m, n - 1));\n"
        "}\n");
    ObjectProgram prog = p.compile(1);
    CHECK(p.run(prog, {3, 1}).ret_value == 13);
    CHECK(p.run(prog, {2, 3}).ret_value == 9);
}

TEST_CASE("long, float and double arithmetic") {
    check_matches_oracle("long long f(int a) { long long x; x = (long long)a; "
                         "return x * 100000ll; }", {12345});
    check_matches_oracle("int f(int a) { long x; x = (long)a * 3ll; return (int)(x % 7ll); }",
                         {1000});
    check_matches_oracle("int f(int a) { float x; x = (float)a; x = x * 1.5f; "
                         "return (int)x; }", {10});
    check_matches_oracle("int f(int a) { double d; d = (double)a / 4.0; "
                         "return (int)(d * 8.0); }", {10});
    check_matches_oracle("int f() { double d; d = 0.1; d = d + 0.2; "
                         "if (d > 0.3) { return 1; } return 0; }", {});
    check_matches_oracle("int f(int a, int b) { long long x; x = (long long)a; "
                         "long long y; y = (long long)b; if (x < y) { return 1; } return 0; }",
                         {5, static_cast<std::uint64_t>(-3) & 0xffffffffull});
}

TEST_CASE("casts across the whole family") {
    check_matches_oracle("int f(int a) { short s; s = (short)a; return (int)s; }", {0x12345});
    check_matches_oracle("int f(int a) { char c; c = (char)a; return (int)c; }", {300});
    check_matches_oracle("int f(int a) { unsigned char c; c = (unsigned char)a; "
                         "return (int)c; }", {300});
    check_matches_oracle("int f(int a) { unsigned short s; s = (unsigned short)a; "
                         "return (int)s; }", {0xabcd1});
    check_matches_oracle("int f(int a) { return (int)(unsigned long)(unsigned int)a; }",
                         {0xffffffff});
    check_matches_oracle("int f(int a) { return (int)(long long)a; }",
                         {static_cast<std::uint64_t>(-7) & 0xffffffffull});
    check_matches_oracle("int f(int a) { return (int)(double)(float)a; }", {123});
    check_matches_oracle("int f(int a) { return (int)(float)(long long)a; }", {1 << 20});
}

TEST_CASE("arrays: reads, writes, pointer access") {
    const char* src =
        "int f(int a) { int A[4]; A[0] = a; A[1] = a + 1; A[2] = a + 2; A[3] = a + 3; "
        "int i; int s; s = 0; for (i = 0; i < 4; i = i + 1) { s = s + A[i]; } return s; }";
    check_matches_oracle(src, {10});
    check_matches_oracle(src, {10}, 32, ArrayMode::Shared);

    const char* ptr =
        "int f(int a) { int A[3]; A[0] = 1; A[1] = 2; A[2] = 3; "
        "restrict A int *p = &A[1]; *p = a; p = p + 1; return *p + A[1]; }";
    check_matches_oracle(ptr, {50});
    check_matches_oracle(ptr, {50}, 32, ArrayMode::Shared);

    const char* dynwrite =
        "int f(int a, int b) { int A[4]; A[0] = 0; A[1] = 0; A[2] = 0; A[3] = 0; "
        "A[a] = b; return A[0] + A[1] * 2 + A[2] * 4 + A[3] * 8; }";
    check_matches_oracle(dynwrite, {2, 9});
    check_matches_oracle(dynwrite, {2, 9}, 32, ArrayMode::Shared);
}

TEST_CASE("structs and unions") {
    check_matches_oracle(
        "int f(int a) { struct { int x; int y; } s; s.x = a; s.y = a * 2; "
        "return s.x + s.y; }", {7});
    check_matches_oracle(
        "int f(int a) { struct { int x; long y; } s; s.x = a; s.y = (long)a * 5ll; "
        "return s.x + (int)s.y; }", {9});
    const char* uni =
        "int f(int a) { union { struct { int a; float b[2]; }; double c[2]; } u; "
        "u.c[0] = 2.0; u.c[1] = 4.0; u.a = a; return u.a + (int)u.c[1]; }";
    check_matches_oracle(uni, {3});
    check_matches_oracle(uni, {3}, 32, ArrayMode::Shared);
    // struct stripe in an array of structs
    const char* arr =
        "int f(int a) { struct { int x; int y; } s[3]; "
        "s[0].x = 1; s[0].y = 2; s[1].x = 3; s[1].y = 4; s[2].x = 5; s[2].y = 6; "
        "s[a].x = 100; return s[0].x + s[1].x + s[2].x + s[0].y; }";
    check_matches_oracle(arr, {1});
    check_matches_oracle(arr, {1}, 32, ArrayMode::Shared);
}

TEST_CASE("width 8 wrapping behaviour matches") {
    check_matches_oracle("int f(int a, int b) { return a * b + 100; }", {200, 3}, 8);
    check_matches_oracle("int f(int a) { int s; s = 0; int i; "
                         "for (i = 0; i < 4; i = i + 1) { s = s + a; } return s; }",
                         {100}, 8);
}

TEST_CASE("recompilation changes only constants") {
    Pipeline p("int f(int a) { int s; s = a; if (s > 3) { s = s * 2; } "
               "int i; for (i = 0; i < 3; i = i + 1) { s = s + i; } return s; }");
    ObjectProgram p1 = p.compile(1);
    ObjectProgram p2 = p.compile(2);
    REQUIRE(p1.code.size() == p2.code.size());
    bool some_const_differs = false;
    for (size_t i = 0; i < p1.code.size(); ++i) {
        const Instruction& a = p1.code[i];
        const Instruction& b = p2.code[i];
        CHECK(a.op == b.op);
        CHECK(a.regs == b.regs);
        CHECK(a.disp == b.disp);
        CHECK(a.target == b.target);
        REQUIRE(a.consts.size() == b.consts.size());
        for (size_t c = 0; c < a.consts.size(); ++c)
            if (!(a.consts[c] == b.consts[c])) some_const_differs = true;
    }
    CHECK(some_const_differs);
    CHECK(p1.trailer_sets.size() == p2.trailer_sets.size());

    // the zero-offset compilation has the same structure too
    ObjectProgram pz = p.compile(0, ArrayMode::PerEntry, true);
    REQUIRE(pz.code.size() == p1.code.size());
    for (size_t i = 0; i < pz.code.size(); ++i) CHECK(pz.code[i].op == p1.code[i].op);
}

TEST_CASE("write storm structure: per-entry vs shared") {
    const char* src =
        "int f(int a, int b) { int A[8]; A[0] = 1; A[1] = 1; A[2] = 1; A[3] = 1; "
        "A[4] = 1; A[5] = 1; A[6] = 1; A[7] = 1; A[a] = b; return A[3]; }";
    Pipeline p(src);

    // the dynamic write is the last statement touching memory, so its storm
    // is the final run of memory stores; the prologue (fp and two parameter
    // saves) and the eight initialisers come first
    auto storm_stores = [&](ArrayMode mode, std::set<Word>* deltas, int* total) {
        ObjectProgram prog = p.compile(3, mode);
        ObjectProgram zero = p.compile(0, mode, true);
        RunResult r = p.run(prog, {2, 50});
        RunResult z = p.run(zero, {2, 50});
        REQUIRE(!r.faulted);
        REQUIRE(r.trace.events.size() == z.trace.events.size());
        std::vector<Word> ds;
        for (size_t i = 0; i < r.trace.events.size(); ++i) {
            const TraceEvent& ev = r.trace.events[i];
            if (ev.kind == TraceEvent::Kind::Write && ev.dest_is_mem) {
                Word plain = p.key.decrypt(ev.value).first;
                Word nominal = p.key.decrypt(z.trace.events[i].value).first;
                ds.push_back((plain - nominal) & p.key.word_mask());
            }
        }
        if (total) *total = static_cast<int>(ds.size());
        // the dynamic storm writes each of the 8 slots exactly once and
        // nothing stores after it, so its deltas are the last 8
        std::set<Word> tail(ds.end() - 8, ds.end());
        if (deltas) *deltas = tail;
        return static_cast<int>(ds.size());
    };

    std::set<Word> per_entry_deltas, shared_deltas;
    int per_entry_total = 0, shared_total = 0;
    storm_stores(ArrayMode::PerEntry, &per_entry_deltas, &per_entry_total);
    storm_stores(ArrayMode::Shared, &shared_deltas, &shared_total);
    // per-entry: 3 prologue + 8 single-store initialisers + 8 storm stores
    CHECK(per_entry_total == 19);
    // all eight storm deltas pairwise distinct
    CHECK(per_entry_deltas.size() == 8);
    // shared: every initialiser rewrites the whole 8-cell class, and the
    // dynamic storm lands one common offset on all 8 slots
    CHECK(shared_total == 3 + 8 * 8 + 8);
    CHECK(shared_deltas.size() == 1);

    // a scalar struct field write emits exactly one store
    Pipeline sp("int f(int a) { struct { int x; int y; } s; s.x = 0; s.y = 0; "
                "s.x = a; return s.x; }");
    ObjectProgram sprog = sp.compile(1);
    RunResult sr = sp.run(sprog, {5});
    int stores = 0;
    for (const TraceEvent& ev : sr.trace.events)
        if (ev.kind == TraceEvent::Kind::Write && ev.dest_is_mem) ++stores;
    // fp save + one parameter save + two initialisers + the field write
    CHECK(stores == 5);
}

TEST_CASE("two-return function exits agree on the output offset") {
    Pipeline p("int f(int a) { if (a > 0) { return 1; } return 2; }");
    ObjectProgram prog = p.compile(4);
    CHECK(p.run(prog, {5}).ret_value == 1);
    CHECK(p.run(prog, {0}).ret_value == 2);
}

TEST_CASE("no shift-power constant is ever embedded for narrowing casts") {
    Pipeline p("int f(int a) { short s; s = (short)a; return (int)s; }");
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        ObjectProgram prog = p.compile(seed);
        for (const Instruction& ins : prog.code) {
            for (size_t c = 0; c < ins.consts.size(); ++c) {
                Word v = p.key.decrypt_expect(ins.consts[c],
                                              const_cell_tag(ins.op, static_cast<int>(c)), "k");
                if (is_arithmetic_write(ins.op))
                    CHECK(v != (1ull << 16));
            }
        }
    }
}

TEST_CASE("deep expressions spill without changing results") {
    check_matches_oracle(
        "int f(int a) { int A[2]; A[0] = a; A[1] = 2; return "
        "((((a + 1) * (a + 2)) + ((a + 3) * (a + 4))) + (((a + 5) * (a + 6)) + A[1])) "
        "+ ((((a + 7) * (a + 8)) + ((a + 9) * (a - 1))) + (((a - 2) * (a - 3)) + A[0])); }",
        {3});
}
