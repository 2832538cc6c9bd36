#include "fxa/batch.hpp"
#include "fxa/typecheck.hpp"

#include <doctest.h>

using namespace fxa;

namespace {

const char* kLoopSource =
    "int f(int a, int b) {\n"
    "  int s;\n"
    "  s = a;\n"
    "  int i;\n"
    "  for (i = 0; i < 4; i = i + 1) {\n"
    "    if (s > b) { s = s - b; } else { s = s + a; }\n"
    "  }\n"
    "  return s ^ b;\n"
    "}\n";

} // namespace

TEST_CASE("serial and parallel sweeps produce identical results") {
    TypedUnit unit = typecheck_source(kLoopSource);
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = 300;
    cfg.args = {23, 5};
    BatchResult serial = run_batch(unit, cfg, false);
    BatchResult parallel = run_batch(unit, cfg, true);
    REQUIRE(serial.shapes_ok);
    REQUIRE(parallel.shapes_ok);
    CHECK(serial.deltas == parallel.deltas);
    CHECK(serial.diddles == parallel.diddles);
    CHECK(serial.taken_hash == parallel.taken_hash);
    CHECK(serial.points.size() == parallel.points.size());
}

TEST_CASE("every seed keeps the shape and the taken sequence") {
    TypedUnit unit = typecheck_source(kLoopSource);
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = 128;
    cfg.args = {40, 9};
    BatchResult res = run_batch(unit, cfg, true);
    REQUIRE(res.shapes_ok);
    for (std::uint64_t h : res.taken_hash) CHECK(h == res.taken_hash[0]);
}

TEST_CASE("diddle coins split branch mnemonics evenly where free") {
    TypedUnit unit = typecheck_source(
        "int f(int a, int b) { if (a == b) { return 1; } return 2; }");
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = 1000;
    cfg.args = {4, 4};
    BatchResult res = run_batch(unit, cfg, true);
    REQUIRE(res.shapes_ok);
    // at least one branch site (the condition consumption) is coined ~50/50
    bool saw_coined = false;
    for (std::size_t b = 0; b < res.branch_pcs.size(); ++b) {
        int ones = 0;
        for (std::size_t r = 0; r < res.rows; ++r) ones += res.diddles[r][b];
        double freq = 1.0 - static_cast<double>(ones) / res.rows; // beq form
        if (freq > 0.45 && freq < 0.55) saw_coined = true;
    }
    CHECK(saw_coined);
}

TEST_CASE("a batch of one degenerates to shape and budget only") {
    TypedUnit unit = typecheck_source("int f(int a) { return a + 1; }");
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = 1;
    cfg.args = {3};
    BatchResult res = run_batch(unit, cfg, false);
    CHECK(res.shapes_ok);
    CHECK(res.rows == 1);
    CHECK(res.cols == res.points.size());
}
