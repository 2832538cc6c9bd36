// Times the serial reference sweep against the OpenMP kernel on one of the
// analysis workloads and checks they produce identical delta matrices.

#include "fxa/batch.hpp"
#include "fxa/typecheck.hpp"

#include <chrono>
#include <iostream>

#include <omp.h>

using namespace fxa;

namespace {

const char* kSource = R"(int f(int a, int b)
{
  int s = a;
  int t = 0;
  int i = 0;
  for (i = 0; i < 4; i = i + 1)
  {
    if (s > b)
    {
      s = s - b;
    }
    else
    {
      s = s + a;
    }
    t = t + s;
  }
  return s ^ t;
}
)";

} // namespace

int main(int argc, char** argv) {
    std::uint32_t count = argc > 1 ? static_cast<std::uint32_t>(std::stoul(argv[1])) : 4096;

    TypedUnit unit = typecheck_source(kSource, "bench.c");
    BatchConfig cfg;
    cfg.width = 8;
    cfg.count = count;
    cfg.args = {23, 5};

    auto time_it = [&](bool parallel) {
        auto t0 = std::chrono::steady_clock::now();
        BatchResult r = run_batch(unit, cfg, parallel);
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return std::pair{std::move(r), ms};
    };

    auto [serial, serial_ms] = time_it(false);
    auto [parallel, parallel_ms] = time_it(true);

    bool identical = serial.deltas == parallel.deltas &&
                     serial.taken_hash == parallel.taken_hash;
    std::cout << "seeds:          " << count << "\n"
              << "threads:        " << omp_get_max_threads() << "\n"
              << "serial:         " << serial_ms << " ms\n"
              << "parallel:       " << parallel_ms << " ms\n"
              << "speedup:        " << serial_ms / parallel_ms << "x\n"
              << "results match:  " << (identical ? "yes" : "NO") << "\n";
    return identical ? 0 : 1;
}
