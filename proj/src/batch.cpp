#include "fxa/batch.hpp"

#include <atomic>
#include <stdexcept>

namespace fxa {

namespace {

std::uint64_t hash_taken(const Trace& trace) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const TraceEvent& ev : trace.events) {
        if (ev.kind != TraceEvent::Kind::Branch) continue;
        h ^= ev.taken ? 0x9e37 : 0x79b9;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

BatchResult run_batch(const TypedUnit& unit, const BatchConfig& cfg, bool parallel) {
    BatchResult res;
    const Key key(cfg.key_lo, cfg.key_hi, cfg.width);

    CodegenOptions zopts;
    zopts.width = cfg.width;
    zopts.array_mode = cfg.array_mode;
    zopts.entry = cfg.entry;
    zopts.zero_offsets = true;
    res.nominal_object = compile_unit(unit, key, zopts);

    RunOptions ropts;
    ropts.step_budget = cfg.step_budget;
    RunResult nominal = run_program(res.nominal_object, key, cfg.args, ropts);
    if (nominal.faulted)
        throw std::runtime_error(std::string("batch: nominal run faulted: ") +
                                 fault_name(nominal.fault));
    res.nominal_trace = std::move(nominal.trace);
    res.shape = shape(res.nominal_trace);
    res.points = delta_points(res.nominal_trace, key);

    for (std::uint32_t i = 0; i < res.nominal_object.code.size(); ++i)
        if (op_info(res.nominal_object.code[i].op).has_diddle)
            res.branch_pcs.push_back(i);

    res.rows = cfg.count;
    res.cols = res.points.size();
    res.deltas.assign(res.rows * res.cols, 0);
    res.diddles.assign(res.rows, std::vector<std::uint8_t>(res.branch_pcs.size(), 0));
    res.taken_hash.assign(res.rows, 0);

    std::atomic<bool> ok{true};
    std::atomic<std::uint32_t> bad_seed{0};

    auto work = [&](std::uint32_t r) {
        CodegenOptions opts;
        opts.width = cfg.width;
        opts.array_mode = cfg.array_mode;
        opts.entry = cfg.entry;
        opts.seed = cfg.seed_begin + r;
        ObjectProgram obj = compile_unit(unit, key, opts);
        RunResult run = run_program(obj, key, cfg.args, ropts);
        if (run.faulted || !shapes_equal(shape(run.trace), res.shape)) {
            bool expected = true;
            if (ok.compare_exchange_strong(expected, false)) bad_seed = r;
            return;
        }
        std::vector<std::uint32_t> row = extract_deltas(run.trace, key, res.points);
        std::copy(row.begin(), row.end(), res.deltas.begin() + r * res.cols);
        for (std::size_t b = 0; b < res.branch_pcs.size(); ++b) {
            const Instruction& ins = obj.code[res.branch_pcs[b]];
            res.diddles[r][b] = static_cast<std::uint8_t>(
                key.decrypt_expect(*ins.diddle, diddle_tag(ins.op), "diddle") & 1);
        }
        res.taken_hash[r] = hash_taken(run.trace);
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(cfg.count); ++r)
            work(static_cast<std::uint32_t>(r));
    } else {
        for (std::uint32_t r = 0; r < cfg.count; ++r) work(r);
    }

    res.shapes_ok = ok.load();
    res.first_bad_seed = bad_seed.load();
    return res;
}

} // namespace fxa
