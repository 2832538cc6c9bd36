#include "fxa/analysis.hpp"

#include "fxa/wordops.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace fxa {

ShapeSignature shape(const Trace& trace) {
    ShapeSignature sig;
    sig.reserve(trace.events.size());
    for (const TraceEvent& ev : trace.events) {
        ShapeEvent se{};
        se.kind = static_cast<std::uint8_t>(ev.kind);
        se.pc = ev.pc;
        se.op = ev.op;
        se.nregs = ev.nregs;
        se.regs = ev.regs;
        se.dest_is_mem = ev.dest_is_mem;
        se.dest_reg = ev.dest_is_mem ? 0 : ev.dest_reg;
        se.taken = ev.kind == TraceEvent::Kind::Branch ? ev.taken : false;
        sig.push_back(se);
    }
    return sig;
}

bool shapes_equal(const ShapeSignature& a, const ShapeSignature& b) { return a == b; }

std::vector<PointInfo> delta_points(const Trace& nominal_trace, const Key& key) {
    std::vector<PointInfo> points;
    for (std::uint32_t i = 0; i < nominal_trace.events.size(); ++i) {
        const TraceEvent& ev = nominal_trace.events[i];
        if (ev.kind == TraceEvent::Kind::Branch) continue;
        PointInfo p;
        p.event_index = i;
        p.pc = ev.pc;
        p.op = ev.op;
        p.is_input = ev.kind == TraceEvent::Kind::Input;
        p.is_mem = ev.dest_is_mem;
        p.dest_reg = ev.dest_reg;
        p.nominal = key.decrypt_expect(ev.value, DomainTag::data(), "nominal trace value");
        points.push_back(p);
    }
    return points;
}

std::vector<std::uint32_t> extract_deltas(const Trace& trace, const Key& key,
                                          const std::vector<PointInfo>& points) {
    std::vector<std::uint32_t> row;
    row.reserve(points.size());
    const Word mask = key.word_mask();
    for (const PointInfo& p : points) {
        if (p.event_index >= trace.events.size())
            throw std::runtime_error("extract_deltas: shape mismatch");
        const TraceEvent& ev = trace.events[p.event_index];
        if (ev.pc != p.pc || ev.op != p.op)
            throw std::runtime_error("extract_deltas: shape mismatch");
        Word plain = key.decrypt_expect(ev.value, DomainTag::data(), "trace value");
        row.push_back(static_cast<std::uint32_t>((plain - p.nominal) & mask));
    }
    return row;
}

std::vector<DependencePair> dependence_pairs(const ObjectProgram& prog,
                                             const Trace& nominal_trace,
                                             const std::vector<PointInfo>& points) {
    std::vector<DependencePair> pairs;

    // map event index -> point index
    std::map<std::uint32_t, std::uint32_t> point_of_event;
    for (std::uint32_t pi = 0; pi < points.size(); ++pi)
        point_of_event[points[pi].event_index] = pi;

    // instruction -> trailer set id
    std::map<std::uint32_t, int> set_of_instr;
    for (int s = 0; s < static_cast<int>(prog.trailer_sets.size()); ++s)
        for (std::uint32_t m : prog.trailer_sets[s].members) set_of_instr[m] = s;

    // replay: last point that established each location's current value
    std::map<std::string, std::uint32_t> last_point; // location key -> point idx
    auto reg_key = [](int r) { return "r" + std::to_string(r); };
    auto mem_key = [](std::uint64_t a) { return "m" + std::to_string(a); };

    std::map<std::uint32_t, std::vector<std::uint32_t>> same_pc_points;
    std::map<int, std::vector<std::uint32_t>> set_points;

    for (std::uint32_t ei = 0; ei < nominal_trace.events.size(); ++ei) {
        const TraceEvent& ev = nominal_trace.events[ei];
        if (ev.kind == TraceEvent::Kind::Branch) continue;
        std::uint32_t pi = point_of_event.at(ei);
        std::string dst = ev.dest_is_mem ? mem_key(ev.dest_addr_bits) : reg_key(ev.dest_reg);

        if (ev.kind == TraceEvent::Kind::Write) {
            if (ev.is_copy) {
                std::string src = ev.src_is_mem ? mem_key(ev.src_addr_bits) : reg_key(ev.src_reg);
                auto it = last_point.find(src);
                if (it != last_point.end())
                    pairs.push_back({it->second, pi, DependReason::Copy});
            }
            same_pc_points[ev.pc].push_back(pi);
            auto sit = set_of_instr.find(ev.pc);
            if (sit != set_of_instr.end()) set_points[sit->second].push_back(pi);
        }
        last_point[dst] = pi;
    }

    // repeats of one static instruction: same register at the same point
    for (const auto& [pc, list] : same_pc_points) {
        (void)pc;
        for (size_t i = 1; i < list.size(); ++i)
            pairs.push_back({list[i - 1], list[i], DependReason::SamePoint});
    }
    // executed members of one trailer set land one offset
    for (const auto& [set, list] : set_points) {
        (void)set;
        for (size_t i = 1; i < list.size(); ++i)
            pairs.push_back({list[i - 1], list[i], DependReason::TrailerJoin});
    }
    return pairs;
}

EntropyBudget entropy_budget(const ObjectProgram& prog, const Trace& trace) {
    std::map<std::uint32_t, int> set_of_instr;
    for (int s = 0; s < static_cast<int>(prog.trailer_sets.size()); ++s)
        for (std::uint32_t m : prog.trailer_sets[s].members) set_of_instr[m] = s;

    // Arithmetic writes only ever target registers (stores are copies), so a
    // cell is identified by (pc, register bank). A trailer set's members all
    // land one location, so the set contributes the cell count of one member.
    std::map<std::uint32_t, std::set<int>> cells_of_pc; // executed arithmetic writes
    std::map<std::uint32_t, int> occurrences;
    int inputs = 0;
    for (const TraceEvent& ev : trace.events) {
        if (ev.kind == TraceEvent::Kind::Input) {
            ++inputs;
            continue;
        }
        if (ev.kind != TraceEvent::Kind::Write || !is_arithmetic_write(ev.op)) continue;
        cells_of_pc[ev.pc].insert(ev.dest_reg >= 16 ? 1 : 0);
        const bool pair_op = op_info(ev.op).pair_mask & 1;
        if (!pair_op || ev.dest_reg < 16) ++occurrences[ev.pc];
    }

    int n = 0;
    std::set<int> sets_counted;
    for (const auto& [pc, cells] : cells_of_pc) {
        auto sit = set_of_instr.find(pc);
        if (sit != set_of_instr.end()) {
            if (sets_counted.insert(sit->second).second)
                n += static_cast<int>(cells.size());
        } else {
            n += static_cast<int>(cells.size());
        }
    }

    EntropyBudget b;
    b.n_arithmetic = n;
    b.m_inputs = inputs;
    b.bits = prog.width * (n + inputs);
    for (const auto& [pc, cnt] : occurrences) {
        (void)pc;
        if (cnt > 1) ++b.loop_repeated;
    }
    return b;
}

} // namespace fxa
