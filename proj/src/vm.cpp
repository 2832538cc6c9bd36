#include "fxa/vm.hpp"

#include "fxa/wordops.hpp"

#include <sstream>

namespace fxa {

namespace wo = wordops;

const char* fault_name(FaultKind k) {
    switch (k) {
        case FaultKind::None: return "none";
        case FaultKind::DivideByZero: return "divide-by-zero";
        case FaultKind::CorruptCiphertext: return "corrupt-ciphertext";
        case FaultKind::TagMismatch: return "tag-mismatch";
        case FaultKind::InvalidPc: return "invalid-pc";
        case FaultKind::StepBudget: return "step-budget";
        case FaultKind::BadWrite: return "bad-write";
    }
    return "?";
}

namespace {

// One instruction's effects, buffered so a fault mid-decode leaves state and
// trace untouched.
class Stepper {
public:
    Stepper(MachineState& st, const ObjectProgram& prog, const Key& key,
            Trace* trace, std::uint64_t step)
        : st_(st), prog_(prog), key_(key), trace_(trace), step_(step) {}

    void run() {
        if (st_.halted) return;
        if (st_.pc >= prog_.code.size()) fault(FaultKind::InvalidPc);
        next_pc_ = st_.pc + 1;
        execute(prog_.code[st_.pc]);
        commit();
    }

private:
    int W() const { return prog_.width; }
    std::uint64_t mask() const { return wo::mask_bits(W()); }

    [[noreturn]] void fault(FaultKind k) { throw VmError(k, st_.pc); }

    // --- data reads with first-read input logging -------------------------
    Ciphertext reg_ct(int r) {
        if (r != kRegZero && r != kRegZeroHi && !st_.reg_written[r] &&
            !st_.reg_input_logged[r] && !pending_reg_input_[r]) {
            pending_reg_input_[r] = true;
            TraceEvent ev{};
            ev.kind = TraceEvent::Kind::Input;
            ev.step = step_;
            ev.pc = st_.pc;
            ev.op = prog_.code[st_.pc].op;
            ev.dest_reg = static_cast<std::uint8_t>(r);
            ev.value = st_.regs[r];
            events_.push_back(ev);
        }
        return st_.regs[r];
    }

    Word reg_data(int r) {
        Ciphertext c = reg_ct(r);
        try {
            return key_.decrypt_expect(c, DomainTag::data(), "register operand");
        } catch (const CorruptCiphertext&) {
            fault(FaultKind::CorruptCiphertext);
        } catch (const TagMismatch&) {
            fault(FaultKind::TagMismatch);
        }
    }

    std::uint64_t pair_data(int r) {
        Word lo = reg_data(r);
        Word hi = reg_data(pair_high(r));
        return (static_cast<std::uint64_t>(hi) << W()) | lo;
    }

    Word const_cell(const Instruction& ins, int cell) {
        try {
            return key_.decrypt_expect(ins.consts[cell], const_cell_tag(ins.op, cell),
                                       "instruction constant");
        } catch (const CorruptCiphertext&) {
            fault(FaultKind::CorruptCiphertext);
        } catch (const TagMismatch&) {
            fault(FaultKind::TagMismatch);
        }
    }

    std::uint64_t const_pair(const Instruction& ins, int first_cell) {
        Word hi = const_cell(ins, first_cell);
        Word lo = const_cell(ins, first_cell + 1);
        return (static_cast<std::uint64_t>(hi) << W()) | lo;
    }

    bool diddle_bit(const Instruction& ins) {
        try {
            return key_.decrypt_expect(*ins.diddle, diddle_tag(ins.op), "diddle") & 1;
        } catch (const CorruptCiphertext&) {
            fault(FaultKind::CorruptCiphertext);
        } catch (const TagMismatch&) {
            fault(FaultKind::TagMismatch);
        }
    }

    // --- writes ------------------------------------------------------------
    void write_reg(const Instruction& ins, int r, Ciphertext c,
                   bool copy = false, bool src_mem = false, int src_reg = 0,
                   std::uint64_t src_addr = 0) {
        if (r == kRegZero || r == kRegZeroHi) fault(FaultKind::BadWrite);
        reg_writes_.push_back({r, c});
        TraceEvent ev = base_event(ins, TraceEvent::Kind::Write);
        ev.dest_reg = static_cast<std::uint8_t>(r);
        ev.value = c;
        ev.is_copy = copy;
        ev.src_is_mem = src_mem;
        ev.src_reg = static_cast<std::uint8_t>(src_reg);
        ev.src_addr_bits = src_addr;
        events_.push_back(ev);
    }

    void write_reg_data(const Instruction& ins, int r, Word v) {
        write_reg(ins, r, key_.encrypt(v & mask(), DomainTag::data()));
    }

    void write_pair_data(const Instruction& ins, int r, std::uint64_t v) {
        write_reg_data(ins, r, v & mask());
        write_reg_data(ins, pair_high(r), (v >> W()) & mask());
    }

    TraceEvent base_event(const Instruction& ins, TraceEvent::Kind kind) {
        TraceEvent ev{};
        ev.kind = kind;
        ev.step = step_;
        ev.pc = st_.pc;
        ev.op = ins.op;
        ev.nregs = op_info(ins.op).reg_count;
        ev.regs = ins.regs;
        return ev;
    }

    // --- memory ------------------------------------------------------------
    Ciphertext address_ct(Word base_plain, Word disp) {
        return key_.encrypt((base_plain + disp) & mask(), DomainTag::data());
    }

    Ciphertext mem_read(const Instruction& ins, std::uint64_t addr_bits) {
        auto it = st_.mem.find(addr_bits);
        if (it != st_.mem.end()) return it->second;
        for (auto& [a, c] : mem_writes_)
            if (a == addr_bits) return c;
        // First read of an unwritten cell: a deterministic junk word, logged
        // as an input to the trace.
        Ciphertext junk = key_.encrypt(key_.junk_word(addr_bits), DomainTag::data());
        mem_writes_.push_back({addr_bits, junk});
        if (!st_.mem_input_logged.count(addr_bits)) {
            pending_mem_input_.push_back(addr_bits);
            TraceEvent ev{};
            ev.kind = TraceEvent::Kind::Input;
            ev.step = step_;
            ev.pc = st_.pc;
            ev.op = ins.op;
            ev.dest_is_mem = true;
            ev.dest_addr_bits = addr_bits;
            ev.value = junk;
            events_.push_back(ev);
        }
        return junk;
    }

    // --- instruction dispatch ----------------------------------------------
    void execute(const Instruction& ins) {
        const OpInfo& info = op_info(ins.op);
        switch (ins.op) {
            case Op::Add: case Op::Sub: {
                Word x = reg_data(ins.regs[1]), y = reg_data(ins.regs[2]);
                Word k0 = const_cell(ins, 0);
                Word r = ins.op == Op::Add ? wo::add(wo::add(x, y, W()), k0, W())
                                           : wo::add(wo::sub(x, y, W()), k0, W());
                write_reg_data(ins, ins.regs[0], r);
                break;
            }
            case Op::Mul: case Op::Div: case Op::Divu: case Op::Xor: {
                Word k0 = const_cell(ins, 0), k1 = const_cell(ins, 1), k2 = const_cell(ins, 2);
                Word x = wo::sub(reg_data(ins.regs[1]), k1, W());
                Word y = wo::sub(reg_data(ins.regs[2]), k2, W());
                Word core = 0;
                try {
                    switch (ins.op) {
                        case Op::Mul: core = wo::mul(x, y, W()); break;
                        case Op::Div: core = wo::sdiv(x, y, W()); break;
                        case Op::Divu: core = wo::udiv(x, y, W()); break;
                        default: core = wo::xor_(x, y, W()); break;
                    }
                } catch (const DivideByZero&) {
                    fault(FaultKind::DivideByZero);
                }
                write_reg_data(ins, ins.regs[0], wo::add(core, k0, W()));
                break;
            }
            case Op::Addl: case Op::Subl: case Op::Mull: case Op::Divl:
            case Op::Divul: case Op::Xorl: {
                // strip and re-offset act two-by-two on the cell pairs; the
                // core operation is true 2W-bit arithmetic
                std::uint64_t k0 = const_pair(ins, 0), k1 = const_pair(ins, 2), k2 = const_pair(ins, 4);
                std::uint64_t x = strip2(pair_data(ins.regs[1]), k1);
                std::uint64_t y = strip2(pair_data(ins.regs[2]), k2);
                std::uint64_t core = 0;
                try {
                    switch (ins.op) {
                        case Op::Addl: core = wo::add(x, y, 2 * W()); break;
                        case Op::Subl: core = wo::sub(x, y, 2 * W()); break;
                        case Op::Mull: core = wo::mul(x, y, 2 * W()); break;
                        case Op::Divl: core = wo::sdiv(x, y, 2 * W()); break;
                        case Op::Divul: core = wo::udiv(x, y, 2 * W()); break;
                        default: core = wo::xor_(x, y, 2 * W()); break;
                    }
                } catch (const DivideByZero&) {
                    fault(FaultKind::DivideByZero);
                }
                write_pair_data(ins, ins.regs[0], offset2(core, k0));
                break;
            }
            case Op::Addf: case Op::Subf: case Op::Mulf: case Op::Divf: {
                Word k0 = const_cell(ins, 0), k1 = const_cell(ins, 1), k2 = const_cell(ins, 2);
                Word x = wo::sub(reg_data(ins.regs[1]), k1, W());
                Word y = wo::sub(reg_data(ins.regs[2]), k2, W());
                Word core;
                switch (ins.op) {
                    case Op::Addf: core = wo::fadd(x, y, W()); break;
                    case Op::Subf: core = wo::fsub(x, y, W()); break;
                    case Op::Mulf: core = wo::fmul(x, y, W()); break;
                    default: core = wo::fdiv(x, y, W()); break;
                }
                write_reg_data(ins, ins.regs[0], wo::add(core, k0, W()));
                break;
            }
            case Op::Addd: case Op::Subd: case Op::Muld: case Op::Divd: {
                std::uint64_t k0 = const_pair(ins, 0), k1 = const_pair(ins, 2), k2 = const_pair(ins, 4);
                std::uint64_t x = strip2(pair_data(ins.regs[1]), k1);
                std::uint64_t y = strip2(pair_data(ins.regs[2]), k2);
                std::uint64_t core;
                switch (ins.op) {
                    case Op::Addd: core = wo::fadd(x, y, 2 * W()); break;
                    case Op::Subd: core = wo::fsub(x, y, 2 * W()); break;
                    case Op::Muld: core = wo::fmul(x, y, 2 * W()); break;
                    default: core = wo::fdiv(x, y, 2 * W()); break;
                }
                write_pair_data(ins, ins.regs[0], offset2(core, k0));
                break;
            }
            case Op::Mov: {
                Ciphertext c = reg_ct(ins.regs[1]);
                write_reg(ins, ins.regs[0], c, true, false, ins.regs[1]);
                break;
            }
            case Op::Movl: {
                Ciphertext lo = reg_ct(ins.regs[1]);
                Ciphertext hi = reg_ct(pair_high(ins.regs[1]));
                write_reg(ins, ins.regs[0], lo, true, false, ins.regs[1]);
                write_reg(ins, pair_high(ins.regs[0]), hi, true, false, pair_high(ins.regs[1]));
                break;
            }
            case Op::Beq: {
                Word x = reg_data(ins.regs[0]), y = reg_data(ins.regs[1]);
                Word k = const_cell(ins, 0);
                branch(ins, wo::eq(x, wo::add(y, k, W()), W()));
                break;
            }
            case Op::Blt: case Op::Bgt: {
                Word k1 = const_cell(ins, 0), k2 = const_cell(ins, 1);
                Word x = wo::sub(reg_data(ins.regs[0]), k1, W());
                Word y = wo::sub(reg_data(ins.regs[1]), k2, W());
                branch(ins, ins.op == Op::Blt ? wo::slt(x, y, W()) : wo::sgt(x, y, W()));
                break;
            }
            case Op::Beql: {
                std::uint64_t x = pair_data(ins.regs[0]), y = pair_data(ins.regs[1]);
                branch(ins, x == offset2(y, const_pair(ins, 0)));
                break;
            }
            case Op::Bltl: case Op::Bgtl: {
                std::uint64_t x = strip2(pair_data(ins.regs[0]), const_pair(ins, 0));
                std::uint64_t y = strip2(pair_data(ins.regs[1]), const_pair(ins, 2));
                branch(ins, ins.op == Op::Bltl ? wo::slt(x, y, 2 * W()) : wo::sgt(x, y, 2 * W()));
                break;
            }
            case Op::Beqf: case Op::Bltf: case Op::Bgtf: {
                Word x = wo::sub(reg_data(ins.regs[0]), const_cell(ins, 0), W());
                Word y = wo::sub(reg_data(ins.regs[1]), const_cell(ins, 1), W());
                bool res = ins.op == Op::Beqf ? wo::feq(x, y, W())
                         : ins.op == Op::Bltf ? wo::flt(x, y, W())
                                              : wo::fgt(x, y, W());
                branch(ins, res);
                break;
            }
            case Op::Beqd: case Op::Bltd: case Op::Bgtd: {
                std::uint64_t x = strip2(pair_data(ins.regs[0]), const_pair(ins, 0));
                std::uint64_t y = strip2(pair_data(ins.regs[1]), const_pair(ins, 2));
                bool res = ins.op == Op::Beqd ? wo::feq(x, y, 2 * W())
                         : ins.op == Op::Bltd ? wo::flt(x, y, 2 * W())
                                              : wo::fgt(x, y, 2 * W());
                branch(ins, res);
                break;
            }
            case Op::B:
                next_pc_ = static_cast<std::uint32_t>(static_cast<std::int64_t>(st_.pc) + 1 + ins.disp);
                break;
            case Op::J:
                next_pc_ = ins.target;
                break;
            case Op::Jal: {
                write_reg(ins, kRegRa, key_.encrypt((st_.pc + 1) & mask(), DomainTag::data()));
                next_pc_ = ins.target;
                break;
            }
            case Op::Jr: {
                // Control transfer; the read is not a data observation.
                Word v;
                try {
                    v = key_.decrypt_expect(st_.regs[ins.regs[0]], DomainTag::data(), "jump register");
                } catch (const CorruptCiphertext&) {
                    fault(FaultKind::CorruptCiphertext);
                } catch (const TagMismatch&) {
                    fault(FaultKind::TagMismatch);
                }
                if (v > prog_.code.size()) fault(FaultKind::InvalidPc);
                next_pc_ = static_cast<std::uint32_t>(v);
                break;
            }
            case Op::Sw: {
                Word base = reg_data(ins.regs[0]);
                Ciphertext addr = address_ct(base, const_cell(ins, 0));
                Ciphertext val = reg_ct(ins.regs[1]);
                mem_writes_.push_back({addr.bits, val});
                TraceEvent ev = base_event(ins, TraceEvent::Kind::Write);
                ev.dest_is_mem = true;
                ev.dest_addr_bits = addr.bits;
                ev.value = val;
                ev.is_copy = true;
                ev.src_reg = ins.regs[1];
                events_.push_back(ev);
                break;
            }
            case Op::Lw: {
                Word base = reg_data(ins.regs[1]);
                Ciphertext addr = address_ct(base, const_cell(ins, 0));
                Ciphertext val = mem_read(ins, addr.bits);
                write_reg(ins, ins.regs[0], val, true, true, 0, addr.bits);
                break;
            }
            case Op::Nop:
                break;
            default:
                execute_cvt(ins, info);
                break;
        }
    }

    void execute_cvt(const Instruction& ins, const OpInfo& info) {
        const int in_bits = info.in_cells * W();
        const int out_bits = info.out_cells * W();
        // constant cells: k0 (output offset, out_cells) then k1 (input strip)
        std::uint64_t k0 = info.out_cells == 2 ? const_pair(ins, 0) : const_cell(ins, 0);
        std::uint64_t k1 = info.in_cells == 2 ? const_pair(ins, info.out_cells)
                                              : const_cell(ins, info.out_cells);
        std::uint64_t x = info.in_cells == 2 ? strip2(pair_data(ins.regs[1]), k1)
                                             : wo::sub(reg_data(ins.regs[1]), k1, W());
        std::uint64_t r;
        switch (ins.op) {
            case Op::Cvtif: case Op::Cvtid: case Op::Cvtlf: case Op::Cvtld:
                r = wo::int_to_float(x, in_bits, true, out_bits); break;
            case Op::Cvtuf: case Op::Cvtud: case Op::Cvtulf: case Op::Cvtuld:
                r = wo::int_to_float(x, in_bits, false, out_bits); break;
            case Op::Cvtfi: case Op::Cvtfl: case Op::Cvtdi: case Op::Cvtdl:
                r = wo::float_to_int(x, in_bits, out_bits, true); break;
            case Op::Cvtfu: case Op::Cvtful: case Op::Cvtdu: case Op::Cvtdul:
                r = wo::float_to_int(x, in_bits, out_bits, false); break;
            case Op::Cvtfd: case Op::Cvtdf:
                r = wo::float_to_float(x, in_bits, out_bits); break;
            default: fault(FaultKind::InvalidPc);
        }
        if (info.out_cells == 2) write_pair_data(ins, ins.regs[0], offset2(r, k0));
        else write_reg_data(ins, ins.regs[0], wo::add(r, k0, W()));
    }

    // componentwise subtract/add on cell pairs (the -2/+2 operations)
    std::uint64_t strip2(std::uint64_t v, std::uint64_t k) const {
        Word hi = wo::sub(v >> W(), k >> W(), W());
        Word lo = wo::sub(v & mask(), k & mask(), W());
        return (static_cast<std::uint64_t>(hi) << W()) | lo;
    }
    std::uint64_t offset2(std::uint64_t v, std::uint64_t k) const {
        Word hi = wo::add(v >> W(), k >> W(), W());
        Word lo = wo::add(v & mask(), k & mask(), W());
        return (static_cast<std::uint64_t>(hi) << W()) | lo;
    }

    void branch(const Instruction& ins, bool raw) {
        bool taken = raw != diddle_bit(ins);
        TraceEvent ev = base_event(ins, TraceEvent::Kind::Branch);
        ev.taken = taken;
        events_.push_back(ev);
        if (taken)
            next_pc_ = static_cast<std::uint32_t>(static_cast<std::int64_t>(st_.pc) + 1 + ins.disp);
    }

    void commit() {
        for (auto& [r, c] : reg_writes_) { st_.regs[r] = c; st_.reg_written[r] = true; }
        for (auto& [a, c] : mem_writes_) st_.mem[a] = c;
        for (int r = 0; r < kNumRegs; ++r)
            if (pending_reg_input_[r]) st_.reg_input_logged[r] = true;
        for (std::uint64_t a : pending_mem_input_) st_.mem_input_logged[a] = true;
        if (trace_)
            for (auto& ev : events_) trace_->events.push_back(ev);
        st_.pc = next_pc_;
        if (st_.pc == prog_.code.size()) st_.halted = true;
    }

    MachineState& st_;
    const ObjectProgram& prog_;
    const Key& key_;
    Trace* trace_;
    std::uint64_t step_;
    std::uint32_t next_pc_ = 0;
    std::vector<std::pair<int, Ciphertext>> reg_writes_;
    std::vector<std::pair<std::uint64_t, Ciphertext>> mem_writes_;
    std::vector<TraceEvent> events_;
    std::array<bool, kNumRegs> pending_reg_input_{};
    std::vector<std::uint64_t> pending_mem_input_;
};

} // namespace

void vm_step(MachineState& state, const ObjectProgram& prog, const Key& key,
             Trace* trace, std::uint64_t step_index) {
    Stepper s(state, prog, key, trace, step_index);
    try {
        s.run();
    } catch (const VmError& e) {
        if (trace) { trace->fault = e.kind; trace->fault_pc = e.pc; }
        throw;
    }
}

Word stack_top(int width) { return wo::mask_bits(width); }

namespace {

// Applies the interface schedule: encrypt argument cells (offset applied),
// seed sp/fp, set ra to the halt address.
void seed_state(MachineState& st, const ObjectProgram& prog, const Key& key,
                const std::vector<std::uint64_t>& args) {
    for (int r = 0; r < kNumRegs; ++r) {
        st.regs[r] = key.encrypt(0, DomainTag::data());
        st.reg_written[r] = false;
    }
    const int W = prog.width;
    for (const IfaceEntry& e : prog.iface) {
        int reg = *reg_by_name(e.location);
        if (e.kind == IfaceEntry::Kind::Param) {
            if (e.index >= static_cast<int>(args.size()))
                throw std::runtime_error("missing argument " + std::to_string(e.index));
            std::uint64_t v = args[e.index];
            if (e.offsets.size() == 2) {
                st.regs[pair_high(reg)] =
                    key.encrypt(((v >> W) + e.offsets[0]) & wo::mask_bits(W), DomainTag::data());
                st.regs[reg] = key.encrypt((v + e.offsets[1]) & wo::mask_bits(W), DomainTag::data());
            } else {
                st.regs[reg] = key.encrypt((v + e.offsets[0]) & wo::mask_bits(W), DomainTag::data());
            }
        } else if (e.kind == IfaceEntry::Kind::Env) {
            Word nominal = e.location == "sp" ? stack_top(W) : 0;
            st.regs[reg] = key.encrypt((nominal + e.offsets[0]) & wo::mask_bits(W), DomainTag::data());
        }
    }
    st.regs[kRegRa] = key.encrypt(static_cast<Word>(prog.code.size()) & wo::mask_bits(W),
                                  DomainTag::data());
    st.reg_written[kRegRa] = true; // control datum, not a scheduled input
    st.pc = prog.entry;
    st.halted = prog.code.empty() || prog.entry == prog.code.size();
}

} // namespace

RunResult run_program(const ObjectProgram& prog, const Key& key,
                      const std::vector<std::uint64_t>& args, const RunOptions& opts) {
    RunResult res;
    MachineState st;
    seed_state(st, prog, key, args);
    Trace* tr = opts.record_trace ? &res.trace : nullptr;

    std::uint64_t step = 0;
    try {
        while (!st.halted) {
            if (step >= opts.step_budget) throw VmError(FaultKind::StepBudget, st.pc);
            vm_step(st, prog, key, tr, step);
            ++step;
        }
    } catch (const VmError& e) {
        res.faulted = true;
        res.fault = e.kind;
        res.trace.fault = e.kind;
        res.trace.fault_pc = e.pc;
        res.steps = step;
        res.trace.steps = step;
        return res;
    }
    res.steps = step;
    res.trace.steps = step;

    for (const IfaceEntry& e : prog.iface) {
        if (e.kind != IfaceEntry::Kind::Ret) continue;
        int reg = *reg_by_name(e.location);
        const int W = prog.width;
        if (e.offsets.size() == 2) {
            Ciphertext hi = st.regs[pair_high(reg)], lo = st.regs[reg];
            res.ret_cells = {hi, lo};
            Word ph = (key.decrypt_expect(hi, DomainTag::data(), "output") - e.offsets[0]) & wo::mask_bits(W);
            Word pl = (key.decrypt_expect(lo, DomainTag::data(), "output") - e.offsets[1]) & wo::mask_bits(W);
            res.ret_plain = {ph, pl};
            res.ret_value = (static_cast<std::uint64_t>(ph) << W) | pl;
        } else {
            Ciphertext c = st.regs[reg];
            res.ret_cells = {c};
            Word p = (key.decrypt_expect(c, DomainTag::data(), "output") - e.offsets[0]) & wo::mask_bits(W);
            res.ret_plain = {p};
            res.ret_value = p;
        }
    }
    return res;
}

std::string save_trace(const Trace& trace, const Key& key) {
    std::ostringstream out;
    for (const TraceEvent& ev : trace.events) {
        switch (ev.kind) {
            case TraceEvent::Kind::Write:
                out << "W " << ev.step << " " << ev.pc << " " << op_info(ev.op).name << " ";
                if (ev.dest_is_mem) out << "m:" << to_hex(key, Ciphertext{ev.dest_addr_bits});
                else out << reg_name(ev.dest_reg);
                out << " " << to_hex(key, ev.value) << "\n";
                break;
            case TraceEvent::Kind::Input:
                out << "I " << ev.step << " ";
                if (ev.dest_is_mem) out << "m:" << to_hex(key, Ciphertext{ev.dest_addr_bits});
                else out << reg_name(ev.dest_reg);
                out << " " << to_hex(key, ev.value) << "\n";
                break;
            case TraceEvent::Kind::Branch:
                out << "B " << ev.step << " " << ev.pc << " " << op_info(ev.op).name
                    << " " << (ev.taken ? 1 : 0) << "\n";
                break;
        }
    }
    return out.str();
}

Trace adversary_view(const Trace& trace) {
    Trace view = trace;
    for (TraceEvent& ev : view.events) {
        ev.is_copy = false;
        ev.src_is_mem = false;
        ev.src_reg = 0;
        ev.src_addr_bits = 0;
    }
    return view;
}

} // namespace fxa
