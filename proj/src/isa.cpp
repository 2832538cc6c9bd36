#include "fxa/isa.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace fxa {

namespace {

// name kind regs pairmask cells diddle disp target out_cells in_cells
constexpr OpInfo kOps[kOpCount] = {
    {"add",  OpKind::Alu, 3, 0b000, 1, false, false, false},
    {"sub",  OpKind::Alu, 3, 0b000, 1, false, false, false},
    {"mul",  OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"div",  OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"divu", OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"xor",  OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"mov",  OpKind::Copy, 2, 0b00, 0, false, false, false},
    {"addl",  OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"subl",  OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"mull",  OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"divl",  OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"divul", OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"xorl",  OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"movl",  OpKind::Copy, 2, 0b11, 0, false, false, false},
    {"addf", OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"subf", OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"mulf", OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"divf", OpKind::Alu, 3, 0b000, 3, false, false, false},
    {"addd", OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"subd", OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"muld", OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"divd", OpKind::Alu, 3, 0b111, 6, false, false, false},
    {"beq", OpKind::Branch, 2, 0b00, 1, true, true, false},
    {"blt", OpKind::Branch, 2, 0b00, 2, true, true, false},
    {"bgt", OpKind::Branch, 2, 0b00, 2, true, true, false},
    {"beql", OpKind::Branch, 2, 0b11, 2, true, true, false},
    {"bltl", OpKind::Branch, 2, 0b11, 4, true, true, false},
    {"bgtl", OpKind::Branch, 2, 0b11, 4, true, true, false},
    {"beqf", OpKind::Branch, 2, 0b00, 2, true, true, false},
    {"bltf", OpKind::Branch, 2, 0b00, 2, true, true, false},
    {"bgtf", OpKind::Branch, 2, 0b00, 2, true, true, false},
    {"beqd", OpKind::Branch, 2, 0b11, 4, true, true, false},
    {"bltd", OpKind::Branch, 2, 0b11, 4, true, true, false},
    {"bgtd", OpKind::Branch, 2, 0b11, 4, true, true, false},
    {"b",   OpKind::Jump, 0, 0, 0, false, true, false},
    {"j",   OpKind::Jump, 0, 0, 0, false, false, true},
    {"jal", OpKind::Jump, 0, 0, 0, false, false, true},
    {"jr",  OpKind::JumpReg, 1, 0, 0, false, false, false},
    {"sw",  OpKind::Store, 2, 0b00, 1, false, false, false},
    {"lw",  OpKind::Load, 2, 0b00, 1, false, false, false},
    {"nop", OpKind::Nop, 0, 0, 0, false, false, false},
    {"cvtif",  OpKind::Cvt, 2, 0b00, 2, false, false, false, 1, 1},
    {"cvtuf",  OpKind::Cvt, 2, 0b00, 2, false, false, false, 1, 1},
    {"cvtid",  OpKind::Cvt, 2, 0b01, 3, false, false, false, 2, 1},
    {"cvtud",  OpKind::Cvt, 2, 0b01, 3, false, false, false, 2, 1},
    {"cvtlf",  OpKind::Cvt, 2, 0b10, 3, false, false, false, 1, 2},
    {"cvtulf", OpKind::Cvt, 2, 0b10, 3, false, false, false, 1, 2},
    {"cvtld",  OpKind::Cvt, 2, 0b11, 4, false, false, false, 2, 2},
    {"cvtuld", OpKind::Cvt, 2, 0b11, 4, false, false, false, 2, 2},
    {"cvtfi",  OpKind::Cvt, 2, 0b00, 2, false, false, false, 1, 1},
    {"cvtfu",  OpKind::Cvt, 2, 0b00, 2, false, false, false, 1, 1},
    {"cvtfl",  OpKind::Cvt, 2, 0b01, 3, false, false, false, 2, 1},
    {"cvtful", OpKind::Cvt, 2, 0b01, 3, false, false, false, 2, 1},
    {"cvtdi",  OpKind::Cvt, 2, 0b10, 3, false, false, false, 1, 2},
    {"cvtdu",  OpKind::Cvt, 2, 0b10, 3, false, false, false, 1, 2},
    {"cvtdl",  OpKind::Cvt, 2, 0b11, 4, false, false, false, 2, 2},
    {"cvtdul", OpKind::Cvt, 2, 0b11, 4, false, false, false, 2, 2},
    {"cvtfd",  OpKind::Cvt, 2, 0b01, 3, false, false, false, 2, 1},
    {"cvtdf",  OpKind::Cvt, 2, 0b10, 3, false, false, false, 1, 2},
};

const char* kRegNames[kNumRegs] = {
    "zer", "ra", "sp", "fp", "a0", "a1", "a2", "a3",
    "v0", "v1", "t0", "t1", "t2", "t3", "t4", "t5",
    "zeh", "t6", "t7", "t8", "t9", "s0", "s1", "s2",
    "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10",
};

} // namespace

const OpInfo& op_info(Op op) { return kOps[static_cast<int>(op)]; }

std::optional<Op> op_by_name(const std::string& name) {
    static const std::map<std::string, Op>* table = [] {
        auto* m = new std::map<std::string, Op>;
        for (int i = 0; i < kOpCount; ++i) (*m)[kOps[i].name] = static_cast<Op>(i);
        return m;
    }();
    auto it = table->find(name);
    if (it == table->end()) return std::nullopt;
    return it->second;
}

DomainTag const_cell_tag(Op op, int cell) {
    return DomainTag::constant(op_index(op), cell);
}

DomainTag diddle_tag(Op op) {
    return DomainTag::constant(op_index(op), op_info(op).const_cells);
}

bool is_arithmetic_write(Op op) {
    OpKind k = op_info(op).kind;
    return k == OpKind::Alu || k == OpKind::Cvt;
}

const char* reg_name(int index) { return kRegNames[index]; }

std::optional<int> reg_by_name(const std::string& name) {
    for (int i = 0; i < kNumRegs; ++i)
        if (name == kRegNames[i]) return i;
    return std::nullopt;
}

const char* array_mode_name(ArrayMode m) {
    return m == ArrayMode::PerEntry ? "per-entry" : "shared";
}

std::optional<ArrayMode> array_mode_by_name(const std::string& s) {
    if (s == "per-entry") return ArrayMode::PerEntry;
    if (s == "shared") return ArrayMode::Shared;
    return std::nullopt;
}

void ObjectProgram::validate() const {
    auto fail = [](std::uint32_t i, const std::string& msg) {
        throw std::runtime_error("instruction " + std::to_string(i) + ": " + msg);
    };
    if (entry > code.size()) throw std::runtime_error("entry index out of range");
    for (std::uint32_t i = 0; i < code.size(); ++i) {
        const Instruction& ins = code[i];
        const OpInfo& info = op_info(ins.op);
        if (ins.consts.size() != info.const_cells) fail(i, "wrong constant count");
        if (info.has_diddle != ins.diddle.has_value()) fail(i, "diddle mismatch");
        for (int r = 0; r < info.reg_count; ++r) {
            if (ins.regs[r] >= kNumRegs) fail(i, "bad register");
            if ((info.pair_mask >> r) & 1) {
                if (ins.regs[r] >= 16) fail(i, "pair operand must name r0..r15");
            }
        }
        if (info.has_disp) {
            std::int64_t t = static_cast<std::int64_t>(i) + 1 + ins.disp;
            if (t < 0 || t > static_cast<std::int64_t>(code.size()))
                fail(i, "branch displacement out of range");
        }
        if (info.has_target && ins.target > code.size()) fail(i, "jump target out of range");
    }
}

std::string save_object(const ObjectProgram& prog, const Key& key) {
    std::ostringstream out;
    out << "FXA 1\n";
    out << "WIDTH " << prog.width << "\n";
    out << "MODE " << array_mode_name(prog.array_mode) << "\n";
    out << "ENTRY " << prog.entry << "\n";
    if (!prog.source_name.empty()) out << "SRC " << prog.source_name << "\n";
    for (const IfaceEntry& e : prog.iface) {
        out << "IFACE "
            << (e.kind == IfaceEntry::Kind::Param ? "param"
                : e.kind == IfaceEntry::Kind::Ret ? "ret" : "env")
            << " " << e.index << " " << e.location << " " << e.type_name;
        for (Word off : e.offsets) {
            out << " " << std::hex << off << std::dec;
        }
        out << "\n";
    }
    for (const TrailerSet& set : prog.trailer_sets) {
        out << "TRAILER";
        for (auto m : set.members) out << " " << m;
        out << "\n";
    }
    for (std::uint32_t i = 0; i < prog.code.size(); ++i) {
        const Instruction& ins = prog.code[i];
        const OpInfo& info = op_info(ins.op);
        out << "INS " << i << " " << info.name;
        for (int r = 0; r < info.reg_count; ++r) out << " " << reg_name(ins.regs[r]);
        for (const Ciphertext& c : ins.consts) out << " " << to_hex(key, c);
        if (ins.diddle) out << " " << to_hex(key, *ins.diddle);
        if (info.has_disp) out << " " << ins.disp;
        if (info.has_target) out << " " << ins.target;
        out << "\n";
    }
    return out.str();
}

ObjectProgram load_object(const std::string& text, const Key& key) {
    ObjectProgram prog;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "FXA") { header_seen = true; continue; }
        if (!header_seen) throw std::runtime_error("object file missing FXA header");
        if (tag == "WIDTH") { ls >> prog.width; continue; }
        if (tag == "MODE") {
            std::string m; ls >> m;
            auto am = array_mode_by_name(m);
            if (!am) throw std::runtime_error("bad MODE in object file");
            prog.array_mode = *am;
            continue;
        }
        if (tag == "ENTRY") { ls >> prog.entry; continue; }
        if (tag == "SRC") { ls >> prog.source_name; continue; }
        if (tag == "IFACE") {
            IfaceEntry e;
            std::string kind;
            ls >> kind >> e.index >> e.location >> e.type_name;
            e.kind = kind == "param" ? IfaceEntry::Kind::Param
                   : kind == "ret" ? IfaceEntry::Kind::Ret : IfaceEntry::Kind::Env;
            std::string off;
            while (ls >> off) e.offsets.push_back(std::stoull(off, nullptr, 16));
            prog.iface.push_back(std::move(e));
            continue;
        }
        if (tag == "TRAILER") {
            TrailerSet set;
            std::uint32_t m;
            while (ls >> m) set.members.push_back(m);
            prog.trailer_sets.push_back(std::move(set));
            continue;
        }
        if (tag == "INS") {
            std::uint32_t index;
            std::string opname;
            ls >> index >> opname;
            if (index != prog.code.size()) throw std::runtime_error("INS records out of order");
            auto op = op_by_name(opname);
            if (!op) throw std::runtime_error("unknown opcode in object file: " + opname);
            Instruction ins;
            ins.op = *op;
            const OpInfo& info = op_info(*op);
            for (int r = 0; r < info.reg_count; ++r) {
                std::string rn; ls >> rn;
                auto ri = reg_by_name(rn);
                if (!ri) throw std::runtime_error("unknown register in object file: " + rn);
                ins.regs[r] = static_cast<std::uint8_t>(*ri);
            }
            for (int c = 0; c < info.const_cells; ++c) {
                std::string hex; ls >> hex;
                ins.consts.push_back(ciphertext_from_hex(key, hex));
            }
            if (info.has_diddle) {
                std::string hex; ls >> hex;
                ins.diddle = ciphertext_from_hex(key, hex);
            }
            if (info.has_disp) ls >> ins.disp;
            if (info.has_target) ls >> ins.target;
            if (!ls) throw std::runtime_error("truncated INS record");
            prog.code.push_back(std::move(ins));
            continue;
        }
        throw std::runtime_error("unknown record in object file: " + tag);
    }
    prog.validate();
    return prog;
}

} // namespace fxa
