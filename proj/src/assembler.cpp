#include "fxa/assembler.hpp"

#include "fxa/wordops.hpp"

#include <map>
#include <sstream>
#include <vector>

namespace fxa {

namespace {

struct Mnemonic {
    Op op;
    bool diddled; // bne/bge/ble family
};

std::optional<Mnemonic> mnemonic_by_name(const std::string& name) {
    if (auto op = op_by_name(name)) return Mnemonic{*op, false};
    static const std::map<std::string, Op> inverted = {
        {"bne", Op::Beq},  {"bge", Op::Blt},  {"ble", Op::Bgt},
        {"bnel", Op::Beql}, {"bgel", Op::Bltl}, {"blel", Op::Bgtl},
        {"bnef", Op::Beqf}, {"bgef", Op::Bltf}, {"blef", Op::Bgtf},
        {"bned", Op::Beqd}, {"bged", Op::Bltd}, {"bled", Op::Bgtd},
    };
    auto it = inverted.find(name);
    if (it == inverted.end()) return std::nullopt;
    return Mnemonic{it->second, true};
}

const char* inverted_name(Op op) {
    switch (op) {
        case Op::Beq: return "bne"; case Op::Blt: return "bge"; case Op::Bgt: return "ble";
        case Op::Beql: return "bnel"; case Op::Bltl: return "bgel"; case Op::Bgtl: return "blel";
        case Op::Beqf: return "bnef"; case Op::Bltf: return "bgef"; case Op::Bgtf: return "blef";
        case Op::Beqd: return "bned"; case Op::Bltd: return "bged"; case Op::Bgtd: return "bled";
        default: return nullptr;
    }
}

// How many cells one E[...] literal covers for this opcode: long/double
// forms take 2W-bit constants, everything else W-bit.
int cells_per_literal(Op op) {
    switch (op) {
        case Op::Addl: case Op::Subl: case Op::Mull: case Op::Divl: case Op::Divul:
        case Op::Xorl: case Op::Beql: case Op::Bltl: case Op::Bgtl:
        case Op::Addd: case Op::Subd: case Op::Muld: case Op::Divd:
        case Op::Beqd: case Op::Bltd: case Op::Bgtd:
            return 2;
        default:
            return 1;
    }
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : line) {
        if (ch == '#') break;
        if (isspace(static_cast<unsigned char>(ch)) || ch == ',') {
            if (!cur.empty()) { tokens.push_back(cur); cur.clear(); }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

std::int64_t parse_int(const std::string& s, int line) {
    try {
        size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos, 0);
        if (pos != s.size()) throw AsmError(line, "bad number: " + s);
        return v;
    } catch (const AsmError&) {
        throw;
    } catch (...) {
        throw AsmError(line, "bad number: " + s);
    }
}

struct PendingInstr {
    Instruction ins;
    int line;
    std::string disp_label;   // unresolved branch/jump label, if any
    bool disp_is_branch = false;
};

} // namespace

ObjectProgram assemble(const std::string& text, const Key& key, int width, ArrayMode mode) {
    ObjectProgram prog;
    prog.width = width;
    prog.array_mode = mode;

    std::map<std::string, std::uint32_t> labels;
    std::vector<PendingInstr> pending;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto tokens = split_tokens(raw);
        // peel off labels
        while (!tokens.empty() && tokens.front().back() == ':') {
            std::string label = tokens.front().substr(0, tokens.front().size() - 1);
            if (labels.count(label)) throw AsmError(lineno, "duplicate label: " + label);
            labels[label] = static_cast<std::uint32_t>(pending.size());
            tokens.erase(tokens.begin());
        }
        if (tokens.empty()) continue;

        auto mn = mnemonic_by_name(tokens[0]);
        if (!mn) throw AsmError(lineno, "unknown mnemonic: " + tokens[0]);
        const OpInfo& info = op_info(mn->op);

        PendingInstr pi;
        pi.ins.op = mn->op;
        pi.line = lineno;
        int regs_seen = 0;
        bool explicit_diddle = false;
        bool disp_seen = false;

        for (size_t t = 1; t < tokens.size(); ++t) {
            const std::string& tok = tokens[t];
            if (auto ri = reg_by_name(tok)) {
                if (regs_seen >= info.reg_count) throw AsmError(lineno, "too many registers");
                pi.ins.regs[regs_seen++] = static_cast<std::uint8_t>(*ri);
            } else if (tok.size() > 2 && tok.substr(0, 2) == "E[" && tok.back() == ']') {
                std::int64_t v = parse_int(tok.substr(2, tok.size() - 3), lineno);
                int cells = cells_per_literal(mn->op);
                int w = key.width();
                std::uint64_t uv = static_cast<std::uint64_t>(v) & wordops::mask_bits(cells * w);
                // high cell first
                for (int c = cells - 1; c >= 0; --c) {
                    int cell_index = static_cast<int>(pi.ins.consts.size());
                    Word cell_v = (uv >> (c * w)) & wordops::mask_bits(w);
                    pi.ins.consts.push_back(key.encrypt(cell_v, const_cell_tag(mn->op, cell_index)));
                }
            } else if (tok[0] == '$') {
                pi.ins.consts.push_back(ciphertext_from_hex(key, tok.substr(1)));
            } else if (tok[0] == '!') {
                if (!info.has_diddle) throw AsmError(lineno, "diddle on non-branch");
                if (tok.size() > 2 && tok[1] == '$') {
                    pi.ins.diddle = ciphertext_from_hex(key, tok.substr(2));
                } else {
                    Word bit = parse_int(tok.substr(1), lineno) & 1;
                    pi.ins.diddle = key.encrypt(bit, diddle_tag(mn->op));
                }
                explicit_diddle = true;
            } else if (isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '-' || tok[0] == '+') {
                std::int64_t v = parse_int(tok, lineno);
                if (info.has_disp) { pi.ins.disp = static_cast<std::int32_t>(v); disp_seen = true; }
                else if (info.has_target) { pi.ins.target = static_cast<std::uint32_t>(v); disp_seen = true; }
                else throw AsmError(lineno, "unexpected number operand");
            } else {
                if (!info.has_disp && !info.has_target) throw AsmError(lineno, "unexpected operand: " + tok);
                pi.disp_label = tok;
                pi.disp_is_branch = info.has_disp;
                disp_seen = true;
            }
        }

        if (regs_seen != info.reg_count) throw AsmError(lineno, "wrong operand count");
        if (pi.ins.consts.size() != info.const_cells)
            throw AsmError(lineno, "wrong constant count");
        if ((info.has_disp || info.has_target) && !disp_seen)
            throw AsmError(lineno, "missing branch target");
        if (info.has_diddle && !explicit_diddle)
            pi.ins.diddle = key.encrypt(mn->diddled ? 1 : 0, diddle_tag(mn->op));
        pending.push_back(std::move(pi));
    }

    for (std::uint32_t i = 0; i < pending.size(); ++i) {
        PendingInstr& pi = pending[i];
        if (!pi.disp_label.empty()) {
            auto it = labels.find(pi.disp_label);
            if (it == labels.end()) throw AsmError(pi.line, "unresolved label: " + pi.disp_label);
            if (pi.disp_is_branch)
                pi.ins.disp = static_cast<std::int32_t>(it->second) - static_cast<std::int32_t>(i) - 1;
            else
                pi.ins.target = it->second;
        }
        prog.code.push_back(std::move(pi.ins));
    }
    prog.validate();
    return prog;
}

std::string disassemble(const ObjectProgram& prog, const Key& key, bool keyed) {
    std::ostringstream out;
    const int w = prog.width;
    for (std::uint32_t i = 0; i < prog.code.size(); ++i) {
        const Instruction& ins = prog.code[i];
        const OpInfo& info = op_info(ins.op);

        std::string name = info.name;
        if (keyed && ins.diddle) {
            Word bit = key.decrypt_expect(*ins.diddle, diddle_tag(ins.op), "diddle");
            if (bit & 1) name = inverted_name(ins.op);
        }
        out << name;
        for (int r = 0; r < info.reg_count; ++r) out << " " << reg_name(ins.regs[r]);
        if (info.has_disp) out << " " << ins.disp;
        if (info.has_target) out << " " << ins.target;

        if (keyed) {
            int cells = cells_per_literal(ins.op);
            for (size_t c = 0; c < ins.consts.size(); c += cells) {
                std::uint64_t v = 0;
                for (int k = 0; k < cells; ++k) {
                    Word cell = key.decrypt_expect(ins.consts[c + k],
                                                   const_cell_tag(ins.op, static_cast<int>(c) + k),
                                                   "instruction constant");
                    v = (v << w) | cell;
                }
                out << " E[" << wordops::to_signed(v, cells * w) << "]";
            }
        } else {
            for (const Ciphertext& c : ins.consts) out << " $" << to_hex(key, c);
            if (ins.diddle) out << " !$" << to_hex(key, *ins.diddle);
        }
        out << "\n";
    }
    return out.str();
}

} // namespace fxa
