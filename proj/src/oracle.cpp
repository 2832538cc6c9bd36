#include "fxa/oracle.hpp"

#include "fxa/wordops.hpp"

#include <map>

namespace fxa {

namespace wo = wordops;

const char* oracle_fault_name(OracleFault f) {
    switch (f) {
        case OracleFault::None: return "none";
        case OracleFault::DivideByZero: return "divide-by-zero";
        case OracleFault::OutOfBounds: return "out-of-bounds";
        case OracleFault::StepBudget: return "step-budget";
    }
    return "?";
}

namespace {

struct Fault {
    OracleFault kind;
};

struct ReturnSignal {
    std::uint64_t raw;
};

// Scalar value: cell image, one uint64 (2-cell types packed high.low).
struct Value {
    TypePtr type;
    std::uint64_t raw = 0;
    std::string binding; // pointers: the restrict array name
};

struct Storage {
    TypePtr type;
    std::vector<std::uint64_t> cells; // W-bit cells; 2-cell scalars high first
    std::string restrict_array;
};

class Interp {
public:
    Interp(const TypedUnit& unit, int width, std::uint64_t budget)
        : unit_(unit), W_(width), budget_(budget) {}

    OracleResult run(const std::string& entry, const std::vector<std::uint64_t>& args) {
        OracleResult res;
        const Function* fn = unit_.find(entry);
        if (!fn) throw std::runtime_error("no function named " + entry);
        try {
            res.value = call(*fn, args);
        } catch (const Fault& f) {
            res.faulted = true;
            res.fault = f.kind;
        }
        res.steps = steps_;
        res.write_log = std::move(log_);
        return res;
    }

private:
    using Frame = std::vector<std::map<std::string, Storage>>;

    std::uint64_t mask(int cells) const { return wo::mask_bits(cells * W_); }

    void tick() {
        if (++steps_ > budget_) throw Fault{OracleFault::StepBudget};
    }

    std::uint64_t call(const Function& fn, const std::vector<std::uint64_t>& args) {
        if (args.size() != fn.params.size()) throw std::runtime_error("bad argument count");
        Frame frame;
        frame.emplace_back();
        for (size_t i = 0; i < fn.params.size(); ++i) {
            Storage st;
            st.type = fn.params[i].type;
            int n = st.type->cells();
            st.cells.resize(n);
            std::uint64_t v = args[i] & mask(n);
            if (n == 2) { st.cells[0] = (v >> W_) & mask(1); st.cells[1] = v & mask(1); }
            else st.cells[0] = v;
            frame.back()[fn.params[i].name] = std::move(st);
        }
        frames_.push_back(std::move(frame));
        std::uint64_t result = 0;
        try {
            exec_stmt(*fn.body);
            // falling off the end of a value-returning function yields 0
        } catch (const ReturnSignal& r) {
            result = r.raw;
        }
        frames_.pop_back();
        return result;
    }

    // --- storage access ---------------------------------------------------------
    Storage& lookup(const std::string& name) {
        Frame& frame = frames_.back();
        for (auto it = frame.rbegin(); it != frame.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return f->second;
        }
        throw std::runtime_error("oracle: unknown variable " + name);
    }

    std::uint64_t load_cells(const Storage& st, int offset, int n) const {
        if (offset < 0 || offset + n > static_cast<int>(st.cells.size()))
            throw Fault{OracleFault::OutOfBounds};
        if (n == 2) return (st.cells[offset] << W_) | st.cells[offset + 1];
        return st.cells[offset];
    }

    void store_cells(Storage& st, int offset, int n, std::uint64_t v) {
        if (offset < 0 || offset + n > static_cast<int>(st.cells.size()))
            throw Fault{OracleFault::OutOfBounds};
        if (n == 2) {
            st.cells[offset] = (v >> W_) & mask(1);
            st.cells[offset + 1] = v & mask(1);
        } else {
            st.cells[offset] = v & mask(1);
        }
    }

    // --- lvalues ------------------------------------------------------------------
    struct Place {
        Storage* storage;
        int offset;
        TypePtr type;
        std::string path; // for the write log
    };

    Place resolve_place(const Expr& e) {
        switch (e.k) {
            case Expr::K::Var: {
                Storage& st = lookup(e.name);
                return {&st, 0, st.type, e.name};
            }
            case Expr::K::Index: {
                Place base = resolve_place(*e.a);
                std::uint64_t idx = eval(*e.b).raw;
                std::int64_t i = wo::to_signed(idx, W_);
                if (i < 0 || i >= base.type->array_len) throw Fault{OracleFault::OutOfBounds};
                int stride = base.type->elem->cells();
                return {base.storage, base.offset + static_cast<int>(i) * stride,
                        base.type->elem, base.path + "[" + std::to_string(i) + "]"};
            }
            case Expr::K::Field: {
                Place base = resolve_place(*e.a);
                auto hit = resolve_field(base.type, e.name);
                return {base.storage, base.offset + hit->cell_offset, hit->type,
                        base.path + "." + e.name};
            }
            case Expr::K::Deref: {
                Value p = eval(*e.a);
                Storage& arr = lookup(p.binding);
                std::int64_t i = wo::to_signed(p.raw, W_);
                if (arr.type->kind != Type::K::Array || i < 0 || i >= arr.type->array_len)
                    throw Fault{OracleFault::OutOfBounds};
                int stride = arr.type->elem->cells();
                return {&arr, static_cast<int>(i) * stride, arr.type->elem,
                        p.binding + "[" + std::to_string(i) + "]"};
            }
            default:
                throw std::runtime_error("oracle: not a place");
        }
    }

    // --- casts ----------------------------------------------------------------------
    // Mirrors the machine lowering: float->integer saturates at the cell
    // width first, then narrows to the logical width.
    std::uint64_t cast_value(std::uint64_t raw, BaseType from, BaseType to) {
        const int from_cells = base_cells(from), to_cells = base_cells(to);
        const int from_bits = from_cells * W_, to_bits = to_cells * W_;
        if (to == BaseType::Bool) {
            if (base_is_float(from)) return wo::fdecode(raw, from_bits) != 0.0 ? 1 : 0;
            return (raw & mask(from_cells)) != 0 ? 1 : 0;
        }
        if (base_is_float(from) && base_is_float(to))
            return wo::float_to_float(raw, from_bits, to_bits);
        if (base_is_float(from)) {
            std::uint64_t wide = wo::float_to_int(raw, from_bits, to_bits, !base_is_unsigned(to));
            return narrow_to_logical(wide, to);
        }
        if (base_is_float(to)) {
            return wo::int_to_float(raw & mask(from_cells), from_bits, !base_is_unsigned(from), to_bits);
        }
        // integer to integer: value-extend per source, then narrow per target
        std::uint64_t wide;
        if (to_cells > from_cells) {
            wide = base_is_unsigned(from)
                       ? (raw & mask(from_cells))
                       : static_cast<std::uint64_t>(wo::to_signed(raw, from_bits)) & mask(to_cells);
        } else {
            wide = raw & mask(to_cells);
        }
        return narrow_to_logical(wide, to);
    }

    // Reduce a cell-width value to the target's logical bit width and
    // value-extend back to the cell width (what the mul/div shift pair does).
    std::uint64_t narrow_to_logical(std::uint64_t v, BaseType t) {
        const int cells = base_cells(t);
        const int cell_bits = cells * W_;
        const int logical = base_bits(t, W_);
        if (logical >= cell_bits) return v & mask(cells);
        v &= wo::mask_bits(logical);
        if (!base_is_unsigned(t)) {
            std::uint64_t sign = 1ull << (logical - 1);
            v = (v ^ sign) - sign;
        }
        return v & mask(cells);
    }

    // --- expressions -------------------------------------------------------------------
    Value eval(const Expr& e) {
        tick();
        switch (e.k) {
            case Expr::K::IntLit:
            case Expr::K::CharLit: {
                std::uint64_t v = e.int_value & mask(e.type->cells());
                return {e.type, narrow_to_logical(v, e.type->base), ""};
            }
            case Expr::K::FloatLit:
                return {e.type, wo::fencode(e.float_value, e.type->cells() * W_), ""};
            case Expr::K::Var: {
                Storage& st = lookup(e.name);
                if (st.type->kind == Type::K::Pointer)
                    return {e.type, st.cells[0], st.restrict_array};
                return {e.type, load_cells(st, 0, e.type->cells()), ""};
            }
            case Expr::K::Unary: {
                Value a = eval(*e.a);
                int bits = e.type->cells() * W_;
                if (base_is_float(e.type->base)) return {e.type, wo::fneg(a.raw, bits), ""};
                return {e.type, wo::sub(0, a.raw, bits), ""};
            }
            case Expr::K::Binary: {
                if (e.type->kind == Type::K::Pointer) {
                    Value p = eval(*e.a);
                    Value i = eval(*e.b);
                    std::uint64_t r = e.op == "+" ? wo::add(p.raw, i.raw, W_)
                                                  : wo::sub(p.raw, i.raw, W_);
                    return {e.type, r, p.binding};
                }
                Value a = eval(*e.a), b = eval(*e.b);
                return {e.type, binop(e.op, e.type->base, a.raw, b.raw), ""};
            }
            case Expr::K::Compare: {
                Value a = eval(*e.a), b = eval(*e.b);
                return {e.type, compare(e.op, e.a->type->base, a.raw, b.raw) ? 1u : 0u, ""};
            }
            case Expr::K::Logical: {
                Value a = eval(*e.a);
                bool av = a.raw != 0;
                if (e.op == "&&" && !av) return {e.type, 0, ""};
                if (e.op == "||" && av) return {e.type, 1, ""};
                Value b = eval(*e.b);
                return {e.type, b.raw != 0 ? 1u : 0u, ""};
            }
            case Expr::K::Not: {
                Value a = eval(*e.a);
                return {e.type, a.raw == 0 ? 1u : 0u, ""};
            }
            case Expr::K::Cond: {
                Value c = eval(*e.a);
                return c.raw != 0 ? eval(*e.b) : eval(*e.c);
            }
            case Expr::K::Index:
            case Expr::K::Field: {
                Place p = resolve_place(e);
                if (p.type->kind == Type::K::Pointer) {
                    throw std::runtime_error("oracle: pointers inside aggregates unsupported");
                }
                return {e.type, load_cells(*p.storage, p.offset, p.type->cells()), ""};
            }
            case Expr::K::Deref: {
                Place p = resolve_place(e);
                return {e.type, load_cells(*p.storage, p.offset, p.type->cells()), ""};
            }
            case Expr::K::AddrIndex: {
                std::uint64_t idx = eval(*e.b).raw;
                return {e.type, idx & mask(1), e.a->name};
            }
            case Expr::K::Cast: {
                Value a = eval(*e.a);
                return {e.type, cast_value(a.raw, e.a->type->base, e.type->base), ""};
            }
            case Expr::K::Call: {
                const Function* fn = unit_.find(e.name);
                std::vector<std::uint64_t> args;
                for (const auto& arg : e.args) args.push_back(eval(*arg).raw);
                if (frames_.size() > 4000) throw Fault{OracleFault::StepBudget};
                return {e.type, call(*fn, args), ""};
            }
        }
        throw std::runtime_error("oracle: bad expression");
    }

    std::uint64_t binop(const std::string& op, BaseType t, std::uint64_t a, std::uint64_t b) {
        const int bits = base_cells(t) * W_;
        const bool uns = base_is_unsigned(t);
        try {
            if (base_is_float(t)) {
                if (op == "+") return wo::fadd(a, b, bits);
                if (op == "-") return wo::fsub(a, b, bits);
                if (op == "*") return wo::fmul(a, b, bits);
                if (op == "/") return wo::fdiv(a, b, bits);
            } else {
                if (op == "+") return wo::add(a, b, bits);
                if (op == "-") return wo::sub(a, b, bits);
                if (op == "*") return wo::mul(a, b, bits);
                if (op == "^") return wo::xor_(a, b, bits);
                if (op == "/") return uns ? wo::udiv(a, b, bits) : wo::sdiv(a, b, bits);
                if (op == "%") return uns ? wo::urem(a, b, bits) : wo::srem(a, b, bits);
            }
        } catch (const DivideByZero&) {
            throw Fault{OracleFault::DivideByZero};
        }
        throw std::runtime_error("oracle: bad operator " + op);
    }

    bool compare(const std::string& op, BaseType t, std::uint64_t a, std::uint64_t b) {
        const int bits = base_cells(t) * W_;
        if (base_is_float(t)) {
            if (op == "==") return wo::feq(a, b, bits);
            if (op == "!=") return !wo::feq(a, b, bits);
            if (op == "<") return wo::flt(a, b, bits);
            if (op == ">") return wo::fgt(a, b, bits);
            if (op == "<=") return wo::flt(a, b, bits) || wo::feq(a, b, bits);
            return wo::fgt(a, b, bits) || wo::feq(a, b, bits);
        }
        const bool uns = base_is_unsigned(t);
        if (op == "==") return wo::eq(a, b, bits);
        if (op == "!=") return !wo::eq(a, b, bits);
        bool lt = uns ? wo::ult(a, b, bits) : wo::slt(a, b, bits);
        bool eq = wo::eq(a, b, bits);
        if (op == "<") return lt;
        if (op == ">") return !lt && !eq;
        if (op == "<=") return lt || eq;
        return !lt;
    }

    // --- statements -----------------------------------------------------------------------
    void exec_stmt(const Stmt& s) {
        tick();
        switch (s.k) {
            case Stmt::K::Decl: {
                Storage st;
                st.type = s.decl_type;
                st.restrict_array = s.restrict_array;
                st.cells.assign(s.decl_type->cells(), 0);
                if (s.init) {
                    Value v = eval(*s.init);
                    if (st.type->kind == Type::K::Pointer) {
                        st.cells[0] = v.raw;
                        st.restrict_array = s.restrict_array;
                    } else {
                        store_cells(st, 0, st.type->cells(), v.raw);
                    }
                    log_.push_back({s.name, v.raw});
                }
                frames_.back().back()[s.name] = std::move(st);
                break;
            }
            case Stmt::K::Assign: {
                Value v = eval(*s.value);
                if (s.target->type->kind == Type::K::Pointer) {
                    Storage& st = lookup(s.target->name);
                    st.cells[0] = v.raw;
                    log_.push_back({s.target->name, v.raw});
                    break;
                }
                Place p = resolve_place(*s.target);
                store_cells(*p.storage, p.offset, p.type->cells(), v.raw);
                log_.push_back({p.path, v.raw});
                break;
            }
            case Stmt::K::If: {
                Value c = eval(*s.cond);
                push_scope();
                if (c.raw != 0) exec_stmt(*s.then_body);
                else if (s.else_body) exec_stmt(*s.else_body);
                pop_scope();
                break;
            }
            case Stmt::K::While:
                while (true) {
                    tick();
                    Value c = eval(*s.cond);
                    if (c.raw == 0) break;
                    push_scope();
                    exec_stmt(*s.body);
                    pop_scope();
                }
                break;
            case Stmt::K::For: {
                push_scope();
                if (s.for_init) exec_stmt(*s.for_init);
                while (true) {
                    tick();
                    if (s.cond) {
                        Value c = eval(*s.cond);
                        if (c.raw == 0) break;
                    }
                    push_scope();
                    exec_stmt(*s.body);
                    pop_scope();
                    if (s.for_step) exec_stmt(*s.for_step);
                }
                pop_scope();
                break;
            }
            case Stmt::K::Return:
                throw ReturnSignal{s.ret ? eval(*s.ret).raw : 0};
            case Stmt::K::Block:
                push_scope();
                for (const auto& st : s.stmts) exec_stmt(*st);
                pop_scope();
                break;
            case Stmt::K::ExprStmt:
                eval(*s.expr);
                break;
        }
    }

    void push_scope() { frames_.back().emplace_back(); }
    void pop_scope() { frames_.back().pop_back(); }

    const TypedUnit& unit_;
    int W_;
    std::uint64_t budget_;
    std::uint64_t steps_ = 0;
    std::vector<Frame> frames_;
    std::vector<std::pair<std::string, std::uint64_t>> log_;
};

} // namespace

OracleResult interpret(const TypedUnit& unit, const std::string& entry,
                       const std::vector<std::uint64_t>& args, int width,
                       std::uint64_t step_budget) {
    Interp in(unit, width, step_budget);
    return in.run(entry, args);
}

} // namespace fxa
