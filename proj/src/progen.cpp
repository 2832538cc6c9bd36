#include "fxa/progen.hpp"

#include "fxa/ast.hpp"

#include <sstream>

namespace fxa {

namespace {

struct Rng {
    std::uint64_t s;
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = s;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
    int range(int n) { return static_cast<int>(next() % n); }
    bool chance(int percent) { return range(100) < percent; }
};

const BaseType kScalarPool[] = {
    BaseType::Bool, BaseType::Char, BaseType::UChar, BaseType::Short, BaseType::UShort,
    BaseType::Int, BaseType::UInt, BaseType::Long, BaseType::ULong, BaseType::LLong,
    BaseType::ULLong, BaseType::Float, BaseType::Double,
};

struct VarDecl {
    std::string name;
    BaseType type;
};

struct ArrDecl {
    std::string name;
    BaseType elem;
    int len;
};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_{seed * 2654435761u + 12345} {}

    GeneratedProgram run() {
        GeneratedProgram out;
        std::ostringstream src;

        bool with_helper = rng_.chance(55);
        bool helper_recursive = with_helper && rng_.chance(60);
        if (with_helper) {
            emit_helper(src, helper_recursive);
            features_.calls = true;
            features_.recursion = helper_recursive;
        }
        has_helper_ = with_helper;

        src << "int main(int a, int b)\n{\n";
        indent_ = 1;
        vars_.push_back({"a", BaseType::Int});
        vars_.push_back({"b", BaseType::Int});
        mark(BaseType::Int);

        int decls = 2 + rng_.range(4);
        for (int i = 0; i < decls; ++i) emit_decl(src);
        int stmts = 3 + rng_.range(6);
        for (int i = 0; i < stmts; ++i) emit_stmt(src, 2);

        src << "  return " << int_expr(2) << ";\n}\n";

        out.source = src.str();
        out.param_count = 2;
        out.features = features_;
        return out;
    }

private:
    void mark(BaseType t) { features_.base_types |= 1u << static_cast<int>(t); }

    std::string ind() const { return std::string(indent_ * 2, ' '); }

    // --- leaf expressions -----------------------------------------------------
    std::string literal(BaseType t) {
        mark(t);
        std::ostringstream o;
        if (t == BaseType::Float) {
            o << (rng_.range(200) - 100) << "." << rng_.range(100) << "f";
        } else if (t == BaseType::Double) {
            o << (rng_.range(2000) - 1000) << "." << rng_.range(1000);
        } else if (t == BaseType::Bool) {
            o << rng_.range(2);
        } else if (base_is_unsigned(t)) {
            o << rng_.range(120) << "u";
        } else {
            o << (rng_.range(200) - 100);
            if (t == BaseType::Long || t == BaseType::LLong) o << "ll";
        }
        return o.str();
    }

    const VarDecl* pick_var(bool (*pred)(BaseType)) {
        std::vector<const VarDecl*> hits;
        for (const VarDecl& v : vars_)
            if (pred(v.type)) hits.push_back(&v);
        if (hits.empty()) return nullptr;
        return hits[rng_.range(static_cast<int>(hits.size()))];
    }

    std::string var_of_kind(BaseType want) {
        std::vector<const VarDecl*> hits;
        for (const VarDecl& v : vars_)
            if (v.type == want) hits.push_back(&v);
        if (hits.empty()) return literal(want);
        return hits[rng_.range(static_cast<int>(hits.size()))]->name;
    }

    // An int-valued expression; the workhorse.
    std::string int_expr(int depth) {
        if (depth <= 0 || rng_.chance(30)) {
            switch (rng_.range(5)) {
                case 0: return literal(BaseType::Int);
                case 1: {
                    const VarDecl* v = pick_var([](BaseType t) { return base_is_integer(t); });
                    if (!v) return literal(BaseType::Int);
                    if (v->type == BaseType::Int) return v->name;
                    features_.casts = true;
                    return "(int)" + v->name;
                }
                case 2:
                    if (!arrays_.empty()) return array_read();
                    return literal(BaseType::Int);
                case 3:
                    if (!structs_.empty() || !unions_.empty()) return member_read();
                    return literal(BaseType::Int);
                default: {
                    const VarDecl* v = pick_var([](BaseType t) { return t == BaseType::Int; });
                    return v ? v->name : literal(BaseType::Int);
                }
            }
        }
        switch (rng_.range(9)) {
            case 0: return "(" + int_expr(depth - 1) + " + " + int_expr(depth - 1) + ")";
            case 1: return "(" + int_expr(depth - 1) + " - " + int_expr(depth - 1) + ")";
            case 2: return "(" + int_expr(depth - 1) + " * " + int_expr(depth - 1) + ")";
            case 3: return "(" + int_expr(depth - 1) + " / " +
                           (rng_.chance(75) ? nonzero_literal() : int_expr(depth - 1)) + ")";
            case 4: return "(" + int_expr(depth - 1) + " % " + nonzero_literal() + ")";
            case 5: return "(" + int_expr(depth - 1) + " ^ " + int_expr(depth - 1) + ")";
            case 6: {
                features_.casts = true;
                BaseType t = kScalarPool[rng_.range(13)];
                mark(t);
                return "(int)(" + typed_expr(t, depth - 1) + ")";
            }
            case 7:
                return "(" + bool_expr(depth - 1) + " ? " + int_expr(depth - 1) + " : " +
                       int_expr(depth - 1) + ")";
            default:
                if (has_helper_) {
                    features_.calls = true;
                    return "helper(" + std::to_string(rng_.range(5)) + ", " +
                           int_expr(depth - 1) + ")";
                }
                return "(- " + int_expr(depth - 1) + ")";
        }
    }

    std::string nonzero_literal() {
        int v = rng_.range(13) + 1;
        return std::to_string(rng_.chance(50) ? v : -v);
    }

    std::string typed_expr(BaseType t, int depth) {
        mark(t);
        if (t == BaseType::Int) return int_expr(depth);
        if (t == BaseType::Bool) return bool_expr(depth);
        if (depth <= 0 || rng_.chance(40)) {
            if (rng_.chance(50)) return var_of_kind(t);
            return literal(t);
        }
        if (base_is_float(t)) {
            const char* ops[] = {"+", "-", "*"};
            std::string a;
            if (rng_.chance(60)) {
                a = typed_expr(t, depth - 1);
            } else {
                features_.casts = true;
                a = std::string("(") + base_type_name(t) + ")(" + int_expr(depth - 1) + ")";
            }
            std::string b = typed_expr(t, depth - 1);
            return "(" + a + " " + ops[rng_.range(3)] + " " + b + ")";
        }
        // wide and narrow integer families
        const char* ops[] = {"+", "-", "*", "^"};
        std::string a = typed_expr(t, depth - 1);
        std::string b = rng_.chance(70) ? typed_expr(t, depth - 1) : literal(t);
        return "(" + a + " " + ops[rng_.range(4)] + " " + b + ")";
    }

    std::string bool_expr(int depth) {
        mark(BaseType::Bool);
        if (depth <= 0 || rng_.chance(40)) {
            BaseType t = rng_.chance(70) ? BaseType::Int : kScalarPool[rng_.range(13)];
            const char* rels[] = {"==", "!=", "<", ">", "<=", ">="};
            return "(" + typed_expr(t, 0) + " " + rels[rng_.range(6)] + " " +
                   typed_expr(t, 0) + ")";
        }
        switch (rng_.range(3)) {
            case 0: return "(" + bool_expr(depth - 1) + " && " + bool_expr(depth - 1) + ")";
            case 1: return "(" + bool_expr(depth - 1) + " || " + bool_expr(depth - 1) + ")";
            default: return "(!" + bool_expr(depth - 1) + ")";
        }
    }

    // an index expression guaranteed to stay inside [0, len)
    std::string safe_index(int len) {
        if (rng_.chance(50) && !loop_vars_.empty())
            return "(" + loop_vars_.back() + " % " + std::to_string(len) + ")";
        return std::to_string(rng_.range(len));
    }

    std::string array_read() {
        const ArrDecl& a = arrays_[rng_.range(static_cast<int>(arrays_.size()))];
        std::string e = a.name + "[" + safe_index(a.len) + "]";
        mark(a.elem);
        if (a.elem == BaseType::Int) return e;
        features_.casts = true;
        return "(int)" + e;
    }

    std::string member_read() {
        if (!structs_.empty() && (unions_.empty() || rng_.chance(50))) {
            const StructDecl& s = structs_[rng_.range(static_cast<int>(structs_.size()))];
            if (s.ft1 == BaseType::Int && rng_.chance(70)) return s.name + ".x";
            features_.casts = true;
            return rng_.chance(50) ? "(int)" + s.name + ".x" : "(int)" + s.name + ".y";
        }
        if (!unions_.empty()) {
            const std::string& u = unions_[rng_.range(static_cast<int>(unions_.size()))];
            switch (rng_.range(3)) {
                case 0: return u + ".a";
                case 1: features_.casts = true; return "(int)" + u + ".b[" + std::to_string(rng_.range(2)) + "]";
                default: features_.casts = true; return "(int)" + u + ".c[" + std::to_string(rng_.range(2)) + "]";
            }
        }
        return literal(BaseType::Int);
    }

    // --- declarations / statements ------------------------------------------------
    void emit_decl(std::ostringstream& src) {
        std::string name = "v" + std::to_string(counter_++);
        int kind = rng_.range(10);
        if (kind < 6) {
            BaseType t = kScalarPool[rng_.range(13)];
            mark(t);
            src << ind() << base_type_name(t) << " " << name << " = "
                << typed_expr(t, 1) << ";\n";
            vars_.push_back({name, t});
        } else if (kind < 8) {
            static const BaseType elems[] = {BaseType::Int, BaseType::UInt, BaseType::Char,
                                             BaseType::Short, BaseType::Float, BaseType::Long,
                                             BaseType::Double};
            BaseType elem = elems[rng_.range(7)];
            int len = 2 + rng_.range(3);
            mark(elem);
            features_.arrays = true;
            src << ind() << base_type_name(elem) << " " << name << "[" << len << "];\n";
            for (int i = 0; i < len; ++i)
                src << ind() << name << "[" << i << "] = " << typed_expr(elem, 0) << ";\n";
            arrays_.push_back({name, elem, len});
            if (elem == BaseType::Int && rng_.chance(50)) {
                features_.pointers = true;
                std::string p = "p" + std::to_string(counter_++);
                src << ind() << "restrict " << name << " int *" << p << " = &" << name
                    << "[" << rng_.range(len) << "];\n";
                pointers_.push_back({p, name, len});
            }
        } else if (kind < 9) {
            features_.structs = true;
            BaseType ft1 = rng_.chance(60) ? BaseType::Int : BaseType::Float;
            BaseType ft2 = rng_.chance(50) ? BaseType::Long : BaseType::Short;
            mark(ft1); mark(ft2);
            src << ind() << "struct { " << base_type_name(ft1) << " x; "
                << base_type_name(ft2) << " y; } " << name << ";\n";
            src << ind() << name << ".x = " << typed_expr(ft1, 0) << ";\n";
            src << ind() << name << ".y = " << typed_expr(ft2, 0) << ";\n";
            structs_.push_back({name, ft1, ft2});
        } else {
            features_.unions = true;
            mark(BaseType::Int); mark(BaseType::Float); mark(BaseType::Double);
            src << ind() << "union { struct { int a; float b[2]; }; double c[2]; } "
                << name << ";\n";
            src << ind() << name << ".c[0] = " << literal(BaseType::Double) << ";\n";
            src << ind() << name << ".c[1] = " << literal(BaseType::Double) << ";\n";
            src << ind() << name << ".a = " << int_expr(0) << ";\n";
            unions_.push_back(name);
        }
    }

    void emit_stmt(std::ostringstream& src, int depth) {
        int kind = rng_.range(10);
        if (kind < 3 || depth <= 0) {
            emit_assign(src);
        } else if (kind < 5) {
            // bounded counting loop over a fresh counter variable
            features_.loops = true;
            std::string i = "i" + std::to_string(counter_++);
            int bound = 1 + rng_.range(4);
            src << ind() << "int " << i << " = 0;\n";
            src << ind() << "for (" << i << " = 0; " << i << " < " << bound << "; "
                << i << " = " << i << " + 1)\n" << ind() << "{\n";
            ++indent_;
            vars_.push_back({i, BaseType::Int});
            loop_vars_.push_back(i);
            int body = 1 + rng_.range(2);
            for (int k = 0; k < body; ++k) emit_stmt(src, depth - 1);
            loop_vars_.pop_back();
            --indent_;
            src << ind() << "}\n";
        } else if (kind < 8) {
            src << ind() << "if (" << bool_expr(1) << ")\n" << ind() << "{\n";
            ++indent_;
            emit_stmt(src, depth - 1);
            --indent_;
            src << ind() << "}\n";
            if (rng_.chance(60)) {
                src << ind() << "else\n" << ind() << "{\n";
                ++indent_;
                emit_stmt(src, depth - 1);
                --indent_;
                src << ind() << "}\n";
            }
        } else if (kind < 9 && !pointers_.empty()) {
            const PtrDecl& p = pointers_[rng_.range(static_cast<int>(pointers_.size()))];
            int roll = rng_.range(3);
            if (roll == 0) {
                src << ind() << "*" << p.name << " = " << int_expr(1) << ";\n";
            } else if (roll == 1 && p.len >= 2) {
                // reset then a bounded advance keeps the pointer in range
                src << ind() << p.name << " = &" << p.array << "["
                    << rng_.range(p.len - 1) << "];\n";
                src << ind() << p.name << " = " << p.name << " + 1;\n";
            } else {
                src << ind() << p.name << " = &" << p.array << "["
                    << rng_.range(p.len) << "];\n";
            }
        } else {
            emit_assign(src);
        }
    }

    bool is_active_loop_var(const std::string& name) const {
        for (const std::string& lv : loop_vars_)
            if (lv == name) return true;
        return false;
    }

    void emit_assign(std::ostringstream& src) {
        int pickkind = rng_.range(8);
        if (pickkind < 4 || (arrays_.empty() && structs_.empty() && unions_.empty())) {
            // scalar variable; never an active loop counter
            std::vector<const VarDecl*> cand;
            for (const VarDecl& v : vars_)
                if (!is_active_loop_var(v.name)) cand.push_back(&v);
            if (cand.empty()) { src << ind() << "a = " << int_expr(1) << ";\n"; return; }
            const VarDecl& v = *cand[rng_.range(static_cast<int>(cand.size()))];
            src << ind() << v.name << " = " << typed_expr(v.type, 1) << ";\n";
        } else if (pickkind < 6 && !arrays_.empty()) {
            const ArrDecl& a = arrays_[rng_.range(static_cast<int>(arrays_.size()))];
            src << ind() << a.name << "[" << safe_index(a.len) << "] = "
                << typed_expr(a.elem, 1) << ";\n";
        } else if (pickkind < 7 && !structs_.empty()) {
            const StructDecl& s = structs_[rng_.range(static_cast<int>(structs_.size()))];
            if (rng_.chance(50))
                src << ind() << s.name << ".x = " << typed_expr(s.ft1, 1) << ";\n";
            else
                src << ind() << s.name << ".y = " << typed_expr(s.ft2, 1) << ";\n";
        } else if (!unions_.empty()) {
            const std::string& u = unions_[rng_.range(static_cast<int>(unions_.size()))];
            switch (rng_.range(3)) {
                case 0: src << ind() << u << ".a = " << int_expr(1) << ";\n"; break;
                case 1: src << ind() << u << ".b[" << rng_.range(2) << "] = "
                            << typed_expr(BaseType::Float, 0) << ";\n"; break;
                default: src << ind() << u << ".c[" << rng_.range(2) << "] = "
                             << typed_expr(BaseType::Double, 0) << ";\n"; break;
            }
        } else {
            src << ind() << "a = " << int_expr(1) << ";\n";
        }
    }

    void emit_helper(std::ostringstream& src, bool recursive) {
        if (recursive) {
            src << "int helper(int n, int x)\n{\n";
            src << "  if (n <= 0)\n  {\n    return x + " << rng_.range(20) << ";\n  }\n";
            src << "  return helper(n - 1, x + n) " << (rng_.chance(50) ? "+" : "-") << " "
                << (1 + rng_.range(5)) << ";\n}\n";
        } else {
            src << "int helper(int n, int x)\n{\n";
            src << "  int t = x * " << (1 + rng_.range(7)) << ";\n";
            src << "  if (n < x)\n  {\n    t = t + n;\n  }\n  else\n  {\n    t = t - n;\n  }\n";
            src << "  return t;\n}\n";
        }
    }

    struct PtrDecl {
        std::string name;
        std::string array;
        int len;
    };
    struct StructDecl {
        std::string name;
        BaseType ft1, ft2;
    };

    Rng rng_;
    int counter_ = 0;
    int indent_ = 0;
    bool has_helper_ = false;
    std::vector<VarDecl> vars_;
    std::vector<ArrDecl> arrays_;
    std::vector<PtrDecl> pointers_;
    std::vector<StructDecl> structs_;
    std::vector<std::string> unions_;
    std::vector<std::string> loop_vars_;
    ProgramFeatures features_;
};

} // namespace

GeneratedProgram generate_program(std::uint64_t seed) {
    Gen g(seed);
    return g.run();
}

} // namespace fxa
