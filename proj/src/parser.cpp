#include "fxa/parser.hpp"

#include <sstream>

namespace fxa {

// --- type helpers -----------------------------------------------------------

const char* base_type_name(BaseType t) {
    switch (t) {
        case BaseType::Bool: return "_Bool";
        case BaseType::Char: return "char";
        case BaseType::UChar: return "unsigned char";
        case BaseType::Short: return "short";
        case BaseType::UShort: return "unsigned short";
        case BaseType::Int: return "int";
        case BaseType::UInt: return "unsigned int";
        case BaseType::Long: return "long";
        case BaseType::ULong: return "unsigned long";
        case BaseType::LLong: return "long long";
        case BaseType::ULLong: return "unsigned long long";
        case BaseType::Float: return "float";
        case BaseType::Double: return "double";
    }
    return "?";
}

bool base_is_unsigned(BaseType t) {
    switch (t) {
        case BaseType::Bool: case BaseType::UChar: case BaseType::UShort:
        case BaseType::UInt: case BaseType::ULong: case BaseType::ULLong:
            return true;
        default:
            return false;
    }
}

bool base_is_float(BaseType t) { return t == BaseType::Float || t == BaseType::Double; }
bool base_is_integer(BaseType t) { return !base_is_float(t); }

int base_cells(BaseType t) {
    switch (t) {
        case BaseType::Long: case BaseType::ULong:
        case BaseType::LLong: case BaseType::ULLong:
        case BaseType::Double:
            return 2;
        default:
            return 1;
    }
}

int base_bits(BaseType t, int width) {
    switch (t) {
        case BaseType::Bool: return 1;
        case BaseType::Char: case BaseType::UChar: return std::max(width / 4, 1);
        case BaseType::Short: case BaseType::UShort: return width / 2;
        case BaseType::Int: case BaseType::UInt: case BaseType::Float: return width;
        default: return 2 * width;
    }
}

TypePtr Type::make_base(BaseType b) {
    auto t = std::make_shared<Type>();
    t->kind = K::Base;
    t->base = b;
    return t;
}

TypePtr Type::make_array(TypePtr elem, int n) {
    auto t = std::make_shared<Type>();
    t->kind = K::Array;
    t->elem = std::move(elem);
    t->array_len = n;
    return t;
}

TypePtr Type::make_struct(std::vector<Field> fields) {
    auto t = std::make_shared<Type>();
    t->kind = K::Struct;
    t->fields = std::move(fields);
    return t;
}

TypePtr Type::make_union(std::vector<Field> fields) {
    auto t = std::make_shared<Type>();
    t->kind = K::Union;
    t->fields = std::move(fields);
    return t;
}

TypePtr Type::make_pointer(TypePtr elem) {
    auto t = std::make_shared<Type>();
    t->kind = K::Pointer;
    t->elem = std::move(elem);
    return t;
}

int Type::cells() const {
    switch (kind) {
        case K::Base: return base_cells(base);
        case K::Pointer: return 1;
        case K::Array: return array_len * elem->cells();
        case K::Struct: {
            int n = 0;
            for (const auto& f : fields) n += f.type->cells();
            return n;
        }
        case K::Union: {
            int n = 0;
            for (const auto& f : fields) n = std::max(n, f.type->cells());
            return n;
        }
    }
    return 0;
}

namespace {

// "float b[2]" style declarator spelling for a field or variable
std::string declarator_string(const Type& t, const std::string& name) {
    const Type* cur = &t;
    std::string dims;
    while (cur->kind == Type::K::Array) {
        dims += "[" + std::to_string(cur->array_len) + "]";
        cur = cur->elem.get();
    }
    std::string head = cur->to_string();
    if (name.empty()) return head + dims;
    return head + " " + name + dims;
}

} // namespace

std::string Type::to_string() const {
    switch (kind) {
        case K::Base: return base_type_name(base);
        case K::Pointer: return elem->to_string() + "*";
        case K::Array: return declarator_string(*this, "");
        case K::Struct: {
            std::string s = "struct { ";
            for (const auto& f : fields) s += declarator_string(*f.type, f.name) + "; ";
            return s + "}";
        }
        case K::Union: {
            std::string s = "union { ";
            for (const auto& f : fields) s += declarator_string(*f.type, f.name) + "; ";
            return s + "}";
        }
    }
    return "?";
}

std::optional<FieldRef> resolve_field(const TypePtr& t, const std::string& name) {
    if (t->kind != Type::K::Struct && t->kind != Type::K::Union) return std::nullopt;
    int offset = 0;
    for (const auto& f : t->fields) {
        int here = t->kind == Type::K::Struct ? offset : 0;
        if (f.name == name) return FieldRef{f.type, here};
        if (f.name.empty()) {
            if (auto sub = resolve_field(f.type, name))
                return FieldRef{sub->type, here + sub->cell_offset};
        }
        offset += f.type->cells();
    }
    return std::nullopt;
}

bool same_type(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case Type::K::Base: return a->base == b->base;
        case Type::K::Pointer: return same_type(a->elem, b->elem);
        case Type::K::Array: return a->array_len == b->array_len && same_type(a->elem, b->elem);
        case Type::K::Struct:
        case Type::K::Union: {
            if (a->fields.size() != b->fields.size()) return false;
            for (size_t i = 0; i < a->fields.size(); ++i)
                if (a->fields[i].name != b->fields[i].name ||
                    !same_type(a->fields[i].type, b->fields[i].type))
                    return false;
            return true;
        }
    }
    return false;
}

// --- parser -----------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::vector<Token> tokens, std::string file)
        : toks_(std::move(tokens)), file_(std::move(file)) {}

    Unit parse_unit() {
        Unit u;
        u.file = file_;
        while (!at_end()) u.functions.push_back(parse_function());
        return u;
    }

private:
    const Token& peek(int n = 0) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at_end() const { return peek().k == Token::K::End; }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void error(const std::string& msg) { throw FrontendError(file_, peek().pos, msg); }

    bool is_punct(const std::string& p, int n = 0) const {
        return peek(n).k == Token::K::Punct && peek(n).text == p;
    }
    bool is_kw(const std::string& k, int n = 0) const {
        return peek(n).k == Token::K::Keyword && peek(n).text == k;
    }
    void expect_punct(const std::string& p) {
        if (!is_punct(p)) error("expected '" + p + "'");
        take();
    }
    std::string expect_ident() {
        if (peek().k != Token::K::Ident) error("expected identifier");
        return take().text;
    }

    bool starts_type() const {
        if (peek().k != Token::K::Keyword) return false;
        const std::string& t = peek().text;
        return t == "_Bool" || t == "char" || t == "short" || t == "int" || t == "long" ||
               t == "float" || t == "double" || t == "signed" || t == "unsigned" ||
               t == "struct" || t == "union";
    }

    TypePtr parse_base_type() {
        bool uns = false, sgn = false;
        while (is_kw("unsigned") || is_kw("signed")) {
            if (take().text == "unsigned") uns = true; else sgn = true;
        }
        (void)sgn;
        if (is_kw("_Bool")) { take(); return Type::make_base(BaseType::Bool); }
        if (is_kw("char")) { take(); return Type::make_base(uns ? BaseType::UChar : BaseType::Char); }
        if (is_kw("short")) {
            take();
            if (is_kw("int")) take();
            return Type::make_base(uns ? BaseType::UShort : BaseType::Short);
        }
        if (is_kw("int")) { take(); return Type::make_base(uns ? BaseType::UInt : BaseType::Int); }
        if (is_kw("long")) {
            take();
            bool lly = false;
            if (is_kw("long")) { take(); lly = true; }
            if (is_kw("int")) take();
            if (lly) return Type::make_base(uns ? BaseType::ULLong : BaseType::LLong);
            return Type::make_base(uns ? BaseType::ULong : BaseType::Long);
        }
        if (uns) return Type::make_base(BaseType::UInt);
        if (is_kw("float")) { take(); return Type::make_base(BaseType::Float); }
        if (is_kw("double")) { take(); return Type::make_base(BaseType::Double); }
        error("expected type");
    }

    TypePtr parse_type() {
        if (is_kw("struct") || is_kw("union")) {
            bool is_union = take().text == "union";
            expect_punct("{");
            std::vector<Type::Field> fields;
            while (!is_punct("}")) {
                TypePtr ft = parse_type();
                Type::Field f;
                f.type = ft;
                if (is_punct(";")) {
                    // anonymous struct/union member
                    if (ft->kind != Type::K::Struct && ft->kind != Type::K::Union)
                        error("anonymous member must be struct or union");
                } else {
                    f.name = expect_ident();
                    f.type = parse_array_suffix(ft);
                }
                expect_punct(";");
                fields.push_back(std::move(f));
            }
            expect_punct("}");
            return is_union ? Type::make_union(std::move(fields))
                            : Type::make_struct(std::move(fields));
        }
        return parse_base_type();
    }

    TypePtr parse_array_suffix(TypePtr t) {
        std::vector<int> dims;
        while (is_punct("[")) {
            take();
            if (peek().k != Token::K::IntLit) error("array length must be an integer literal");
            dims.push_back(static_cast<int>(take().int_value));
            expect_punct("]");
        }
        for (auto it = dims.rbegin(); it != dims.rend(); ++it) {
            if (*it <= 0) error("array length must be positive");
            t = Type::make_array(t, *it);
        }
        return t;
    }

    Function parse_function() {
        Function fn;
        fn.pos = peek().pos;
        if (is_kw("void")) { take(); fn.ret_type = nullptr; }
        else fn.ret_type = parse_type();
        fn.name = expect_ident();
        expect_punct("(");
        if (!is_punct(")")) {
            while (true) {
                Param p;
                p.type = parse_type();
                p.name = expect_ident();
                if (!p.type->is_base()) error("parameters must have basic type");
                fn.params.push_back(std::move(p));
                if (is_punct(",")) { take(); continue; }
                break;
            }
        }
        expect_punct(")");
        fn.body = parse_block();
        return fn;
    }

    StmtPtr parse_block() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::Block;
        s->pos = peek().pos;
        expect_punct("{");
        while (!is_punct("}")) s->stmts.push_back(parse_stmt());
        take();
        return s;
    }

    StmtPtr parse_stmt() {
        if (is_punct("{")) return parse_block();
        if (is_kw("restrict")) return parse_pointer_decl();
        if (starts_type()) return parse_decl();
        if (is_kw("if")) return parse_if();
        if (is_kw("while")) return parse_while();
        if (is_kw("for")) return parse_for();
        if (is_kw("return")) {
            auto s = std::make_unique<Stmt>();
            s->k = Stmt::K::Return;
            s->pos = take().pos;
            if (!is_punct(";")) s->ret = parse_expr();
            expect_punct(";");
            return s;
        }
        StmtPtr s = parse_simple();
        expect_punct(";");
        return s;
    }

    StmtPtr parse_pointer_decl() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::Decl;
        s->pos = take().pos; // restrict
        s->restrict_array = expect_ident();
        TypePtr elem = parse_base_type();
        expect_punct("*");
        s->name = expect_ident();
        s->decl_type = Type::make_pointer(elem);
        if (is_punct("=")) { take(); s->init = parse_expr(); }
        expect_punct(";");
        return s;
    }

    StmtPtr parse_decl() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::Decl;
        s->pos = peek().pos;
        TypePtr t = parse_type();
        s->name = expect_ident();
        s->decl_type = parse_array_suffix(t);
        if (is_punct("=")) { take(); s->init = parse_expr(); }
        expect_punct(";");
        return s;
    }

    StmtPtr parse_if() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::If;
        s->pos = take().pos;
        expect_punct("(");
        s->cond = parse_expr();
        expect_punct(")");
        s->then_body = parse_stmt();
        if (is_kw("else")) { take(); s->else_body = parse_stmt(); }
        return s;
    }

    StmtPtr parse_while() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::While;
        s->pos = take().pos;
        expect_punct("(");
        s->cond = parse_expr();
        expect_punct(")");
        s->body = parse_stmt();
        return s;
    }

    StmtPtr parse_for() {
        auto s = std::make_unique<Stmt>();
        s->k = Stmt::K::For;
        s->pos = take().pos;
        expect_punct("(");
        if (!is_punct(";")) s->for_init = parse_simple();
        expect_punct(";");
        if (!is_punct(";")) s->cond = parse_expr();
        expect_punct(";");
        if (!is_punct(")")) s->for_step = parse_simple();
        expect_punct(")");
        s->body = parse_stmt();
        return s;
    }

    // assignment or expression statement (no semicolon)
    StmtPtr parse_simple() {
        auto s = std::make_unique<Stmt>();
        s->pos = peek().pos;
        ExprPtr e = parse_expr();
        if (is_punct("=")) {
            take();
            s->k = Stmt::K::Assign;
            s->target = std::move(e);
            s->value = parse_expr();
        } else {
            s->k = Stmt::K::ExprStmt;
            s->expr = std::move(e);
        }
        return s;
    }

    // --- expressions ---------------------------------------------------------

    ExprPtr make(Expr::K k) {
        auto e = std::make_unique<Expr>();
        e->k = k;
        e->pos = peek().pos;
        return e;
    }

    ExprPtr parse_expr() { return parse_cond(); }

    ExprPtr parse_cond() {
        ExprPtr c = parse_or();
        if (!is_punct("?")) return c;
        auto e = make(Expr::K::Cond);
        take();
        e->a = std::move(c);
        e->b = parse_expr();
        expect_punct(":");
        e->c = parse_cond();
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr l = parse_and();
        while (is_punct("||")) {
            auto e = make(Expr::K::Logical);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_and();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_and() {
        ExprPtr l = parse_xor();
        while (is_punct("&&")) {
            auto e = make(Expr::K::Logical);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_xor();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_xor() {
        ExprPtr l = parse_eq();
        while (is_punct("^")) {
            auto e = make(Expr::K::Binary);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_eq();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_eq() {
        ExprPtr l = parse_rel();
        while (is_punct("==") || is_punct("!=")) {
            auto e = make(Expr::K::Compare);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_rel();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_rel() {
        ExprPtr l = parse_add();
        while (is_punct("<") || is_punct(">") || is_punct("<=") || is_punct(">=")) {
            auto e = make(Expr::K::Compare);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_add();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_add() {
        ExprPtr l = parse_mul();
        while (is_punct("+") || is_punct("-")) {
            auto e = make(Expr::K::Binary);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_mul();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_mul() {
        ExprPtr l = parse_unary();
        while (is_punct("*") || is_punct("/") || is_punct("%")) {
            auto e = make(Expr::K::Binary);
            e->op = take().text;
            e->a = std::move(l);
            e->b = parse_unary();
            l = std::move(e);
        }
        return l;
    }

    ExprPtr parse_unary() {
        if (is_punct("-")) {
            auto e = make(Expr::K::Unary);
            take();
            e->op = "-";
            e->a = parse_unary();
            return e;
        }
        if (is_punct("!")) {
            auto e = make(Expr::K::Not);
            take();
            e->a = parse_unary();
            return e;
        }
        if (is_punct("*")) {
            auto e = make(Expr::K::Deref);
            take();
            e->a = parse_unary();
            return e;
        }
        if (is_punct("&")) {
            auto e = make(Expr::K::AddrIndex);
            take();
            ExprPtr inner = parse_unary();
            if (inner->k != Expr::K::Index) error("'&' is only supported on array elements");
            e->a = std::move(inner->a);
            e->b = std::move(inner->b);
            return e;
        }
        if (is_punct("(") && (peek(1).k == Token::K::Keyword &&
                              (starts_type_token(peek(1).text)))) {
            auto e = make(Expr::K::Cast);
            take();
            e->cast_type = parse_type();
            expect_punct(")");
            e->a = parse_unary();
            return e;
        }
        return parse_postfix();
    }

    static bool starts_type_token(const std::string& t) {
        return t == "_Bool" || t == "char" || t == "short" || t == "int" || t == "long" ||
               t == "float" || t == "double" || t == "signed" || t == "unsigned";
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            if (is_punct("[")) {
                auto idx = make(Expr::K::Index);
                take();
                idx->a = std::move(e);
                idx->b = parse_expr();
                expect_punct("]");
                e = std::move(idx);
            } else if (is_punct(".")) {
                auto fld = make(Expr::K::Field);
                take();
                fld->a = std::move(e);
                fld->name = expect_ident();
                e = std::move(fld);
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parse_primary() {
        if (peek().k == Token::K::IntLit) {
            auto e = make(Expr::K::IntLit);
            Token t = take();
            e->int_value = t.int_value;
            e->lit_type = t.has_long_suffix ? (t.has_unsigned_suffix ? BaseType::ULLong : BaseType::LLong)
                        : t.has_unsigned_suffix ? BaseType::UInt
                                                : BaseType::Int;
            return e;
        }
        if (peek().k == Token::K::FloatLit) {
            auto e = make(Expr::K::FloatLit);
            Token t = take();
            e->float_value = t.float_value;
            e->lit_type = t.has_long_suffix ? BaseType::Double : BaseType::Float;
            return e;
        }
        if (peek().k == Token::K::CharLit) {
            auto e = make(Expr::K::CharLit);
            e->int_value = take().int_value;
            e->lit_type = BaseType::Char;
            return e;
        }
        if (peek().k == Token::K::Ident) {
            if (is_punct("(", 1)) {
                auto e = make(Expr::K::Call);
                e->name = take().text;
                take(); // (
                if (!is_punct(")")) {
                    while (true) {
                        e->args.push_back(parse_expr());
                        if (is_punct(",")) { take(); continue; }
                        break;
                    }
                }
                expect_punct(")");
                return e;
            }
            auto e = make(Expr::K::Var);
            e->name = take().text;
            return e;
        }
        if (is_punct("(")) {
            take();
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        error("expected expression");
    }

    std::vector<Token> toks_;
    std::string file_;
    size_t pos_ = 0;
};

// --- pretty printer ----------------------------------------------------------

void print_expr(std::ostringstream& o, const Expr& e);

void print_args(std::ostringstream& o, const std::vector<ExprPtr>& args) {
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) o << ", ";
        print_expr(o, *args[i]);
    }
}

void print_expr(std::ostringstream& o, const Expr& e) {
    switch (e.k) {
        case Expr::K::IntLit:
            o << static_cast<std::int64_t>(e.int_value);
            if (e.lit_type == BaseType::UInt) o << "u";
            if (e.lit_type == BaseType::LLong) o << "ll";
            if (e.lit_type == BaseType::ULLong) o << "ull";
            break;
        case Expr::K::FloatLit: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << e.float_value;
            std::string s = tmp.str();
            if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
            o << s;
            if (e.lit_type == BaseType::Float) o << "f";
            break;
        }
        case Expr::K::CharLit: o << static_cast<std::uint64_t>(e.int_value); break;
        case Expr::K::Var: o << e.name; break;
        case Expr::K::Unary: o << "(-"; print_expr(o, *e.a); o << ")"; break;
        case Expr::K::Not: o << "(!"; print_expr(o, *e.a); o << ")"; break;
        case Expr::K::Binary:
        case Expr::K::Compare:
        case Expr::K::Logical:
            o << "(";
            print_expr(o, *e.a);
            o << " " << e.op << " ";
            print_expr(o, *e.b);
            o << ")";
            break;
        case Expr::K::Cond:
            o << "(";
            print_expr(o, *e.a);
            o << " ? ";
            print_expr(o, *e.b);
            o << " : ";
            print_expr(o, *e.c);
            o << ")";
            break;
        case Expr::K::Index:
            print_expr(o, *e.a);
            o << "[";
            print_expr(o, *e.b);
            o << "]";
            break;
        case Expr::K::Field:
            print_expr(o, *e.a);
            o << "." << e.name;
            break;
        case Expr::K::Deref: o << "(*"; print_expr(o, *e.a); o << ")"; break;
        case Expr::K::AddrIndex:
            o << "(&";
            print_expr(o, *e.a);
            o << "[";
            print_expr(o, *e.b);
            o << "])";
            break;
        case Expr::K::Cast:
            o << "((" << e.cast_type->to_string() << ")";
            print_expr(o, *e.a);
            o << ")";
            break;
        case Expr::K::Call:
            o << e.name << "(";
            print_args(o, e.args);
            o << ")";
            break;
    }
}

void print_stmt(std::ostringstream& o, const Stmt& s, int indent);

void print_simple(std::ostringstream& o, const Stmt& s) {
    if (s.k == Stmt::K::Assign) {
        print_expr(o, *s.target);
        o << " = ";
        print_expr(o, *s.value);
    } else {
        print_expr(o, *s.expr);
    }
}

void print_stmt(std::ostringstream& o, const Stmt& s, int indent) {
    std::string ind(indent * 2, ' ');
    switch (s.k) {
        case Stmt::K::Decl:
            o << ind;
            if (s.decl_type->kind == Type::K::Pointer) {
                o << "restrict " << s.restrict_array << " " << s.decl_type->elem->to_string()
                  << " *" << s.name;
            } else {
                // peel arrays: base name then suffixes
                const Type* t = s.decl_type.get();
                std::vector<int> dims;
                while (t->kind == Type::K::Array) { dims.push_back(t->array_len); t = t->elem.get(); }
                o << t->to_string() << " " << s.name;
                for (int d : dims) o << "[" << d << "]";
            }
            if (s.init) { o << " = "; print_expr(o, *s.init); }
            o << ";\n";
            break;
        case Stmt::K::Assign:
        case Stmt::K::ExprStmt:
            o << ind;
            print_simple(o, s);
            o << ";\n";
            break;
        case Stmt::K::If:
            o << ind << "if (";
            print_expr(o, *s.cond);
            o << ")\n";
            print_stmt(o, *s.then_body, indent + 1);
            if (s.else_body) {
                o << ind << "else\n";
                print_stmt(o, *s.else_body, indent + 1);
            }
            break;
        case Stmt::K::While:
            o << ind << "while (";
            print_expr(o, *s.cond);
            o << ")\n";
            print_stmt(o, *s.body, indent + 1);
            break;
        case Stmt::K::For:
            o << ind << "for (";
            if (s.for_init) print_simple(o, *s.for_init);
            o << "; ";
            if (s.cond) print_expr(o, *s.cond);
            o << "; ";
            if (s.for_step) print_simple(o, *s.for_step);
            o << ")\n";
            print_stmt(o, *s.body, indent + 1);
            break;
        case Stmt::K::Return:
            o << ind << "return";
            if (s.ret) { o << " "; print_expr(o, *s.ret); }
            o << ";\n";
            break;
        case Stmt::K::Block:
            o << ind << "{\n";
            for (const auto& st : s.stmts) print_stmt(o, *st, indent + 1);
            o << ind << "}\n";
            break;
    }
}

} // namespace

Unit parse(std::vector<Token> tokens, const std::string& file) {
    Parser p(std::move(tokens), file);
    return p.parse_unit();
}

Unit parse_source(const std::string& source, const std::string& file) {
    return parse(tokenize(source, file), file);
}

std::string print_unit(const Unit& unit) {
    std::ostringstream o;
    for (const Function& fn : unit.functions) {
        o << (fn.ret_type ? fn.ret_type->to_string() : "void") << " " << fn.name << "(";
        for (size_t i = 0; i < fn.params.size(); ++i) {
            if (i) o << ", ";
            o << fn.params[i].type->to_string() << " " << fn.params[i].name;
        }
        o << ")\n";
        print_stmt(o, *fn.body, 0);
    }
    return o.str();
}

} // namespace fxa
