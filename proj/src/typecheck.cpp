#include "fxa/typecheck.hpp"

#include "fxa/parser.hpp"

#include <map>

namespace fxa {

const Function* TypedUnit::find(const std::string& name) const {
    for (const Function& f : unit.functions)
        if (f.name == name) return &f;
    return nullptr;
}

namespace {

int rank(BaseType t) {
    switch (t) {
        case BaseType::Bool: return 0;
        case BaseType::Char: case BaseType::UChar: return 1;
        case BaseType::Short: case BaseType::UShort: return 2;
        case BaseType::Int: case BaseType::UInt: return 3;
        case BaseType::Long: case BaseType::ULong: return 4;
        case BaseType::LLong: case BaseType::ULLong: return 5;
        case BaseType::Float: return 6;
        case BaseType::Double: return 7;
    }
    return 0;
}

BaseType unsigned_of(BaseType t) {
    switch (t) {
        case BaseType::Char: return BaseType::UChar;
        case BaseType::Short: return BaseType::UShort;
        case BaseType::Int: return BaseType::UInt;
        case BaseType::Long: return BaseType::ULong;
        case BaseType::LLong: return BaseType::ULLong;
        default: return t;
    }
}

// integer promotion: everything below int becomes int
BaseType promote(BaseType t) {
    return rank(t) < rank(BaseType::Int) ? BaseType::Int : t;
}

// usual arithmetic conversions on promoted operands
BaseType common_type(BaseType a, BaseType b) {
    a = promote(a);
    b = promote(b);
    if (a == BaseType::Double || b == BaseType::Double) return BaseType::Double;
    if (a == BaseType::Float || b == BaseType::Float) return BaseType::Float;
    if (a == b) return a;
    bool ua = base_is_unsigned(a), ub = base_is_unsigned(b);
    if (ua == ub) return rank(a) > rank(b) ? a : b;
    BaseType u = ua ? a : b;
    BaseType s = ua ? b : a;
    if (rank(u) >= rank(s)) return u;
    // signed type has greater rank; with cells(long)=2 > cells(int)=1 it can
    // represent every value of the lower-rank unsigned type
    if (base_cells(s) > base_cells(u)) return s;
    return unsigned_of(s);
}

struct VarInfo {
    TypePtr type;
    std::string restrict_array; // pointers
};

class Checker {
public:
    explicit Checker(Unit& unit) : unit_(unit) {
        for (Function& f : unit.functions) {
            if (fns_.count(f.name)) err(f.pos, "duplicate function " + f.name);
            fns_[f.name] = &f;
        }
    }

    void run() {
        for (Function& f : unit_.functions) check_function(f);
    }

private:
    [[noreturn]] void err(SourcePos pos, const std::string& msg) {
        throw FrontendError(unit_.file, pos, msg);
    }

    // --- scopes ---------------------------------------------------------------
    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }
    void declare(SourcePos pos, const std::string& name, VarInfo info) {
        if (scopes_.back().count(name)) err(pos, "redeclaration of " + name);
        scopes_.back()[name] = std::move(info);
    }
    const VarInfo* lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) return &f->second;
        }
        return nullptr;
    }

    // --- casts ------------------------------------------------------------------
    ExprPtr cast_to(ExprPtr e, const TypePtr& to) {
        if (same_type(e->type, to)) return e;
        if (!e->type->is_base() || !to->is_base())
            err(e->pos, "cannot convert " + e->type->to_string() + " to " + to->to_string());
        auto c = std::make_unique<Expr>();
        c->k = Expr::K::Cast;
        c->pos = e->pos;
        c->cast_type = to;
        c->type = to;
        c->a = std::move(e);
        return c;
    }

    ExprPtr cast_to_base(ExprPtr e, BaseType b) { return cast_to(std::move(e), Type::make_base(b)); }

    // Wraps a scalar in `e != 0` unless it is already boolean-valued.
    ExprPtr boolify(ExprPtr e) {
        if (e->type->is_base() && e->type->base == BaseType::Bool) return e;
        if (!e->type->is_base()) err(e->pos, "condition must have scalar type");
        auto zero = std::make_unique<Expr>();
        if (base_is_float(e->type->base)) {
            zero->k = Expr::K::FloatLit;
            zero->float_value = 0.0;
            zero->lit_type = e->type->base;
        } else {
            zero->k = Expr::K::IntLit;
            zero->int_value = 0;
            zero->lit_type = e->type->base;
        }
        zero->pos = e->pos;
        zero->type = Type::make_base(e->type->base);
        auto cmp = std::make_unique<Expr>();
        cmp->k = Expr::K::Compare;
        cmp->op = "!=";
        cmp->pos = e->pos;
        cmp->a = std::move(e);
        cmp->b = std::move(zero);
        cmp->type = Type::make_base(BaseType::Bool);
        return cmp;
    }

    // --- expressions -------------------------------------------------------------
    void check_expr(ExprPtr& e) {
        switch (e->k) {
            case Expr::K::IntLit:
            case Expr::K::CharLit:
                e->type = Type::make_base(e->lit_type);
                break;
            case Expr::K::FloatLit:
                e->type = Type::make_base(e->lit_type);
                break;
            case Expr::K::Var: {
                const VarInfo* v = lookup(e->name);
                if (!v) err(e->pos, "undeclared variable " + e->name);
                e->type = v->type;
                break;
            }
            case Expr::K::Unary: {
                check_expr(e->a);
                if (!e->a->type->is_base()) err(e->pos, "unary '-' needs arithmetic operand");
                BaseType t = promote(e->a->type->base);
                e->a = cast_to_base(std::move(e->a), t);
                e->type = Type::make_base(t);
                break;
            }
            case Expr::K::Binary: {
                check_expr(e->a);
                check_expr(e->b);
                // pointer arithmetic: p + i, i + p, p - i
                if (e->a->type->kind == Type::K::Pointer || e->b->type->kind == Type::K::Pointer) {
                    if (e->op != "+" && e->op != "-") err(e->pos, "bad pointer operation");
                    if (e->b->type->kind == Type::K::Pointer) {
                        if (e->op == "-" || e->a->type->kind == Type::K::Pointer)
                            err(e->pos, "bad pointer operation");
                        std::swap(e->a, e->b);
                    }
                    e->b = cast_to_base(std::move(e->b), BaseType::Int);
                    e->type = e->a->type;
                    break;
                }
                if (!e->a->type->is_base() || !e->b->type->is_base())
                    err(e->pos, "arithmetic on non-scalar");
                BaseType t = common_type(e->a->type->base, e->b->type->base);
                if ((e->op == "%" || e->op == "^") && base_is_float(t))
                    err(e->pos, "'" + e->op + "' needs integer operands");
                e->a = cast_to_base(std::move(e->a), t);
                e->b = cast_to_base(std::move(e->b), t);
                e->type = Type::make_base(t);
                break;
            }
            case Expr::K::Compare: {
                check_expr(e->a);
                check_expr(e->b);
                if (!e->a->type->is_base() || !e->b->type->is_base())
                    err(e->pos, "comparison on non-scalar");
                BaseType t = common_type(e->a->type->base, e->b->type->base);
                e->a = cast_to_base(std::move(e->a), t);
                e->b = cast_to_base(std::move(e->b), t);
                e->type = Type::make_base(BaseType::Bool);
                break;
            }
            case Expr::K::Logical: {
                check_expr(e->a);
                check_expr(e->b);
                e->a = boolify(std::move(e->a));
                e->b = boolify(std::move(e->b));
                e->type = Type::make_base(BaseType::Bool);
                break;
            }
            case Expr::K::Not: {
                check_expr(e->a);
                e->a = boolify(std::move(e->a));
                e->type = Type::make_base(BaseType::Bool);
                break;
            }
            case Expr::K::Cond: {
                check_expr(e->a);
                e->a = boolify(std::move(e->a));
                check_expr(e->b);
                check_expr(e->c);
                if (!e->b->type->is_base() || !e->c->type->is_base())
                    err(e->pos, "'?:' arms must be scalar");
                BaseType t = common_type(e->b->type->base, e->c->type->base);
                e->b = cast_to_base(std::move(e->b), t);
                e->c = cast_to_base(std::move(e->c), t);
                e->type = Type::make_base(t);
                break;
            }
            case Expr::K::Index: {
                check_expr(e->a);
                check_expr(e->b);
                if (e->a->type->kind == Type::K::Pointer) {
                    // p[i] is *(p + i)
                    auto add = std::make_unique<Expr>();
                    add->k = Expr::K::Binary;
                    add->op = "+";
                    add->pos = e->pos;
                    add->type = e->a->type;
                    add->a = std::move(e->a);
                    add->b = cast_to_base(std::move(e->b), BaseType::Int);
                    auto deref = std::make_unique<Expr>();
                    deref->k = Expr::K::Deref;
                    deref->pos = e->pos;
                    deref->a = std::move(add);
                    deref->type = deref->a->type->elem;
                    e = std::move(deref);
                    break;
                }
                if (e->a->type->kind != Type::K::Array) err(e->pos, "indexing a non-array");
                if (!e->b->type->is_base() || base_is_float(e->b->type->base))
                    err(e->pos, "array index must be an integer");
                if (e->b->k == Expr::K::IntLit &&
                    static_cast<std::int64_t>(e->b->int_value) >= e->a->type->array_len)
                    err(e->pos, "constant index out of range");
                e->b = cast_to_base(std::move(e->b), BaseType::Int);
                e->type = e->a->type->elem;
                break;
            }
            case Expr::K::Field: {
                check_expr(e->a);
                const TypePtr& at = e->a->type;
                if (at->kind != Type::K::Struct && at->kind != Type::K::Union)
                    err(e->pos, "member access on non-struct");
                auto hit = resolve_field(at, e->name);
                if (!hit) err(e->pos, "no member named " + e->name);
                e->type = hit->type;
                break;
            }
            case Expr::K::Deref: {
                check_expr(e->a);
                if (e->a->type->kind != Type::K::Pointer)
                    err(e->pos, "dereference of a non-pointer");
                e->type = e->a->type->elem;
                break;
            }
            case Expr::K::AddrIndex: {
                check_expr(e->a);
                check_expr(e->b);
                if (e->a->type->kind != Type::K::Array)
                    err(e->pos, "'&' needs an array element");
                if (e->a->k != Expr::K::Var)
                    err(e->pos, "'&' is only supported on named arrays");
                e->b = cast_to_base(std::move(e->b), BaseType::Int);
                e->type = Type::make_pointer(e->a->type->elem);
                break;
            }
            case Expr::K::Cast: {
                check_expr(e->a);
                if (!e->cast_type->is_base() || !e->a->type->is_base())
                    err(e->pos, "casts are supported between basic types only");
                e->type = e->cast_type;
                break;
            }
            case Expr::K::Call: {
                auto it = fns_.find(e->name);
                if (it == fns_.end()) err(e->pos, "call to undefined function " + e->name);
                Function* fn = it->second;
                if (!fn->ret_type) err(e->pos, "call to void function in expression");
                if (e->args.size() != fn->params.size())
                    err(e->pos, "wrong argument count for " + e->name);
                for (size_t i = 0; i < e->args.size(); ++i) {
                    check_expr(e->args[i]);
                    e->args[i] = cast_to(std::move(e->args[i]), fn->params[i].type);
                }
                e->type = fn->ret_type;
                break;
            }
        }
    }

    // Checks that an expression is a writable location.
    void check_lvalue(const Expr& e) {
        switch (e.k) {
            case Expr::K::Var: {
                if (e.type->kind == Type::K::Array) err(e.pos, "cannot assign whole array");
                return;
            }
            case Expr::K::Index:
            case Expr::K::Field: {
                check_lvalue_base(*e.a);
                return;
            }
            case Expr::K::Deref:
                return;
            default:
                err(e.pos, "not an assignable location");
        }
    }
    void check_lvalue_base(const Expr& e) {
        switch (e.k) {
            case Expr::K::Var: return;
            case Expr::K::Index:
            case Expr::K::Field: check_lvalue_base(*e.a); return;
            default: err(e.pos, "not an assignable location");
        }
    }

    // Pointer assignment target binding: the named array the pointer value
    // points into must be the pointer's declared restrict array.
    std::string pointer_binding_of(const Expr& e) {
        switch (e.k) {
            case Expr::K::Var: {
                const VarInfo* v = lookup(e.name);
                return v ? v->restrict_array : "";
            }
            case Expr::K::AddrIndex:
                return e.a->name;
            case Expr::K::Binary: // p + i
                return pointer_binding_of(*e.a);
            case Expr::K::Cond:
                return pointer_binding_of(*e.b);
            default:
                return "";
        }
    }

    // --- statements ---------------------------------------------------------------
    void check_stmt(StmtPtr& s, Function& fn) {
        switch (s->k) {
            case Stmt::K::Decl: {
                if (s->decl_type->kind == Type::K::Pointer) {
                    const VarInfo* arr = lookup(s->restrict_array);
                    if (!arr) err(s->pos, "restrict names unknown array " + s->restrict_array);
                    if (arr->type->kind != Type::K::Array ||
                        !same_type(arr->type->elem, s->decl_type->elem))
                        err(s->pos, "restrict array element type mismatch");
                }
                if (s->init) {
                    check_expr(s->init);
                    if (s->decl_type->is_aggregate())
                        err(s->pos, "aggregate initialisers are not supported");
                    if (s->decl_type->kind == Type::K::Pointer) {
                        if (!same_type(s->init->type, s->decl_type))
                            err(s->pos, "pointer initialiser type mismatch");
                        if (pointer_binding_of(*s->init) != s->restrict_array)
                            err(s->pos, "pointer initialiser escapes its restrict array");
                    } else {
                        s->init = cast_to(std::move(s->init), s->decl_type);
                    }
                }
                declare(s->pos, s->name, VarInfo{s->decl_type, s->restrict_array});
                break;
            }
            case Stmt::K::Assign: {
                check_expr(s->target);
                check_lvalue(*s->target);
                check_expr(s->value);
                if (s->target->type->is_aggregate())
                    err(s->pos, "aggregate assignment is not supported");
                if (s->target->type->kind == Type::K::Pointer) {
                    if (!same_type(s->value->type, s->target->type))
                        err(s->pos, "pointer assignment type mismatch");
                    if (s->target->k != Expr::K::Var)
                        err(s->pos, "pointer assignment target must be a variable");
                    const VarInfo* v = lookup(s->target->name);
                    if (pointer_binding_of(*s->value) != v->restrict_array)
                        err(s->pos, "pointer assignment escapes its restrict array");
                } else {
                    s->value = cast_to(std::move(s->value), s->target->type);
                }
                break;
            }
            case Stmt::K::If:
                check_expr(s->cond);
                s->cond = boolify(std::move(s->cond));
                push_scope();
                check_stmt(s->then_body, fn);
                pop_scope();
                if (s->else_body) {
                    push_scope();
                    check_stmt(s->else_body, fn);
                    pop_scope();
                }
                break;
            case Stmt::K::While:
                check_expr(s->cond);
                s->cond = boolify(std::move(s->cond));
                push_scope();
                check_stmt(s->body, fn);
                pop_scope();
                break;
            case Stmt::K::For:
                push_scope();
                if (s->for_init) check_stmt(s->for_init, fn);
                if (s->cond) {
                    check_expr(s->cond);
                    s->cond = boolify(std::move(s->cond));
                }
                if (s->for_step) check_stmt(s->for_step, fn);
                check_stmt(s->body, fn);
                pop_scope();
                break;
            case Stmt::K::Return:
                if (fn.ret_type) {
                    if (!s->ret) err(s->pos, "return needs a value");
                    check_expr(s->ret);
                    s->ret = cast_to(std::move(s->ret), fn.ret_type);
                } else if (s->ret) {
                    err(s->pos, "void function returns a value");
                }
                break;
            case Stmt::K::Block:
                push_scope();
                for (auto& st : s->stmts) check_stmt(st, fn);
                pop_scope();
                break;
            case Stmt::K::ExprStmt:
                check_expr(s->expr);
                break;
        }
    }

    void check_function(Function& fn) {
        if (fn.ret_type && !fn.ret_type->is_base())
            err(fn.pos, "function return type must be basic");
        push_scope();
        for (const Param& p : fn.params) declare(fn.pos, p.name, VarInfo{p.type, ""});
        check_stmt(fn.body, fn);
        pop_scope();
    }

    Unit& unit_;
    std::map<std::string, Function*> fns_;
    std::vector<std::map<std::string, VarInfo>> scopes_;
};

} // namespace

TypedUnit typecheck(Unit unit) {
    Checker c(unit);
    c.run();
    return TypedUnit{std::move(unit)};
}

TypedUnit typecheck_source(const std::string& source, const std::string& file) {
    return typecheck(parse_source(source, file));
}

} // namespace fxa
