#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fxa {

struct SourcePos {
    int line = 0;
    int col = 0;
};

struct FrontendError : std::runtime_error {
    FrontendError(const std::string& file, SourcePos pos, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(pos.line) + ":" +
                             std::to_string(pos.col) + ": " + msg),
          pos(pos) {}
    SourcePos pos;
};

enum class BaseType : std::uint8_t {
    Bool, Char, UChar, Short, UShort, Int, UInt,
    Long, ULong, LLong, ULLong, Float, Double
};
constexpr int kBaseTypeCount = 13;

const char* base_type_name(BaseType t);
bool base_is_unsigned(BaseType t);
bool base_is_float(BaseType t);
bool base_is_integer(BaseType t);
// Cells occupied at machine width W (1 or 2); logical bit width is separate.
int base_cells(BaseType t);
// Logical bit width at machine width W (e.g. Short = W/2, Long = 2W).
int base_bits(BaseType t, int width);

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    enum class K : std::uint8_t { Base, Array, Struct, Union, Pointer } kind = K::Base;
    BaseType base = BaseType::Int;

    TypePtr elem;      // Array, Pointer
    int array_len = 0; // Array

    struct Field {
        std::string name; // empty for anonymous members
        TypePtr type;
    };
    std::vector<Field> fields; // Struct, Union

    static TypePtr make_base(BaseType b);
    static TypePtr make_array(TypePtr elem, int n);
    static TypePtr make_struct(std::vector<Field> fields);
    static TypePtr make_union(std::vector<Field> fields);
    static TypePtr make_pointer(TypePtr elem);

    bool is_base() const { return kind == K::Base; }
    bool is_scalar() const { return kind == K::Base || kind == K::Pointer; }
    bool is_aggregate() const { return kind == K::Array || kind == K::Struct || kind == K::Union; }
    int cells() const; // W-bit cells occupied
    std::string to_string() const;
};

bool same_type(const TypePtr& a, const TypePtr& b);

// Member lookup with C11-style traversal of anonymous struct/union members.
// cell_offset is relative to the aggregate's first cell (union members all
// start at 0; struct members follow their predecessors).
struct FieldRef {
    TypePtr type;
    int cell_offset = 0;
};
std::optional<FieldRef> resolve_field(const TypePtr& t, const std::string& name);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class K : std::uint8_t {
        IntLit,    // int_value (possibly suffixed -> lit_type)
        FloatLit,  // float_value
        CharLit,   // int_value
        Var,       // name
        Unary,     // op '-' on a
        Binary,    // op in + - * / % ^ on a, b
        Compare,   // op in == != < > <= >= on a, b -> Bool
        Logical,   // op in && || on a, b -> Bool
        Not,       // !a -> Bool
        Cond,      // a ? b : c
        Index,     // a[b]
        Field,     // a.name
        Deref,     // *a
        AddrIndex, // &a[b] (a an array lvalue)
        Cast,      // (type)a ; also inserted by the typechecker
        Call,      // name(args)
    };
    K k;
    SourcePos pos;

    std::uint64_t int_value = 0;
    double float_value = 0;
    BaseType lit_type = BaseType::Int;
    std::string name;
    std::string op;
    ExprPtr a, b, c;
    std::vector<ExprPtr> args;
    TypePtr cast_type; // Cast

    TypePtr type; // set by the typechecker
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    enum class K : std::uint8_t { Decl, Assign, If, While, For, Return, Block, ExprStmt } k;
    SourcePos pos;

    // Decl
    TypePtr decl_type;
    std::string name;
    std::string restrict_array; // pointer declarations
    ExprPtr init;               // optional

    // Assign: target = value
    ExprPtr target;
    ExprPtr value;

    // If / While / For
    ExprPtr cond;
    StmtPtr then_body, else_body; // If
    StmtPtr body;                 // While / For
    StmtPtr for_init, for_step;   // For

    // Return
    ExprPtr ret;

    // Block
    std::vector<StmtPtr> stmts;

    // ExprStmt
    ExprPtr expr;
};

struct Param {
    TypePtr type;
    std::string name;
};

struct Function {
    TypePtr ret_type;
    std::string name;
    std::vector<Param> params;
    StmtPtr body; // Block
    SourcePos pos;
};

struct Unit {
    std::string file;
    std::vector<Function> functions;
};

// Pretty-printer; parse(print(parse(s))) is a fixpoint up to token stream.
std::string print_unit(const Unit& unit);

} // namespace fxa
