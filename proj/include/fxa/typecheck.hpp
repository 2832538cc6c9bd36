#pragma once

#include "fxa/ast.hpp"

namespace fxa {

// After typechecking every expression node carries a resolved type and all
// implicit conversions have become explicit Cast nodes. Conditions (if/while/
// for/?:/&&/||/!) are normalised to boolean-typed expressions by inserting
// `!= 0` comparisons where the source used a plain scalar.
struct TypedUnit {
    Unit unit;
    const Function* find(const std::string& name) const;
};

TypedUnit typecheck(Unit unit);
TypedUnit typecheck_source(const std::string& source, const std::string& file = "<input>");

} // namespace fxa
