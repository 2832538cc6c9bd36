#pragma once

#include "fxa/ast.hpp"
#include "fxa/lexer.hpp"

namespace fxa {

// Recursive descent over the token stream. Throws FrontendError with the
// position of the first syntax error.
Unit parse(std::vector<Token> tokens, const std::string& file = "<input>");
Unit parse_source(const std::string& source, const std::string& file = "<input>");

} // namespace fxa
