#pragma once

#include "fxa/ast.hpp"

#include <string>
#include <vector>

namespace fxa {

struct Token {
    enum class K : std::uint8_t { Keyword, Ident, IntLit, FloatLit, CharLit, Punct, End } k;
    std::string text;       // keyword/ident/punct spelling
    std::uint64_t int_value = 0;
    double float_value = 0;
    bool has_unsigned_suffix = false;
    bool has_long_suffix = false;
    SourcePos pos;
};

// Throws FrontendError on lexical errors, with line/column.
std::vector<Token> tokenize(const std::string& source, const std::string& file = "<input>");

} // namespace fxa
