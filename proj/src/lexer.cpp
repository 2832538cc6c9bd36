#include "fxa/lexer.hpp"

#include <cctype>
#include <set>

namespace fxa {

namespace {

const std::set<std::string> kKeywords = {
    "_Bool", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "struct", "union", "restrict",
    "if", "else", "while", "for", "return", "void",
};

} // namespace

std::vector<Token> tokenize(const std::string& src, const std::string& file) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;

    auto pos_here = [&] { return SourcePos{line, col}; };
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; } else ++col;
        }
    };
    auto error = [&](const std::string& msg) -> void {
        throw FrontendError(file, pos_here(), msg);
    };

    while (i < src.size()) {
        char c = src[i];
        if (isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            advance(2);
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
            if (i + 1 >= src.size()) error("unterminated comment");
            advance(2);
            continue;
        }

        Token t;
        t.pos = pos_here();

        if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.text = src.substr(i, j - i);
            t.k = kKeywords.count(t.text) ? Token::K::Keyword : Token::K::Ident;
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }

        if (isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            bool is_float = false;
            if (src[j] == '0' && j + 1 < src.size() && (src[j + 1] == 'x' || src[j + 1] == 'X')) {
                j += 2;
                while (j < src.size() && isxdigit(static_cast<unsigned char>(src[j]))) ++j;
            } else {
                while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
                if (j < src.size() && src[j] == '.') {
                    is_float = true;
                    ++j;
                    while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
                if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                    is_float = true;
                    ++j;
                    if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                    while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            std::string body = src.substr(i, j - i);
            bool uns = false, lng = false;
            bool fsuf = false;
            while (j < src.size()) {
                char s = src[j];
                if ((s == 'u' || s == 'U') && !is_float) { uns = true; ++j; }
                else if ((s == 'l' || s == 'L') && !is_float) { lng = true; ++j; if (j < src.size() && (src[j] == 'l' || src[j] == 'L')) ++j; }
                else if ((s == 'f' || s == 'F') && is_float) { fsuf = true; ++j; }
                else break;
            }
            if (is_float) {
                t.k = Token::K::FloatLit;
                t.float_value = std::stod(body);
                t.has_long_suffix = !fsuf; // double unless 'f'
            } else {
                t.k = Token::K::IntLit;
                t.int_value = std::stoull(body, nullptr, 0);
                t.has_unsigned_suffix = uns;
                t.has_long_suffix = lng;
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }

        if (c == '\'') {
            if (i + 2 >= src.size()) error("unterminated character literal");
            char v;
            size_t len;
            if (src[i + 1] == '\\') {
                char e = src[i + 2];
                switch (e) {
                    case 'n': v = '\n'; break;
                    case 't': v = '\t'; break;
                    case '0': v = '\0'; break;
                    case '\\': v = '\\'; break;
                    case '\'': v = '\''; break;
                    default: error("unknown escape"); v = 0;
                }
                if (i + 3 >= src.size() || src[i + 3] != '\'') error("unterminated character literal");
                len = 4;
            } else {
                v = src[i + 1];
                if (src[i + 2] != '\'') error("unterminated character literal");
                len = 3;
            }
            t.k = Token::K::CharLit;
            t.int_value = static_cast<unsigned char>(v);
            advance(len);
            out.push_back(std::move(t));
            continue;
        }

        static const char* two_char[] = {"==", "!=", "<=", ">=", "&&", "||"};
        bool matched = false;
        for (const char* p : two_char) {
            if (src.compare(i, 2, p) == 0) {
                t.k = Token::K::Punct;
                t.text = p;
                advance(2);
                out.push_back(std::move(t));
                matched = true;
                break;
            }
        }
        if (matched) continue;

        if (std::string("+-*/%^<>=!(){}[];,.?:&").find(c) != std::string::npos) {
            t.k = Token::K::Punct;
            t.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(t));
            continue;
        }

        error(std::string("stray character '") + c + "'");
    }

    Token end;
    end.k = Token::K::End;
    end.pos = pos_here();
    out.push_back(std::move(end));
    return out;
}

} // namespace fxa
