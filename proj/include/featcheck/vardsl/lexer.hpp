#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "featcheck/errors.hpp"

namespace featcheck::vardsl {

enum class Tok : std::uint8_t {
    Ident,
    Int,
    Number,  // decimal literal, e.g. 0.15
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    Prime,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    DotDot,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Not,
    Amp,
    Pipe,
    Implies,
    Iff,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
};

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto push = [&](Tok k, std::string text, int l, int c) { out.push_back({k, std::move(text), l, c}); };

    while (i < src.size()) {
        char ch = src[i];
        if (ch == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++col;
            ++i;
            continue;
        }
        if (ch == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        int l = line, c = col;
        auto advance = [&](std::size_t k) {
            i += k;
            col += static_cast<int>(k);
        };

        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            push(Tok::Ident, std::string(src.substr(i, j - i)), l, c);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            bool decimal = false;
            if (j < src.size() && src[j] == '.' && j + 1 < src.size() && src[j + 1] != '.') {
                decimal = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            push(decimal ? Tok::Number : Tok::Int, std::string(src.substr(i, j - i)), l, c);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        switch (ch) {
            case '{': push(Tok::LBrace, "{", l, c); advance(1); continue;
            case '}': push(Tok::RBrace, "}", l, c); advance(1); continue;
            case '[': push(Tok::LBrack, "[", l, c); advance(1); continue;
            case ']': push(Tok::RBrack, "]", l, c); advance(1); continue;
            case '(': push(Tok::LParen, "(", l, c); advance(1); continue;
            case ')': push(Tok::RParen, ")", l, c); advance(1); continue;
            case ';': push(Tok::Semi, ";", l, c); advance(1); continue;
            case ',': push(Tok::Comma, ",", l, c); advance(1); continue;
            case ':': push(Tok::Colon, ":", l, c); advance(1); continue;
            case '\'': push(Tok::Prime, "'", l, c); advance(1); continue;
            case '+': push(Tok::Plus, "+", l, c); advance(1); continue;
            case '*': push(Tok::Star, "*", l, c); advance(1); continue;
            case '/': push(Tok::Slash, "/", l, c); advance(1); continue;
            case '&': push(Tok::Amp, "&", l, c); advance(1); continue;
            case '|': push(Tok::Pipe, "|", l, c); advance(1); continue;
            case '-':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    push(Tok::Arrow, "->", l, c);
                    advance(2);
                } else {
                    push(Tok::Minus, "-", l, c);
                    advance(1);
                }
                continue;
            case '.':
                if (i + 1 < src.size() && src[i + 1] == '.') {
                    push(Tok::DotDot, "..", l, c);
                    advance(2);
                } else {
                    throw ParseError("stray '.'", l, c);
                }
                continue;
            case '<':
                if (i + 2 < src.size() && src[i + 1] == '=' && src[i + 2] == '>') {
                    push(Tok::Iff, "<=>", l, c);
                    advance(3);
                } else if (i + 1 < src.size() && src[i + 1] == '=') {
                    push(Tok::Le, "<=", l, c);
                    advance(2);
                } else {
                    push(Tok::Lt, "<", l, c);
                    advance(1);
                }
                continue;
            case '>':
                if (i + 1 < src.size() && src[i + 1] == '=') {
                    push(Tok::Ge, ">=", l, c);
                    advance(2);
                } else {
                    push(Tok::Gt, ">", l, c);
                    advance(1);
                }
                continue;
            case '=':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    push(Tok::Implies, "=>", l, c);
                    advance(2);
                } else {
                    push(Tok::Eq, "=", l, c);
                    advance(1);
                }
                continue;
            case '!':
                if (i + 1 < src.size() && src[i + 1] == '=') {
                    push(Tok::Ne, "!=", l, c);
                    advance(2);
                } else {
                    push(Tok::Not, "!", l, c);
                    advance(1);
                }
                continue;
            default: throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
        }
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

} // namespace featcheck::vardsl
