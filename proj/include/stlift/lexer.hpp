// Tokenizer for .st kernel files. `!` starts a comment except `!$`,
// which is a parallelization directive kept as a token of its own.
#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "stlift/diag.hpp"

namespace stlift {

enum class TokKind {
    Ident,
    Number,      // integer or decimal literal
    Directive,   // whole "!$..." line
    Newline,
    LParen, RParen, Comma, Colon,
    Assign,      // =
    Plus, Minus, Star, Slash, Percent,
    EqEq, Ne, Lt, Le, Gt, Ge,
    AndKw, OrKw, NotKw,
    Eof,
};

struct Token {
    TokKind kind;
    std::string text;
    Span span;
};

inline const char* tok_kind_name(TokKind k) {
    switch (k) {
    case TokKind::Ident: return "identifier";
    case TokKind::Number: return "number";
    case TokKind::Directive: return "directive";
    case TokKind::Newline: return "end of line";
    case TokKind::LParen: return "'('";
    case TokKind::RParen: return "')'";
    case TokKind::Comma: return "','";
    case TokKind::Colon: return "':'";
    case TokKind::Assign: return "'='";
    case TokKind::Plus: return "'+'";
    case TokKind::Minus: return "'-'";
    case TokKind::Star: return "'*'";
    case TokKind::Slash: return "'/'";
    case TokKind::Percent: return "'%'";
    case TokKind::EqEq: return "'=='";
    case TokKind::Ne: return "'/='";
    case TokKind::Lt: return "'<'";
    case TokKind::Le: return "'<='";
    case TokKind::Gt: return "'>'";
    case TokKind::Ge: return "'>='";
    case TokKind::AndKw: return "'.and.'";
    case TokKind::OrKw: return "'.or.'";
    case TokKind::NotKw: return "'.not.'";
    case TokKind::Eof: return "end of file";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { tokenize(); }

    const std::vector<Token>& tokens() const { return toks_; }

private:
    const std::string& src_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') { ++line_; col_ = 1; }
        else ++col_;
        return c;
    }

    SourcePos here() const { return {line_, col_}; }

    void push(TokKind k, std::string text, SourcePos begin) {
        toks_.push_back({k, std::move(text), Span{begin, here()}});
    }

    void tokenize() {
        while (pos_ < src_.size()) {
            char c = peek();
            SourcePos begin = here();
            if (c == '\n') {
                advance();
                if (!toks_.empty() && toks_.back().kind != TokKind::Newline)
                    push(TokKind::Newline, "\n", begin);
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') { advance(); continue; }
            if (c == '!') {
                if (peek(1) == '$') {
                    std::string text;
                    while (pos_ < src_.size() && peek() != '\n') text += advance();
                    push(TokKind::Directive, text, begin);
                } else {
                    while (pos_ < src_.size() && peek() != '\n') advance();
                }
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string text;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') text += advance();
                push(TokKind::Ident, text, begin);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string text;
                while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
                if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    text += advance();
                    while (std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
                }
                push(TokKind::Number, text, begin);
                continue;
            }
            if (c == '.') {
                // .and. / .or. / .not.
                size_t save = pos_;
                std::string word;
                advance();
                while (std::isalpha(static_cast<unsigned char>(peek()))) word += advance();
                if (peek() == '.') {
                    advance();
                    if (word == "and") { push(TokKind::AndKw, ".and.", begin); continue; }
                    if (word == "or") { push(TokKind::OrKw, ".or.", begin); continue; }
                    if (word == "not") { push(TokKind::NotKw, ".not.", begin); continue; }
                }
                pos_ = save;
                throw Error(ErrorCode::SyntaxError, "unexpected '.'", Span{begin, begin});
            }
            advance();
            switch (c) {
            case '(': push(TokKind::LParen, "(", begin); break;
            case ')': push(TokKind::RParen, ")", begin); break;
            case ',': push(TokKind::Comma, ",", begin); break;
            case ':': push(TokKind::Colon, ":", begin); break;
            case '+': push(TokKind::Plus, "+", begin); break;
            case '-': push(TokKind::Minus, "-", begin); break;
            case '*': push(TokKind::Star, "*", begin); break;
            case '%': push(TokKind::Percent, "%", begin); break;
            case '=':
                if (peek() == '=') { advance(); push(TokKind::EqEq, "==", begin); }
                else push(TokKind::Assign, "=", begin);
                break;
            case '/':
                if (peek() == '=') { advance(); push(TokKind::Ne, "/=", begin); }
                else push(TokKind::Slash, "/", begin);
                break;
            case '<':
                if (peek() == '=') { advance(); push(TokKind::Le, "<=", begin); }
                else push(TokKind::Lt, "<", begin);
                break;
            case '>':
                if (peek() == '=') { advance(); push(TokKind::Ge, ">=", begin); }
                else push(TokKind::Gt, ">", begin);
                break;
            case '&':  // tolerate C-style spellings
                if (peek() == '&') { advance(); push(TokKind::AndKw, "&&", begin); break; }
                [[fallthrough]];
            default:
                throw Error(ErrorCode::SyntaxError,
                            std::string("unexpected character '") + c + "'", Span{begin, begin});
            }
        }
        push(TokKind::Newline, "\n", here());
        push(TokKind::Eof, "", here());
    }
};

}  // namespace stlift
