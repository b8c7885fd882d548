// Test-only parser for the canonical summary rendering, used to round-trip
// emitted summaries and to state reference postconditions in tests.
//
// Accepted form (one subject):
//   Name(x1, x2):
//     <cond> -> <expr>
//     otherwise -> <expr>
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "stlift/summary.hpp"

namespace stlift::testsupport {

class SummaryTextParser {
public:
    explicit SummaryTextParser(const std::string& text) : in_(text) {}

    Summary parse() {
        Summary s;
        std::string header;
        while (std::getline(in_, header) && trim(header).empty()) {
        }
        header = trim(header);
        auto paren = header.find('(');
        if (paren == std::string::npos) {
            // scalar subject "name:"
            s.subject = Summary::Subject::Scalar;
        } else {
            s.subject = Summary::Subject::Array;
            s.array = header.substr(0, paren);
            std::string args = header.substr(paren + 1, header.find(')') - paren - 1);
            int rank = args.empty() ? 0 : 1;
            for (char c : args)
                if (c == ',') ++rank;
            s.rank = rank;
        }
        std::string line;
        while (std::getline(in_, line)) {
            line = trim(line);
            if (line.empty()) continue;
            auto arrow = line.find("->");
            if (arrow == std::string::npos) break;
            std::string lhs = trim(line.substr(0, arrow));
            std::string rhs = trim(line.substr(arrow + 2));
            if (lhs == "otherwise") {
                s.def = parse_expr_text(rhs);
            } else {
                Branch b;
                b.guard = parse_cond_text(lhs);
                b.value = parse_expr_text(rhs);
                s.branches.push_back(std::move(b));
            }
        }
        if (!s.def) throw Error(ErrorCode::SyntaxError, "summary text missing 'otherwise' line");
        return s;
    }

private:
    std::istringstream in_;

    static std::string trim(const std::string& t) {
        size_t a = t.find_first_not_of(" \t\r\n");
        size_t b = t.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? "" : t.substr(a, b - a + 1);
    }

    // x1, x2, ... become position variables $1, $2, ...
    static sym::ExprPtr name_to_expr(const std::string& n) {
        if (n.size() >= 2 && n[0] == 'x') {
            bool digits = true;
            for (size_t i = 1; i < n.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(n[i]));
            if (digits) return sym::symbol("$" + n.substr(1));
        }
        return sym::symbol(n);
    }

    struct Tok {
        std::string text;
        bool ident = false;
        bool number = false;
    };

    static std::vector<Tok> lex(const std::string& text) {
        std::vector<Tok> toks;
        size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
                std::string w;
                while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                           text[i] == '_' || text[i] == '$'))
                    w += text[i++];
                toks.push_back({w, true, false});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string w;
                while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'))
                    w += text[i++];
                toks.push_back({w, false, true});
                continue;
            }
            if (c == '.') {
                // .and. / .or. / .not.
                size_t dot = text.find('.', i + 1);
                toks.push_back({text.substr(i, dot - i + 1), false, false});
                i = dot + 1;
                continue;
            }
            static const char* two[] = {"==", "/=", "<=", ">=", nullptr};
            bool matched = false;
            for (int k = 0; two[k]; ++k) {
                if (text.compare(i, 2, two[k]) == 0) {
                    toks.push_back({two[k], false, false});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            toks.push_back({std::string(1, c), false, false});
            ++i;
        }
        toks.push_back({"", false, false});
        return toks;
    }

    struct P {
        std::vector<Tok> toks;
        size_t pos = 0;
        const Tok& t() const { return toks[pos]; }
        bool at(const std::string& s) const { return t().text == s; }
        void eat() { ++pos; }
        void expect(const std::string& s) {
            if (!at(s)) throw Error(ErrorCode::SyntaxError, "summary text: expected '" + s + "'");
            eat();
        }

        sym::ExprPtr expr() {
            sym::ExprPtr e = term();
            while (at("+") || at("-")) {
                bool add = at("+");
                eat();
                e = add ? sym::add(e, term()) : sym::sub(e, term());
            }
            return e;
        }
        sym::ExprPtr term() {
            sym::ExprPtr e = factor();
            while (at("*") || at("/") || at("%")) {
                std::string op = t().text;
                eat();
                sym::ExprPtr r = factor();
                if (op == "*") e = sym::mul(e, r);
                else if (op == "/") e = sym::div(e, r);
                else e = sym::mod(e, r);
            }
            return e;
        }
        sym::ExprPtr factor() {
            if (at("-")) {
                eat();
                return sym::neg(factor());
            }
            if (at("(")) {
                eat();
                sym::ExprPtr e = expr();
                expect(")");
                return e;
            }
            if (t().number) {
                Rational v = Rational::from_decimal(t().text);
                eat();
                return sym::constant(v);
            }
            if (t().ident) {
                std::string name = t().text;
                eat();
                if (at("(")) {
                    eat();
                    std::vector<sym::ExprPtr> idx;
                    idx.push_back(expr());
                    while (at(",")) {
                        eat();
                        idx.push_back(expr());
                    }
                    expect(")");
                    return sym::get(name, std::move(idx));
                }
                return name_to_expr(name);
            }
            throw Error(ErrorCode::SyntaxError, "summary text: expected expression at '" + t().text + "'");
        }

        sym::CondPtr cond() { return cond_or(); }
        sym::CondPtr cond_or() {
            sym::CondPtr c = cond_and();
            while (at(".or.")) {
                eat();
                c = sym::disj({c, cond_and()});
            }
            return c;
        }
        sym::CondPtr cond_and() {
            sym::CondPtr c = cond_not();
            while (at(".and.")) {
                eat();
                c = sym::conj2(c, cond_not());
            }
            return c;
        }
        sym::CondPtr cond_not() {
            if (at(".not.")) {
                eat();
                return sym::negate(cond_not());
            }
            if (at("true")) { eat(); return sym::ctrue(); }
            if (at("false")) { eat(); return sym::cfalse(); }
            if (at("(")) {
                size_t save = pos;
                eat();
                try {
                    sym::CondPtr c = cond();
                    expect(")");
                    return c;
                } catch (const Error&) {
                    pos = save;
                }
            }
            sym::ExprPtr lhs = expr();
            std::string op = t().text;
            eat();
            sym::ExprPtr rhs = expr();
            if (op == "==") return sym::eq(lhs, rhs);
            if (op == "/=") return sym::ne(lhs, rhs);
            if (op == "<=") return sym::le(lhs, rhs);
            if (op == ">=") return sym::ge(lhs, rhs);
            if (op == "<") return sym::lt(lhs, rhs);
            if (op == ">") return sym::gt(lhs, rhs);
            throw Error(ErrorCode::SyntaxError, "summary text: bad comparison '" + op + "'");
        }
    };

    static sym::ExprPtr parse_expr_text(const std::string& text) {
        P p{lex(text)};
        return p.expr();
    }
    static sym::CondPtr parse_cond_text(const std::string& text) {
        P p{lex(text)};
        return p.cond();
    }
};

inline Summary parse_summary_text(const std::string& text) { return SummaryTextParser(text).parse(); }

}  // namespace stlift::testsupport
