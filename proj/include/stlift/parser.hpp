// Recursive-descent parser for the kernel subset grammar (docs/grammar.md),
// plus the declaration/scope validation that makes a KernelAst well-formed:
// every identifier declared, affine subscripts, one outermost loop.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stlift/ast.hpp"
#include "stlift/lexer.hpp"

namespace stlift {

class Parser {
public:
    explicit Parser(const std::string& source, std::string kernel_name = "kernel")
        : lexer_(source), toks_(lexer_.tokens()), name_(std::move(kernel_name)) {}

    ast::KernelAst parse() {
        ast::KernelAst k;
        k.name = name_;
        skip_newlines();
        while (at_keyword("param") || at_keyword("array")) {
            if (at_keyword("param")) parse_param(k);
            else parse_array(k);
            skip_newlines();
        }
        std::vector<std::string> pending = take_directives();
        if (!at_keyword("do"))
            throw err_expected("'do'");
        k.top = parse_loop();
        k.top->directives = pending;
        skip_newlines();
        if (!at(TokKind::Eof))
            throw err_expected("end of file after outermost loop");
        validate(k);
        return k;
    }

private:
    Lexer lexer_;
    const std::vector<Token>& toks_;
    std::string name_;
    size_t cur_ = 0;

    const Token& tok(size_t off = 0) const {
        size_t i = cur_ + off;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(TokKind k) const { return tok().kind == k; }
    bool at_keyword(const char* kw) const { return at(TokKind::Ident) && tok().text == kw; }
    const Token& eat() { return toks_[cur_++]; }

    const Token& expect(TokKind k, const char* what) {
        if (!at(k)) throw err_expected(what);
        return eat();
    }
    void expect_keyword(const char* kw) {
        if (!at_keyword(kw)) throw err_expected(("'" + std::string(kw) + "'").c_str());
        eat();
    }

    Error err_expected(const char* what) const {
        const Token& t = tok();
        return Error(ErrorCode::SyntaxError,
                     std::string("expected ") + what + ", found " + tok_kind_name(t.kind) +
                         (t.kind == TokKind::Ident ? " '" + t.text + "'" : ""),
                     t.span);
    }

    void skip_newlines() {
        while (at(TokKind::Newline)) eat();
    }
    void end_of_stmt() {
        if (at(TokKind::Eof)) return;
        expect(TokKind::Newline, "end of line");
        skip_newlines();
    }

    std::vector<std::string> take_directives() {
        std::vector<std::string> out;
        while (at(TokKind::Directive)) {
            out.push_back(eat().text);
            skip_newlines();
        }
        return out;
    }

    ast::ElemKind parse_elem_kind() {
        if (at_keyword("int")) { eat(); return ast::ElemKind::Int; }
        if (at_keyword("float")) { eat(); return ast::ElemKind::Float; }
        throw err_expected("'int' or 'float'");
    }

    void parse_param(ast::KernelAst& k) {
        Span sp = tok().span;
        eat();  // param
        std::string nm = expect(TokKind::Ident, "parameter name").text;
        expect(TokKind::Colon, "':'");
        ast::ElemKind kind = parse_elem_kind();
        k.params.push_back({nm, kind, sp});
        end_of_stmt();
    }

    void parse_array(ast::KernelAst& k) {
        Span sp = tok().span;
        eat();  // array
        std::string nm = expect(TokKind::Ident, "array name").text;
        expect(TokKind::Colon, "':'");
        ast::ElemKind kind = parse_elem_kind();
        expect(TokKind::LParen, "'('");
        std::vector<ast::ExprPtr> extents;
        extents.push_back(parse_expr());
        while (at(TokKind::Comma)) { eat(); extents.push_back(parse_expr()); }
        expect(TokKind::RParen, "')'");
        k.arrays.push_back({nm, kind, std::move(extents), sp});
        end_of_stmt();
    }

    ast::LoopPtr parse_loop() {
        Span sp = tok().span;
        eat();  // do
        if (at_keyword("while"))
            throw Error(ErrorCode::UnsupportedConstruct, "while-loops are not supported", tok().span);
        auto loop = std::make_shared<ast::LoopNode>();
        loop->span = sp;
        loop->index = expect(TokKind::Ident, "loop index").text;
        expect(TokKind::Assign, "'='");
        loop->init = parse_expr();
        expect(TokKind::Comma, "','");
        loop->bound = parse_expr();
        if (at(TokKind::Comma)) {
            eat();
            ast::ExprPtr step = parse_expr();
            std::optional<int64_t> v = fold_int(step);
            if (!v || *v == 0)
                throw Error(ErrorCode::SyntaxError, "loop step must be a nonzero integer constant",
                            step->span);
            loop->step = *v;
        }
        end_of_stmt();
        loop->body = parse_stmts("do");
        expect_keyword("end");
        expect_keyword("do");
        if (!at(TokKind::Eof)) end_of_stmt();
        return loop;
    }

    // Parses until the matching "end <opener>" / "else" boundary.
    std::vector<ast::StmtPtr> parse_stmts(const char* opener) {
        std::vector<ast::StmtPtr> out;
        skip_newlines();
        for (;;) {
            std::vector<std::string> pending = take_directives();
            if (at_keyword("end") || at_keyword("else")) {
                if (!pending.empty())
                    throw Error(ErrorCode::SyntaxError, "dangling directive", tok().span);
                return out;
            }
            if (at(TokKind::Eof))
                throw Error(ErrorCode::SyntaxError,
                            std::string("missing 'end ") + opener + "' before end of file", tok().span);
            if (at_keyword("do")) {
                auto loop = parse_loop();
                loop->directives = pending;
                auto s = std::make_shared<ast::Stmt>();
                s->span = loop->span;
                s->node = loop;
                out.push_back(s);
                skip_newlines();
                continue;
            }
            if (!pending.empty())
                throw Error(ErrorCode::SyntaxError, "directive must precede a loop", tok().span);
            if (at_keyword("if")) {
                out.push_back(parse_if());
                skip_newlines();
                continue;
            }
            out.push_back(parse_assign());
            skip_newlines();
        }
    }

    ast::StmtPtr parse_if() {
        Span sp = tok().span;
        ast::IfBlock blk;
        bool first = true;
        for (;;) {
            if (first) expect_keyword("if");
            first = false;
            expect(TokKind::LParen, "'('");
            ast::CondPtr c = parse_cond();
            expect(TokKind::RParen, "')'");
            expect_keyword("then");
            end_of_stmt();
            blk.arms.push_back({c, parse_stmts("if")});
            if (at_keyword("else")) {
                eat();
                if (at_keyword("if")) { eat(); continue; }
                end_of_stmt();
                blk.else_body = parse_stmts("if");
            }
            break;
        }
        expect_keyword("end");
        expect_keyword("if");
        end_of_stmt();
        auto s = std::make_shared<ast::Stmt>();
        s->span = sp;
        s->node = std::move(blk);
        return s;
    }

    ast::StmtPtr parse_assign() {
        Span sp = tok().span;
        ast::ExprPtr lhs = parse_primary();
        if (lhs->kind != ast::Expr::Kind::Var && lhs->kind != ast::Expr::Kind::ArrayRef)
            throw Error(ErrorCode::SyntaxError, "assignment target must be a variable or array element", sp);
        expect(TokKind::Assign, "'='");
        ast::ExprPtr rhs = parse_expr();
        end_of_stmt();
        auto s = std::make_shared<ast::Stmt>();
        s->span = sp;
        s->node = ast::Assign{lhs, rhs};
        return s;
    }

    // expression grammar: expr := term {(+|-) term}; term := factor {(*|/|%) factor}
    ast::ExprPtr parse_expr() {
        Span sp = tok().span;
        bool neg = false;
        if (at(TokKind::Minus)) { eat(); neg = true; }
        else if (at(TokKind::Plus)) eat();
        ast::ExprPtr e = parse_term();
        if (neg) e = ast::Expr::make_neg(e, sp);
        while (at(TokKind::Plus) || at(TokKind::Minus)) {
            ast::BinOp op = at(TokKind::Plus) ? ast::BinOp::Add : ast::BinOp::Sub;
            Span osp = eat().span;
            e = ast::Expr::make_binary(op, e, parse_term(), osp);
        }
        return e;
    }

    ast::ExprPtr parse_term() {
        ast::ExprPtr e = parse_factor();
        while (at(TokKind::Star) || at(TokKind::Slash) || at(TokKind::Percent)) {
            ast::BinOp op = at(TokKind::Star) ? ast::BinOp::Mul
                          : at(TokKind::Slash) ? ast::BinOp::Div : ast::BinOp::Mod;
            Span osp = eat().span;
            e = ast::Expr::make_binary(op, e, parse_factor(), osp);
        }
        return e;
    }

    ast::ExprPtr parse_factor() {
        if (at(TokKind::Minus)) {
            Span sp = eat().span;
            return ast::Expr::make_neg(parse_factor(), sp);
        }
        return parse_primary();
    }

    ast::ExprPtr parse_primary() {
        const Token& t = tok();
        if (t.kind == TokKind::Number) {
            eat();
            return ast::Expr::make_number(Rational::from_decimal(t.text), t.span);
        }
        if (t.kind == TokKind::Ident) {
            eat();
            if (at(TokKind::LParen)) {
                eat();
                std::vector<ast::ExprPtr> subs;
                subs.push_back(parse_expr());
                while (at(TokKind::Comma)) { eat(); subs.push_back(parse_expr()); }
                expect(TokKind::RParen, "')'");
                return ast::Expr::make_array_ref(t.text, std::move(subs), t.span);
            }
            return ast::Expr::make_var(t.text, t.span);
        }
        if (t.kind == TokKind::LParen) {
            eat();
            ast::ExprPtr e = parse_expr();
            expect(TokKind::RParen, "')'");
            return e;
        }
        throw err_expected("expression");
    }

    ast::CondPtr parse_cond() { return parse_or(); }

    ast::CondPtr parse_or() {
        ast::CondPtr c = parse_and();
        while (at(TokKind::OrKw)) {
            Span sp = eat().span;
            c = ast::CondExpr::make_or(c, parse_and(), sp);
        }
        return c;
    }
    ast::CondPtr parse_and() {
        ast::CondPtr c = parse_not();
        while (at(TokKind::AndKw)) {
            Span sp = eat().span;
            c = ast::CondExpr::make_and(c, parse_not(), sp);
        }
        return c;
    }
    ast::CondPtr parse_not() {
        if (at(TokKind::NotKw)) {
            Span sp = eat().span;
            return ast::CondExpr::make_not(parse_not(), sp);
        }
        if (at(TokKind::LParen)) {
            // could be a parenthesized condition or the lhs of a comparison
            size_t save = cur_;
            eat();
            try {
                ast::CondPtr c = parse_cond();
                expect(TokKind::RParen, "')'");
                return c;
            } catch (const Error&) {
                cur_ = save;
            }
        }
        return parse_compare();
    }
    ast::CondPtr parse_compare() {
        ast::ExprPtr lhs = parse_expr();
        ast::CmpOp op;
        switch (tok().kind) {
        case TokKind::EqEq: op = ast::CmpOp::Eq; break;
        case TokKind::Ne: op = ast::CmpOp::Ne; break;
        case TokKind::Lt: op = ast::CmpOp::Lt; break;
        case TokKind::Le: op = ast::CmpOp::Le; break;
        case TokKind::Gt: op = ast::CmpOp::Gt; break;
        case TokKind::Ge: op = ast::CmpOp::Ge; break;
        default: throw err_expected("comparison operator");
        }
        Span sp = eat().span;
        return ast::CondExpr::make_compare(op, lhs, parse_expr(), sp);
    }

    static std::optional<int64_t> fold_int(const ast::ExprPtr& e) {
        switch (e->kind) {
        case ast::Expr::Kind::Number:
            return e->number.is_integer() ? std::optional<int64_t>(e->number.num()) : std::nullopt;
        case ast::Expr::Kind::Neg: {
            auto v = fold_int(e->args[0]);
            return v ? std::optional<int64_t>(-*v) : std::nullopt;
        }
        case ast::Expr::Kind::Binary: {
            auto a = fold_int(e->args[0]), b = fold_int(e->args[1]);
            if (!a || !b) return std::nullopt;
            switch (e->op) {
            case ast::BinOp::Add: return *a + *b;
            case ast::BinOp::Sub: return *a - *b;
            case ast::BinOp::Mul: return *a * *b;
            case ast::BinOp::Div: return *b == 0 ? std::nullopt : std::optional<int64_t>(*a / *b);
            case ast::BinOp::Mod: return *b == 0 ? std::nullopt : std::optional<int64_t>(*a % *b);
            }
            return std::nullopt;
        }
        default:
            return std::nullopt;
        }
    }

    // ---- validation ------------------------------------------------------

    struct Scope {
        const ast::KernelAst* kernel;
        std::vector<std::string> loop_indices;   // in scope, outermost first
        std::set<std::string> scalar_temps;      // assigned scalar temporaries

        bool is_index(const std::string& n) const {
            for (const auto& i : loop_indices)
                if (i == n) return true;
            return false;
        }
    };

    // x1, x2, ... are reserved for summary position variables
    static bool reserved_name(const std::string& n) {
        if (n.size() < 2 || n[0] != 'x') return false;
        for (size_t i = 1; i < n.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(n[i]))) return false;
        return true;
    }

    void check_reserved(const std::string& n, Span sp) {
        if (reserved_name(n))
            throw Error(ErrorCode::SyntaxError, "'" + n + "' is a reserved name", sp);
    }

    void validate(const ast::KernelAst& k) {
        std::set<std::string> names;
        for (const auto& p : k.params) {
            check_reserved(p.name, p.span);
            if (!names.insert(p.name).second)
                throw Error(ErrorCode::SyntaxError, "duplicate declaration of '" + p.name + "'", p.span);
        }
        for (const auto& a : k.arrays) {
            check_reserved(a.name, a.span);
            if (!names.insert(a.name).second)
                throw Error(ErrorCode::SyntaxError, "duplicate declaration of '" + a.name + "'", a.span);
            for (const auto& ext : a.extents)
                check_affine(ext, Scope{&k, {}, {}}, "array extent");
        }
        Scope sc{&k, {}, {}};
        validate_loop(*k.top, sc);
    }

    void validate_loop(const ast::LoopNode& loop, Scope sc) {
        check_reserved(loop.index, loop.span);
        for (const auto& idx : sc.loop_indices)
            if (idx == loop.index)
                throw Error(ErrorCode::SyntaxError, "loop index '" + loop.index + "' shadows an enclosing index",
                            loop.span);
        if (sc.kernel->find_array(loop.index) || sc.kernel->find_param(loop.index))
            throw Error(ErrorCode::SyntaxError, "loop index '" + loop.index + "' shadows a declaration", loop.span);
        // bounds reference only enclosing indices and int params
        check_affine(loop.init, sc, "loop bound");
        check_affine(loop.bound, sc, "loop bound");
        sc.loop_indices.push_back(loop.index);
        validate_stmts(loop.body, sc);
    }

    void validate_stmts(const std::vector<ast::StmtPtr>& body, Scope& sc) {
        for (const auto& s : body) {
            if (auto* a = std::get_if<ast::Assign>(&s->node)) {
                validate_expr(a->rhs, sc);
                if (a->lhs->kind == ast::Expr::Kind::ArrayRef) {
                    validate_array_ref(a->lhs, sc);
                } else {
                    const std::string& n = a->lhs->name;
                    if (sc.is_index(n))
                        throw Error(ErrorCode::UnsupportedConstruct,
                                    "assignment to loop index '" + n + "'", a->lhs->span);
                    if (sc.kernel->find_array(n))
                        throw Error(ErrorCode::SyntaxError,
                                    "assignment to whole array '" + n + "'", a->lhs->span);
                    if (sc.kernel->find_param(n))
                        throw Error(ErrorCode::UnsupportedConstruct,
                                    "assignment to parameter '" + n + "'", a->lhs->span);
                    check_reserved(n, a->lhs->span);
                    sc.scalar_temps.insert(n);
                }
            } else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
                for (const auto& arm : f->arms) {
                    validate_cond(arm.cond, sc);
                    validate_stmts(arm.body, sc);
                }
                validate_stmts(f->else_body, sc);
            } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
                validate_loop(**lp, sc);
            }
        }
    }

    void validate_cond(const ast::CondPtr& c, const Scope& sc) {
        if (c->kind == ast::CondExpr::Kind::Compare) {
            validate_expr(c->lhs, sc);
            validate_expr(c->rhs, sc);
            return;
        }
        for (const auto& a : c->args) validate_cond(a, sc);
    }

    void validate_expr(const ast::ExprPtr& e, const Scope& sc) {
        switch (e->kind) {
        case ast::Expr::Kind::Number: return;
        case ast::Expr::Kind::Var: {
            const std::string& n = e->name;
            if (sc.is_index(n) || sc.kernel->find_param(n) || sc.scalar_temps.count(n)) return;
            if (sc.kernel->find_array(n))
                throw Error(ErrorCode::SyntaxError, "array '" + n + "' used without subscripts", e->span);
            throw Error(ErrorCode::UndeclaredIdentifier, "'" + n + "' is not declared", e->span);
        }
        case ast::Expr::Kind::ArrayRef:
            validate_array_ref(e, sc);
            return;
        case ast::Expr::Kind::Binary:
            validate_expr(e->args[0], sc);
            validate_expr(e->args[1], sc);
            return;
        case ast::Expr::Kind::Neg:
            validate_expr(e->args[0], sc);
            return;
        }
    }

    void validate_array_ref(const ast::ExprPtr& e, const Scope& sc) {
        const ast::ArrayDecl* decl = sc.kernel->find_array(e->name);
        if (!decl) {
            if (sc.kernel->find_param(e->name) || sc.is_index(e->name) || sc.scalar_temps.count(e->name))
                throw Error(ErrorCode::SyntaxError, "'" + e->name + "' is not an array", e->span);
            throw Error(ErrorCode::UndeclaredIdentifier, "array '" + e->name + "' is not declared", e->span);
        }
        if (static_cast<int>(e->args.size()) != decl->rank())
            throw Error(ErrorCode::SyntaxError,
                        "array '" + e->name + "' has rank " + std::to_string(decl->rank()) +
                            ", got " + std::to_string(e->args.size()) + " subscripts",
                        e->span);
        for (const auto& sub : e->args) {
            validate_expr(sub, sc);
            if (!is_affine(sub, sc))
                throw Error(ErrorCode::UnsupportedConstruct,
                            "non-affine subscript in '" + ast::expr_text(e) + "'", sub->span);
        }
    }

    // affine in loop indices and int params; scalar temps are not allowed
    // inside subscripts or bounds
    bool is_affine(const ast::ExprPtr& e, const Scope& sc, bool linear_ok = true) const {
        switch (e->kind) {
        case ast::Expr::Kind::Number: return true;
        case ast::Expr::Kind::Var:
            return linear_ok && (sc.is_index(e->name) ||
                                 (sc.kernel->find_param(e->name) &&
                                  sc.kernel->find_param(e->name)->kind == ast::ElemKind::Int));
        case ast::Expr::Kind::ArrayRef: return false;
        case ast::Expr::Kind::Neg: return is_affine(e->args[0], sc, linear_ok);
        case ast::Expr::Kind::Binary:
            switch (e->op) {
            case ast::BinOp::Add:
            case ast::BinOp::Sub:
                return is_affine(e->args[0], sc, linear_ok) && is_affine(e->args[1], sc, linear_ok);
            case ast::BinOp::Mul: {
                bool lc = is_affine(e->args[0], sc, false);  // constant?
                bool rc = is_affine(e->args[1], sc, false);
                if (lc && rc) return true;
                if (lc) return is_affine(e->args[1], sc, linear_ok);
                if (rc) return is_affine(e->args[0], sc, linear_ok);
                return false;
            }
            case ast::BinOp::Div:
            case ast::BinOp::Mod:
                // constant rhs over affine lhs stays implementable only for
                // constant lhs; be conservative: both sides constant
                return is_affine(e->args[0], sc, false) && is_affine(e->args[1], sc, false);
            }
        }
        return false;
    }

    void check_affine(const ast::ExprPtr& e, const Scope& sc, const char* what) {
        if (!is_affine(e, sc))
            throw Error(ErrorCode::UnsupportedConstruct,
                        std::string(what) + " must be affine in loop indices and int parameters: '" +
                            ast::expr_text(e) + "'",
                        e->span);
    }
};

inline ast::KernelAst parse_kernel(const std::string& source, std::string kernel_name = "kernel") {
    return Parser(source, std::move(kernel_name)).parse();
}

}  // namespace stlift
