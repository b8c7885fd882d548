// Kernel AST for the Fortran-like nested-loop subset: declarations,
// affine expressions, statements, loops, and a printer whose output
// re-parses to a structurally identical tree.
#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "stlift/diag.hpp"
#include "stlift/rational.hpp"

namespace stlift::ast {

enum class ElemKind { Int, Float };

inline const char* elem_kind_name(ElemKind k) { return k == ElemKind::Int ? "int" : "float"; }

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp { Add, Sub, Mul, Div, Mod };

inline const char* bin_op_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    }
    return "?";
}

// Expression node. `Number` holds an exact rational (decimal literals are
// exact); `Var` refers to a loop index, scalar param, or scalar temp;
// `ArrayRef` is an element read. Unary minus is Neg.
struct Expr {
    enum class Kind { Number, Var, ArrayRef, Binary, Neg } kind;
    Span span;

    Rational number;                 // Number
    std::string name;                // Var, ArrayRef
    std::vector<ExprPtr> args;       // ArrayRef subscripts, Binary lhs/rhs, Neg operand
    BinOp op = BinOp::Add;           // Binary

    static ExprPtr make_number(Rational v, Span sp = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Number; e->number = v; e->span = sp;
        return e;
    }
    static ExprPtr make_var(std::string n, Span sp = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Var; e->name = std::move(n); e->span = sp;
        return e;
    }
    static ExprPtr make_array_ref(std::string n, std::vector<ExprPtr> subs, Span sp = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::ArrayRef; e->name = std::move(n); e->args = std::move(subs); e->span = sp;
        return e;
    }
    static ExprPtr make_binary(BinOp o, ExprPtr a, ExprPtr b, Span sp = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Binary; e->op = o; e->args = {std::move(a), std::move(b)}; e->span = sp;
        return e;
    }
    static ExprPtr make_neg(ExprPtr a, Span sp = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Neg; e->args = {std::move(a)}; e->span = sp;
        return e;
    }
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "/=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

struct CondExpr;
using CondPtr = std::shared_ptr<const CondExpr>;

struct CondExpr {
    enum class Kind { Compare, And, Or, Not } kind;
    Span span;

    CmpOp op = CmpOp::Eq;            // Compare
    ExprPtr lhs, rhs;                // Compare
    std::vector<CondPtr> args;       // And/Or (2 operands), Not (1)

    static CondPtr make_compare(CmpOp o, ExprPtr a, ExprPtr b, Span sp = {}) {
        auto c = std::make_shared<CondExpr>();
        c->kind = Kind::Compare; c->op = o; c->lhs = std::move(a); c->rhs = std::move(b); c->span = sp;
        return c;
    }
    static CondPtr make_and(CondPtr a, CondPtr b, Span sp = {}) {
        auto c = std::make_shared<CondExpr>();
        c->kind = Kind::And; c->args = {std::move(a), std::move(b)}; c->span = sp;
        return c;
    }
    static CondPtr make_or(CondPtr a, CondPtr b, Span sp = {}) {
        auto c = std::make_shared<CondExpr>();
        c->kind = Kind::Or; c->args = {std::move(a), std::move(b)}; c->span = sp;
        return c;
    }
    static CondPtr make_not(CondPtr a, Span sp = {}) {
        auto c = std::make_shared<CondExpr>();
        c->kind = Kind::Not; c->args = {std::move(a)}; c->span = sp;
        return c;
    }
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct LoopNode;
using LoopPtr = std::shared_ptr<LoopNode>;

// lhs is a Var (scalar temp) or ArrayRef.
struct Assign {
    ExprPtr lhs;
    ExprPtr rhs;
};

struct IfArm {
    CondPtr cond;
    std::vector<StmtPtr> body;
};

struct IfBlock {
    std::vector<IfArm> arms;           // if / else-if arms, source order
    std::vector<StmtPtr> else_body;    // may be empty
};

struct Stmt {
    std::variant<Assign, IfBlock, LoopPtr> node;
    Span span;
};

struct LoopNode {
    std::string index;
    ExprPtr init;                      // lower bound
    ExprPtr bound;                     // upper bound (inclusive)
    int64_t step = 1;                  // nonzero constant after folding
    std::vector<StmtPtr> body;
    std::vector<std::string> directives;  // e.g. "!$omp parallel do" lines attached to this loop
    Span span;

    int depth() const {
        int d = 0;
        for (const auto& s : body)
            if (auto* lp = std::get_if<LoopPtr>(&s->node)) d = std::max(d, (*lp)->depth());
        return d + 1;
    }
};

struct ArrayDecl {
    std::string name;
    ElemKind kind = ElemKind::Float;
    std::vector<ExprPtr> extents;      // affine in int params and literals
    Span span;

    int rank() const { return static_cast<int>(extents.size()); }
};

struct ParamDecl {
    std::string name;
    ElemKind kind = ElemKind::Int;
    Span span;
};

struct KernelAst {
    std::string name;                  // derived from file stem or "kernel"
    std::vector<ParamDecl> params;
    std::vector<ArrayDecl> arrays;
    LoopPtr top;                       // exactly one outermost loop

    int depth() const { return top ? top->depth() : 0; }

    const ArrayDecl* find_array(const std::string& n) const {
        for (const auto& a : arrays)
            if (a.name == n) return &a;
        return nullptr;
    }
    const ParamDecl* find_param(const std::string& n) const {
        for (const auto& p : params)
            if (p.name == n) return &p;
        return nullptr;
    }
};

// ---- printing ----------------------------------------------------------

inline void print_expr(std::string& out, const ExprPtr& e, int parent_prec = 0);

inline int precedence(BinOp op) {
    switch (op) {
    case BinOp::Add: case BinOp::Sub: return 1;
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 2;
    }
    return 0;
}

inline void print_expr(std::string& out, const ExprPtr& e, int parent_prec) {
    switch (e->kind) {
    case Expr::Kind::Number:
        out += e->number.decimal_str();
        break;
    case Expr::Kind::Var: out += e->name; break;
    case Expr::Kind::ArrayRef: {
        out += e->name; out += "(";
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) out += ", ";
            print_expr(out, e->args[i]);
        }
        out += ")";
        break;
    }
    case Expr::Kind::Binary: {
        int prec = precedence(e->op);
        bool paren = prec < parent_prec;
        if (paren) out += "(";
        print_expr(out, e->args[0], prec);
        out += " "; out += bin_op_text(e->op); out += " ";
        print_expr(out, e->args[1], prec + 1);  // right-assoc guard
        if (paren) out += ")";
        break;
    }
    case Expr::Kind::Neg:
        out += "-";
        print_expr(out, e->args[0], 3);
        break;
    }
}

inline std::string expr_text(const ExprPtr& e) {
    std::string out;
    print_expr(out, e);
    return out;
}

inline void print_cond(std::string& out, const CondPtr& c, int parent_prec = 0) {
    switch (c->kind) {
    case CondExpr::Kind::Compare:
        print_expr(out, c->lhs);
        out += " "; out += cmp_op_text(c->op); out += " ";
        print_expr(out, c->rhs);
        break;
    case CondExpr::Kind::And: {
        bool paren = parent_prec > 2;
        if (paren) out += "(";
        print_cond(out, c->args[0], 2);
        out += " .and. ";
        print_cond(out, c->args[1], 2);
        if (paren) out += ")";
        break;
    }
    case CondExpr::Kind::Or: {
        bool paren = parent_prec > 1;
        if (paren) out += "(";
        print_cond(out, c->args[0], 1);
        out += " .or. ";
        print_cond(out, c->args[1], 1);
        if (paren) out += ")";
        break;
    }
    case CondExpr::Kind::Not:
        out += ".not. (";
        print_cond(out, c->args[0], 0);
        out += ")";
        break;
    }
}

inline std::string cond_text(const CondPtr& c) {
    std::string out;
    print_cond(out, c);
    return out;
}

inline void print_stmts(std::string& out, const std::vector<StmtPtr>& body, int indent);

inline void print_loop(std::string& out, const LoopNode& loop, int indent) {
    std::string pad(indent, ' ');
    for (const auto& d : loop.directives) out += pad + d + "\n";
    out += pad + "do " + loop.index + " = " + expr_text(loop.init) + ", " + expr_text(loop.bound);
    if (loop.step != 1) out += ", " + std::to_string(loop.step);
    out += "\n";
    print_stmts(out, loop.body, indent + 2);
    out += pad + "end do\n";
}

inline void print_stmts(std::string& out, const std::vector<StmtPtr>& body, int indent) {
    std::string pad(indent, ' ');
    for (const auto& s : body) {
        if (auto* a = std::get_if<Assign>(&s->node)) {
            out += pad + expr_text(a->lhs) + " = " + expr_text(a->rhs) + "\n";
        } else if (auto* f = std::get_if<IfBlock>(&s->node)) {
            for (size_t i = 0; i < f->arms.size(); ++i) {
                out += pad + (i == 0 ? "if (" : "else if (") + cond_text(f->arms[i].cond) + ") then\n";
                print_stmts(out, f->arms[i].body, indent + 2);
            }
            if (!f->else_body.empty()) {
                out += pad + "else\n";
                print_stmts(out, f->else_body, indent + 2);
            }
            out += pad + "end if\n";
        } else if (auto* lp = std::get_if<LoopPtr>(&s->node)) {
            print_loop(out, **lp, indent);
        }
    }
}

inline std::string kernel_text(const KernelAst& k) {
    std::string out;
    for (const auto& p : k.params)
        out += "param " + p.name + " : " + elem_kind_name(p.kind) + "\n";
    for (const auto& a : k.arrays) {
        out += "array " + a.name + " : " + std::string(elem_kind_name(a.kind)) + "(";
        for (size_t i = 0; i < a.extents.size(); ++i) {
            if (i) out += ", ";
            out += expr_text(a.extents[i]);
        }
        out += ")\n";
    }
    if (k.top) print_loop(out, *k.top, 0);
    return out;
}

// ---- structural (alpha-insensitive positions, name-sensitive) equality --

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Expr::Kind::Number: return a->number == b->number;
    case Expr::Kind::Var: return a->name == b->name;
    case Expr::Kind::ArrayRef:
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!expr_equal(a->args[i], b->args[i])) return false;
        return true;
    case Expr::Kind::Binary:
        return a->op == b->op && expr_equal(a->args[0], b->args[0]) && expr_equal(a->args[1], b->args[1]);
    case Expr::Kind::Neg:
        return expr_equal(a->args[0], b->args[0]);
    }
    return false;
}

inline bool cond_equal(const CondPtr& a, const CondPtr& b) {
    if (a->kind != b->kind) return false;
    if (a->kind == CondExpr::Kind::Compare)
        return a->op == b->op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!cond_equal(a->args[i], b->args[i])) return false;
    return true;
}

inline bool stmts_equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b);

inline bool loop_equal(const LoopNode& a, const LoopNode& b) {
    return a.index == b.index && expr_equal(a.init, b.init) && expr_equal(a.bound, b.bound) &&
           a.step == b.step && a.directives == b.directives && stmts_equal(a.body, b.body);
}

inline bool stmts_equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const auto& sa = a[i]->node;
        const auto& sb = b[i]->node;
        if (sa.index() != sb.index()) return false;
        if (auto* x = std::get_if<Assign>(&sa)) {
            auto* y = std::get_if<Assign>(&sb);
            if (!expr_equal(x->lhs, y->lhs) || !expr_equal(x->rhs, y->rhs)) return false;
        } else if (auto* x = std::get_if<IfBlock>(&sa)) {
            auto* y = std::get_if<IfBlock>(&sb);
            if (x->arms.size() != y->arms.size()) return false;
            for (size_t j = 0; j < x->arms.size(); ++j)
                if (!cond_equal(x->arms[j].cond, y->arms[j].cond) ||
                    !stmts_equal(x->arms[j].body, y->arms[j].body))
                    return false;
            if (!stmts_equal(x->else_body, y->else_body)) return false;
        } else if (auto* x = std::get_if<LoopPtr>(&sa)) {
            auto* y = std::get_if<LoopPtr>(&sb);
            if (!loop_equal(**x, **y)) return false;
        }
    }
    return true;
}

inline bool kernel_equal(const KernelAst& a, const KernelAst& b) {
    if (a.params.size() != b.params.size() || a.arrays.size() != b.arrays.size()) return false;
    for (size_t i = 0; i < a.params.size(); ++i)
        if (a.params[i].name != b.params[i].name || a.params[i].kind != b.params[i].kind) return false;
    for (size_t i = 0; i < a.arrays.size(); ++i) {
        if (a.arrays[i].name != b.arrays[i].name || a.arrays[i].kind != b.arrays[i].kind ||
            a.arrays[i].extents.size() != b.arrays[i].extents.size())
            return false;
        for (size_t j = 0; j < a.arrays[i].extents.size(); ++j)
            if (!expr_equal(a.arrays[i].extents[j], b.arrays[i].extents[j])) return false;
    }
    return loop_equal(*a.top, *b.top);
}

}  // namespace stlift::ast
