// Frontend passes over a parsed KernelAst: directive stripping and the
// static loop-regularity report.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "stlift/ast.hpp"
#include "stlift/parser.hpp"

namespace stlift {

namespace detail {

inline ast::StmtPtr strip_stmt(const ast::StmtPtr& s);

inline ast::LoopPtr strip_loop(const ast::LoopNode& loop) {
    auto out = std::make_shared<ast::LoopNode>(loop);
    out->directives.clear();
    out->body.clear();
    for (const auto& s : loop.body) out->body.push_back(strip_stmt(s));
    return out;
}

inline ast::StmtPtr strip_stmt(const ast::StmtPtr& s) {
    if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
        auto out = std::make_shared<ast::Stmt>();
        out->span = s->span;
        out->node = strip_loop(**lp);
        return out;
    }
    if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
        ast::IfBlock blk;
        for (const auto& arm : f->arms) {
            ast::IfArm a{arm.cond, {}};
            for (const auto& b : arm.body) a.body.push_back(strip_stmt(b));
            blk.arms.push_back(std::move(a));
        }
        for (const auto& b : f->else_body) blk.else_body.push_back(strip_stmt(b));
        auto out = std::make_shared<ast::Stmt>();
        out->span = s->span;
        out->node = std::move(blk);
        return out;
    }
    return s;  // assignments are immutable and directive-free
}

}  // namespace detail

// Removes parallelization directives everywhere; statement semantics untouched.
inline ast::KernelAst strip_directives(const ast::KernelAst& k) {
    ast::KernelAst out = k;
    out.top = detail::strip_loop(*k.top);
    return out;
}

// ---- regularity ----------------------------------------------------------

enum class Regularity { Regular, Irregular };

struct LevelRegularity {
    int level = 0;                      // 1 = innermost
    std::string index;
    long long atypical_iterations = 0;  // r_k; -1 = not statically countable
    long long deviating_statements = 0; // mu_k
    long long common_statements = 0;    // chi_k
    Regularity verdict = Regularity::Regular;
    std::vector<Span> offending;        // statements that break regularity
};

// Static approximation: a level is regular iff every branch condition in its
// body is an affine comparison over loop indices and int parameters. The
// counts r_k / mu_k are exact only when guards and bounds are constant; the
// verdict never depends on the magnitudes.
struct RegularityReport {
    std::vector<LevelRegularity> levels;  // index 0 = innermost (level 1)

    bool regular() const {
        for (const auto& l : levels)
            if (l.verdict == Regularity::Irregular) return false;
        return true;
    }
    const LevelRegularity* first_irregular() const {
        for (const auto& l : levels)
            if (l.verdict == Regularity::Irregular) return &l;
        return nullptr;
    }
};

namespace detail {

inline bool cond_is_affine_index_compare(const ast::CondPtr& c, const ast::KernelAst& k,
                                         const std::vector<std::string>& indices) {
    auto expr_ok = [&](const ast::ExprPtr& e, auto&& self) -> bool {
        switch (e->kind) {
        case ast::Expr::Kind::Number: return true;
        case ast::Expr::Kind::Var: {
            for (const auto& i : indices)
                if (i == e->name) return true;
            const ast::ParamDecl* p = k.find_param(e->name);
            return p && p->kind == ast::ElemKind::Int;
        }
        case ast::Expr::Kind::ArrayRef: return false;   // data-dependent
        case ast::Expr::Kind::Neg: return self(e->args[0], self);
        case ast::Expr::Kind::Binary:
            return self(e->args[0], self) && self(e->args[1], self);
        }
        return false;
    };
    if (c->kind == ast::CondExpr::Kind::Compare)
        return expr_ok(c->lhs, expr_ok) && expr_ok(c->rhs, expr_ok);
    for (const auto& a : c->args)
        if (!cond_is_affine_index_compare(a, k, indices)) return false;
    return true;
}

inline long long count_stmts(const std::vector<ast::StmtPtr>& body) {
    long long n = 0;
    for (const auto& s : body) {
        if (std::holds_alternative<ast::Assign>(s->node)) ++n;
        else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
            for (const auto& arm : f->arms) n += count_stmts(arm.body);
            n += count_stmts(f->else_body);
        }
        // nested loops count as one statement at this level
        else ++n;
    }
    return n;
}

struct RegularityScan {
    const ast::KernelAst* kernel;
    std::vector<LevelRegularity> levels;  // filled outermost-first, reversed later

    void scan_loop(const ast::LoopNode& loop, std::vector<std::string> indices) {
        indices.push_back(loop.index);
        LevelRegularity lr;
        lr.level = loop.depth();  // innermost loop has depth 1
        lr.index = loop.index;
        scan_body(loop.body, indices, lr, /*under_guard=*/false);
        lr.common_statements = count_stmts(loop.body) - lr.deviating_statements;
        levels.push_back(lr);
        for (const auto& s : loop.body)
            if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) scan_loop(**lp, indices);
    }

    void scan_body(const std::vector<ast::StmtPtr>& body, const std::vector<std::string>& indices,
                   LevelRegularity& lr, bool under_guard) {
        for (const auto& s : body) {
            if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
                bool all_affine = true;
                for (const auto& arm : f->arms)
                    all_affine = all_affine && cond_is_affine_index_compare(arm.cond, *kernel, indices);
                if (!all_affine) {
                    lr.verdict = Regularity::Irregular;
                    lr.atypical_iterations = -1;
                    lr.offending.push_back(s->span);
                }
                for (const auto& arm : f->arms) {
                    long long deviating = count_stmts(arm.body);
                    lr.deviating_statements += deviating;
                    if (all_affine && lr.atypical_iterations >= 0) {
                        long long iters = guard_iteration_count(arm.cond);
                        if (iters < 0) lr.atypical_iterations = -1;
                        else lr.atypical_iterations += iters;
                    }
                    if (all_affine && deviating > 0) lr.offending.push_back(s->span);
                    scan_body(arm.body, indices, lr, true);
                }
                scan_body(f->else_body, indices, lr, under_guard);
            } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
                (void)lp;  // handled by scan_loop recursion
            }
        }
    }

    // How many iterations can satisfy the guard: 1 for a single equality on
    // one index, otherwise unknown (-1). Good enough for boundary guards.
    static long long guard_iteration_count(const ast::CondPtr& c) {
        if (c->kind == ast::CondExpr::Kind::Compare && c->op == ast::CmpOp::Eq) return 1;
        if (c->kind == ast::CondExpr::Kind::And) {
            long long total = 0;
            for (const auto& a : c->args) {
                long long n = guard_iteration_count(a);
                if (n == 1) return 1;  // conjunction with an equality pins one iteration
                total = -1;
            }
            return total;
        }
        return -1;
    }
};

}  // namespace detail

inline RegularityReport analyze_regularity(const ast::KernelAst& k) {
    detail::RegularityScan scan{&k, {}};
    scan.scan_loop(*k.top, {});
    RegularityReport rep;
    rep.levels = std::move(scan.levels);
    std::stable_sort(rep.levels.begin(), rep.levels.end(),
                     [](const LevelRegularity& a, const LevelRegularity& b) { return a.level < b.level; });
    return rep;
}

}  // namespace stlift
