// Equality checking for expressions, conditions and summaries: structural
// equality after normalization, then bounded exhaustive evaluation over a
// configurable index window with exact rational arithmetic. Free array
// leaves evaluate through a deterministic hash oracle, so two terms agree
// iff they read the same positions of the same arrays and combine them the
// same way. Affine index structure makes the window decisive.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stlift/summary.hpp"

namespace stlift {

struct CheckerConfig {
    int64_t window_lo = -4;
    int64_t window_hi = 8;
    int draws = 16;           // numeric-leaf randomizations per assignment
    uint64_t seed = 1;
    uint64_t budget = 4'000'000;  // assignment * draw evaluations
    int max_index_vars = 6;
};

struct EqualityVerdict {
    enum class Status { Equal, NotEqual, Unknown } status;
    std::string witness;  // NotEqual: assignment under which the sides differ

    bool equal() const { return status == Status::Equal; }
};

namespace checker_detail {

inline uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct EvalEnv {
    const std::map<std::string, int64_t>* index_vals;
    const std::map<std::string, bool>* bool_vals;
    uint64_t draw_seed;

    Rational array_value(const std::string& name, const std::vector<int64_t>& idx) const {
        uint64_t h = draw_seed;
        for (char c : name) h = splitmix(h ^ static_cast<uint64_t>(c));
        for (int64_t i : idx) h = splitmix(h ^ static_cast<uint64_t>(i + 0x7fffffff));
        // small exact rationals: numerator in [-64, 64), denominator in {1,2,4}
        int64_t num = static_cast<int64_t>(h % 128) - 64;
        int64_t den = 1ll << (splitmix(h) % 3);
        return Rational(num, den);
    }
    Rational num_value(const std::string& name) const {
        uint64_t h = splitmix(draw_seed ^ 0x5151);
        for (char c : name) h = splitmix(h ^ static_cast<uint64_t>(c));
        return Rational(static_cast<int64_t>(h % 128) - 64, 1ll << (splitmix(h) % 3));
    }
};

struct EvalFailure {};  // non-integer mod, symbolic division by zero, ...

inline Rational eval_expr(const sym::ExprPtr& e, const EvalEnv& env);

inline int64_t eval_int(const sym::ExprPtr& e, const EvalEnv& env) {
    Rational r = eval_expr(e, env);
    if (!r.is_integer()) throw EvalFailure{};
    return r.num();
}

inline Rational eval_expr(const sym::ExprPtr& e, const EvalEnv& env) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
        return e->value;
    case ExprKind::Sym: {
        auto it = env.index_vals->find(e->name);
        if (it != env.index_vals->end()) return Rational(it->second);
        return env.num_value(e->name);
    }
    case ExprKind::Sum: {
        Rational acc = e->konst;
        for (const auto& t : e->terms) acc = acc + t.coeff * eval_expr(t.term, env);
        return acc;
    }
    case ExprKind::Mul: {
        Rational acc(1);
        for (const auto& f : e->args) acc = acc * eval_expr(f, env);
        return acc;
    }
    case ExprKind::Div: {
        Rational d = eval_expr(e->args[1], env);
        if (d.is_zero()) throw EvalFailure{};
        return eval_expr(e->args[0], env) / d;
    }
    case ExprKind::Mod: {
        int64_t a = eval_int(e->args[0], env);
        int64_t b = eval_int(e->args[1], env);
        if (b == 0) throw EvalFailure{};
        int64_t m = a % b;
        if (m < 0) m += b > 0 ? b : -b;  // canonical nonnegative residue
        return Rational(m);
    }
    case ExprKind::Get: {
        std::vector<int64_t> idx;
        idx.reserve(e->args.size());
        for (const auto& a : e->args) idx.push_back(eval_int(a, env));
        return env.array_value(e->name, idx);
    }
    }
    throw EvalFailure{};
}

inline bool eval_cond(const CondPtr& c, const EvalEnv& env) {
    using sym::CondKind;
    switch (c->kind) {
    case CondKind::True: return true;
    case CondKind::False: return false;
    case CondKind::Cmp: {
        Rational d = eval_expr(c->diff, env);
        switch (c->cmp) {
        case sym::CmpKind::Eq: return d.is_zero();
        case sym::CmpKind::Ne: return !d.is_zero();
        case sym::CmpKind::Le: return d.sign() <= 0;
        }
        return false;
    }
    case CondKind::And:
        for (const auto& a : c->args)
            if (!eval_cond(a, env)) return false;
        return true;
    case CondKind::Or:
        for (const auto& a : c->args)
            if (eval_cond(a, env)) return true;
        return false;
    case CondKind::BoolSym: {
        auto it = env.bool_vals->find(c->name);
        return it != env.bool_vals->end() && it->second;
    }
    case CondKind::NotSym: {
        auto it = env.bool_vals->find(c->name);
        return !(it != env.bool_vals->end() && it->second);
    }
    }
    return false;
}

inline Rational eval_summary(const Summary& s, const EvalEnv& env) {
    for (const auto& b : s.branches)
        if (eval_cond(branch_cond(b), env)) return eval_expr(b.value, env);
    return eval_expr(s.def, env);
}

struct Term {
    enum class Kind { Expr, Cond, Summary } kind;
    sym::ExprPtr expr;
    CondPtr cond;
    const Summary* summary = nullptr;
};

inline void collect_term_vars(const Term& t, FreeVars& fv, std::vector<int64_t>& consts) {
    switch (t.kind) {
    case Term::Kind::Expr: {
        sym::collect_syms(t.expr, fv.index_syms);
        sym::collect_arrays(t.expr, fv.arrays);
        sym::collect_int_consts(t.expr, consts);
        break;
    }
    case Term::Kind::Cond: {
        sym::cond_collect_syms(t.cond, fv.index_syms);
        sym::cond_collect_int_consts(t.cond, consts);
        std::function<void(const CondPtr&)> bools = [&](const CondPtr& k) {
            if (k->kind == sym::CondKind::BoolSym || k->kind == sym::CondKind::NotSym)
                fv.bool_syms[k->name] = 1;
            for (const auto& a : k->args) bools(a);
        };
        bools(t.cond);
        break;
    }
    case Term::Kind::Summary: {
        FreeVars sfv;
        collect_free(*t.summary, sfv);
        for (const auto& [k, v] : sfv.index_syms) fv.index_syms[k] = v;
        for (const auto& [k, v] : sfv.arrays) fv.arrays[k] = v;
        for (const auto& [k, v] : sfv.bool_syms) fv.bool_syms[k] = v;
        // position vars are compared pointwise: quantify over them
        for (int d = 0; d < t.summary->rank; ++d) fv.index_syms[pos_var_name(d)] = 1;
        for (const auto& b : t.summary->branches) {
            sym::cond_collect_int_consts(branch_cond(b), consts);
            sym::collect_int_consts(b.value, consts);
        }
        sym::collect_int_consts(t.summary->def, consts);
        break;
    }
    }
}

inline bool term_affine(const Term& t) {
    switch (t.kind) {
    case Term::Kind::Expr: return sym::index_structure_affine(t.expr);
    case Term::Kind::Cond: return sym::cond_index_structure_affine(t.cond);
    case Term::Kind::Summary: {
        for (const auto& b : t.summary->branches) {
            if (!sym::cond_index_structure_affine(branch_cond(b))) return false;
            if (!sym::index_structure_affine(b.value)) return false;
        }
        return sym::index_structure_affine(t.summary->def);
    }
    }
    return false;
}

inline bool structurally_equal(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Term::Kind::Expr: return sym::expr_eq(sym::normalize(a.expr), sym::normalize(b.expr));
    case Term::Kind::Cond: return sym::cond_eq(sym::cond_normalize(a.cond), sym::cond_normalize(b.cond));
    case Term::Kind::Summary: {
        Summary x = *a.summary;
        Summary y = *b.summary;
        drop_false_branches(x);
        drop_false_branches(y);
        sort_branches(x);
        sort_branches(y);
        return summary_struct_eq(x, y);
    }
    }
    return false;
}

struct SampleValue {
    bool is_bool = false;
    bool b = false;
    bool failed = false;
    Rational r;
};

inline SampleValue eval_term(const Term& t, const EvalEnv& env) {
    SampleValue v;
    try {
        switch (t.kind) {
        case Term::Kind::Expr: v.r = eval_expr(t.expr, env); break;
        case Term::Kind::Cond:
            v.is_bool = true;
            v.b = eval_cond(t.cond, env);
            break;
        case Term::Kind::Summary: v.r = eval_summary(*t.summary, env); break;
        }
    } catch (const EvalFailure&) {
        v.failed = true;
    }
    return v;
}

inline EqualityVerdict prove_equal_terms(const Term& a, const Term& b, const CheckerConfig& cfg) {
    if (structurally_equal(a, b)) return {EqualityVerdict::Status::Equal, ""};

    FreeVars fv;
    std::vector<int64_t> consts;
    collect_term_vars(a, fv, consts);
    collect_term_vars(b, fv, consts);

    // widen the window to cover the constants appearing in the terms
    int64_t lo = cfg.window_lo, hi = cfg.window_hi;
    for (int64_t c : consts) {
        if (c < lo && c > -64) lo = c - 2;
        if (c > hi && c < 64) hi = c + 2;
    }

    std::vector<std::string> ivars;
    for (const auto& [name, _] : fv.index_syms) ivars.push_back(name);
    std::vector<std::string> bvars;
    for (const auto& [name, _] : fv.bool_syms) bvars.push_back(name);

    if (static_cast<int>(ivars.size()) > cfg.max_index_vars)
        throw Error(ErrorCode::DomainTooLarge,
                    std::to_string(ivars.size()) + " free index variables exceed the exhaustion limit");

    uint64_t width = static_cast<uint64_t>(hi - lo + 1);
    uint64_t points = 1;
    for (size_t i = 0; i < ivars.size(); ++i) {
        points *= width;
        if (points > cfg.budget)
            throw Error(ErrorCode::DomainTooLarge, "index window exceeds the exhaustion budget");
    }
    uint64_t bool_cases = bvars.size() > 3 ? 8 : (1ull << bvars.size());
    int draws = fv.arrays.empty() ? 1 : cfg.draws;  // draws only rerandomize array leaves
    uint64_t total = points * bool_cases * static_cast<uint64_t>(draws);
    if (total > cfg.budget)
        throw Error(ErrorCode::DomainTooLarge, "exhaustion budget exceeded");

    bool affine = term_affine(a) && term_affine(b);

    std::map<std::string, int64_t> ivals;
    std::map<std::string, bool> bvals;
    bool any_success = false;

    for (uint64_t p = 0; p < points; ++p) {
        uint64_t rem = p;
        for (size_t i = 0; i < ivars.size(); ++i) {
            ivals[ivars[i]] = lo + static_cast<int64_t>(rem % width);
            rem /= width;
        }
        for (uint64_t bc = 0; bc < bool_cases; ++bc) {
            for (size_t i = 0; i < bvars.size(); ++i) bvals[bvars[i]] = (bc >> i) & 1;
            for (int d = 0; d < draws; ++d) {
                EvalEnv env{&ivals, &bvals, splitmix(cfg.seed ^ (0xABCDull + d))};
                SampleValue va = eval_term(a, env);
                SampleValue vb = eval_term(b, env);
                if (va.failed || vb.failed) {
                    if (va.failed != vb.failed) {
                        // one side undefined where the other is defined
                        std::string w;
                        for (const auto& [k, v] : ivals) w += k + "=" + std::to_string(v) + " ";
                        return {EqualityVerdict::Status::NotEqual, w + "(partiality)"};
                    }
                    continue;
                }
                any_success = true;
                bool same = va.is_bool ? (vb.is_bool && va.b == vb.b)
                                       : (!vb.is_bool && va.r == vb.r);
                if (!same) {
                    std::string w;
                    for (const auto& [k, v] : ivals) w += k + "=" + std::to_string(v) + " ";
                    for (const auto& [k, v] : bvals) w += k + "=" + (v ? "true " : "false ");
                    return {EqualityVerdict::Status::NotEqual, w};
                }
            }
        }
    }

    if (!any_success) return {EqualityVerdict::Status::Unknown, ""};
    if (!affine) return {EqualityVerdict::Status::Unknown, ""};
    return {EqualityVerdict::Status::Equal, ""};
}

}  // namespace checker_detail

inline EqualityVerdict prove_equal(const sym::ExprPtr& a, const sym::ExprPtr& b,
                                   const CheckerConfig& cfg = {}) {
    checker_detail::Term ta{checker_detail::Term::Kind::Expr, a, nullptr, nullptr};
    checker_detail::Term tb{checker_detail::Term::Kind::Expr, b, nullptr, nullptr};
    return checker_detail::prove_equal_terms(ta, tb, cfg);
}

inline EqualityVerdict prove_equal(const CondPtr& a, const CondPtr& b, const CheckerConfig& cfg = {}) {
    checker_detail::Term ta{checker_detail::Term::Kind::Cond, nullptr, a, nullptr};
    checker_detail::Term tb{checker_detail::Term::Kind::Cond, nullptr, b, nullptr};
    return checker_detail::prove_equal_terms(ta, tb, cfg);
}

inline EqualityVerdict prove_equal(const Summary& a, const Summary& b, const CheckerConfig& cfg = {}) {
    if (a.rank != b.rank) return {EqualityVerdict::Status::NotEqual, "subject ranks differ"};
    checker_detail::Term ta{checker_detail::Term::Kind::Summary, nullptr, nullptr, &a};
    checker_detail::Term tb{checker_detail::Term::Kind::Summary, nullptr, nullptr, &b};
    return checker_detail::prove_equal_terms(ta, tb, cfg);
}

}  // namespace stlift
