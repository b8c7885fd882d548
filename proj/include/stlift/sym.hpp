// Symbolic expression and condition language for summaries.
//
// Expressions are built through factory functions that keep them in a
// canonical form: sums are flat n-ary nodes with rational coefficients and
// sorted terms, products are flat and sorted with constants folded out,
// comparisons are normalized to {Eq, Ne, Le} against zero, and negation is
// eliminated down to boolean leaves. Affine index expressions therefore
// compare equal iff they are the same function.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stlift/diag.hpp"
#include "stlift/rational.hpp"

namespace stlift::sym {

// ---- expressions ---------------------------------------------------------

enum class ExprKind { Const, Sym, Sum, Mul, Div, Mod, Get };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct SumTerm {
    Rational coeff;
    ExprPtr term;  // non-Sum, non-Const
};

struct Expr {
    ExprKind kind;
    Rational value;                    // Const
    std::string name;                  // Sym, Get (array name)
    std::vector<SumTerm> terms;        // Sum
    Rational konst;                    // Sum constant
    std::vector<ExprPtr> args;         // Mul factors / Div (2) / Mod (2) / Get indices
    size_t hash = 0;
};

// total order on expressions; 0 = equal
inline int expr_cmp(const ExprPtr& a, const ExprPtr& b);

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (a->hash != b->hash) return false;
    return expr_cmp(a, b) == 0;
}

namespace detail {

inline size_t mix(size_t h, size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

inline size_t expr_hash(const Expr& e) {
    size_t h = static_cast<size_t>(e.kind) * 1099511628211ull;
    h = mix(h, std::hash<int64_t>()(e.value.num()));
    h = mix(h, std::hash<int64_t>()(e.value.den()));
    h = mix(h, std::hash<std::string>()(e.name));
    h = mix(h, std::hash<int64_t>()(e.konst.num()));
    h = mix(h, std::hash<int64_t>()(e.konst.den()));
    for (const auto& t : e.terms) {
        h = mix(h, std::hash<int64_t>()(t.coeff.num()));
        h = mix(h, std::hash<int64_t>()(t.coeff.den()));
        h = mix(h, t.term->hash);
    }
    for (const auto& a : e.args) h = mix(h, a->hash);
    return h;
}

inline ExprPtr intern(Expr e) {
    e.hash = expr_hash(e);
    return std::make_shared<Expr>(std::move(e));
}

}  // namespace detail

inline int expr_cmp(const ExprPtr& a, const ExprPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    auto cmp_rat = [](const Rational& x, const Rational& y) -> int {
        if (x == y) return 0;
        return x < y ? -1 : 1;
    };
    switch (a->kind) {
    case ExprKind::Const: return cmp_rat(a->value, b->value);
    case ExprKind::Sym: return a->name.compare(b->name);
    case ExprKind::Sum: {
        if (int c = cmp_rat(a->konst, b->konst)) return c;
        if (a->terms.size() != b->terms.size()) return a->terms.size() < b->terms.size() ? -1 : 1;
        for (size_t i = 0; i < a->terms.size(); ++i) {
            if (int c = cmp_rat(a->terms[i].coeff, b->terms[i].coeff)) return c;
            if (int c = expr_cmp(a->terms[i].term, b->terms[i].term)) return c;
        }
        return 0;
    }
    case ExprKind::Get: {
        if (int c = a->name.compare(b->name)) return c;
        [[fallthrough]];
    }
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Mod: {
        if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (int c = expr_cmp(a->args[i], b->args[i])) return c;
        return 0;
    }
    }
    return 0;
}

// ---- factories -----------------------------------------------------------

inline ExprPtr constant(Rational v) {
    Expr e;
    e.kind = ExprKind::Const;
    e.value = v;
    return detail::intern(std::move(e));
}
inline ExprPtr constant(int64_t v) { return constant(Rational(v)); }

inline ExprPtr symbol(const std::string& name) {
    Expr e;
    e.kind = ExprKind::Sym;
    e.name = name;
    return detail::intern(std::move(e));
}

inline ExprPtr get(const std::string& array, std::vector<ExprPtr> idx) {
    Expr e;
    e.kind = ExprKind::Get;
    e.name = array;
    e.args = std::move(idx);
    return detail::intern(std::move(e));
}

inline std::optional<Rational> const_val(const ExprPtr& e) {
    if (e->kind == ExprKind::Const) return e->value;
    if (e->kind == ExprKind::Sum && e->terms.empty()) return e->konst;
    return std::nullopt;
}

inline ExprPtr sum_of(std::vector<SumTerm> terms, Rational konst) {
    // merge equal terms, drop zero coefficients, sort
    std::sort(terms.begin(), terms.end(),
              [](const SumTerm& x, const SumTerm& y) { return expr_cmp(x.term, y.term) < 0; });
    std::vector<SumTerm> merged;
    for (auto& t : terms) {
        if (!merged.empty() && expr_eq(merged.back().term, t.term))
            merged.back().coeff = merged.back().coeff + t.coeff;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const SumTerm& t) { return t.coeff.is_zero(); }),
                 merged.end());
    if (merged.empty()) return constant(konst);
    if (merged.size() == 1 && konst.is_zero() && merged[0].coeff == Rational(1))
        return merged[0].term;
    Expr e;
    e.kind = ExprKind::Sum;
    e.terms = std::move(merged);
    e.konst = konst;
    return detail::intern(std::move(e));
}

// decompose any expression into (terms, constant)
inline void as_sum(const ExprPtr& e, std::vector<SumTerm>& terms, Rational& konst) {
    if (auto c = const_val(e)) {
        konst = konst + *c;
        return;
    }
    if (e->kind == ExprKind::Sum) {
        for (const auto& t : e->terms) terms.push_back(t);
        konst = konst + e->konst;
        return;
    }
    terms.push_back({Rational(1), e});
}

inline ExprPtr add(const ExprPtr& a, const ExprPtr& b) {
    std::vector<SumTerm> terms;
    Rational k(0);
    as_sum(a, terms, k);
    as_sum(b, terms, k);
    return sum_of(std::move(terms), k);
}

inline ExprPtr scale(const ExprPtr& a, Rational c) {
    if (c.is_zero()) return constant(0);
    std::vector<SumTerm> terms;
    Rational k(0);
    as_sum(a, terms, k);
    for (auto& t : terms) t.coeff = t.coeff * c;
    return sum_of(std::move(terms), k * c);
}

inline ExprPtr sub(const ExprPtr& a, const ExprPtr& b) { return add(a, scale(b, Rational(-1))); }
inline ExprPtr neg(const ExprPtr& a) { return scale(a, Rational(-1)); }

inline ExprPtr mul(const ExprPtr& a, const ExprPtr& b) {
    auto ca = const_val(a);
    auto cb = const_val(b);
    if (ca && cb) return constant(*ca * *cb);
    if (ca) return scale(b, *ca);
    if (cb) return scale(a, *cb);
    // distribute single-term sums' coefficients: (2x)*(3y) -> 6*(x*y)
    Rational coeff(1);
    auto strip = [&coeff](const ExprPtr& e) -> ExprPtr {
        if (e->kind == ExprKind::Sum && e->terms.size() == 1 && e->konst.is_zero()) {
            coeff = coeff * e->terms[0].coeff;
            return e->terms[0].term;
        }
        return e;
    };
    ExprPtr fa = strip(a);
    ExprPtr fb = strip(b);
    std::vector<ExprPtr> factors;
    auto flatten = [&factors](const ExprPtr& e) {
        if (e->kind == ExprKind::Mul)
            factors.insert(factors.end(), e->args.begin(), e->args.end());
        else
            factors.push_back(e);
    };
    flatten(fa);
    flatten(fb);
    std::sort(factors.begin(), factors.end(),
              [](const ExprPtr& x, const ExprPtr& y) { return expr_cmp(x, y) < 0; });
    Expr e;
    e.kind = ExprKind::Mul;
    e.args = std::move(factors);
    ExprPtr m = detail::intern(std::move(e));
    if (coeff == Rational(1)) return m;
    return sum_of({{coeff, m}}, Rational(0));
}

inline ExprPtr div(const ExprPtr& a, const ExprPtr& b) {
    auto cb = const_val(b);
    if (cb) {
        if (cb->is_zero()) throw Error(ErrorCode::DivisionByZeroConstant, "division by zero constant");
        return scale(a, Rational(1) / *cb);
    }
    auto ca = const_val(a);
    if (ca && ca->is_zero()) return constant(0);
    Expr e;
    e.kind = ExprKind::Div;
    e.args = {a, b};
    return detail::intern(std::move(e));
}

inline ExprPtr mod(const ExprPtr& a, const ExprPtr& b) {
    auto ca = const_val(a);
    auto cb = const_val(b);
    if (cb && cb->is_zero()) throw Error(ErrorCode::DivisionByZeroConstant, "modulo by zero constant");
    if (ca && cb && ca->is_integer() && cb->is_integer())
        return constant(ca->as_integer() % cb->as_integer());
    Expr e;
    e.kind = ExprKind::Mod;
    e.args = {a, b};
    return detail::intern(std::move(e));
}

// rebuild bottom-up through the factories; idempotent
inline ExprPtr normalize(const ExprPtr& e) {
    switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Sym:
        return e;
    case ExprKind::Sum: {
        ExprPtr acc = constant(e->konst);
        for (const auto& t : e->terms) acc = add(acc, scale(normalize(t.term), t.coeff));
        return acc;
    }
    case ExprKind::Mul: {
        ExprPtr acc = constant(1);
        for (const auto& f : e->args) acc = mul(acc, normalize(f));
        return acc;
    }
    case ExprKind::Div: return div(normalize(e->args[0]), normalize(e->args[1]));
    case ExprKind::Mod: return mod(normalize(e->args[0]), normalize(e->args[1]));
    case ExprKind::Get: {
        std::vector<ExprPtr> idx;
        idx.reserve(e->args.size());
        for (const auto& a : e->args) idx.push_back(normalize(a));
        return get(e->name, std::move(idx));
    }
    }
    return e;
}

// ---- queries -------------------------------------------------------------

inline bool contains_sym(const ExprPtr& e, const std::string& name) {
    switch (e->kind) {
    case ExprKind::Const: return false;
    case ExprKind::Sym: return e->name == name;
    case ExprKind::Sum:
        for (const auto& t : e->terms)
            if (contains_sym(t.term, name)) return true;
        return false;
    default:
        for (const auto& a : e->args)
            if (contains_sym(a, name)) return true;
        return false;
    }
}

inline void collect_syms(const ExprPtr& e, std::map<std::string, int>& out) {
    switch (e->kind) {
    case ExprKind::Const: return;
    case ExprKind::Sym: out[e->name] = 1; return;
    case ExprKind::Sum:
        for (const auto& t : e->terms) collect_syms(t.term, out);
        return;
    default:
        for (const auto& a : e->args) collect_syms(a, out);
        return;
    }
}

inline void collect_arrays(const ExprPtr& e, std::map<std::string, int>& out) {
    if (e->kind == ExprKind::Get) out[e->name] = static_cast<int>(e->args.size());
    if (e->kind == ExprKind::Sum) {
        for (const auto& t : e->terms) collect_arrays(t.term, out);
        return;
    }
    for (const auto& a : e->args) collect_arrays(a, out);
}

inline void collect_int_consts(const ExprPtr& e, std::vector<int64_t>& out) {
    auto push = [&out](const Rational& r) {
        if (r.is_integer()) out.push_back(r.num());
    };
    switch (e->kind) {
    case ExprKind::Const: push(e->value); return;
    case ExprKind::Sym: return;
    case ExprKind::Sum:
        push(e->konst);
        for (const auto& t : e->terms) collect_int_consts(t.term, out);
        return;
    default:
        for (const auto& a : e->args) collect_int_consts(a, out);
        return;
    }
}

// Affine view over symbols: e = sum coeff_i * sym_i + konst. Fails on any
// non-symbol term.
struct AffineForm {
    std::map<std::string, Rational> coeffs;
    Rational konst = Rational(0);

    Rational coeff(const std::string& s) const {
        auto it = coeffs.find(s);
        return it == coeffs.end() ? Rational(0) : it->second;
    }
};

inline std::optional<AffineForm> affine_of(const ExprPtr& e) {
    AffineForm f;
    if (auto c = const_val(e)) {
        f.konst = *c;
        return f;
    }
    if (e->kind == ExprKind::Sym) {
        f.coeffs[e->name] = Rational(1);
        return f;
    }
    if (e->kind == ExprKind::Sum) {
        f.konst = e->konst;
        for (const auto& t : e->terms) {
            if (t.term->kind != ExprKind::Sym) return std::nullopt;
            f.coeffs[t.term->name] = f.coeffs[t.term->name] + t.coeff;
        }
        return f;
    }
    return std::nullopt;
}

// true when every Get subscript and the whole index skeleton is affine
inline bool index_structure_affine(const ExprPtr& e) {
    switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Sym:
        return true;
    case ExprKind::Sum:
        for (const auto& t : e->terms)
            if (!index_structure_affine(t.term)) return false;
        return true;
    case ExprKind::Mul:
        for (const auto& a : e->args)
            if (!index_structure_affine(a)) return false;
        return true;
    case ExprKind::Div:
        return false;
    case ExprKind::Mod:
        return const_val(e->args[1]).has_value() && affine_of(e->args[0]).has_value();
    case ExprKind::Get:
        for (const auto& a : e->args)
            if (!affine_of(a)) return false;
        return true;
    }
    return false;
}

// ---- substitution --------------------------------------------------------

using SymSubst = std::map<std::string, ExprPtr>;

inline ExprPtr substitute(const ExprPtr& e, const SymSubst& s) {
    switch (e->kind) {
    case ExprKind::Const: return e;
    case ExprKind::Sym: {
        auto it = s.find(e->name);
        return it == s.end() ? e : it->second;
    }
    case ExprKind::Sum: {
        ExprPtr acc = constant(e->konst);
        for (const auto& t : e->terms) acc = add(acc, scale(substitute(t.term, s), t.coeff));
        return acc;
    }
    case ExprKind::Mul: {
        ExprPtr acc = constant(1);
        for (const auto& a : e->args) acc = mul(acc, substitute(a, s));
        return acc;
    }
    case ExprKind::Div: return div(substitute(e->args[0], s), substitute(e->args[1], s));
    case ExprKind::Mod: return mod(substitute(e->args[0], s), substitute(e->args[1], s));
    case ExprKind::Get: {
        std::vector<ExprPtr> idx;
        idx.reserve(e->args.size());
        for (const auto& a : e->args) idx.push_back(substitute(a, s));
        return get(e->name, std::move(idx));
    }
    }
    return e;
}

// rename array leaves (capture-free: names are globally unique by region prefixing)
inline ExprPtr rename_arrays(const ExprPtr& e, const std::map<std::string, std::string>& ren) {
    switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Sym:
        return e;
    case ExprKind::Sum: {
        ExprPtr acc = constant(e->konst);
        for (const auto& t : e->terms) acc = add(acc, scale(rename_arrays(t.term, ren), t.coeff));
        return acc;
    }
    case ExprKind::Mul: {
        ExprPtr acc = constant(1);
        for (const auto& a : e->args) acc = mul(acc, rename_arrays(a, ren));
        return acc;
    }
    case ExprKind::Div: return div(rename_arrays(e->args[0], ren), rename_arrays(e->args[1], ren));
    case ExprKind::Mod: return mod(rename_arrays(e->args[0], ren), rename_arrays(e->args[1], ren));
    case ExprKind::Get: {
        std::vector<ExprPtr> idx;
        for (const auto& a : e->args) idx.push_back(rename_arrays(a, ren));
        auto it = ren.find(e->name);
        return get(it == ren.end() ? e->name : it->second, std::move(idx));
    }
    }
    return e;
}

// ---- printing ------------------------------------------------------------

inline std::string expr_str(const ExprPtr& e, int parent_prec = 0);

namespace detail {

// Render a sum as lhs-style text: positive terms first, then subtracted ones.
inline std::string sum_str(const Expr& e, int parent_prec) {
    struct Piece { bool negative; std::string text; };
    std::vector<Piece> pieces;
    for (const auto& t : e.terms) {
        Rational c = t.coeff;
        bool negative = c.sign() < 0;
        Rational mag = negative ? -c : c;
        std::string txt;
        if (mag == Rational(1)) txt = expr_str(t.term, 2);
        else txt = mag.decimal_str() + " * " + expr_str(t.term, 2);
        pieces.push_back({negative, txt});
    }
    if (!e.konst.is_zero() || pieces.empty())
        pieces.push_back({e.konst.sign() < 0, (e.konst.sign() < 0 ? -e.konst : e.konst).decimal_str()});
    std::string out;
    bool first = true;
    for (const auto& p : pieces) {
        if (first) {
            if (p.negative) out += "-";
            out += p.text;
            first = false;
        } else {
            out += p.negative ? " - " : " + ";
            out += p.text;
        }
    }
    if (parent_prec > 1 && (pieces.size() > 1 || pieces[0].negative)) return "(" + out + ")";
    return out;
}

}  // namespace detail

inline std::string expr_str(const ExprPtr& e, int parent_prec) {
    switch (e->kind) {
    case ExprKind::Const: return e->value.decimal_str();
    case ExprKind::Sym: return e->name;
    case ExprKind::Sum: return detail::sum_str(*e, parent_prec);
    case ExprKind::Mul: {
        std::string out;
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) out += " * ";
            out += expr_str(e->args[i], 3);
        }
        return parent_prec > 2 ? "(" + out + ")" : out;
    }
    case ExprKind::Div:
        return expr_str(e->args[0], 3) + " / " + expr_str(e->args[1], 3);
    case ExprKind::Mod:
        return "(" + expr_str(e->args[0], 0) + ") % " + expr_str(e->args[1], 3);
    case ExprKind::Get: {
        std::string out = e->name + "(";
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) out += ", ";
            out += expr_str(e->args[i], 0);
        }
        return out + ")";
    }
    }
    return "?";
}

// ---- conditions ----------------------------------------------------------

enum class CondKind { True, False, Cmp, And, Or, BoolSym, NotSym };
enum class CmpKind { Eq, Ne, Le };  // diff OP 0

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct Cond {
    CondKind kind;
    CmpKind cmp = CmpKind::Eq;
    ExprPtr diff;                 // Cmp: diff OP 0
    std::vector<CondPtr> args;    // And / Or
    std::string name;             // BoolSym / NotSym
    size_t hash = 0;
};

inline int cond_cmp(const CondPtr& a, const CondPtr& b);

inline bool cond_eq(const CondPtr& a, const CondPtr& b) {
    if (a == b) return true;
    if (a->hash != b->hash) return false;
    return cond_cmp(a, b) == 0;
}

namespace detail {
inline CondPtr intern_cond(Cond c) {
    size_t h = static_cast<size_t>(c.kind) * 14695981039346656037ull;
    h = mix(h, static_cast<size_t>(c.cmp));
    if (c.diff) h = mix(h, c.diff->hash);
    h = mix(h, std::hash<std::string>()(c.name));
    for (const auto& a : c.args) h = mix(h, a->hash);
    c.hash = h;
    return std::make_shared<Cond>(std::move(c));
}
}  // namespace detail

inline int cond_cmp(const CondPtr& a, const CondPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
    case CondKind::True:
    case CondKind::False:
        return 0;
    case CondKind::Cmp:
        if (a->cmp != b->cmp) return a->cmp < b->cmp ? -1 : 1;
        return expr_cmp(a->diff, b->diff);
    case CondKind::BoolSym:
    case CondKind::NotSym:
        return a->name.compare(b->name);
    case CondKind::And:
    case CondKind::Or: {
        if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (int c = cond_cmp(a->args[i], b->args[i])) return c;
        return 0;
    }
    }
    return 0;
}

inline CondPtr ctrue() {
    static CondPtr t = detail::intern_cond([] { Cond c; c.kind = CondKind::True; return c; }());
    return t;
}
inline CondPtr cfalse() {
    static CondPtr f = detail::intern_cond([] { Cond c; c.kind = CondKind::False; return c; }());
    return f;
}
inline CondPtr bool_sym(const std::string& n) {
    Cond c;
    c.kind = CondKind::BoolSym;
    c.name = n;
    return detail::intern_cond(std::move(c));
}

// diff OP 0 with a canonical sign for Eq/Ne (first term positive)
inline CondPtr cmp0(CmpKind k, ExprPtr diff) {
    if (auto c = const_val(diff)) {
        bool v;
        switch (k) {
        case CmpKind::Eq: v = c->is_zero(); break;
        case CmpKind::Ne: v = !c->is_zero(); break;
        case CmpKind::Le: v = c->sign() <= 0; break;
        }
        return v ? ctrue() : cfalse();
    }
    if (k != CmpKind::Le) {
        // canonical orientation: leading term coefficient positive
        const Expr& d = *diff;
        bool flip = false;
        if (d.kind == ExprKind::Sum && !d.terms.empty()) flip = d.terms[0].coeff.sign() < 0;
        if (flip) diff = neg(diff);
    }
    Cond c;
    c.kind = CondKind::Cmp;
    c.cmp = k;
    c.diff = diff;
    return detail::intern_cond(std::move(c));
}

inline CondPtr eq(const ExprPtr& a, const ExprPtr& b) { return cmp0(CmpKind::Eq, sub(a, b)); }
inline CondPtr ne(const ExprPtr& a, const ExprPtr& b) { return cmp0(CmpKind::Ne, sub(a, b)); }
inline CondPtr le(const ExprPtr& a, const ExprPtr& b) { return cmp0(CmpKind::Le, sub(a, b)); }
inline CondPtr lt(const ExprPtr& a, const ExprPtr& b) {
    // integers: a < b  <=>  a <= b - 1
    return cmp0(CmpKind::Le, add(sub(a, b), constant(1)));
}
inline CondPtr ge(const ExprPtr& a, const ExprPtr& b) { return le(b, a); }
inline CondPtr gt(const ExprPtr& a, const ExprPtr& b) { return lt(b, a); }

inline CondPtr conj(std::vector<CondPtr> cs);
inline CondPtr disj(std::vector<CondPtr> cs);
inline CondPtr negate(const CondPtr& c);

// cheap pairwise contradiction over affine comparisons
inline bool literals_contradict(const CondPtr& a, const CondPtr& b) {
    if (a->kind != CondKind::Cmp || b->kind != CondKind::Cmp) {
        if (a->kind == CondKind::BoolSym && b->kind == CondKind::NotSym) return a->name == b->name;
        if (b->kind == CondKind::BoolSym && a->kind == CondKind::NotSym) return a->name == b->name;
        return false;
    }
    // Eq(d) vs Ne(d)
    if (a->cmp == CmpKind::Eq && b->cmp == CmpKind::Ne && expr_eq(a->diff, b->diff)) return true;
    if (b->cmp == CmpKind::Eq && a->cmp == CmpKind::Ne && expr_eq(a->diff, b->diff)) return true;
    // Eq(d) vs Eq(d +- c), c != 0
    if (a->cmp == CmpKind::Eq && b->cmp == CmpKind::Eq) {
        if (auto c = const_val(sub(a->diff, b->diff)); c && !c->is_zero()) return true;
        if (auto c = const_val(add(a->diff, b->diff)); c && !c->is_zero()) return true;
    }
    // Le(d1) vs Le(d2) with d1 + d2 = positive constant
    if (a->cmp == CmpKind::Le && b->cmp == CmpKind::Le) {
        if (auto c = const_val(add(a->diff, b->diff)); c && c->sign() > 0) return true;
    }
    // Eq(d) vs Le(d'): d = 0 and d' <= 0; contradiction when d' -+ d = positive const
    auto eq_le = [](const CondPtr& e, const CondPtr& l) -> bool {
        if (auto c = const_val(sub(l->diff, e->diff)); c && c->sign() > 0) return true;
        if (auto c = const_val(add(l->diff, e->diff)); c && c->sign() > 0) return true;
        return false;
    };
    if (a->cmp == CmpKind::Eq && b->cmp == CmpKind::Le && eq_le(a, b)) return true;
    if (b->cmp == CmpKind::Eq && a->cmp == CmpKind::Le && eq_le(b, a)) return true;
    return false;
}

inline CondPtr conj(std::vector<CondPtr> cs) {
    std::vector<CondPtr> flat;
    for (auto& c : cs) {
        if (c->kind == CondKind::True) continue;
        if (c->kind == CondKind::False) return cfalse();
        if (c->kind == CondKind::And)
            flat.insert(flat.end(), c->args.begin(), c->args.end());
        else
            flat.push_back(c);
    }
    std::sort(flat.begin(), flat.end(), [](const CondPtr& x, const CondPtr& y) { return cond_cmp(x, y) < 0; });
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const CondPtr& x, const CondPtr& y) { return cond_eq(x, y); }),
               flat.end());
    for (size_t i = 0; i < flat.size(); ++i)
        for (size_t j = i + 1; j < flat.size(); ++j)
            if (literals_contradict(flat[i], flat[j])) return cfalse();
    if (flat.empty()) return ctrue();
    if (flat.size() == 1) return flat[0];
    Cond c;
    c.kind = CondKind::And;
    c.args = std::move(flat);
    return detail::intern_cond(std::move(c));
}

inline CondPtr conj2(const CondPtr& a, const CondPtr& b) { return conj({a, b}); }

// complement detection on normalized literals
inline bool literals_complementary(const CondPtr& a, const CondPtr& b) {
    if (a->kind == CondKind::Cmp && b->kind == CondKind::Cmp) {
        if (a->cmp == CmpKind::Eq && b->cmp == CmpKind::Ne) return expr_eq(a->diff, b->diff);
        if (a->cmp == CmpKind::Ne && b->cmp == CmpKind::Eq) return expr_eq(a->diff, b->diff);
        if (a->cmp == CmpKind::Le && b->cmp == CmpKind::Le) {
            // (d <= 0) vs (d >= 1): d + d' = 1
            if (auto c = const_val(add(a->diff, b->diff)); c && *c == Rational(1)) return true;
        }
        return false;
    }
    if (a->kind == CondKind::BoolSym && b->kind == CondKind::NotSym) return a->name == b->name;
    if (a->kind == CondKind::NotSym && b->kind == CondKind::BoolSym) return a->name == b->name;
    return false;
}

// disjunction with complement factoring: (C and a) or (C and not a) -> C
inline CondPtr disj(std::vector<CondPtr> cs) {
    std::vector<CondPtr> flat;
    for (auto& c : cs) {
        if (c->kind == CondKind::False) continue;
        if (c->kind == CondKind::True) return ctrue();
        if (c->kind == CondKind::Or)
            flat.insert(flat.end(), c->args.begin(), c->args.end());
        else
            flat.push_back(c);
    }
    // factor complementary pairs until fixpoint
    auto literals = [](const CondPtr& c) -> std::vector<CondPtr> {
        if (c->kind == CondKind::And) return c->args;
        return {c};
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < flat.size() && !changed; ++i) {
            for (size_t j = i + 1; j < flat.size() && !changed; ++j) {
                std::vector<CondPtr> li = literals(flat[i]);
                std::vector<CondPtr> lj = literals(flat[j]);
                if (li.size() != lj.size()) continue;
                // find exactly one complementary literal position, rest equal as sets
                int comp_i = -1;
                std::vector<bool> used(lj.size(), false);
                bool ok = true;
                for (size_t a = 0; a < li.size() && ok; ++a) {
                    bool matched = false;
                    for (size_t b = 0; b < lj.size(); ++b) {
                        if (used[b]) continue;
                        if (cond_eq(li[a], lj[b])) { used[b] = true; matched = true; break; }
                    }
                    if (matched) continue;
                    if (comp_i >= 0) { ok = false; break; }
                    for (size_t b = 0; b < lj.size(); ++b) {
                        if (used[b]) continue;
                        if (literals_complementary(li[a], lj[b])) {
                            used[b] = true;
                            comp_i = static_cast<int>(a);
                            matched = true;
                            break;
                        }
                    }
                    if (!matched) ok = false;
                }
                if (ok && comp_i >= 0) {
                    std::vector<CondPtr> rest;
                    for (size_t a = 0; a < li.size(); ++a)
                        if (static_cast<int>(a) != comp_i) rest.push_back(li[a]);
                    CondPtr merged = conj(std::move(rest));
                    flat.erase(flat.begin() + j);
                    flat.erase(flat.begin() + i);
                    if (merged->kind == CondKind::True) return ctrue();
                    flat.push_back(merged);
                    changed = true;
                }
            }
        }
    }
    std::sort(flat.begin(), flat.end(), [](const CondPtr& x, const CondPtr& y) { return cond_cmp(x, y) < 0; });
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const CondPtr& x, const CondPtr& y) { return cond_eq(x, y); }),
               flat.end());
    if (flat.empty()) return cfalse();
    if (flat.size() == 1) return flat[0];
    Cond c;
    c.kind = CondKind::Or;
    c.args = std::move(flat);
    return detail::intern_cond(std::move(c));
}

inline CondPtr negate(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::True: return cfalse();
    case CondKind::False: return ctrue();
    case CondKind::Cmp:
        switch (c->cmp) {
        case CmpKind::Eq: return cmp0(CmpKind::Ne, c->diff);
        case CmpKind::Ne: return cmp0(CmpKind::Eq, c->diff);
        case CmpKind::Le:
            // not (d <= 0)  <=>  -d + 1 <= 0
            return cmp0(CmpKind::Le, add(neg(c->diff), constant(1)));
        }
        return cfalse();
    case CondKind::And: {
        std::vector<CondPtr> parts;
        for (const auto& a : c->args) parts.push_back(negate(a));
        return disj(std::move(parts));
    }
    case CondKind::Or: {
        std::vector<CondPtr> parts;
        for (const auto& a : c->args) parts.push_back(negate(a));
        return conj(std::move(parts));
    }
    case CondKind::BoolSym: {
        Cond n;
        n.kind = CondKind::NotSym;
        n.name = c->name;
        return detail::intern_cond(std::move(n));
    }
    case CondKind::NotSym:
        return bool_sym(c->name);
    }
    return cfalse();
}

inline CondPtr cond_substitute(const CondPtr& c, const SymSubst& s) {
    switch (c->kind) {
    case CondKind::True:
    case CondKind::False:
    case CondKind::BoolSym:
    case CondKind::NotSym:
        return c;
    case CondKind::Cmp:
        return cmp0(c->cmp, substitute(c->diff, s));
    case CondKind::And: {
        std::vector<CondPtr> parts;
        for (const auto& a : c->args) parts.push_back(cond_substitute(a, s));
        return conj(std::move(parts));
    }
    case CondKind::Or: {
        std::vector<CondPtr> parts;
        for (const auto& a : c->args) parts.push_back(cond_substitute(a, s));
        return disj(std::move(parts));
    }
    }
    return c;
}

inline CondPtr cond_normalize(const CondPtr& c) { return cond_substitute(c, {}); }

inline bool cond_contains_sym(const CondPtr& c, const std::string& name) {
    switch (c->kind) {
    case CondKind::Cmp: return contains_sym(c->diff, name);
    case CondKind::And:
    case CondKind::Or:
        for (const auto& a : c->args)
            if (cond_contains_sym(a, name)) return true;
        return false;
    default:
        return false;
    }
}

inline void cond_collect_syms(const CondPtr& c, std::map<std::string, int>& out) {
    switch (c->kind) {
    case CondKind::Cmp: collect_syms(c->diff, out); return;
    case CondKind::And:
    case CondKind::Or:
        for (const auto& a : c->args) cond_collect_syms(a, out);
        return;
    default:
        return;
    }
}

inline void cond_collect_int_consts(const CondPtr& c, std::vector<int64_t>& out) {
    switch (c->kind) {
    case CondKind::Cmp: collect_int_consts(c->diff, out); return;
    case CondKind::And:
    case CondKind::Or:
        for (const auto& a : c->args) cond_collect_int_consts(a, out);
        return;
    default:
        return;
    }
}

inline bool cond_index_structure_affine(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::Cmp: return affine_of(c->diff).has_value() || index_structure_affine(c->diff);
    case CondKind::And:
    case CondKind::Or:
        for (const auto& a : c->args)
            if (!cond_index_structure_affine(a)) return false;
        return true;
    default:
        return true;
    }
}

// two-sided rendering: negative-coefficient terms move across the operator
inline std::string cond_str(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::True: return "true";
    case CondKind::False: return "false";
    case CondKind::BoolSym: return c->name;
    case CondKind::NotSym: return ".not. " + c->name;
    case CondKind::Cmp: {
        // split diff into lhs (positive part) and rhs (negated negative part)
        std::vector<SumTerm> lhs_terms, rhs_terms;
        Rational lhs_k(0), rhs_k(0);
        std::vector<SumTerm> terms;
        Rational k(0);
        as_sum(c->diff, terms, k);
        for (const auto& t : terms) {
            if (t.coeff.sign() > 0) lhs_terms.push_back(t);
            else rhs_terms.push_back({-t.coeff, t.term});
        }
        if (k.sign() > 0) lhs_k = k;
        else rhs_k = -k;
        ExprPtr lhs = sum_of(std::move(lhs_terms), lhs_k);
        ExprPtr rhs = sum_of(std::move(rhs_terms), rhs_k);
        const char* op = c->cmp == CmpKind::Eq ? " == " : c->cmp == CmpKind::Ne ? " /= " : " <= ";
        return expr_str(lhs) + op + expr_str(rhs);
    }
    case CondKind::And: {
        std::string out;
        for (size_t i = 0; i < c->args.size(); ++i) {
            if (i) out += " .and. ";
            bool paren = c->args[i]->kind == CondKind::Or;
            out += paren ? "(" + cond_str(c->args[i]) + ")" : cond_str(c->args[i]);
        }
        return out;
    }
    case CondKind::Or: {
        std::string out;
        for (size_t i = 0; i < c->args.size(); ++i) {
            if (i) out += " .or. ";
            bool paren = c->args[i]->kind == CondKind::And;
            out += paren ? "(" + cond_str(c->args[i]) + ")" : cond_str(c->args[i]);
        }
        return out;
    }
    }
    return "?";
}

}  // namespace stlift::sym
