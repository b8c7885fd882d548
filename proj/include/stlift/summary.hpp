// Guarded-branch summaries: the predicate objects attached to invariant
// graph vertices. A summary is an ordered list of mutually exclusive
// branches plus a default. Scalar summaries describe one value; array
// summaries describe the element at position variables $1..$d and carry
// write metadata (point positions or region bounds) that the generalization
// and coalescing machinery works on.
#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stlift/sym.hpp"

namespace stlift {

using sym::CondPtr;
using sym::ExprPtr;

inline std::string pos_var_name(int dim) { return "$" + std::to_string(dim + 1); }
inline ExprPtr pos_var(int dim) { return sym::symbol(pos_var_name(dim)); }

// Per-dimension region bounds. stride/width describe the per-iteration
// footprint: when 0 < width < stride the region only covers the residues
// (x - lb) % stride in [0, width); width 0 means contiguous.
struct DimBound {
    ExprPtr lb;
    ExprPtr ub;
    int64_t stride = 0;
    int64_t width = 0;

    bool mod_constrained() const { return width > 0 && width < stride; }
};

inline bool dim_bound_eq(const DimBound& a, const DimBound& b) {
    return sym::expr_eq(a.lb, b.lb) && sym::expr_eq(a.ub, b.ub) && a.stride == b.stride &&
           a.width == b.width;
}

struct WriteMeta {
    enum class Kind { Point, Region } kind;
    std::vector<ExprPtr> pos;     // Point: one expr per dimension
    std::vector<DimBound> dims;   // Region
};

struct Branch {
    CondPtr guard = sym::ctrue();       // residual condition
    std::optional<WriteMeta> write;     // array-subject branches only
    ExprPtr value;
};

struct Summary {
    enum class Subject { Scalar, Array };
    Subject subject = Subject::Scalar;
    std::string array;                  // subject variable (array summaries)
    int rank = 0;
    std::vector<Branch> branches;
    ExprPtr def;                        // default value (element at $1..$d for arrays)

    static Summary scalar(ExprPtr v) {
        Summary s;
        s.subject = Subject::Scalar;
        s.def = std::move(v);
        return s;
    }
    static Summary free_array(const std::string& name, int rank) {
        Summary s;
        s.subject = Subject::Array;
        s.array = name;
        s.rank = rank;
        std::vector<ExprPtr> idx;
        for (int d = 0; d < rank; ++d) idx.push_back(pos_var(d));
        s.def = sym::get(name, std::move(idx));
        return s;
    }
    bool is_array() const { return subject == Subject::Array; }
};

// full condition of a branch, including write metadata
inline CondPtr branch_cond(const Branch& b) {
    std::vector<CondPtr> parts;
    if (b.write) {
        if (b.write->kind == WriteMeta::Kind::Point) {
            for (size_t d = 0; d < b.write->pos.size(); ++d)
                parts.push_back(sym::eq(pos_var(static_cast<int>(d)), b.write->pos[d]));
        } else {
            for (size_t d = 0; d < b.write->dims.size(); ++d) {
                const DimBound& db = b.write->dims[d];
                ExprPtr x = pos_var(static_cast<int>(d));
                if (sym::expr_eq(db.lb, db.ub)) {
                    parts.push_back(sym::eq(x, db.lb));
                } else {
                    parts.push_back(sym::ge(x, db.lb));
                    parts.push_back(sym::le(x, db.ub));
                }
                if (db.mod_constrained()) {
                    ExprPtr cls = sym::mod(sym::sub(x, db.lb), sym::constant(db.stride));
                    if (db.width == 1) parts.push_back(sym::eq(cls, sym::constant(0)));
                    else parts.push_back(sym::le(cls, sym::constant(db.width - 1)));
                }
            }
        }
    }
    parts.push_back(b.guard);
    return sym::conj(std::move(parts));
}

inline bool branch_eq(const Branch& a, const Branch& b) {
    return sym::cond_eq(branch_cond(a), branch_cond(b)) && sym::expr_eq(a.value, b.value);
}

inline bool summary_struct_eq(const Summary& a, const Summary& b) {
    if (a.subject != b.subject || a.rank != b.rank || a.branches.size() != b.branches.size())
        return false;
    if (!sym::expr_eq(a.def, b.def)) return false;
    for (size_t i = 0; i < a.branches.size(); ++i)
        if (!branch_eq(a.branches[i], b.branches[i])) return false;
    return true;
}

// canonical branch order: by condition text key, stable
inline void sort_branches(Summary& s) {
    std::stable_sort(s.branches.begin(), s.branches.end(), [](const Branch& x, const Branch& y) {
        int c = sym::cond_cmp(branch_cond(x), branch_cond(y));
        if (c != 0) return c < 0;
        return sym::expr_cmp(x.value, y.value) < 0;
    });
}

inline void drop_false_branches(Summary& s) {
    s.branches.erase(std::remove_if(s.branches.begin(), s.branches.end(),
                                    [](const Branch& b) {
                                        return branch_cond(b)->kind == sym::CondKind::False;
                                    }),
                     s.branches.end());
}

// guard that none of the branches applies (used when composing defaults)
inline CondPtr none_of(const std::vector<Branch>& branches) {
    std::vector<CondPtr> conds;
    for (const auto& b : branches) conds.push_back(branch_cond(b));
    return sym::negate(sym::disj(std::move(conds)));
}

// ---- scalar summary algebra ------------------------------------------------

inline Summary map_summary(const Summary& s, const std::function<ExprPtr(const ExprPtr&)>& f) {
    Summary out = s;
    for (auto& b : out.branches) b.value = f(b.value);
    out.def = f(out.def);
    return out;
}

// cross product of two scalar summaries under a binary op
inline Summary combine(const Summary& a, const Summary& b,
                       const std::function<ExprPtr(const ExprPtr&, const ExprPtr&)>& f) {
    assert(!a.is_array() && !b.is_array());
    if (a.branches.empty() && b.branches.empty())
        return Summary::scalar(f(a.def, b.def));
    Summary out;
    CondPtr a_else = none_of(a.branches);
    CondPtr b_else = none_of(b.branches);
    auto push = [&out](CondPtr c, ExprPtr v) {
        if (c->kind == sym::CondKind::False) return;
        out.branches.push_back({c, std::nullopt, std::move(v)});
    };
    for (const auto& ba : a.branches) {
        CondPtr ca = branch_cond(ba);
        for (const auto& bb : b.branches) push(sym::conj2(ca, branch_cond(bb)), f(ba.value, bb.value));
        push(sym::conj2(ca, b_else), f(ba.value, b.def));
    }
    for (const auto& bb : b.branches) push(sym::conj2(a_else, branch_cond(bb)), f(a.def, bb.value));
    out.def = f(a.def, b.def);
    // merge branches with identical values into one guard
    std::vector<Branch> merged;
    for (auto& br : out.branches) {
        bool found = false;
        for (auto& m : merged) {
            if (sym::expr_eq(m.value, br.value)) {
                m.guard = sym::disj({m.guard, br.guard});
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(br);
    }
    out.branches = std::move(merged);
    // branches whose value equals the default are redundant
    out.branches.erase(std::remove_if(out.branches.begin(), out.branches.end(),
                                      [&out](const Branch& b) { return sym::expr_eq(b.value, out.def); }),
                       out.branches.end());
    return out;
}

// element of an array summary at a concrete index vector
inline Summary array_at(const Summary& arr, const std::vector<ExprPtr>& idx) {
    assert(arr.is_array());
    assert(static_cast<int>(idx.size()) == arr.rank);
    sym::SymSubst sub;
    for (int d = 0; d < arr.rank; ++d) sub[pos_var_name(d)] = idx[d];
    Summary out;
    for (const auto& b : arr.branches) {
        CondPtr c = sym::cond_substitute(branch_cond(b), sub);
        if (c->kind == sym::CondKind::False) continue;
        ExprPtr v = sym::substitute(b.value, sub);
        if (c->kind == sym::CondKind::True) {
            // exclusivity: every other branch is dead; this is the value
            out.branches.clear();
            out.def = v;
            return out;
        }
        out.branches.push_back({c, std::nullopt, v});
    }
    out.def = sym::substitute(arr.def, sub);
    // a branch whose value matches the default is noise
    out.branches.erase(std::remove_if(out.branches.begin(), out.branches.end(),
                                      [&out](const Branch& b) { return sym::expr_eq(b.value, out.def); }),
                       out.branches.end());
    return out;
}

// functional override: arr with position pos set to the value summary
inline Summary array_set(const Summary& arr, const std::vector<ExprPtr>& pos, const Summary& value) {
    assert(arr.is_array());
    Summary out = arr;
    std::vector<Branch> fresh;
    if (value.branches.empty()) {
        fresh.push_back({sym::ctrue(), WriteMeta{WriteMeta::Kind::Point, pos, {}}, value.def});
    } else {
        for (const auto& vb : value.branches)
            fresh.push_back({branch_cond(vb), WriteMeta{WriteMeta::Kind::Point, pos, {}}, vb.value});
        fresh.push_back({none_of(value.branches), WriteMeta{WriteMeta::Kind::Point, pos, {}}, value.def});
    }
    // shadow the overridden position in existing branches
    std::vector<CondPtr> pos_eq;
    for (size_t d = 0; d < pos.size(); ++d) pos_eq.push_back(sym::eq(pos_var(static_cast<int>(d)), pos[d]));
    CondPtr at_pos = sym::conj(std::move(pos_eq));
    std::vector<Branch> kept;
    for (const auto& b : out.branches) {
        CondPtr overlap = sym::conj2(branch_cond(b), at_pos);
        if (overlap->kind == sym::CondKind::False) {
            kept.push_back(b);  // provably disjoint
        } else if (sym::cond_eq(overlap, branch_cond(b))) {
            continue;           // fully shadowed
        } else {
            Branch nb = b;
            nb.guard = sym::conj2(nb.guard, sym::negate(at_pos));
            kept.push_back(nb);
        }
    }
    out.branches = std::move(fresh);
    out.branches.insert(out.branches.end(), kept.begin(), kept.end());
    drop_false_branches(out);
    return out;
}

// ---- substitution over whole summaries -------------------------------------

inline Summary summary_substitute(const Summary& s, const sym::SymSubst& sub) {
    Summary out = s;
    for (auto& b : out.branches) {
        b.guard = sym::cond_substitute(b.guard, sub);
        if (b.write) {
            if (b.write->kind == WriteMeta::Kind::Point) {
                for (auto& p : b.write->pos) p = sym::substitute(p, sub);
            } else {
                for (auto& d : b.write->dims) {
                    d.lb = sym::substitute(d.lb, sub);
                    d.ub = sym::substitute(d.ub, sub);
                }
            }
        }
        b.value = sym::substitute(b.value, sub);
    }
    out.def = sym::substitute(out.def, sub);
    drop_false_branches(out);
    return out;
}

// shift every occurrence of a variable: var := var + delta
inline Summary shift_time(const Summary& s, const std::string& var, int64_t delta) {
    sym::SymSubst sub;
    sub[var] = sym::add(sym::symbol(var), sym::constant(delta));
    return summary_substitute(s, sub);
}

// ---- free variables ---------------------------------------------------------

struct FreeVars {
    std::map<std::string, int> index_syms;   // name -> 1
    std::map<std::string, int> arrays;       // name -> rank
    std::map<std::string, int> bool_syms;
};

inline void collect_free(const Summary& s, FreeVars& fv) {
    auto walk_expr = [&fv](const ExprPtr& e) {
        sym::collect_syms(e, fv.index_syms);
        sym::collect_arrays(e, fv.arrays);
    };
    auto walk_cond = [&fv](const CondPtr& c) {
        sym::cond_collect_syms(c, fv.index_syms);
        std::function<void(const CondPtr&)> bools = [&](const CondPtr& k) {
            if (k->kind == sym::CondKind::BoolSym || k->kind == sym::CondKind::NotSym)
                fv.bool_syms[k->name] = 1;
            for (const auto& a : k->args) bools(a);
        };
        bools(c);
    };
    for (const auto& b : s.branches) {
        walk_cond(branch_cond(b));
        walk_expr(b.value);
    }
    walk_expr(s.def);
    // position vars are bound, not free
    for (int d = 0; d < s.rank; ++d) fv.index_syms.erase(pos_var_name(d));
}

// ---- printing ---------------------------------------------------------------

// $1..$d render as x1..xd; other $-prefixed internal names lose the marker
inline std::string render_positions(const std::string& text) {
    std::string out;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '$' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))
            out += 'x';
        else if (text[i] != '$')
            out += text[i];
    }
    return out;
}

inline std::string summary_str(const Summary& s, const std::string& subject_name = "") {
    std::string name = subject_name.empty() ? (s.is_array() ? s.array : std::string("value")) : subject_name;
    std::string out;
    if (s.is_array()) {
        out += name + "(";
        for (int d = 0; d < s.rank; ++d) {
            if (d) out += ", ";
            out += "x" + std::to_string(d + 1);
        }
        out += "):\n";
    } else {
        out += name + ":\n";
    }
    for (const auto& b : s.branches)
        out += "  " + render_positions(sym::cond_str(branch_cond(b))) + " -> " +
               render_positions(sym::expr_str(b.value)) + "\n";
    out += "  otherwise -> " + render_positions(sym::expr_str(s.def)) + "\n";
    return out;
}

}  // namespace stlift
