// Hierarchical recursive lifting: SCC-ordered semantic extraction per level
// with sweep -> generalize -> shift -> re-sweep iteration, plus the
// equivalence-checking and vertex-elimination accelerations.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stlift/rules.hpp"
#include "stlift/scc.hpp"

namespace stlift {

struct LiftOptions {
    int max_sweeps = 32;
    bool equiv_check = true;
    bool vertex_elim = true;
    bool trace = false;
    std::ostream* trace_out = nullptr;
};

struct SccStats {
    int region = -1;
    int level = 0;
    int scc_index = 0;                 // position in the processing order
    int start_vertex = -1;
    int sweeps = 0;
    int gen_rounds = 0;
    std::vector<int> branch_counts;    // N_e per round
    bool eliminated = false;
};

struct LoopCtx {
    const Region* region = nullptr;

    const std::string& t() const { return region->counter; }
    sym::ExprPtr t_sym() const { return sym::symbol(region->counter); }
    sym::ExprPtr lo() const { return region->lo; }
    int64_t step() const { return region->step; }
};

// counter value of the final iteration
inline sym::ExprPtr last_counter(const Region& r) {
    if (r.step == 1) return r.hi;
    auto lo = sym::const_val(r.lo);
    auto hi = sym::const_val(r.hi);
    if (lo && hi && lo->is_integer() && hi->is_integer()) {
        int64_t l = lo->as_integer(), h = hi->as_integer(), s = r.step;
        int64_t span = h - l;
        if ((span < 0) != (s < 0) && span != 0)
            throw Error(ErrorCode::NonAffineBinding, "loop executes no iterations");
        int64_t n = span / s;  // both signs aligned: floor
        return sym::constant(l + n * s);
    }
    throw Error(ErrorCode::NonAffineBinding,
                "symbolic loop bounds with non-unit step are not generalizable");
}

// ---- generalization ---------------------------------------------------------

// GeneralizedSummary: region-form summary over the level's iteration
// variable. Branch expressions are free of the iteration variable; bounds
// are affine in it. affine(d) recovers the per-dimension (a, b) maps.
struct GeneralizedSummary {
    Summary region_form;
    std::string time_var;
    int64_t step = 1;

    struct AffineMap {
        Rational a;
        sym::ExprPtr b;
    };
    // affine map of branch k, dimension d: ub = a * t + b along the sweep
    AffineMap affine(int branch, int dim) const {
        const Branch& br = region_form.branches[static_cast<size_t>(branch)];
        const DimBound& db = br.write->dims[static_cast<size_t>(dim)];
        auto form = sym::affine_of(db.ub);
        Rational a = form ? form->coeff(time_var) : Rational(0);
        sym::ExprPtr b = sym::sub(db.ub, sym::scale(sym::symbol(time_var), a));
        return {a, sym::normalize(b)};
    }
};

namespace lift_detail {

inline Rational coeff_of(const sym::ExprPtr& e, const std::string& var) {
    auto f = sym::affine_of(e);
    if (!f) return Rational(0);
    return f->coeff(var);
}

inline bool t_free(const sym::ExprPtr& e, const std::string& t) { return !sym::contains_sym(e, t); }
inline bool t_free(const CondPtr& c, const std::string& t) { return !sym::cond_contains_sym(c, t); }

// stride/width carry information only for mod-class regions; everything
// else is canonicalized so region equality is equality of bounds
inline void canonicalize_dim(DimBound& d) {
    if (!d.mod_constrained()) {
        d.stride = 0;
        d.width = 0;
    }
}

// Nonnegativity of an affine expression over the loop's counter range. The
// counter starts at lo and moves by `step`, so the extreme value sits at lo
// when the t-coefficient points against the direction of travel.
inline bool provably_nonneg_given(const sym::ExprPtr& e, const std::string& t,
                                  const sym::ExprPtr& lo, int64_t step) {
    auto f = sym::affine_of(e);
    if (!f) return false;
    Rational ct = f->coeff(t);
    if (step > 0 ? ct.sign() < 0 : ct.sign() > 0) return false;
    sym::SymSubst sub;
    sub[t] = lo;
    auto at_lo = sym::const_val(sym::substitute(e, sub));
    return at_lo && at_lo->sign() >= 0;
}

// Convert a point-write branch into x-form: bounds [pos, pos] per dimension,
// value and guard rewritten over the position variables via the inverse
// position maps. Returns nullopt when the branch is not convertible.
inline std::optional<Branch> to_xform_region(const Branch& b, const LoopCtx& loop, int rank) {
    if (!b.write || b.write->kind != WriteMeta::Kind::Point) return std::nullopt;
    const auto& pos = b.write->pos;
    const std::string& t = loop.t();

    sym::SymSubst inv;
    std::set<std::string> inverted;
    std::vector<int> inverted_by(static_cast<size_t>(rank), -1);
    for (int d = 0; d < rank; ++d) {
        auto f = sym::affine_of(pos[static_cast<size_t>(d)]);
        if (!f) return std::nullopt;
        Rational at = f->coeff(t);
        if (!at.is_zero() && !inverted.count(t)) {
            // t = ($d - r) / a with r = pos - a*t
            sym::ExprPtr r = sym::sub(pos[static_cast<size_t>(d)], sym::scale(loop.t_sym(), at));
            inv[t] = sym::scale(sym::sub(pos_var(d), r), Rational(1) / at);
            inverted.insert(t);
            inverted_by[static_cast<size_t>(d)] = 1;
            continue;
        }
        // single foreign symbol with unit-invertible coefficient
        std::string candidate;
        int count = 0;
        for (const auto& [name, c] : f->coeffs) {
            if (c.is_zero() || name == t) continue;
            ++count;
            candidate = name;
        }
        if (count == 1 && !inverted.count(candidate)) {
            Rational a = f->coeff(candidate);
            sym::ExprPtr r = sym::sub(pos[static_cast<size_t>(d)],
                                      sym::scale(sym::symbol(candidate), a));
            inv[candidate] = sym::scale(sym::sub(pos_var(d), r), Rational(1) / a);
            inverted.insert(candidate);
            inverted_by[static_cast<size_t>(d)] = 1;
        }
    }

    sym::ExprPtr value = sym::substitute(b.value, inv);
    CondPtr guard = sym::cond_substitute(b.guard, inv);
    if (!t_free(value, t) || !t_free(guard, t)) return std::nullopt;

    Branch out;
    out.guard = guard;
    out.value = value;
    WriteMeta meta;
    meta.kind = WriteMeta::Kind::Region;
    for (int d = 0; d < rank; ++d) {
        // substitute the other dimensions' inversions but keep this one's own
        // constraint intact
        sym::SymSubst others = inv;
        if (inverted_by[static_cast<size_t>(d)] == 1) {
            auto f = sym::affine_of(pos[static_cast<size_t>(d)]);
            for (const auto& [name, c] : f->coeffs)
                if (!c.is_zero()) others.erase(name);
        }
        sym::ExprPtr p = sym::substitute(pos[static_cast<size_t>(d)], others);
        DimBound db;
        db.lb = p;
        db.ub = p;
        Rational a = coeff_of(pos[static_cast<size_t>(d)], t);
        if (!a.is_integer() || !(a * Rational(loop.step())).is_integer()) return std::nullopt;
        db.stride = (a * Rational(loop.step())).as_integer();
        if (db.stride < 0) db.stride = -db.stride;
        db.width = db.stride != 0 ? 1 : 0;
        canonicalize_dim(db);
        meta.dims.push_back(std::move(db));
    }
    out.write = std::move(meta);
    return out;
}

// Union of a region over all iterations lo..t (Skolemized bounds). Rigid
// movers become the pivot; other t-dependent bounds are rewritten through the
// pivot's inverse; frozen dimensions pass through.
inline Branch widen_region(const Branch& b, const LoopCtx& loop, int rank) {
    const std::string& t = loop.t();
    Branch out = b;
    WriteMeta& meta = *out.write;

    // locate a rigid mover: lb and ub share a nonzero t coefficient
    int pivot = -1;
    Rational pivot_a(0);
    for (int d = 0; d < rank; ++d) {
        DimBound& db = meta.dims[static_cast<size_t>(d)];
        Rational alb = coeff_of(db.lb, t);
        Rational aub = coeff_of(db.ub, t);
        if (!alb.is_zero() && alb == aub) {
            pivot = d;
            pivot_a = alb;
            break;
        }
    }

    sym::SymSubst t_inv;
    if (pivot >= 0) {
        DimBound& db = meta.dims[static_cast<size_t>(pivot)];
        sym::ExprPtr r = sym::sub(db.lb, sym::scale(loop.t_sym(), pivot_a));
        t_inv[t] = sym::scale(sym::sub(pos_var(pivot), r), Rational(1) / pivot_a);
    }

    for (int d = 0; d < rank; ++d) {
        DimBound& db = meta.dims[static_cast<size_t>(d)];
        Rational alb = coeff_of(db.lb, t);
        Rational aub = coeff_of(db.ub, t);
        if (alb.is_zero() && aub.is_zero()) continue;  // frozen

        if (d == pivot) {
            sym::SymSubst at_lo;
            at_lo[t] = loop.lo();
            sym::ExprPtr lb_lo = sym::substitute(db.lb, at_lo);
            sym::ExprPtr ub_lo = sym::substitute(db.ub, at_lo);
            int64_t width = 0;
            auto w = sym::const_val(sym::sub(db.ub, db.lb));
            Rational sr = pivot_a * Rational(loop.step());
            if (!sr.is_integer())
                throw Error(ErrorCode::NonAffineBinding, "fractional iteration stride");
            int64_t stride = sr.as_integer() < 0 ? -sr.as_integer() : sr.as_integer();
            if (w && w->is_integer()) {
                width = w->as_integer() + 1;
            } else {
                // symbolic footprint must provably cover the stride
                sym::ExprPtr cover = sym::sub(sym::sub(db.ub, db.lb), sym::constant(stride - 1));
                if (!provably_nonneg_given(cover, t, loop.lo(), loop.step()))
                    throw Error(ErrorCode::NonAffineBinding, "cannot bound region footprint");
                width = 0;
            }
            if ((pivot_a.sign() > 0) == (loop.step() > 0)) {
                db.lb = lb_lo;
            } else {
                db.ub = ub_lo;
            }
            db.stride = stride;
            db.width = (width > 0 && width < stride) ? width : 0;
        } else if (pivot >= 0) {
            db.lb = sym::substitute(db.lb, t_inv);
            db.ub = sym::substitute(db.ub, t_inv);
        }
        // pivot-less movers are widened by the union pass below
    }

    if (pivot < 0) {
        // single non-rigid mover: per-dimension union; valid when consecutive
        // footprints adjoin (or a mod class is declared)
        int movers = 0;
        for (int d = 0; d < rank; ++d) {
            DimBound& db = meta.dims[static_cast<size_t>(d)];
            Rational alb = coeff_of(db.lb, t);
            Rational aub = coeff_of(db.ub, t);
            if (alb.is_zero() && aub.is_zero()) continue;
            ++movers;
            if (movers > 1)
                throw Error(ErrorCode::NonAffineBinding,
                            "multiple non-rigid moving dimensions cannot be generalized");
            sym::SymSubst at_lo;
            at_lo[t] = loop.lo();
            bool fwd = loop.step() > 0;
            sym::ExprPtr lb_ext = (alb.sign() >= 0) == fwd ? sym::substitute(db.lb, at_lo) : db.lb;
            sym::ExprPtr ub_ext = (aub.sign() >= 0) == fwd ? db.ub : sym::substitute(db.ub, at_lo);
            if (db.mod_constrained()) {
                sym::SymSubst nxt;
                nxt[t] = sym::add(loop.t_sym(), sym::constant(loop.step()));
                auto delta = sym::const_val(sym::sub(sym::substitute(db.ub, nxt), db.ub));
                if (!delta || (delta->as_integer() != db.stride && delta->as_integer() != -db.stride))
                    throw Error(ErrorCode::NonAffineBinding, "mod-class region moves irregularly");
            } else {
                sym::SymSubst nxt;
                nxt[t] = sym::add(loop.t_sym(), sym::constant(loop.step()));
                sym::ExprPtr gap = sym::sub(sym::add(db.ub, sym::constant(1)), sym::substitute(db.lb, nxt));
                if (!provably_nonneg_given(gap, t, loop.lo(), loop.step()))
                    throw Error(ErrorCode::NonAffineBinding, "region union is not contiguous");
            }
            db.lb = lb_ext;
            db.ub = ub_ext;
        }
    }

    // the value and residual guard must not mention the iteration variable
    if (!t_free(out.value, t))
        throw Error(ErrorCode::NonAffineBinding, "branch expression still depends on '" + t + "'");
    out.guard = sym::cond_substitute(out.guard, t_inv);
    if (!t_free(out.guard, t))
        throw Error(ErrorCode::NonAffineBinding, "branch guard still depends on '" + t + "'");
    for (auto& d : meta.dims) canonicalize_dim(d);
    return out;
}

// provable disjointness of two region branches
inline bool regions_disjoint(const Branch& a, const Branch& b, int rank) {
    if (sym::conj2(a.guard, b.guard)->kind == sym::CondKind::False) return true;
    if (!a.write || !b.write) return false;
    if (a.write->kind != WriteMeta::Kind::Region || b.write->kind != WriteMeta::Kind::Region)
        return false;
    for (int d = 0; d < rank; ++d) {
        const DimBound& da = a.write->dims[static_cast<size_t>(d)];
        const DimBound& dbm = b.write->dims[static_cast<size_t>(d)];
        auto gap1 = sym::const_val(sym::sub(da.lb, dbm.ub));
        if (gap1 && gap1->sign() > 0) return true;
        auto gap2 = sym::const_val(sym::sub(dbm.lb, da.ub));
        if (gap2 && gap2->sign() > 0) return true;
        // same-stride mod classes with different residues
        if (da.mod_constrained() && dbm.mod_constrained() && da.stride == dbm.stride &&
            da.width == 1 && dbm.width == 1) {
            auto diff = sym::const_val(sym::sub(da.lb, dbm.lb));
            if (diff && diff->is_integer() && diff->as_integer() % da.stride != 0) return true;
        }
    }
    return false;
}

}  // namespace lift_detail

// region-form canonical order
inline void canonicalize(Summary& s) {
    drop_false_branches(s);
    sort_branches(s);
}

// Merge helper: extend a carried region branch by a stride-adjacent incoming
// region along exactly one dimension.
inline bool try_merge_adjacent(Branch& carried, const Branch& incoming, int rank) {
    if (!carried.write || !incoming.write) return false;
    if (carried.write->kind != WriteMeta::Kind::Region ||
        incoming.write->kind != WriteMeta::Kind::Region)
        return false;
    if (!sym::cond_eq(carried.guard, incoming.guard)) return false;
    if (!sym::expr_eq(carried.value, incoming.value)) return false;
    int merge_dim = -1;
    bool extend_up = true;
    for (int d = 0; d < rank; ++d) {
        const DimBound& c = carried.write->dims[static_cast<size_t>(d)];
        const DimBound& n = incoming.write->dims[static_cast<size_t>(d)];
        if (dim_bound_eq(c, n)) continue;
        if (merge_dim >= 0) return false;
        merge_dim = d;
        int64_t gap_expect = c.width > 0 ? c.stride - c.width + 1 : 1;
        auto up = sym::const_val(sym::sub(n.lb, c.ub));
        auto down = sym::const_val(sym::sub(c.lb, n.ub));
        if (up && up->is_integer() && up->as_integer() == gap_expect) extend_up = true;
        else if (down && down->is_integer() && down->as_integer() == gap_expect) extend_up = false;
        else return false;
        // widths must agree for mod-class regions
        if (c.width > 0) {
            auto nw = sym::const_val(sym::sub(n.ub, n.lb));
            if (!nw || !nw->is_integer() || nw->as_integer() + 1 != c.width) return false;
            if (n.stride != 0 && n.stride != c.stride) return false;
        }
    }
    if (merge_dim < 0) return false;  // identical regions; caller merges guards
    DimBound& c = carried.write->dims[static_cast<size_t>(merge_dim)];
    const DimBound& n = incoming.write->dims[static_cast<size_t>(merge_dim)];
    if (extend_up) c.ub = n.ub;
    else c.lb = n.lb;
    return true;
}

namespace lift_detail {

// Rewrite a region branch whose non-pivot bounds still reference the
// iteration variable into coupled x-form via the rigid pivot's inverse
// (fresh Loopcall regions arrive in t-form; carried regions are already
// coupled). The pivot dimension itself keeps its t-form bounds.
inline Branch couple_region(const Branch& b, const LoopCtx& loop, int rank) {
    const std::string& t = loop.t();
    Branch out = b;
    WriteMeta& meta = *out.write;
    int pivot = -1;
    Rational pivot_a(0);
    for (int d = 0; d < rank; ++d) {
        const DimBound& db = meta.dims[static_cast<size_t>(d)];
        Rational alb = coeff_of(db.lb, t);
        Rational aub = coeff_of(db.ub, t);
        if (!alb.is_zero() && alb == aub) {
            pivot = d;
            pivot_a = alb;
            break;
        }
    }
    if (pivot < 0) return out;
    const DimBound& pd = meta.dims[static_cast<size_t>(pivot)];
    sym::SymSubst inv;
    sym::ExprPtr r = sym::sub(pd.lb, sym::scale(loop.t_sym(), pivot_a));
    inv[t] = sym::scale(sym::sub(pos_var(pivot), r), Rational(1) / pivot_a);
    for (int d = 0; d < rank; ++d) {
        if (d == pivot) continue;
        DimBound& db = meta.dims[static_cast<size_t>(d)];
        db.lb = sym::substitute(db.lb, inv);
        db.ub = sym::substitute(db.ub, inv);
    }
    out.guard = sym::cond_substitute(out.guard, inv);
    out.value = sym::substitute(out.value, inv);
    return out;
}

}  // namespace lift_detail

// Coalesce point branches into stride-adjacent carried regions (the merge
// that keeps the header phi's rule output in region form once the loop has
// been generalized).
inline void coalesce(Summary& s, const LoopCtx& loop) {
    if (!s.is_array()) return;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < s.branches.size() && !changed; ++i) {
            const Branch& raw = s.branches[i];
            std::optional<Branch> inc;
            if (raw.write && raw.write->kind == WriteMeta::Kind::Point)
                inc = lift_detail::to_xform_region(raw, loop, s.rank);
            else if (raw.write && raw.write->kind == WriteMeta::Kind::Region)
                inc = lift_detail::couple_region(raw, loop, s.rank);
            if (!inc) continue;
            for (size_t j = 0; j < s.branches.size(); ++j) {
                if (j == i) continue;
                Branch& target = s.branches[j];
                if (!target.write || target.write->kind != WriteMeta::Kind::Region) continue;
                if (try_merge_adjacent(target, *inc, s.rank)) {
                    s.branches.erase(s.branches.begin() + static_cast<long>(i));
                    changed = true;
                    break;
                }
            }
        }
    }
}

// 6.4.4: merge branches whose expressions match under a unit index shift.
// Works on the pre-generalization summary; the result is semantically equal.
inline Summary equivalence_check(const Summary& s, const LoopCtx& loop) {
    if (!s.is_array()) return s;
    Summary out = s;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < out.branches.size() && !changed; ++i) {
            auto a = lift_detail::to_xform_region(out.branches[i], loop, out.rank);
            if (!a && out.branches[i].write &&
                out.branches[i].write->kind == WriteMeta::Kind::Region)
                a = out.branches[i];
            if (!a) continue;
            for (size_t j = 0; j < out.branches.size() && !changed; ++j) {
                if (i == j) continue;
                auto b = lift_detail::to_xform_region(out.branches[j], loop, out.rank);
                if (!b && out.branches[j].write &&
                    out.branches[j].write->kind == WriteMeta::Kind::Region)
                    b = out.branches[j];
                if (!b) continue;
                if (!sym::cond_eq(a->guard, b->guard)) continue;
                if (!sym::expr_eq(a->value, b->value)) continue;
                // unit adjacency along exactly one dimension
                int dim = -1;
                for (int d = 0; d < out.rank; ++d) {
                    const DimBound& da = a->write->dims[static_cast<size_t>(d)];
                    const DimBound& db = b->write->dims[static_cast<size_t>(d)];
                    if (sym::expr_eq(da.lb, db.lb) && sym::expr_eq(da.ub, db.ub)) continue;
                    if (dim >= 0) { dim = -2; break; }
                    auto gap = sym::const_val(sym::sub(db.lb, da.ub));
                    if (!gap || !gap->is_integer() || gap->as_integer() != 1) { dim = -2; break; }
                    dim = d;
                }
                if (dim < 0) continue;
                Branch merged = *a;
                merged.write->dims[static_cast<size_t>(dim)].ub =
                    b->write->dims[static_cast<size_t>(dim)].ub;
                // footprint widened; stride stays per-iteration
                auto w = sym::const_val(sym::sub(merged.write->dims[static_cast<size_t>(dim)].ub,
                                                 merged.write->dims[static_cast<size_t>(dim)].lb));
                if (w && w->is_integer()) {
                    int64_t width = w->as_integer() + 1;
                    DimBound& md = merged.write->dims[static_cast<size_t>(dim)];
                    md.width = (md.stride > 0 && width < md.stride) ? width : 0;
                }
                out.branches[i] = std::move(merged);
                out.branches.erase(out.branches.begin() + static_cast<long>(j));
                changed = true;
            }
        }
    }
    return out;
}

namespace lift_detail {

// provable per-dimension containment of a's region inside b's bounds
inline bool region_within(const Branch& a, const Branch& b, int rank) {
    for (int d = 0; d < rank; ++d) {
        const DimBound& da = a.write->dims[static_cast<size_t>(d)];
        const DimBound& db = b.write->dims[static_cast<size_t>(d)];
        auto lo_ok = sym::const_val(sym::sub(da.lb, db.lb));
        auto hi_ok = sym::const_val(sym::sub(db.ub, da.ub));
        if (!lo_ok || lo_ok->sign() < 0 || !hi_ok || hi_ok->sign() < 0) return false;
        if (db.mod_constrained() && !dim_bound_eq(da, db)) return false;
    }
    return true;
}

}  // namespace lift_detail

// Step 3: point-wise to region-wise rewriting via the affine last-writer
// analysis; pass-through (idempotent) on branches already in region form.
inline GeneralizedSummary generalize(const Summary& s, const LoopCtx& loop) {
    if (!s.is_array())
        throw Error(ErrorCode::NonAffineBinding, "generalize needs an array summary");
    GeneralizedSummary gen;
    gen.time_var = loop.t();
    gen.step = loop.step();
    Summary out = s;
    std::vector<Branch> result;
    std::vector<bool> fresh;  // derived from a this-sweep point write
    for (const auto& b : out.branches) {
        if (!b.write) {
            // guard-only branch: must already be independent of the counter
            if (!lift_detail::t_free(b.value, loop.t()) || !lift_detail::t_free(b.guard, loop.t()))
                throw Error(ErrorCode::NonAffineBinding,
                            "cannot generalize a branch without write metadata");
            result.push_back(b);
            fresh.push_back(false);
            continue;
        }
        Branch staged = b;
        if (b.write->kind == WriteMeta::Kind::Point) {
            auto x = lift_detail::to_xform_region(b, loop, out.rank);
            if (!x)
                throw Error(ErrorCode::NonAffineBinding,
                            "write position is not affine in the iteration variable");
            staged = *x;
        }
        result.push_back(lift_detail::widen_region(staged, loop, out.rank));
        fresh.push_back(b.write->kind == WriteMeta::Kind::Point);
    }
    out.branches = std::move(result);
    if (!lift_detail::t_free(out.def, loop.t()))
        throw Error(ErrorCode::NonAffineBinding, "default expression depends on the iteration variable");

    // Last-writer resolution between rounds: a fresh write supersedes a
    // carried claim wherever both apply. Overlaps that are neither equal nor
    // resolvable this way are surfaced, not silently decided.
    for (size_t i = 0; i < out.branches.size(); ++i) {
        for (size_t j = 0; j < out.branches.size(); ++j) {
            if (i == j) continue;
            Branch& bi = out.branches[i];
            Branch& bj = out.branches[j];
            if (!bi.write || !bj.write) continue;
            if (!fresh[i] || fresh[j]) continue;  // resolve fresh over carried only
            if (lift_detail::regions_disjoint(bi, bj, out.rank)) continue;
            if (sym::expr_eq(bi.value, bj.value)) continue;
            if (lift_detail::region_within(bj, bi, out.rank)) {
                bj.guard = sym::conj2(bj.guard, sym::negate(bi.guard));
            } else {
                throw Error(ErrorCode::InconsistentOverlap,
                            "carried branch overlaps a fresh write without containment");
            }
        }
    }
    drop_false_branches(out);

    // absorb regions subsumed by an equal-valued sibling
    for (size_t i = 0; i < out.branches.size(); ++i) {
        for (size_t j = 0; j < out.branches.size();) {
            if (i == j) { ++j; continue; }
            const Branch& big = out.branches[i];
            const Branch& small = out.branches[j];
            if (big.write && small.write && sym::expr_eq(big.value, small.value) &&
                sym::cond_eq(big.guard, small.guard) &&
                lift_detail::region_within(small, big, out.rank) &&
                !lift_detail::region_within(big, small, out.rank)) {
                out.branches.erase(out.branches.begin() + static_cast<long>(j));
                if (j < i) --i;
            } else {
                ++j;
            }
        }
    }

    // remaining overlaps must agree
    for (size_t i = 0; i < out.branches.size(); ++i)
        for (size_t j = i + 1; j < out.branches.size(); ++j) {
            if (lift_detail::regions_disjoint(out.branches[i], out.branches[j], out.rank)) continue;
            if (sym::expr_eq(out.branches[i].value, out.branches[j].value)) continue;
            throw Error(ErrorCode::InconsistentOverlap,
                        "branches " + std::to_string(i) + " and " + std::to_string(j) +
                            " may overlap with different expressions");
        }
    canonicalize(out);
    gen.region_form = std::move(out);
    return gen;
}

// Step 5 check: canonical structural equality of two generalized summaries.
inline bool check_converged(const GeneralizedSummary& a, const GeneralizedSummary& b) {
    if (a.time_var != b.time_var) return false;
    Summary x = a.region_form;
    Summary y = b.region_form;
    canonicalize(x);
    canonicalize(y);
    return summary_struct_eq(x, y);
}

// ---- the lifter ---------------------------------------------------------------

struct LiftOutcome {
    Summary post;                   // record postcondition, iteration variable instantiated
    std::vector<SccStats> stats;
    int total_sweeps = 0;
    std::map<int, Summary> region_posts;
};

class Lifter {
public:
    Lifter(InvariantGraph& g, LiftOptions opt = {}) : g_(g), opt_(opt) {
        ctx_.graph = &g_;
        ctx_.region_posts = &region_posts_;
        ctx_.record_name = g_.mod->has_field_dim ? "out" : g_.mod->outputs[0].array;
    }

    LiftOutcome run() {
        LiftOutcome out;
        out.post = lift_region(g_.mod->top_region);
        out.stats = stats_;
        for (const auto& s : stats_) out.total_sweeps += s.sweeps;
        out.region_posts = region_posts_;
        return out;
    }

    // Algorithm 1 over one region's subgraph; returns the instantiated
    // postcondition in the region's formal terms. Memoized.
    Summary lift_region(int rid) {
        auto memo = region_posts_.find(rid);
        if (memo != region_posts_.end()) return memo->second;
        const Region& r = g_.mod->region(rid);
        LoopCtx loop{&r};

        SccDag dag = build_scc_dag_region(rid);
        trace("level " + std::to_string(r.level) + " region @" + std::to_string(rid) + ": " +
              std::to_string(dag.components.size()) + " sccs");

        for (size_t oi = 0; oi < dag.order.size(); ++oi) {
            int comp = dag.order[static_cast<size_t>(oi)];
            const std::vector<int>& members = dag.components[static_cast<size_t>(comp)];
            // Phase 2: descend into inner loops first
            for (int v : members)
                if (g_.op_of(v).kind == OpKind::Loopcall) lift_region(g_.op_of(v).callee_region);
            // Phase 3: iterative extraction
            extract_within_scc(members, dag.trivial(comp, g_), loop, static_cast<int>(oi));
        }

        int post_vertex = post_vertex_of(rid);
        Summary post = g_.summaries[static_cast<size_t>(post_vertex)];
        if (!eliminated_.count(post_vertex)) {
            sym::SymSubst at_end;
            at_end[r.counter] = last_counter(r);
            post = summary_substitute(post, at_end);
            canonicalize(post);
        }
        region_posts_[rid] = post;
        return post;
    }

    // Iterative semantic extraction (the five steps) for one SCC.
    void extract_within_scc(const std::vector<int>& members, bool trivial, const LoopCtx& loop,
                            int order_index) {
        SccStats st;
        st.region = loop.region->id;
        st.level = loop.region->level;
        st.scc_index = order_index;

        if (trivial) {
            int v = members[0];
            g_.summaries[static_cast<size_t>(v)] = compute_vertex_summary(v, loop);
            return;  // direct rule application; not recorded in stats
        }

        if (opt_.vertex_elim && try_vertex_elimination(members, loop, st)) {
            stats_.push_back(st);
            return;
        }

        int start = select_start_vertex(members);
        st.start_vertex = start;
        trace("  scc " + std::to_string(order_index + 1) + " start=v" + std::to_string(start) + " (" +
              g_.op_of(start).var + ")");

        // Step 1: initialize breakers from their external predecessors
        std::vector<int> breakers = header_phis(members);
        if (std::find(breakers.begin(), breakers.end(), start) == breakers.end())
            breakers.push_back(start);
        std::sort(breakers.begin(), breakers.end());
        for (int b : breakers) g_.summaries[static_cast<size_t>(b)] = initial_summary(b, members);

        std::vector<int> body_order = sweep_order(members, breakers);

        std::map<int, GeneralizedSummary> prev;
        std::string overlap_note;
        bool have_prev = false;
        for (;;) {
            // Step 2 / Step 4: forward sweep
            forward_sweep(body_order, breakers, start, loop);
            ++st.sweeps;

            int ne = 0;
            for (int b : breakers)
                ne = std::max(ne, static_cast<int>(g_.summaries[static_cast<size_t>(b)].branches.size()));
            st.branch_counts.push_back(ne);
            ++st.gen_rounds;

            if (opt_.equiv_check)
                for (int b : breakers)
                    g_.summaries[static_cast<size_t>(b)] =
                        equivalence_check(g_.summaries[static_cast<size_t>(b)], loop);

            // Step 3: generalize each breaker. A failure here (overlap or
            // non-affine growth) means the hypothesis cannot stabilize; keep
            // sweeping so the cap turns it into a diagnostic.
            std::map<int, GeneralizedSummary> gens;
            bool gens_ok = true;
            try {
                for (int b : breakers) {
                    gens[b] = generalize(g_.summaries[static_cast<size_t>(b)], loop);
                    if (opt_.trace)
                        trace("  round " + std::to_string(st.gen_rounds) + " v" + std::to_string(b) +
                              " N_e=" +
                              std::to_string(gens[b].region_form.branches.size()) +
                              " generalized:\n" + indent(summary_str(gens[b].region_form)));
                }
            } catch (const Error& e) {
                if (e.code != ErrorCode::InconsistentOverlap && e.code != ErrorCode::NonAffineBinding)
                    throw;
                overlap_note = std::string("last generalization: ") + e.what();
                gens_ok = false;
            }

            // Step 5: a fixed point is reached when this round's generalized
            // forms match the previous round's. The stored summaries stay as
            // the sweep's rule outputs.
            if (gens_ok && have_prev) {
                bool all_equal = true;
                for (int b : breakers)
                    if (!check_converged(gens.at(b), prev.at(b))) {
                        all_equal = false;
                        break;
                    }
                if (all_equal) {
                    trace("  scc " + std::to_string(order_index + 1) + " converged after " +
                          std::to_string(st.sweeps) + " sweeps (" + std::to_string(st.gen_rounds) +
                          " generalization rounds)");
                    // settle: recompute the scc from the converged summaries so
                    // every stored value is its own rule's output (a no-op for
                    // phi cycles, which are already at the fixed point)
                    forward_sweep(body_order, breakers, start, loop);
                    break;
                }
            }
            if (st.sweeps >= opt_.max_sweeps) {
                std::string detail = "scc " + std::to_string(order_index + 1) + " at level " +
                                     std::to_string(loop.region->level) + " exceeded the sweep cap " +
                                     std::to_string(opt_.max_sweeps);
                if (!overlap_note.empty()) detail += "\n" + overlap_note;
                if (have_prev && !breakers.empty()) {
                    detail += "\nlast generalized form:\n" +
                              summary_str(prev.at(breakers[0]).region_form) +
                              "current sweep result:\n" +
                              summary_str(g_.summaries[static_cast<size_t>(breakers[0])]);
                }
                throw Error(ErrorCode::SweepCapExceeded, detail);
            }

            // Step 4 setup: sweep again from the generalized hypothesis; the
            // one-iteration shift happens at the rules' read side
            if (gens_ok) {
                for (int b : breakers) g_.summaries[static_cast<size_t>(b)] = gens[b].region_form;
                prev = std::move(gens);
                have_prev = true;
            }
        }
        stats_.push_back(st);
    }

    // external predecessor whose summary can seed the start vertex: the
    // phi's initial value, or an array-state predecessor outside the scc
    int external_seed(int v, const std::set<int>& in_scc) const {
        const Operation& o = g_.op_of(v);
        if (o.kind == OpKind::Phi && !o.init.is_leaf()) {
            int iv = g_.vertex_for(g_.vertex(v).region, o.init.op);
            if (!in_scc.count(iv)) return iv;
        }
        for (int p : g_.preds[static_cast<size_t>(v)]) {
            if (in_scc.count(p)) continue;
            if (o.dtype == DataType::Array && g_.op_of(p).dtype != DataType::Array) continue;
            return p;
        }
        return -1;
    }

    // Step 1 of Alg. 2: prefer a phi vertex with an externally summarized
    // predecessor, tie-break by lowest id.
    int select_start_vertex(const std::vector<int>& members) const {
        std::set<int> in_scc(members.begin(), members.end());
        int best = -1, best_rank = 99;
        for (int v : members) {
            if (external_seed(v, in_scc) < 0) continue;
            const Operation& o = g_.op_of(v);
            int rank = (o.kind == OpKind::Phi && o.header && o.dtype == DataType::Array) ? 0
                       : o.kind == OpKind::Phi                                           ? 1
                       : o.dtype == DataType::Array                                      ? 2
                                                                                         : 3;
            if (rank < best_rank || (rank == best_rank && v < best)) {
                best = v;
                best_rank = rank;
            }
        }
        if (best < 0)
            throw Error(ErrorCode::NoStartVertex,
                        "no vertex in the scc has an externally summarized predecessor");
        return best;
    }

    // deterministic rule application incl. the header-phi canonicalization
    Summary compute_vertex_summary(int v, const LoopCtx& loop) {
        auto elim = elim_records_.find(v);
        if (elim != elim_records_.end()) return eliminated_loopcall_summary(v, loop);
        Summary s = apply_rule(ctx_, v);
        const Operation& o = g_.op_of(v);
        if (o.kind == OpKind::Phi && o.header && o.dtype == DataType::Array) {
            coalesce(s, loop);
            canonicalize(s);
        }
        return s;
    }

    // Definition 8 re-applied after the fact: every stored summary must be
    // reproduced exactly by its rule.
    bool recheck_self_consistency(std::string* first_mismatch = nullptr) {
        for (const auto& r : g_.mod->regions) {
            LoopCtx loop{&r};
            for (const auto& o : r.ops) {
                if (o.kind == OpKind::Return) continue;
                int v = g_.vertex_for(r.id, o.id);
                if (eliminated_.count(v)) continue;
                Summary again = compute_vertex_summary(v, loop);
                if (!summary_struct_eq(again, g_.summaries[static_cast<size_t>(v)])) {
                    if (first_mismatch)
                        *first_mismatch = "v" + std::to_string(v) + " (" + o.var + ")\nstored:\n" +
                                          summary_str(g_.summaries[static_cast<size_t>(v)]) +
                                          "recomputed:\n" + summary_str(again);
                    return false;
                }
            }
        }
        return true;
    }

    const std::map<int, Summary>& region_posts() const { return region_posts_; }
    const std::vector<SccStats>& stats() const { return stats_; }
    const std::set<int>& eliminated_vertices() const { return eliminated_; }

    int post_vertex_of(int rid) const {
        auto it = post_override_.find(rid);
        if (it != post_override_.end()) return it->second;
        const Region& r = g_.mod->region(rid);
        return g_.vertex_for(rid, r.output_phi);
    }

private:
    InvariantGraph& g_;
    LiftOptions opt_;
    RuleContext ctx_;
    std::map<int, Summary> region_posts_;
    std::vector<SccStats> stats_;
    std::set<int> eliminated_;                 // removed phi vertices
    std::map<int, int> elim_records_;          // loopcall vertex -> init vertex
    std::map<int, int> post_override_;         // region -> post vertex after elimination

    void trace(const std::string& line) {
        if (opt_.trace && opt_.trace_out) (*opt_.trace_out) << "[lift] " << line << "\n";
    }
    static std::string indent(const std::string& text) {
        std::string out;
        size_t start = 0;
        while (start < text.size()) {
            size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            out += "    " + text.substr(start, end - start) + "\n";
            start = end + 1;
        }
        return out;
    }

    std::vector<int> header_phis(const std::vector<int>& members) const {
        std::vector<int> out;
        for (int v : members) {
            const Operation& o = g_.op_of(v);
            if (o.kind == OpKind::Phi && o.header && o.dtype == DataType::Array) out.push_back(v);
        }
        return out;
    }

    Summary initial_summary(int v, const std::vector<int>& members) const {
        std::set<int> in_scc(members.begin(), members.end());
        int seed = external_seed(v, in_scc);
        if (seed < 0)
            throw Error(ErrorCode::NoStartVertex, "vertex v" + std::to_string(v) + " has no external input");
        return g_.summaries[static_cast<size_t>(seed)];
    }

    // topological order of the SCC body with breaker-sourced edges cut
    std::vector<int> sweep_order(const std::vector<int>& members, const std::vector<int>& breakers) const {
        std::set<int> in_scc(members.begin(), members.end());
        std::set<int> brk(breakers.begin(), breakers.end());
        std::map<int, int> indeg;
        for (int v : members) {
            if (brk.count(v)) continue;
            indeg[v] = 0;
            for (int p : g_.preds[static_cast<size_t>(v)])
                if (in_scc.count(p) && !brk.count(p)) indeg[v]++;
        }
        std::vector<int> ready;
        for (const auto& [v, d] : indeg)
            if (d == 0) ready.push_back(v);
        std::sort(ready.begin(), ready.end());
        std::vector<int> order;
        while (!ready.empty()) {
            int v = ready.front();
            ready.erase(ready.begin());
            order.push_back(v);
            for (int w : g_.succs[static_cast<size_t>(v)]) {
                if (!in_scc.count(w) || brk.count(w)) continue;
                if (--indeg[w] == 0)
                    ready.insert(std::lower_bound(ready.begin(), ready.end(), w), w);
            }
        }
        if (order.size() != indeg.size())
            throw Error(ErrorCode::NoStartVertex,
                        "scc body is cyclic after removing merge vertices");
        return order;
    }

    // Step 2: one full rule-application traversal; start updated last.
    void forward_sweep(const std::vector<int>& body_order, const std::vector<int>& breakers,
                       int start, const LoopCtx& loop) {
        for (int v : body_order)
            g_.summaries[static_cast<size_t>(v)] = compute_vertex_summary(v, loop);
        for (int b : breakers)
            if (b != start) g_.summaries[static_cast<size_t>(b)] = compute_vertex_summary(b, loop);
        g_.summaries[static_cast<size_t>(start)] = compute_vertex_summary(start, loop);
    }

    // 6.4.5: a {loopcall, phi} SCC whose inner postcondition sweeps the same
    // dimension as this loop's index collapses to a re-indexed postcondition.
    bool try_vertex_elimination(const std::vector<int>& members, const LoopCtx& loop, SccStats& st) {
        if (members.size() != 2) return false;
        int lc = -1, phi = -1;
        for (int v : members) {
            const Operation& o = g_.op_of(v);
            if (o.kind == OpKind::Loopcall) lc = v;
            if (o.kind == OpKind::Phi && o.header && o.dtype == DataType::Array) phi = v;
        }
        if (lc < 0 || phi < 0) return false;
        const Operation& phi_op = g_.op_of(phi);
        if (phi_op.arms.size() != 1 || phi_op.arms[0].value.is_leaf() ||
            g_.vertex_for(g_.vertex(phi).region, phi_op.arms[0].value.op) != lc)
            return false;
        if (phi_op.init.is_leaf()) return false;
        try {
            Summary widened = eliminated_loopcall_summary_impl(lc, phi, loop);
            // the phi vertex is removed and the output relinks to the loopcall
            eliminated_.insert(phi);
            elim_records_[lc] = g_.vertex_for(g_.vertex(phi).region, phi_op.init.op);
            post_override_[g_.vertex(phi).region] = lc;
            g_.summaries[static_cast<size_t>(lc)] = std::move(widened);
            st.eliminated = true;
            st.start_vertex = lc;
            trace("  scc " + std::to_string(st.scc_index + 1) + " vertex elimination: phi v" +
                  std::to_string(phi) + " removed, post from loopcall v" + std::to_string(lc));
            return true;
        } catch (const Error& e) {
            if (e.code == ErrorCode::PatternMismatch || e.code == ErrorCode::NonAffineBinding ||
                e.code == ErrorCode::MissingPostcondition)
                return false;  // ordinary extraction path
            throw;
        }
    }

    Summary eliminated_loopcall_summary(int lc, const LoopCtx& loop) {
        int init = elim_records_.at(lc);
        return eliminated_loopcall_summary_for_init(lc, init, loop);
    }

    Summary eliminated_loopcall_summary_impl(int lc, int phi, const LoopCtx& loop) {
        const Operation& phi_op = g_.op_of(phi);
        int init = g_.vertex_for(g_.vertex(phi).region, phi_op.init.op);
        return eliminated_loopcall_summary_for_init(lc, init, loop);
    }

    Summary eliminated_loopcall_summary_for_init(int lc, int init, const LoopCtx& loop) {
        // inner postcondition over the loop-initial state, widened across all
        // iterations of this loop and instantiated at the final counter
        const Summary& init_sum = g_.summaries[static_cast<size_t>(init)];
        const Operation& lco = g_.op_of(lc);
        std::map<std::string, rules_detail::ArrayBinding> override_state;
        for (const auto& [formal, actual] : lco.bindings) {
            if (actual.is_leaf()) continue;
            const Region& callee = g_.mod->region(lco.callee_region);
            auto fit = callee.formals.find(formal);
            if (fit == callee.formals.end()) continue;
            if (callee.op(fit->second).dtype != DataType::Array) continue;
            int actual_v = g_.vertex_for(g_.vertex(lc).region, actual.op);
            if (g_.op_of(actual_v).kind == OpKind::Phi && g_.op_of(actual_v).header)
                override_state[formal] = {false, "", &init_sum};
        }
        if (override_state.empty())
            throw Error(ErrorCode::PatternMismatch, "loopcall does not read the loop-carried state");
        Summary post = apply_loopcall_rule(ctx_, lc, &override_state);
        // tiling signature: this loop's index must advance a dimension the
        // inner levels already sweep as a range (inter-tile over intra-tile);
        // a point-width sweep is the ordinary accumulation case
        bool tiled = false;
        for (const auto& b : post.branches) {
            if (!b.write || b.write->kind != WriteMeta::Kind::Region) continue;
            for (const auto& d : b.write->dims) {
                Rational alb = lift_detail::coeff_of(d.lb, loop.t());
                Rational aub = lift_detail::coeff_of(d.ub, loop.t());
                if (alb.is_zero() || alb != aub) continue;
                auto span = sym::const_val(sym::sub(d.ub, d.lb));
                if (span && span->sign() > 0) tiled = true;
            }
        }
        if (!tiled)
            throw Error(ErrorCode::PatternMismatch,
                        "'" + loop.t() + "' does not extend an inner-swept range dimension");
        GeneralizedSummary gen = generalize(post, loop);
        Summary widened = gen.region_form;
        sym::SymSubst at_end;
        at_end[loop.t()] = last_counter(*loop.region);
        widened = summary_substitute(widened, at_end);
        canonicalize(widened);
        return widened;
    }

    // SCC DAG restricted to one region's vertices
    SccDag build_scc_dag_region(int rid) const {
        const Region& r = g_.mod->region(rid);
        return build_scc_dag_for(g_, [this, rid](int v) { return g_.vertex(v).region == rid; },
                                 r.level);
    }
};

}  // namespace stlift
