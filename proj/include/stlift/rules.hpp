// The seven summary rules. apply_rule computes a vertex's summary from its
// operation and its predecessors' summaries; header-phi predecessors are
// read time-shifted by one iteration (the state a loop body sees is the
// state after the previous iteration).
#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "stlift/graph.hpp"
#include "stlift/summary.hpp"

namespace stlift {

// Rule 7 needs the callee's postcondition; the lifter provides it.
struct RuleContext {
    const InvariantGraph* graph = nullptr;
    // region id -> instantiated postcondition over the callee's formal names
    const std::map<int, Summary>* region_posts = nullptr;
    // record display name
    std::string record_name;
};

namespace rules_detail {

inline const Summary& stored(const InvariantGraph& g, int vid) {
    return g.summaries[static_cast<size_t>(vid)];
}

// pred summary as seen from inside the same loop body: header phis shifted
inline Summary pred_summary(const InvariantGraph& g, int reader_region, int pred_vid) {
    const GVertex& pv = g.vertex(pred_vid);
    const Operation& po = g.op_of(pred_vid);
    const Summary& s = stored(g, pred_vid);
    if (po.kind == OpKind::Phi && po.header && pv.region == reader_region) {
        const Region& r = g.mod->region(pv.region);
        return shift_time(s, r.counter, -r.step);
    }
    return s;
}

inline Summary operand_summary(const InvariantGraph& g, int region, const Operand& o) {
    if (o.is_leaf()) return Summary::scalar(o.leaf);
    int vid = g.vertex_for(region, o.op);
    return pred_summary(g, region, vid);
}

inline ExprPtr apply_bin(ast::BinOp op, const ExprPtr& a, const ExprPtr& b) {
    switch (op) {
    case ast::BinOp::Add: return sym::add(a, b);
    case ast::BinOp::Sub: return sym::sub(a, b);
    case ast::BinOp::Mul: return sym::mul(a, b);
    case ast::BinOp::Div: return sym::div(a, b);
    case ast::BinOp::Mod: return sym::mod(a, b);
    }
    return a;
}

// ---- Rule 7 support: substitute formals in a callee postcondition ----------

struct ArrayBinding {
    bool rename = false;
    std::string new_name;       // rename case
    const Summary* state = nullptr;  // array-state case
};

// expand an expression whose Get leaves may read summary-bound arrays into a
// piecewise scalar summary
inline Summary expand_expr(const ExprPtr& e, const std::map<std::string, ArrayBinding>& arrays,
                           const sym::SymSubst& syms) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
        return Summary::scalar(e);
    case ExprKind::Sym:
        return Summary::scalar(sym::substitute(e, syms));
    case ExprKind::Sum: {
        Summary acc = Summary::scalar(sym::constant(e->konst));
        for (const auto& t : e->terms) {
            Summary part = expand_expr(t.term, arrays, syms);
            Rational c = t.coeff;
            part = map_summary(part, [&c](const ExprPtr& x) { return sym::scale(x, c); });
            acc = combine(acc, part, [](const ExprPtr& a, const ExprPtr& b) { return sym::add(a, b); });
        }
        return acc;
    }
    case ExprKind::Mul: {
        Summary acc = Summary::scalar(sym::constant(1));
        for (const auto& f : e->args) {
            Summary part = expand_expr(f, arrays, syms);
            acc = combine(acc, part, [](const ExprPtr& a, const ExprPtr& b) { return sym::mul(a, b); });
        }
        return acc;
    }
    case ExprKind::Div: {
        Summary a = expand_expr(e->args[0], arrays, syms);
        Summary b = expand_expr(e->args[1], arrays, syms);
        return combine(a, b, [](const ExprPtr& x, const ExprPtr& y) { return sym::div(x, y); });
    }
    case ExprKind::Mod: {
        Summary a = expand_expr(e->args[0], arrays, syms);
        Summary b = expand_expr(e->args[1], arrays, syms);
        return combine(a, b, [](const ExprPtr& x, const ExprPtr& y) { return sym::mod(x, y); });
    }
    case ExprKind::Get: {
        std::vector<ExprPtr> idx;
        idx.reserve(e->args.size());
        for (const auto& a : e->args) idx.push_back(sym::substitute(a, syms));
        auto it = arrays.find(e->name);
        if (it == arrays.end()) return Summary::scalar(sym::get(e->name, std::move(idx)));
        if (it->second.rename) return Summary::scalar(sym::get(it->second.new_name, std::move(idx)));
        return array_at(*it->second.state, idx);
    }
    }
    return Summary::scalar(e);
}

inline bool is_identity_default(const ExprPtr& def, const std::string& formal, int rank) {
    if (def->kind != sym::ExprKind::Get || def->name != formal) return false;
    if (static_cast<int>(def->args.size()) != rank) return false;
    for (int d = 0; d < rank; ++d)
        if (!sym::expr_eq(def->args[static_cast<size_t>(d)], pos_var(d))) return false;
    return true;
}

// Rule 7: the callee postcondition with each dual (formal) summary replaced
// by the corresponding actual predecessor summary.
inline Summary substitute_post(const Summary& post, const std::map<std::string, ArrayBinding>& arrays,
                               const sym::SymSubst& syms, const std::string& record_name) {
    Summary out;
    out.subject = Summary::Subject::Array;
    out.rank = post.rank;
    out.array = record_name;

    auto subst_meta = [&syms](const std::optional<WriteMeta>& w) -> std::optional<WriteMeta> {
        if (!w) return std::nullopt;
        WriteMeta m = *w;
        if (m.kind == WriteMeta::Kind::Point) {
            for (auto& p : m.pos) p = sym::substitute(p, syms);
        } else {
            for (auto& d : m.dims) {
                d.lb = sym::substitute(d.lb, syms);
                d.ub = sym::substitute(d.ub, syms);
            }
        }
        return m;
    };

    for (const auto& b : post.branches) {
        CondPtr guard = sym::cond_substitute(b.guard, syms);
        std::optional<WriteMeta> meta = subst_meta(b.write);
        Summary val = expand_expr(b.value, arrays, syms);
        if (val.branches.empty()) {
            out.branches.push_back({guard, meta, val.def});
        } else {
            for (const auto& vb : val.branches)
                out.branches.push_back({sym::conj2(guard, branch_cond(vb)), meta, vb.value});
            out.branches.push_back({sym::conj2(guard, none_of(val.branches)), meta, val.def});
        }
    }

    // default: the standard chain get(state, $1..$d) adopts the actual state's
    // branches directly so write metadata survives; anything else expands.
    bool handled = false;
    if (post.def->kind == sym::ExprKind::Get) {
        auto it = arrays.find(post.def->name);
        if (it != arrays.end() && it->second.state &&
            is_identity_default(post.def, post.def->name, post.rank)) {
            const Summary& st = *it->second.state;
            for (const auto& sb : st.branches) out.branches.push_back(sb);
            out.def = st.def;
            handled = true;
        }
    }
    if (!handled) {
        Summary dv = expand_expr(post.def, arrays, syms);
        for (const auto& vb : dv.branches)
            out.branches.push_back({branch_cond(vb), std::nullopt, vb.value});
        out.def = dv.def;
    }
    drop_false_branches(out);
    return out;
}

}  // namespace rules_detail

// Loopcall rule, exposed for the lifter (vertex elimination reuses it with a
// different state binding).
inline Summary apply_loopcall_rule(const RuleContext& ctx, int vid,
                                   const std::map<std::string, rules_detail::ArrayBinding>* state_override = nullptr) {
    const InvariantGraph& g = *ctx.graph;
    const GVertex& v = g.vertex(vid);
    const Operation& o = g.op_of(vid);
    auto post_it = ctx.region_posts->find(o.callee_region);
    if (post_it == ctx.region_posts->end())
        throw Error(ErrorCode::MissingPostcondition,
                    "inner region @" + std::to_string(o.callee_region) + " has no postcondition yet");
    const Region& callee = g.mod->region(o.callee_region);

    std::map<std::string, rules_detail::ArrayBinding> arrays;
    sym::SymSubst syms;
    std::vector<Summary> keep_alive;
    keep_alive.reserve(o.bindings.size());
    for (const auto& [formal, actual] : o.bindings) {
        auto fit = callee.formals.find(formal);
        if (fit == callee.formals.end()) continue;
        if (state_override && state_override->count(formal)) continue;  // bound by the caller
        const Operation& fin = callee.op(fit->second);
        Summary s = rules_detail::operand_summary(g, v.region, actual);
        if (fin.dtype == DataType::Array) {
            if (s.branches.empty() && s.def->kind == sym::ExprKind::Get &&
                rules_detail::is_identity_default(s.def, s.def->name, s.rank)) {
                arrays[formal] = {true, s.def->name, nullptr};
            } else {
                keep_alive.push_back(std::move(s));
                arrays[formal] = {false, "", &keep_alive.back()};
            }
        } else {
            if (!s.branches.empty())
                throw Error(ErrorCode::RuleMismatch, "scalar formal bound to a branched summary");
            syms[formal] = s.def;
        }
    }
    if (state_override)
        for (const auto& [k, vb] : *state_override) arrays[k] = vb;
    return rules_detail::substitute_post(post_it->second, arrays, syms, ctx.record_name);
}

// apply the rule dictated by (operation kind, predecessor summaries)
inline Summary apply_rule(const RuleContext& ctx, int vid) {
    const InvariantGraph& g = *ctx.graph;
    const GVertex& v = g.vertex(vid);
    const Operation& o = g.op_of(vid);

    switch (o.kind) {
    case OpKind::Input:  // Rule 1
        if (o.dtype == DataType::Array) return Summary::free_array(o.var, o.array_rank);
        return Summary::scalar(sym::symbol(o.var));

    case OpKind::Bound:  // Rule 2: ranged index, the range lives on the op
        return Summary::scalar(sym::symbol(o.var));

    case OpKind::Scalar: {  // Rule 3
        Summary a = rules_detail::operand_summary(g, v.region, o.operands[0]);
        Summary b = rules_detail::operand_summary(g, v.region, o.operands[1]);
        if (a.is_array() || b.is_array())
            throw Error(ErrorCode::RuleMismatch, "scalar operation over an array summary");
        ast::BinOp op = o.scalar_op;
        return combine(a, b, [op](const ExprPtr& x, const ExprPtr& y) {
            return rules_detail::apply_bin(op, x, y);
        });
    }

    case OpKind::Get: {  // Rule 4
        Summary arr = rules_detail::operand_summary(g, v.region, o.operands[0]);
        if (!arr.is_array())
            throw Error(ErrorCode::RuleMismatch, "get over a non-array summary");
        return array_at(arr, o.index);
    }

    case OpKind::Set: {  // Rule 5
        Summary base = rules_detail::operand_summary(g, v.region, o.operands[0]);
        Summary val = rules_detail::operand_summary(g, v.region, o.operands[1]);
        if (!base.is_array() || val.is_array())
            throw Error(ErrorCode::RuleMismatch, "set needs an array base and scalar value");
        return array_set(base, o.index, val);
    }

    case OpKind::Loopcall:  // Rule 7
        return apply_loopcall_rule(ctx, vid);

    case OpKind::Phi: {  // Rule 6
        Summary init = rules_detail::operand_summary(g, v.region, o.init);
        if (o.dtype == DataType::Array) {
            Summary out;
            out.subject = Summary::Subject::Array;
            out.rank = init.rank;
            out.array = ctx.record_name;
            out.def = init.def;
            for (const auto& arm : o.arms) {
                Summary s = rules_detail::operand_summary(g, v.region, arm.value);
                if (!s.is_array())
                    throw Error(ErrorCode::RuleMismatch, "array phi arm with scalar summary");
                for (const auto& b : s.branches)
                    out.branches.push_back({sym::conj2(arm.cond, b.guard), b.write, b.value});
                if (!sym::expr_eq(s.def, out.def))
                    out.branches.push_back(
                        {sym::conj2(arm.cond, none_of(s.branches)), std::nullopt, s.def});
            }
            drop_false_branches(out);
            // union identical branches across arms: exclusive arm guards merge
            std::vector<Branch> merged;
            for (auto& b : out.branches) {
                bool found = false;
                for (auto& m : merged) {
                    bool same_meta =
                        (!m.write && !b.write) ||
                        (m.write && b.write && sym::cond_eq(branch_cond(Branch{sym::ctrue(), m.write, m.value}),
                                                            branch_cond(Branch{sym::ctrue(), b.write, b.value})));
                    if (same_meta && sym::expr_eq(m.value, b.value)) {
                        m.guard = sym::disj({m.guard, b.guard});
                        found = true;
                        break;
                    }
                }
                if (!found) merged.push_back(b);
            }
            out.branches = std::move(merged);
            return out;  // the lifter coalesces and sorts
        }
        // scalar phi: guarded union of arm summaries, init as the final else
        Summary out;
        std::vector<CondPtr> arm_conds;
        for (const auto& arm : o.arms) {
            Summary s = rules_detail::operand_summary(g, v.region, arm.value);
            arm_conds.push_back(arm.cond);
            for (const auto& b : s.branches)
                out.branches.push_back({sym::conj({arm.cond, branch_cond(b)}), std::nullopt, b.value});
            out.branches.push_back({sym::conj2(arm.cond, none_of(s.branches)), std::nullopt, s.def});
        }
        CondPtr rest = sym::negate(sym::disj(std::move(arm_conds)));
        for (const auto& b : init.branches)
            out.branches.push_back({sym::conj2(rest, branch_cond(b)), std::nullopt, b.value});
        out.def = init.def;
        drop_false_branches(out);
        // a branch guarded true collapses the summary
        for (const auto& b : out.branches)
            if (branch_cond(b)->kind == sym::CondKind::True) return Summary::scalar(b.value);
        return out;
    }

    case OpKind::Return:
        throw Error(ErrorCode::Internal, "return has no summary rule");
    }
    throw Error(ErrorCode::RuleMismatch, "no rule for operation");
}

}  // namespace stlift
