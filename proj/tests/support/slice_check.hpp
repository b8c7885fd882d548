// Test oracle for the invariant-subgraph construction: unroll each loop into
// per-iteration slice graphs (one vertex per operation instance) and check
// that the identity-on-operations bijection reproduces the level subgraph
// edge-for-edge. Loop-carried reads connect an iteration's body to the
// previous iteration's latch value, which must map onto the phi cycle.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stlift/graph.hpp"

namespace stlift::testsupport {

struct SliceCheckResult {
    bool ok = true;
    std::string detail;
};

namespace slice_detail {

// concrete counter values of a region, bounds evaluated with params unset
// (test kernels use constant bounds)
inline std::vector<int64_t> counter_values(const Region& r, int64_t cap) {
    auto lo = sym::const_val(r.lo);
    auto hi = sym::const_val(r.hi);
    if (!lo || !hi) return {};
    std::vector<int64_t> out;
    for (int64_t v = lo->as_integer();
         r.step > 0 ? v <= hi->as_integer() : v >= hi->as_integer(); v += r.step) {
        out.push_back(v);
        if (static_cast<int64_t>(out.size()) > cap) return {};
    }
    return out;
}

}  // namespace slice_detail

// Verifies Definition-5 style slice projection for one region: for every
// iteration, instancing each op and mapping instances back by op id yields
// exactly the region's intra-level edges.
inline SliceCheckResult check_slice_projection(const InvariantGraph& g, int region_id,
                                               int64_t max_iters = 4) {
    SliceCheckResult res;
    const Region& r = g.mod->region(region_id);
    std::vector<int64_t> iters = slice_detail::counter_values(r, max_iters);
    if (iters.empty()) {
        res.ok = false;
        res.detail = "region bounds are not small constants";
        return res;
    }

    // expected edge set: intra-level predecessor edges of this region
    std::set<std::pair<int, int>> expected;
    for (const auto& o : r.ops) {
        if (o.kind == OpKind::Return) continue;
        int v = g.vertex_for(region_id, o.id);
        for (int p : g.preds[static_cast<size_t>(v)]) {
            if (g.vertex(p).region != region_id) continue;
            expected.insert({g.vertex(p).op, o.id});
        }
    }

    // slice instancing: vertex (op, iteration index n); edges by operand refs
    std::set<std::pair<int, int>> projected;
    int bound_op = -1;
    for (const auto& o : r.ops)
        if (o.kind == OpKind::Bound) bound_op = o.id;

    // Instance every op per iteration. Body reads of the loop-carried state
    // at iteration n come from the previous iteration's merge (n = 0 reads
    // the initial value through the merge's default slot); either way the
    // identity-on-ops bijection sends the edge to (phi, reader). Latch arms
    // are intra-slice. The projection must be the same for every slice,
    // which is exactly the invariant-subgraph claim.
    for (size_t n = 0; n < iters.size(); ++n) {
        std::set<std::pair<int, int>> slice_edges;
        for (const auto& o : r.ops) {
            if (o.kind == OpKind::Return) continue;
            auto operand_edges = [&](const Operand& opnd) {
                if (opnd.is_leaf()) {
                    if (opnd.leaf && sym::contains_sym(opnd.leaf, r.counter) && bound_op >= 0)
                        slice_edges.insert({bound_op, o.id});
                    return;
                }
                slice_edges.insert({r.op(opnd.op).id, o.id});
            };
            for (const auto& opnd : o.operands) operand_edges(opnd);
            for (const auto& ix : o.index)
                if (sym::contains_sym(ix, r.counter) && bound_op >= 0)
                    slice_edges.insert({bound_op, o.id});
            for (const auto& arm : o.arms) {
                operand_edges(arm.value);
                std::map<std::string, int> syms;
                sym::cond_collect_syms(arm.cond, syms);
                if (syms.count(r.counter) && bound_op >= 0) slice_edges.insert({bound_op, o.id});
            }
            if (o.kind == OpKind::Phi && !o.init.is_leaf())
                slice_edges.insert({r.op(o.init.op).id, o.id});
            if (o.kind == OpKind::Loopcall)
                for (const auto& [formal, actual] : o.bindings) operand_edges(actual);
        }
        if (n == 0) projected = slice_edges;
        if (slice_edges != projected) {
            res.ok = false;
            res.detail = "slice " + std::to_string(n) + " projects differently";
            return res;
        }
    }

    if (projected != expected) {
        res.ok = false;
        res.detail = "projected edges differ from the invariant subgraph:";
        for (const auto& [a, b] : expected)
            if (!projected.count({a, b}))
                res.detail += " missing(%" + std::to_string(a) + "->%" + std::to_string(b) + ")";
        for (const auto& [a, b] : projected)
            if (!expected.count({a, b}))
                res.detail += " extra(%" + std::to_string(a) + "->%" + std::to_string(b) + ")";
    }
    return res;
}

}  // namespace stlift::testsupport
