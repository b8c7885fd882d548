// Invariant graph: one invariant subgraph per loop level built directly
// from region bodies (loop indices stay symbolic), plus cross-level edges
// into Loopcall vertices and the dual map pairing Loopcall operands with
// the callee's formal input vertices.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stlift/ir.hpp"
#include "stlift/summary.hpp"

namespace stlift {

struct GVertex {
    int id = -1;          // global, stable
    int region = -1;
    int op = -1;          // op id within region
    int level = 1;
    // loop attribute (C, I): call context = enclosing counters, iteration = own counter
    std::vector<std::string> call_ctx;
    std::string iter_sym;
};

struct InvariantGraph {
    const IrModule* mod = nullptr;
    std::vector<GVertex> vertices;                  // id = index
    std::vector<std::vector<int>> preds;            // intra-level predecessor lists
    std::vector<std::vector<int>> succs;            // intra-level successor lists
    std::vector<std::pair<int, int>> cross_edges;   // (inner output vertex, loopcall vertex)
    std::vector<std::pair<int, int>> dual_map;      // (loopcall operand vertex, callee input vertex)
    std::map<std::pair<int, int>, int> by_op;       // (region, op) -> vertex id
    std::vector<std::vector<int>> level_vertices;   // [level-1] -> vertex ids in id order
    std::vector<Summary> summaries;                 // slot per vertex, written by lifting

    const Operation& op_of(int vid) const {
        const GVertex& v = vertices[static_cast<size_t>(vid)];
        return mod->region(v.region).op(v.op);
    }
    const GVertex& vertex(int vid) const { return vertices[static_cast<size_t>(vid)]; }
    int vertex_for(int region, int op) const {
        auto it = by_op.find({region, op});
        return it == by_op.end() ? -1 : it->second;
    }
    int levels() const { return static_cast<int>(level_vertices.size()); }
};

namespace graph_detail {

inline void add_edge(InvariantGraph& g, int from, int to) {
    if (from < 0 || to < 0 || from == to) {
        if (from == to && from >= 0) {
            // self loops are real (pass-through phi arms)
            g.preds[static_cast<size_t>(to)].push_back(from);
            g.succs[static_cast<size_t>(from)].push_back(to);
        }
        return;
    }
    g.preds[static_cast<size_t>(to)].push_back(from);
    g.succs[static_cast<size_t>(from)].push_back(to);
}

// counter-symbol dependency: attr expression referencing the region's own
// counter depends on the Bound vertex
inline void add_sym_edges(InvariantGraph& g, const Region& r, int bound_vertex,
                          const sym::ExprPtr& e, int to) {
    if (bound_vertex >= 0 && sym::contains_sym(e, r.counter)) add_edge(g, bound_vertex, to);
}

}  // namespace graph_detail

inline InvariantGraph build_invariant_graph(const IrModule& m) {
    InvariantGraph g;
    g.mod = &m;
    int max_level = 0;
    for (const auto& r : m.regions) max_level = std::max(max_level, r.level);
    g.level_vertices.resize(static_cast<size_t>(max_level));

    // enclosing counters per region, derived from loopcall nesting
    std::vector<std::vector<std::string>> ctx(m.regions.size());
    for (const auto& r : m.regions)
        for (const auto& o : r.ops)
            if (o.kind == OpKind::Loopcall) {
                ctx[static_cast<size_t>(o.callee_region)] = ctx[static_cast<size_t>(r.id)];
                ctx[static_cast<size_t>(o.callee_region)].push_back(r.counter);
            }

    // create vertices level by level, innermost first, creation order within a region
    for (int level = 1; level <= max_level; ++level) {
        for (const auto& r : m.regions) {
            if (r.level != level) continue;
            for (const auto& o : r.ops) {
                if (o.kind == OpKind::Return) continue;
                GVertex v;
                v.id = static_cast<int>(g.vertices.size());
                v.region = r.id;
                v.op = o.id;
                v.level = level;
                v.call_ctx = ctx[static_cast<size_t>(r.id)];
                v.iter_sym = r.counter;
                g.by_op[{r.id, o.id}] = v.id;
                g.level_vertices[static_cast<size_t>(level - 1)].push_back(v.id);
                g.vertices.push_back(std::move(v));
            }
        }
    }
    g.preds.resize(g.vertices.size());
    g.succs.resize(g.vertices.size());
    g.summaries.resize(g.vertices.size());

    // intra-level edges
    for (const auto& r : m.regions) {
        int bound_vertex = -1;
        for (const auto& o : r.ops)
            if (o.kind == OpKind::Bound) bound_vertex = g.vertex_for(r.id, o.id);
        for (const auto& o : r.ops) {
            if (o.kind == OpKind::Return) continue;
            int to = g.vertex_for(r.id, o.id);
            auto operand_edge = [&](const Operand& opnd) {
                if (opnd.is_leaf()) {
                    if (opnd.leaf) graph_detail::add_sym_edges(g, r, bound_vertex, opnd.leaf, to);
                } else {
                    graph_detail::add_edge(g, g.vertex_for(r.id, opnd.op), to);
                }
            };
            for (const auto& opnd : o.operands) operand_edge(opnd);
            for (const auto& ix : o.index) graph_detail::add_sym_edges(g, r, bound_vertex, ix, to);
            for (const auto& arm : o.arms) {
                operand_edge(arm.value);
                // conds reference the counter symbolically
                std::map<std::string, int> syms;
                sym::cond_collect_syms(arm.cond, syms);
                if (bound_vertex >= 0 && syms.count(r.counter))
                    graph_detail::add_edge(g, bound_vertex, to);
            }
            if (o.kind == OpKind::Phi && !o.init.is_leaf())
                graph_detail::add_edge(g, g.vertex_for(r.id, o.init.op), to);
            if (o.kind == OpKind::Loopcall) {
                for (const auto& [formal, actual] : o.bindings) operand_edge(actual);
            }
        }
    }

    // dedupe edges, keep deterministic order
    for (auto& lst : g.preds) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    for (auto& lst : g.succs) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }

    // cross-level edges and dual map
    for (const auto& r : m.regions) {
        for (const auto& o : r.ops) {
            if (o.kind != OpKind::Loopcall) continue;
            int call_vertex = g.vertex_for(r.id, o.id);
            const Region& callee = m.region(o.callee_region);
            int inner_out = g.vertex_for(callee.id, callee.output_phi >= 0
                                                        ? callee.output_phi
                                                        : callee.op(callee.ret_op).ret.op);
            g.cross_edges.push_back({inner_out, call_vertex});
            for (const auto& [formal, actual] : o.bindings) {
                if (actual.is_leaf()) continue;
                auto it = callee.formals.find(formal);
                if (it == callee.formals.end()) continue;
                g.dual_map.push_back(
                    {g.vertex_for(r.id, actual.op), g.vertex_for(callee.id, it->second)});
            }
        }
    }
    return g;
}

// ---- dumps -------------------------------------------------------------------

inline std::string vertex_label(const InvariantGraph& g, int vid) {
    const Operation& o = g.op_of(vid);
    std::string out = "v" + std::to_string(vid) + " " + op_kind_name(o.kind);
    if (!o.var.empty()) out += " " + o.var;
    return out;
}

inline std::string dump_graph(const InvariantGraph& g) {
    std::string out;
    for (int level = 1; level <= g.levels(); ++level) {
        out += "level " + std::to_string(level) + ":\n";
        for (int vid : g.level_vertices[static_cast<size_t>(level - 1)]) {
            const GVertex& v = g.vertex(vid);
            const Operation& o = g.op_of(vid);
            out += "  v" + std::to_string(vid) + " " + op_kind_name(o.kind);
            out += " var=" + o.var;
            out += " region=" + std::to_string(v.region);
            if (!g.preds[static_cast<size_t>(vid)].empty()) {
                out += " preds=";
                for (size_t i = 0; i < g.preds[static_cast<size_t>(vid)].size(); ++i) {
                    if (i) out += ",";
                    out += "v" + std::to_string(g.preds[static_cast<size_t>(vid)][i]);
                }
            }
            out += "\n";
        }
    }
    out += "cross:\n";
    for (const auto& [from, to] : g.cross_edges)
        out += "  v" + std::to_string(from) + " -> v" + std::to_string(to) + "\n";
    out += "dual:\n";
    for (const auto& [outer, inner] : g.dual_map)
        out += "  v" + std::to_string(outer) + " <-> v" + std::to_string(inner) + "\n";
    return out;
}

inline std::string dump_graph_dot(const InvariantGraph& g) {
    std::string out = "digraph invariant {\n  rankdir=TB;\n";
    for (int level = 1; level <= g.levels(); ++level) {
        out += "  subgraph cluster_l" + std::to_string(level) + " {\n    label=\"level " +
               std::to_string(level) + "\";\n";
        for (int vid : g.level_vertices[static_cast<size_t>(level - 1)]) {
            const Operation& o = g.op_of(vid);
            out += "    v" + std::to_string(vid) + " [label=\"" + op_kind_name(o.kind) + "\\n" +
                   o.var + "\"];\n";
        }
        out += "  }\n";
    }
    for (size_t to = 0; to < g.preds.size(); ++to)
        for (int from : g.preds[to])
            out += "  v" + std::to_string(from) + " -> v" + std::to_string(to) + ";\n";
    for (const auto& [from, to] : g.cross_edges)
        out += "  v" + std::to_string(from) + " -> v" + std::to_string(to) + " [style=dashed];\n";
    out += "}\n";
    return out;
}

}  // namespace stlift
