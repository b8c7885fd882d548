// Kosaraju condensation of a level subgraph into a DAG of strongly
// connected components with a topological processing order.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "stlift/graph.hpp"

namespace stlift {

struct SccDag {
    std::vector<std::vector<int>> components;       // vertex ids, ascending
    std::vector<int> order;                         // component indices, topological
    std::vector<std::set<int>> comp_edges;          // component -> successor components
    std::map<int, int> comp_of;                     // vertex id -> component index

    bool trivial(int comp, const InvariantGraph& g) const {
        const auto& c = components[static_cast<size_t>(comp)];
        if (c.size() != 1) return false;
        int v = c[0];
        const auto& succ = g.succs[static_cast<size_t>(v)];
        return std::find(succ.begin(), succ.end(), v) == succ.end();
    }
};

// Kosaraju over the intra-level edges of a filtered vertex set.
template <typename Filter>
inline SccDag build_scc_dag_for(const InvariantGraph& g, Filter in_set, int level) {
    std::vector<int> verts;
    for (int v : g.level_vertices[static_cast<size_t>(level - 1)])
        if (in_set(v)) verts.push_back(v);
    std::set<int> in_level(verts.begin(), verts.end());

    // pass 1: finish-time order on the forward graph
    std::vector<int> order;
    std::set<int> seen;
    for (int root : verts) {
        if (seen.count(root)) continue;
        // iterative DFS with explicit post-visit
        std::vector<std::pair<int, size_t>> stack{{root, 0}};
        seen.insert(root);
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            const auto& succ = g.succs[static_cast<size_t>(v)];
            bool descended = false;
            while (i < succ.size()) {
                int w = succ[i++];
                if (!in_level.count(w) || seen.count(w)) continue;
                seen.insert(w);
                stack.push_back({w, 0});
                descended = true;
                break;
            }
            if (!descended && i >= succ.size()) {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }

    // pass 2: reverse graph in decreasing finish time
    SccDag dag;
    std::set<int> assigned;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int root = *it;
        if (assigned.count(root)) continue;
        std::vector<int> comp;
        std::vector<int> stack{root};
        assigned.insert(root);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (int w : g.preds[static_cast<size_t>(v)]) {
                if (!in_level.count(w) || assigned.count(w)) continue;
                assigned.insert(w);
                stack.push_back(w);
            }
        }
        std::sort(comp.begin(), comp.end());
        int idx = static_cast<int>(dag.components.size());
        for (int v : comp) dag.comp_of[v] = idx;
        dag.components.push_back(std::move(comp));
    }

    // component edges
    dag.comp_edges.resize(dag.components.size());
    for (int v : verts)
        for (int w : g.succs[static_cast<size_t>(v)]) {
            if (!in_level.count(w)) continue;
            int a = dag.comp_of[v];
            int b = dag.comp_of[w];
            if (a != b) dag.comp_edges[static_cast<size_t>(a)].insert(b);
        }

    // topological order over components; ties broken by smallest member id
    size_t n = dag.components.size();
    std::vector<int> indeg(n, 0);
    for (size_t c = 0; c < n; ++c)
        for (int d : dag.comp_edges[c]) indeg[static_cast<size_t>(d)]++;
    auto key = [&dag](int c) { return dag.components[static_cast<size_t>(c)].front(); };
    std::vector<int> ready;
    for (size_t c = 0; c < n; ++c)
        if (indeg[c] == 0) ready.push_back(static_cast<int>(c));
    std::sort(ready.begin(), ready.end(), [&key](int a, int b) { return key(a) < key(b); });
    while (!ready.empty()) {
        int c = ready.front();
        ready.erase(ready.begin());
        dag.order.push_back(c);
        for (int d : dag.comp_edges[static_cast<size_t>(c)]) {
            if (--indeg[static_cast<size_t>(d)] == 0) {
                auto pos = std::lower_bound(ready.begin(), ready.end(), d,
                                            [&key](int a, int b) { return key(a) < key(b); });
                ready.insert(pos, d);
            }
        }
    }
    return dag;
}

// Condensation of one level subgraph.
inline SccDag build_scc_dag(const InvariantGraph& g, int level) {
    return build_scc_dag_for(g, [](int) { return true; }, level);
}

}  // namespace stlift
