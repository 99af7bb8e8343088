#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "midgcn/errors.hpp"

namespace midgcn {

/// Undirected, unweighted simple graph. Adjacency is stored in compressed
/// row form with every edge present in both directions; no self-loops, no
/// duplicates, column indices sorted per row.
struct Graph {
    int n = 0;
    std::vector<int> row_ptr;   // size n + 1
    std::vector<int> col_idx;

    Graph() = default;

    /// Builds from undirected edge pairs. Pairs may appear in either or both
    /// orientations; duplicates collapse. With strict=true a pair present in
    /// only one orientation is an error instead of being symmetrized.
    static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges, bool strict = false) {
        if (n < 0) throw DataError("negative node count");
        std::set<std::pair<int, int>> directed;
        for (const auto& [u, v] : edges) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw DataError("edge index out of range: (" + std::to_string(u) + ", " + std::to_string(v) + ")");
            if (u == v) throw DataError("self-loop in edge list: node " + std::to_string(u));
            directed.insert({u, v});
        }
        if (strict) {
            for (const auto& [u, v] : directed)
                if (!directed.count({v, u}))
                    throw DataError("asymmetric edge in strict mode: (" + std::to_string(u) + ", " + std::to_string(v) + ")");
        }
        Graph g;
        g.n = n;
        g.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        std::set<std::pair<int, int>> sym;
        for (const auto& [u, v] : directed) {
            sym.insert({u, v});
            sym.insert({v, u});
        }
        g.col_idx.reserve(sym.size());
        for (const auto& [u, v] : sym) {
            g.row_ptr[static_cast<std::size_t>(u) + 1]++;
            g.col_idx.push_back(v);
        }
        for (int i = 0; i < n; ++i) g.row_ptr[static_cast<std::size_t>(i) + 1] += g.row_ptr[static_cast<std::size_t>(i)];
        return g;
    }

    int degree(int u) const { return row_ptr[static_cast<std::size_t>(u) + 1] - row_ptr[static_cast<std::size_t>(u)]; }

    std::span<const int> neighbors(int u) const {
        return {col_idx.data() + row_ptr[static_cast<std::size_t>(u)],
                static_cast<std::size_t>(degree(u))};
    }

    bool has_edge(int u, int v) const {
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Count of undirected edges.
    std::int64_t edge_count() const { return static_cast<std::int64_t>(col_idx.size()) / 2; }

    /// All undirected edges as (u, v) with u < v, lexicographically sorted.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(static_cast<std::size_t>(edge_count()));
        for (int u = 0; u < n; ++u)
            for (int v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    bool structurally_equal(const Graph& other) const {
        return n == other.n && row_ptr == other.row_ptr && col_idx == other.col_idx;
    }

    /// FNV-1a over the adjacency structure; used for provenance tags.
    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](std::uint64_t x) {
            for (int b = 0; b < 8; ++b) {
                h ^= (x >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        };
        mix(static_cast<std::uint64_t>(n));
        for (int v : col_idx) mix(static_cast<std::uint64_t>(v));
        for (int r : row_ptr) mix(static_cast<std::uint64_t>(r));
        return h;
    }
};

enum class EdgeOp { insert, remove };

/// Ordered list of edge insertions/deletions. Valid only against a graph
/// where each operation is applicable at its turn: inserts need the edge
/// absent, deletes need it present, and self-loops are never allowed.
struct EdgePerturbation {
    struct Op {
        int u = 0, v = 0;
        EdgeOp op = EdgeOp::insert;
        bool operator==(const Op&) const = default;
    };
    std::vector<Op> ops;

    bool empty() const { return ops.empty(); }
    std::size_t size() const { return ops.size(); }

    /// Swaps insert/delete and reverses order, undoing this perturbation.
    EdgePerturbation inverse() const {
        EdgePerturbation inv;
        inv.ops.reserve(ops.size());
        for (auto it = ops.rbegin(); it != ops.rend(); ++it)
            inv.ops.push_back({it->u, it->v, it->op == EdgeOp::insert ? EdgeOp::remove : EdgeOp::insert});
        return inv;
    }
};

/// Applies ops in order to a copy of g. The input graph is untouched.
inline Graph apply_perturbation(const Graph& g, const EdgePerturbation& p) {
    std::set<std::pair<int, int>> edge_set;
    for (const auto& [u, v] : g.edges()) edge_set.insert({u, v});
    for (const auto& op : p.ops) {
        if (op.u < 0 || op.u >= g.n || op.v < 0 || op.v >= g.n)
            throw DataError("perturbation index out of range");
        if (op.u == op.v) throw DataError("perturbation contains a self-loop op");
        const std::pair<int, int> key = std::minmax(op.u, op.v);
        if (op.op == EdgeOp::insert) {
            if (edge_set.count(key))
                throw DataError("insert of existing edge (" + std::to_string(op.u) + ", " + std::to_string(op.v) + ")");
            edge_set.insert(key);
        } else {
            if (!edge_set.count(key))
                throw DataError("delete of absent edge (" + std::to_string(op.u) + ", " + std::to_string(op.v) + ")");
            edge_set.erase(key);
        }
    }
    std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
    return Graph::from_edges(g.n, edges);
}

} // namespace midgcn
