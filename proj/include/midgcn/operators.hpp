#pragma once

#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "midgcn/csr.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/graph.hpp"

namespace midgcn {

enum class OperatorKind { adjacency_hat, laplacian };

inline const char* operator_kind_name(OperatorKind k) {
    return k == OperatorKind::adjacency_hat ? "adjacency_hat" : "laplacian";
}

struct NormalizedOperator {
    CsrMatrix matrix;
    OperatorKind kind = OperatorKind::adjacency_hat;
    bool with_self_loops = false;
    std::uint64_t graph_hash = 0;
    std::vector<double> inv_sqrt_deg;   // 0 for isolated nodes

    int n() const { return matrix.n; }
};

/// D^{-1/2} A D^{-1/2}, optionally on A + I. Isolated nodes produce empty
/// rows rather than NaN.
inline NormalizedOperator normalized_adjacency(const Graph& g, bool with_self_loops = false) {
    std::vector<int> deg(static_cast<std::size_t>(g.n));
    for (int u = 0; u < g.n; ++u)
        deg[static_cast<std::size_t>(u)] = g.degree(u) + (with_self_loops ? 1 : 0);

    std::vector<double> inv_sqrt(static_cast<std::size_t>(g.n), 0.0);
    for (int u = 0; u < g.n; ++u)
        if (deg[static_cast<std::size_t>(u)] > 0)
            inv_sqrt[static_cast<std::size_t>(u)] = 1.0 / std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(u)]));

    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(g.col_idx.size() + (with_self_loops ? static_cast<std::size_t>(g.n) : 0));
    for (int u = 0; u < g.n; ++u) {
        const double su = inv_sqrt[static_cast<std::size_t>(u)];
        if (with_self_loops && deg[static_cast<std::size_t>(u)] > 0)
            entries.emplace_back(u, u, su * su);
        for (int v : g.neighbors(u))
            entries.emplace_back(u, v, su * inv_sqrt[static_cast<std::size_t>(v)]);
    }

    NormalizedOperator op;
    op.matrix = CsrMatrix::from_entries(g.n, entries);
    op.kind = OperatorKind::adjacency_hat;
    op.with_self_loops = with_self_loops;
    op.graph_hash = g.hash();
    op.inv_sqrt_deg = std::move(inv_sqrt);
    return op;
}

/// I - D^{-1/2} A D^{-1/2}. Diagonal is 1 for every node, including
/// isolated ones.
inline NormalizedOperator laplacian(const Graph& g, bool with_self_loops = false) {
    NormalizedOperator a = normalized_adjacency(g, with_self_loops);
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(a.matrix.col_idx.size() + static_cast<std::size_t>(g.n));
    for (int u = 0; u < g.n; ++u) {
        bool saw_diag = false;
        for (std::size_t k = a.matrix.row_ptr[static_cast<std::size_t>(u)];
             k < a.matrix.row_ptr[static_cast<std::size_t>(u) + 1]; ++k) {
            const int v = a.matrix.col_idx[k];
            const double w = a.matrix.values[k];
            if (v == u) {
                entries.emplace_back(u, u, 1.0 - w);
                saw_diag = true;
            } else {
                entries.emplace_back(u, v, -w);
            }
        }
        if (!saw_diag) entries.emplace_back(u, u, 1.0);
    }
    NormalizedOperator op;
    op.matrix = CsrMatrix::from_entries(g.n, entries);
    op.kind = OperatorKind::laplacian;
    op.with_self_loops = with_self_loops;
    op.graph_hash = a.graph_hash;
    op.inv_sqrt_deg = std::move(a.inv_sqrt_deg);
    return op;
}

inline NormalizedOperator build_operator(const Graph& g, OperatorKind kind, bool with_self_loops = false) {
    return kind == OperatorKind::adjacency_hat ? normalized_adjacency(g, with_self_loops)
                                               : laplacian(g, with_self_loops);
}

} // namespace midgcn
