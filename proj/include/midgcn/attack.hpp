#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "midgcn/data.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/rng.hpp"

namespace midgcn {

namespace detail {

inline std::pair<int, int> ordered(int u, int v) { return u < v ? std::pair{u, v} : std::pair{v, u}; }

struct FlipState {
    std::set<std::pair<int, int>> original;   // clean edges, u < v
    std::set<std::pair<int, int>> touched;    // pairs already used by an op
    long long inserts_done = 0;

    explicit FlipState(const Graph& g) {
        for (const auto& e : g.edges()) original.insert(e);
    }

    bool blocked_for_insert(int u, int v) const {
        const auto p = ordered(u, v);
        return original.count(p) > 0 || touched.count(p) > 0;
    }
};

} // namespace detail

/// k = round(rate * |E|) non-conflicting operations; a fair coin picks
/// insert of a random absent pair or delete of a random clean edge, falling
/// back to the other kind when one pool runs dry.
inline EdgePerturbation random_flip(const Graph& g, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("rate must lie in [0, 1]");
    const long long k = std::llround(rate * static_cast<double>(g.edge_count()));
    EdgePerturbation p;
    if (k == 0) return p;

    Rng rng(mix_seed(seed, 0xf11bu));
    detail::FlipState st(g);
    std::vector<std::pair<int, int>> delete_pool = g.edges();
    const long long all_pairs = static_cast<long long>(g.n) * (g.n - 1) / 2;

    for (long long step = 0; step < k; ++step) {
        const long long insert_room = all_pairs - static_cast<long long>(st.original.size()) - st.inserts_done;
        const bool can_insert = insert_room > 0;
        const bool can_delete = !delete_pool.empty();
        if (!can_insert && !can_delete)
            throw DataError("random_flip: graph too small for the requested perturbation count");
        bool do_insert = rng.bernoulli(0.5);
        if (do_insert && !can_insert) do_insert = false;
        if (!do_insert && !can_delete) do_insert = true;

        if (do_insert) {
            int u = 0, v = 0;
            for (;;) {
                u = static_cast<int>(rng.index(static_cast<std::size_t>(g.n)));
                v = static_cast<int>(rng.index(static_cast<std::size_t>(g.n)));
                if (u != v && !st.blocked_for_insert(u, v)) break;
            }
            const auto pr = detail::ordered(u, v);
            st.touched.insert(pr);
            ++st.inserts_done;
            p.ops.push_back({pr.first, pr.second, EdgeOp::insert});
        } else {
            const std::size_t idx = rng.index(delete_pool.size());
            const auto pr = delete_pool[idx];
            delete_pool[idx] = delete_pool.back();
            delete_pool.pop_back();
            st.touched.insert(pr);
            p.ops.push_back({pr.first, pr.second, EdgeOp::remove});
        }
    }
    return p;
}

/// Half the operations delete intra-class edges, half insert absent
/// inter-class pairs; a depleted pool falls back to the other kind.
inline EdgePerturbation dice_attack(const Graph& g, const Labels& labels, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("rate must lie in [0, 1]");
    if (g.n != labels.n()) throw DataError("dice_attack: label count mismatch");
    const long long k = std::llround(rate * static_cast<double>(g.edge_count()));
    EdgePerturbation p;
    if (k == 0) return p;

    Rng rng(mix_seed(seed, 0xd1ceu));
    detail::FlipState st(g);

    std::vector<std::pair<int, int>> intra_pool;
    long long inter_edges = 0;
    for (const auto& [u, v] : g.edges()) {
        if (labels.y[static_cast<std::size_t>(u)] == labels.y[static_cast<std::size_t>(v)])
            intra_pool.push_back({u, v});
        else
            ++inter_edges;
    }

    std::vector<long long> class_count(static_cast<std::size_t>(labels.num_classes), 0);
    for (int y : labels.y) ++class_count[static_cast<std::size_t>(y)];
    long long diff_pairs = 0;
    for (std::size_t a = 0; a < class_count.size(); ++a)
        for (std::size_t b = a + 1; b < class_count.size(); ++b) diff_pairs += class_count[a] * class_count[b];

    for (long long step = 0; step < k; ++step) {
        const long long insert_room = diff_pairs - inter_edges - st.inserts_done;
        const bool can_insert = insert_room > 0;
        const bool can_delete = !intra_pool.empty();
        if (!can_insert && !can_delete)
            throw DataError("dice_attack: both operation pools are empty");
        bool do_delete = rng.bernoulli(0.5);
        if (do_delete && !can_delete) do_delete = false;
        if (!do_delete && !can_insert) do_delete = true;

        if (do_delete) {
            const std::size_t idx = rng.index(intra_pool.size());
            const auto pr = intra_pool[idx];
            intra_pool[idx] = intra_pool.back();
            intra_pool.pop_back();
            st.touched.insert(pr);
            p.ops.push_back({pr.first, pr.second, EdgeOp::remove});
        } else {
            int u = 0, v = 0;
            for (;;) {
                u = static_cast<int>(rng.index(static_cast<std::size_t>(g.n)));
                v = static_cast<int>(rng.index(static_cast<std::size_t>(g.n)));
                if (u == v) continue;
                if (labels.y[static_cast<std::size_t>(u)] == labels.y[static_cast<std::size_t>(v)]) continue;
                if (!st.blocked_for_insert(u, v)) break;
            }
            const auto pr = detail::ordered(u, v);
            st.touched.insert(pr);
            ++st.inserts_done;
            p.ops.push_back({pr.first, pr.second, EdgeOp::insert});
        }
    }
    return p;
}

/// Greedy label-disagreement attack on one node: inter-class insertions at
/// the target while any remain, then same-class incident deletions.
inline EdgePerturbation targeted_perturb(const Graph& g, const Labels& labels, int target,
                                         int n_perturbations, std::uint64_t seed) {
    if (n_perturbations < 1) throw ConfigError("n_perturbations must be at least 1");
    if (g.n != labels.n()) throw DataError("targeted_perturb: label count mismatch");
    if (target < 0 || target >= g.n) throw DataError("targeted_perturb: target out of range");

    Rng rng(mix_seed(seed, 0x7a36u));
    const int ty = labels.y[static_cast<std::size_t>(target)];
    std::set<std::pair<int, int>> touched;

    std::vector<int> same_class_neighbors;
    for (int w : g.neighbors(target))
        if (labels.y[static_cast<std::size_t>(w)] == ty) same_class_neighbors.push_back(w);

    EdgePerturbation p;
    for (int step = 0; step < n_perturbations; ++step) {
        std::vector<int> insert_candidates;
        for (int w = 0; w < g.n; ++w) {
            if (w == target || labels.y[static_cast<std::size_t>(w)] == ty) continue;
            if (g.has_edge(target, w)) continue;
            if (touched.count(detail::ordered(target, w))) continue;
            insert_candidates.push_back(w);
        }
        if (!insert_candidates.empty()) {
            const int w = insert_candidates[rng.index(insert_candidates.size())];
            const auto pr = detail::ordered(target, w);
            touched.insert(pr);
            p.ops.push_back({pr.first, pr.second, EdgeOp::insert});
        } else if (!same_class_neighbors.empty()) {
            const std::size_t idx = rng.index(same_class_neighbors.size());
            const int w = same_class_neighbors[idx];
            same_class_neighbors[idx] = same_class_neighbors.back();
            same_class_neighbors.pop_back();
            const auto pr = detail::ordered(target, w);
            touched.insert(pr);
            p.ops.push_back({pr.first, pr.second, EdgeOp::remove});
        } else {
            throw DataError("targeted_perturb: target has no modifiable incident structure");
        }
    }
    return p;
}

/// Toggles n_flips distinct positions of a binary feature matrix.
inline NodeFeatures feature_flip(const NodeFeatures& x, long long n_flips, std::uint64_t seed) {
    if (!x.is_binary) throw DataError("feature_flip: features must be binary");
    if (n_flips < 0) throw ConfigError("n_flips must be nonnegative");
    const long long total = static_cast<long long>(x.n()) * x.f();
    if (n_flips > total) throw DataError("feature_flip: n_flips exceeds matrix size");

    NodeFeatures out = x;
    Rng rng(mix_seed(seed, 0xfea7u));
    std::set<long long> chosen;
    if (n_flips > total / 2) {
        std::vector<long long> all(static_cast<std::size_t>(total));
        for (long long i = 0; i < total; ++i) all[static_cast<std::size_t>(i)] = i;
        rng.shuffle(all);
        chosen.insert(all.begin(), all.begin() + n_flips);
    } else {
        while (static_cast<long long>(chosen.size()) < n_flips)
            chosen.insert(static_cast<long long>(rng.index(static_cast<std::size_t>(total))));
    }
    for (long long pos : chosen) {
        const int i = static_cast<int>(pos / x.f());
        const int j = static_cast<int>(pos % x.f());
        out.values(i, j) = 1.0 - out.values(i, j);
    }
    return out;
}

/// Perturbation turning g_a into g_b: deletes first, then inserts, each in
/// sorted order.
inline EdgePerturbation diff_edges(const Graph& g_a, const Graph& g_b) {
    if (g_a.n != g_b.n) throw DataError("diff_edges: node-count mismatch");
    EdgePerturbation p;
    for (const auto& [u, v] : g_a.edges())
        if (!g_b.has_edge(u, v)) p.ops.push_back({u, v, EdgeOp::remove});
    for (const auto& [u, v] : g_b.edges())
        if (!g_a.has_edge(u, v)) p.ops.push_back({u, v, EdgeOp::insert});
    return p;
}

/// Reads an externally produced edge list; node count inferred from the
/// largest index when not supplied.
inline Graph load_perturbed(const std::string& path, std::optional<int> n = std::nullopt) {
    const auto pairs = read_edge_pairs(path);
    int nodes;
    if (n.has_value()) {
        nodes = *n;
    } else {
        if (pairs.empty()) throw DataError(path + ": empty edge list and no node count given");
        int max_idx = 0;
        for (const auto& [u, v] : pairs) max_idx = std::max({max_idx, u, v});
        nodes = max_idx + 1;
    }
    return Graph::from_edges(nodes, pairs);
}

inline void write_perturbation(const EdgePerturbation& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& op : p.ops)
        out << (op.op == EdgeOp::insert ? '+' : '-') << ' ' << op.u << ' ' << op.v << '\n';
}

inline EdgePerturbation read_perturbation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    EdgePerturbation p;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::comment_or_blank(line)) continue;
        std::istringstream ss(line);
        char sign;
        int u, v;
        if (!(ss >> sign >> u >> v) || (sign != '+' && sign != '-'))
            throw DataError(path + ":" + std::to_string(lineno) + ": expected '+ u v' or '- u v'");
        p.ops.push_back({u, v, sign == '+' ? EdgeOp::insert : EdgeOp::remove});
    }
    return p;
}

} // namespace midgcn
