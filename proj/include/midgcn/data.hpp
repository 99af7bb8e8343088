#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "midgcn/errors.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/rng.hpp"

namespace midgcn {

struct NodeFeatures {
    Eigen::MatrixXd values;   // n x f
    bool is_binary = false;

    int n() const { return static_cast<int>(values.rows()); }
    int f() const { return static_cast<int>(values.cols()); }

    static NodeFeatures from_matrix(Eigen::MatrixXd m) {
        if (m.cols() < 1) throw DataError("feature matrix needs at least one column");
        if (!m.allFinite()) throw DataError("feature matrix contains non-finite entries");
        NodeFeatures x;
        x.is_binary = ((m.array() == 0.0) || (m.array() == 1.0)).all();
        x.values = std::move(m);
        return x;
    }
};

struct Labels {
    std::vector<int> y;
    int num_classes = 0;

    int n() const { return static_cast<int>(y.size()); }

    static Labels from_vector(std::vector<int> v, int c) {
        if (c < 2) throw DataError("need at least two classes");
        for (int id : v)
            if (id < 0 || id >= c) throw DataError("label id out of range: " + std::to_string(id));
        return Labels{std::move(v), c};
    }
};

struct Split {
    std::vector<int> train, val, test;
};

/// Fraction of undirected edges joining same-class endpoints.
inline double edge_homophily(const Graph& g, const Labels& labels) {
    if (g.n != labels.n()) throw DataError("homophily: label count mismatch");
    std::int64_t intra = 0, total = 0;
    for (const auto& [u, v] : g.edges()) {
        ++total;
        if (labels.y[static_cast<std::size_t>(u)] == labels.y[static_cast<std::size_t>(v)]) ++intra;
    }
    if (total == 0) return 0.0;
    return static_cast<double>(intra) / static_cast<double>(total);
}

/// Uniform train/val/test split: floor(frac * n) nodes each for train and
/// val, remainder test. Deterministic per seed.
inline Split random_split(const Labels& labels, double train_frac, double val_frac, std::uint64_t seed) {
    if (train_frac <= 0.0 || val_frac <= 0.0) throw ConfigError("split fractions must be positive");
    if (train_frac + val_frac >= 1.0) throw ConfigError("split fractions must sum below 1");
    const int n = labels.n();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x51u));
    rng.shuffle(order);
    const int n_train = static_cast<int>(std::floor(train_frac * n));
    const int n_val = static_cast<int>(std::floor(val_frac * n));
    Split s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    return s;
}

/// L1 row normalization; all-zero rows stay zero.
inline void row_normalize(NodeFeatures& x) {
    for (int i = 0; i < x.n(); ++i) {
        const double s = x.values.row(i).cwiseAbs().sum();
        if (s > 0.0) x.values.row(i) /= s;
    }
    x.is_binary = ((x.values.array() == 0.0) || (x.values.array() == 1.0)).all();
}

// ---------------------------------------------------------------------------
// File formats.
//
//   edge list   whitespace-separated "u v" per line, 0-indexed, '#' comments
//   features    CSV with n rows and f columns, or sparse triplets with a
//               first line "sparse n f" followed by "row col value" lines
//   labels      one integer class id per line
//   manifest    JSON: {"name", "n", "f", "c", "edges", "features",
//               "labels", "strict_symmetry"?}; paths resolve against the
//               manifest's directory
// ---------------------------------------------------------------------------

namespace detail {

inline std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

inline bool comment_or_blank(const std::string& line) {
    for (char ch : line) {
        if (ch == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(ch))) return false;
    }
    return true;
}

} // namespace detail

inline std::vector<std::pair<int, int>> read_edge_pairs(const std::string& path) {
    auto in = detail::open_or_throw(path);
    std::vector<std::pair<int, int>> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::comment_or_blank(line)) continue;
        std::istringstream ss(line);
        long long u, v;
        if (!(ss >> u >> v))
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'u v'");
        pairs.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    return pairs;
}

inline Graph load_edge_list(const std::string& path, int n, bool strict = false) {
    return Graph::from_edges(n, read_edge_pairs(path), strict);
}

inline void write_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline NodeFeatures load_features(const std::string& path, int n, int f) {
    auto in = detail::open_or_throw(path);
    std::string first;
    while (std::getline(in, first) && detail::comment_or_blank(first)) {}
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, f);
    if (first.rfind("sparse", 0) == 0) {
        std::istringstream header(first);
        std::string tag;
        int hn, hf;
        if (!(header >> tag >> hn >> hf)) throw DataError(path + ": malformed sparse header");
        if (hn != n || hf != f) throw DataError(path + ": sparse header shape mismatch");
        std::string line;
        while (std::getline(in, line)) {
            if (detail::comment_or_blank(line)) continue;
            std::istringstream ss(line);
            int r, c;
            double v;
            if (!(ss >> r >> c >> v)) throw DataError(path + ": expected 'row col value'");
            if (r < 0 || r >= n || c < 0 || c >= f) throw DataError(path + ": triplet index out of range");
            m(r, c) = v;
        }
    } else {
        int row = 0;
        std::string line = first;
        do {
            if (detail::comment_or_blank(line)) continue;
            if (row >= n) throw DataError(path + ": more feature rows than declared n");
            std::istringstream ss(line);
            std::string cell;
            int col = 0;
            while (std::getline(ss, cell, ',')) {
                if (col >= f) throw DataError(path + ": more feature columns than declared f");
                try {
                    m(row, col) = std::stod(cell);
                } catch (const std::exception&) {
                    throw DataError(path + ": bad numeric cell '" + cell + "'");
                }
                ++col;
            }
            if (col != f) throw DataError(path + ": row " + std::to_string(row) + " has " + std::to_string(col) + " columns, expected " + std::to_string(f));
            ++row;
        } while (std::getline(in, line));
        if (row != n) throw DataError(path + ": found " + std::to_string(row) + " feature rows, expected " + std::to_string(n));
    }
    return NodeFeatures::from_matrix(std::move(m));
}

inline void write_features_csv(const NodeFeatures& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (int i = 0; i < x.n(); ++i) {
        for (int j = 0; j < x.f(); ++j) {
            if (j) out << ',';
            out << x.values(i, j);
        }
        out << '\n';
    }
}

inline Labels load_labels(const std::string& path, int n, int c) {
    auto in = detail::open_or_throw(path);
    std::vector<int> y;
    y.reserve(static_cast<std::size_t>(n));
    std::string line;
    while (std::getline(in, line)) {
        if (detail::comment_or_blank(line)) continue;
        try {
            y.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw DataError(path + ": bad label line '" + line + "'");
        }
    }
    if (static_cast<int>(y.size()) != n)
        throw DataError(path + ": found " + std::to_string(y.size()) + " labels, expected " + std::to_string(n));
    return Labels::from_vector(std::move(y), c);
}

struct DatasetManifest {
    std::string name;
    int n = 0, f = 0, c = 0;
    std::string edges_path, features_path, labels_path;
    bool strict_symmetry = false;
};

inline DatasetManifest read_manifest(const std::string& manifest_path) {
    auto in = detail::open_or_throw(manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path + ": bad JSON: " + e.what());
    }
    DatasetManifest m;
    try {
        m.name = j.value("name", std::string("dataset"));
        m.n = j.at("n").get<int>();
        m.f = j.at("f").get<int>();
        m.c = j.at("c").get<int>();
        const auto base = std::filesystem::path(manifest_path).parent_path();
        m.edges_path = (base / j.at("edges").get<std::string>()).string();
        m.features_path = (base / j.at("features").get<std::string>()).string();
        m.labels_path = (base / j.at("labels").get<std::string>()).string();
        m.strict_symmetry = j.value("strict_symmetry", false);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path + ": missing or malformed field: " + e.what());
    }
    if (m.n <= 0 || m.f <= 0 || m.c < 2) throw DataError(manifest_path + ": invalid n/f/c declaration");
    return m;
}

struct Dataset {
    std::string name;
    Graph graph;
    NodeFeatures features;
    Labels labels;
};

inline Dataset load_dataset(const std::string& manifest_path) {
    const DatasetManifest m = read_manifest(manifest_path);
    Dataset d;
    d.name = m.name;
    d.graph = load_edge_list(m.edges_path, m.n, m.strict_symmetry);
    d.features = load_features(m.features_path, m.n, m.f);
    d.labels = load_labels(m.labels_path, m.n, m.c);
    return d;
}

} // namespace midgcn
