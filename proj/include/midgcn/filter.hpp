#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "midgcn/errors.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/operators.hpp"

namespace midgcn {

enum class FilterKind { low, high, mid, mid_alpha };

inline const char* filter_kind_name(FilterKind k) {
    switch (k) {
        case FilterKind::low: return "low";
        case FilterKind::high: return "high";
        case FilterKind::mid: return "mid";
        case FilterKind::mid_alpha: return "mid_alpha";
    }
    return "?";
}

inline FilterKind parse_filter_kind(const std::string& s) {
    if (s == "low") return FilterKind::low;
    if (s == "high") return FilterKind::high;
    if (s == "mid") return FilterKind::mid;
    if (s == "mid_alpha") return FilterKind::mid_alpha;
    throw ConfigError("unknown filter kind: " + s);
}

struct FilterSpec {
    FilterKind kind = FilterKind::mid;
    double alpha = 1.0;   // used by mid_alpha; mid behaves as alpha=1

    static FilterSpec make(FilterKind kind, double alpha = 1.0) {
        if (!(alpha >= 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in [0, 2]");
        return FilterSpec{kind, alpha};
    }

    double effective_alpha() const { return kind == FilterKind::mid_alpha ? alpha : 1.0; }
};

/// Scalar response on Laplacian eigenvalues lam in [0, 2].
inline double filter_response(const FilterSpec& spec, double lam) {
    if (!(lam >= 0.0 && lam <= 2.0)) throw ConfigError("lambda outside [0, 2]");
    switch (spec.kind) {
        case FilterKind::low: return 2.0 - lam;
        case FilterKind::high: return lam;
        case FilterKind::mid: return lam * (2.0 - lam);
        case FilterKind::mid_alpha: return (spec.alpha - 1.0 + lam) * (2.0 - lam);
    }
    throw ConfigError("unknown filter kind");
}

struct FilteredSignal {
    Eigen::MatrixXd values;   // n x f
    FilterSpec spec;
    std::uint64_t graph_hash = 0;
};

/// Applies the filter to the dense block X. low: X + A_hat X; high: X -
/// A_hat X; mid kinds: (alpha I - A_hat)((I + A_hat) X) via two sparse
/// multiplies.
inline Eigen::MatrixXd apply_filter_to(const NormalizedOperator& a_hat, const FilterSpec& spec,
                                       const Eigen::MatrixXd& x) {
    if (a_hat.kind != OperatorKind::adjacency_hat) throw ConfigError("filter needs the adjacency operator");
    if (static_cast<int>(x.rows()) != a_hat.n()) throw DataError("apply_filter: row count mismatch");
    switch (spec.kind) {
        case FilterKind::low: return x + a_hat.matrix.multiply(x);
        case FilterKind::high: return x - a_hat.matrix.multiply(x);
        case FilterKind::mid:
        case FilterKind::mid_alpha: {
            const Eigen::MatrixXd t = x + a_hat.matrix.multiply(x);
            return spec.effective_alpha() * t - a_hat.matrix.multiply(t);
        }
    }
    throw ConfigError("unknown filter kind");
}

inline FilteredSignal apply_filter(const FilterSpec& spec, const Graph& g, const Eigen::MatrixXd& x) {
    const NormalizedOperator a_hat = normalized_adjacency(g);
    FilteredSignal out;
    out.values = apply_filter_to(a_hat, spec, x);
    out.spec = spec;
    out.graph_hash = g.hash();
    if (!out.values.allFinite()) throw NumericalError("filtered signal has non-finite entries");
    return out;
}

/// Closed-form connected-pair distances. D = ||h_u - h_v||_2.
inline double pair_distance_under_filter(FilterKind kind, const Eigen::VectorXd& h_u,
                                         const Eigen::VectorXd& h_v, int d_u, int d_v,
                                         const std::vector<int>& common_neighbor_degrees) {
    if (h_u.size() != h_v.size()) throw DataError("pair_distance: vector length mismatch");
    if (d_u < 1 || d_v < 1) throw DataError("pair_distance: degrees must be >= 1");
    for (int dt : common_neighbor_degrees)
        if (dt < 2) throw DataError("pair_distance: common-neighbor degree below 2");
    const double dist = (h_u - h_v).norm();
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_u) * static_cast<double>(d_v));
    switch (kind) {
        case FilterKind::low: return (1.0 - inv_sqrt) * dist;
        case FilterKind::high: return (1.0 + inv_sqrt) * dist;
        case FilterKind::mid: {
            if (common_neighbor_degrees.empty()) return dist;
            double s = 0.0;
            for (int dt : common_neighbor_degrees) s += 1.0 / static_cast<double>(dt);
            return (1.0 + inv_sqrt * s) * dist;
        }
        case FilterKind::mid_alpha: break;
    }
    throw ConfigError("pair_distance supports low, high, mid");
}

/// Sensitivity |dD/dd| of the pair distance to the degree product d.
inline double theoretic_rate(FilterKind kind, double d, double dist,
                             const std::vector<int>& common_neighbor_degrees) {
    if (!(d > 0.0)) throw DataError("theoretic_rate: degree product must be positive");
    if (dist < 0.0) throw DataError("theoretic_rate: distance must be nonnegative");
    const double base = 0.5 * std::pow(d, -1.5) * dist;
    switch (kind) {
        case FilterKind::low:
        case FilterKind::high: return base;
        case FilterKind::mid: {
            if (common_neighbor_degrees.empty()) return 0.0;
            double s = 0.0;
            for (int dt : common_neighbor_degrees) {
                if (dt < 2) throw DataError("theoretic_rate: common-neighbor degree below 2");
                s += 1.0 / static_cast<double>(dt);
            }
            return base * s;
        }
        case FilterKind::mid_alpha: break;
    }
    throw ConfigError("theoretic_rate supports low, high, mid");
}

} // namespace midgcn
