#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "midgcn/attack.hpp"
#include "midgcn/data.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/filter.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/operators.hpp"
#include "midgcn/spectral.hpp"

namespace midgcn {

/// |mean_clean - mean_attacked| / max of the two, over mean embedding
/// distances of clean-graph edges whose endpoints both have clean degree
/// strictly above degree_min.
inline double distance_change_rate(const Eigen::MatrixXd& h_clean, const Eigen::MatrixXd& h_attacked,
                                   const Graph& g_clean, int degree_min = 10) {
    if (h_clean.rows() != g_clean.n || h_attacked.rows() != g_clean.n)
        throw DataError("distance_change_rate: embedding row count mismatch");
    if (h_clean.cols() != h_attacked.cols())
        throw DataError("distance_change_rate: embedding width mismatch");
    if (degree_min < 0) throw ConfigError("degree_min must be nonnegative");

    double sum_clean = 0.0, sum_attacked = 0.0;
    long long count = 0;
    for (const auto& [u, v] : g_clean.edges()) {
        if (g_clean.degree(u) <= degree_min || g_clean.degree(v) <= degree_min) continue;
        sum_clean += (h_clean.row(u) - h_clean.row(v)).norm();
        sum_attacked += (h_attacked.row(u) - h_attacked.row(v)).norm();
        ++count;
    }
    if (count == 0) throw DataError("distance_change_rate: no edges pass the degree threshold");
    const double mean_clean = sum_clean / static_cast<double>(count);
    const double mean_attacked = sum_attacked / static_cast<double>(count);
    const double denom = std::max(mean_clean, mean_attacked);
    if (denom == 0.0) return 0.0;
    return std::abs(mean_clean - mean_attacked) / denom;
}

/// Sum of 1/deg(t) over common neighbors t of u and v.
inline double common_neighbor_reciprocal_sum(const Graph& g, int u, int v) {
    if (u < 0 || u >= g.n || v < 0 || v >= g.n) throw DataError("node index out of range");
    const auto nu = g.neighbors(u);
    const auto nv = g.neighbors(v);
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < nu.size() && j < nv.size()) {
        if (nu[i] < nv[j]) ++i;
        else if (nu[i] > nv[j]) ++j;
        else {
            sum += 1.0 / static_cast<double>(g.degree(nu[i]));
            ++i;
            ++j;
        }
    }
    return sum;
}

struct Lemma1Stats {
    double mean = 0.0;
    double violation_fraction = 0.0;   // pairs with sum >= 1
    long long pairs = 0;
};

/// Common-neighbor reciprocal sums over every connected pair.
inline Lemma1Stats lemma1_monte_carlo(const Graph& g) {
    const auto edges = g.edges();
    if (edges.empty()) throw DataError("lemma1_monte_carlo: edgeless graph");
    Lemma1Stats stats;
    long long violations = 0;
    for (const auto& [u, v] : edges) {
        const double s = common_neighbor_reciprocal_sum(g, u, v);
        stats.mean += s;
        if (s >= 1.0) ++violations;
    }
    stats.pairs = static_cast<long long>(edges.size());
    stats.mean /= static_cast<double>(stats.pairs);
    stats.violation_fraction = static_cast<double>(violations) / static_cast<double>(stats.pairs);
    return stats;
}

/// Count of singular values above rel_tol times the largest.
inline int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8) {
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sigma = svd.singularValues();
    const double cutoff = rel_tol * sigma(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > cutoff) ++rank;
    return rank;
}

namespace detail {

inline int rank_from_magnitudes(const Eigen::ArrayXd& mags, double rel_tol) {
    const double top = mags.maxCoeff();
    if (top == 0.0) return 0;
    return static_cast<int>((mags > rel_tol * top).count());
}

} // namespace detail

struct RankGrowthRow {
    double rate = 0.0;
    int rank_a = 0;
    int rank_a2 = 0;
};

/// Ranks of the 0/1 adjacency and its square under random edge flips at
/// each rate. One symmetric eigendecomposition per rate serves both ranks
/// (singular values are |lambda|, and squaring maps them to lambda^2).
inline std::vector<RankGrowthRow> rank_growth_curve(const Graph& g, const std::vector<double>& rates,
                                                    std::uint64_t seed, double rel_tol = 1e-8) {
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
    std::vector<RankGrowthRow> rows;
    for (double rate : rates) {
        const Graph gp = rate == 0.0 ? g : apply_perturbation(g, random_flip(g, rate, seed));
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
        for (const auto& [u, v] : gp.edges()) {
            a(u, v) = 1.0;
            a(v, u) = 1.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
        if (solver.info() != Eigen::Success) throw NumericalError("adjacency eigendecomposition failed");
        const Eigen::ArrayXd mags = solver.eigenvalues().array().abs();
        RankGrowthRow row;
        row.rate = rate;
        row.rank_a = detail::rank_from_magnitudes(mags, rel_tol);
        row.rank_a2 = detail::rank_from_magnitudes(mags.square(), rel_tol);
        rows.push_back(row);
    }
    return rows;
}

struct BandEnergy {
    double low = 0.0, mid = 0.0, high = 0.0;

    double total() const { return low + mid + high; }
};

/// Energy of the signal's spectral coefficients per band.
inline BandEnergy band_energy(const Eigen::VectorXd& x, const SpectralDecomposition& dec,
                              const BandPartition& bands) {
    const Eigen::VectorXd x_hat = graph_fourier(x, dec);
    BandEnergy e;
    for (int i : bands.low) e.low += x_hat(i) * x_hat(i);
    for (int i : bands.mid) e.mid += x_hat(i) * x_hat(i);
    for (int i : bands.high) e.high += x_hat(i) * x_hat(i);
    return e;
}

/// SRL = 2 - (2/sqrt(N)) * sum_i a_i g(l_i) b_i / sqrt(sum_j g(l_j)^2 b_j^2).
inline double srl(const SpectralDecomposition& dec, const FilterSpec& spec,
                  const Eigen::VectorXd& alpha_coeffs, const Eigen::VectorXd& beta_coeffs) {
    if (dec.basis != OperatorKind::laplacian) throw ConfigError("srl is defined on the Laplacian basis");
    const int n = dec.n();
    if (alpha_coeffs.size() != n || beta_coeffs.size() != n)
        throw DataError("srl: coefficient length mismatch");
    double cross = 0.0, denom_sq = 0.0, beta_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lam = dec.eigenvalues(i);
        if (lam < -1e-9 || lam > 2.0 + 1e-9)
            throw NumericalError("srl: eigenvalue outside the Laplacian range");
        const double gi = filter_response(spec, std::clamp(lam, 0.0, 2.0));
        cross += alpha_coeffs(i) * gi * beta_coeffs(i);
        denom_sq += gi * gi * beta_coeffs(i) * beta_coeffs(i);
        beta_sq += beta_coeffs(i) * beta_coeffs(i);
    }
    // Eigensolver rounding keeps an annihilated signal's denominator a hair
    // above zero while the quotient's sign rides on that noise, so the
    // degeneracy test must be relative.
    if (!(denom_sq > 1e-24 * beta_sq))
        throw NumericalError("srl: the filter annihilates the reference signal");
    return 2.0 - (2.0 / std::sqrt(static_cast<double>(n))) * cross / std::sqrt(denom_sq);
}

/// True when the response treats the two Laplacian endpoints identically.
inline bool generalization_condition(const FilterSpec& spec) {
    return std::abs(filter_response(spec, 0.0) - filter_response(spec, 2.0)) < 1e-12;
}

struct BandDeltaStats {
    std::optional<double> mean_abs_delta_low, mean_abs_delta_mid, mean_abs_delta_high;
};

/// Rank-paired |delta lambda| of the two A_hat spectra averaged within each
/// band of the clean spectrum; an empty band reports no value.
inline BandDeltaStats band_eigendelta_stats(const Graph& g_clean, const Graph& g_attacked, double p = 0.5) {
    if (g_clean.n != g_attacked.n) throw DataError("band_eigendelta_stats: node-count mismatch");
    const SpectralDecomposition dc = eig(normalized_adjacency(g_clean));
    const SpectralDecomposition da = eig(normalized_adjacency(g_attacked));
    const BandPartition bands = band_partition(dc, p);
    auto mean_over = [&](const std::vector<int>& idx) -> std::optional<double> {
        if (idx.empty()) return std::nullopt;
        double s = 0.0;
        for (int i : idx) s += std::abs(da.eigenvalues(i) - dc.eigenvalues(i));
        return s / static_cast<double>(idx.size());
    };
    BandDeltaStats stats;
    stats.mean_abs_delta_low = mean_over(bands.low);
    stats.mean_abs_delta_mid = mean_over(bands.mid);
    stats.mean_abs_delta_high = mean_over(bands.high);
    return stats;
}

} // namespace midgcn
