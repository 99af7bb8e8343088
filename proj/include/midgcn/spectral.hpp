#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "midgcn/errors.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/operators.hpp"
#include "midgcn/rng.hpp"

namespace midgcn {

// lambda_L = 1 - lambda_Ahat and back.
inline double to_laplacian_eigenvalue(double mu) { return 1.0 - mu; }
inline double to_adjacency_eigenvalue(double lam) { return 1.0 - lam; }

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXd eigenvectors;   // columns, same order
    OperatorKind basis = OperatorKind::adjacency_hat;
    std::uint64_t graph_hash = 0;
    Eigen::VectorXd inv_sqrt_deg;   // empty means unit degrees

    int n() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline void fix_column_signs(Eigen::MatrixXd& u) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            const double v = u(r, c);
            if (std::abs(v) > 1e-12) {
                if (v < 0.0) u.col(c) = -u.col(c);
                break;
            }
        }
    }
}

} // namespace detail

inline constexpr int kDenseEigCap = 4000;

/// Full dense symmetric eigendecomposition, ascending eigenvalues,
/// column signs fixed so the first component above 1e-12 is positive.
inline SpectralDecomposition eig(const NormalizedOperator& op, int dense_cap = kDenseEigCap) {
    if (op.n() > dense_cap)
        throw ConfigError("graph exceeds dense eigendecomposition cap (" + std::to_string(dense_cap) +
                          "); use the iterative extreme-pair mode");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix.dense());
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigendecomposition failed");
    SpectralDecomposition dec;
    dec.eigenvalues = solver.eigenvalues();
    dec.eigenvectors = solver.eigenvectors();
    detail::fix_column_signs(dec.eigenvectors);
    dec.basis = op.kind;
    dec.graph_hash = op.graph_hash;
    dec.inv_sqrt_deg = Eigen::Map<const Eigen::VectorXd>(op.inv_sqrt_deg.data(),
                                                         static_cast<Eigen::Index>(op.inv_sqrt_deg.size()));
    return dec;
}

struct ExtremeEigenpairs {
    Eigen::VectorXd low_values;     // k_low smallest, ascending
    Eigen::MatrixXd low_vectors;
    Eigen::VectorXd high_values;    // k_high largest, ascending
    Eigen::MatrixXd high_vectors;
};

/// Lanczos with full reorthogonalization; grows the Krylov space until the
/// requested extreme Ritz pairs have residual below tol.
inline ExtremeEigenpairs lanczos_extremes(const NormalizedOperator& op, int k_low, int k_high,
                                          double tol = 1e-8, int max_dim = 0) {
    const int n = op.n();
    if (k_low < 0 || k_high < 0 || k_low + k_high < 1) throw ConfigError("need at least one extreme pair");
    if (k_low + k_high > n) throw ConfigError("more extreme pairs requested than matrix dimension");
    if (max_dim <= 0) max_dim = std::min(n, std::max(8 * (k_low + k_high) + 64, 256));

    Rng rng(mix_seed(0x1a2b3c4du ^ op.graph_hash, static_cast<std::uint64_t>(n)));
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0(i) = rng.uniform(-1.0, 1.0);
    v0.normalize();

    std::vector<Eigen::VectorXd> basis;
    basis.push_back(v0);
    std::vector<double> alphas, betas;

    auto ritz_ready = [&](Eigen::MatrixXd& t_vecs, Eigen::VectorXd& t_vals, double last_beta) {
        const int m = static_cast<int>(alphas.size());
        if (m < std::max(k_low + k_high, 2)) return false;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
                t(i, i + 1) = betas[static_cast<std::size_t>(i)];
                t(i + 1, i) = betas[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
        if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigendecomposition failed");
        t_vals = solver.eigenvalues();
        t_vecs = solver.eigenvectors();
        for (int i = 0; i < k_low; ++i)
            if (std::abs(last_beta * t_vecs(m - 1, i)) > tol) return false;
        for (int i = 0; i < k_high; ++i)
            if (std::abs(last_beta * t_vecs(m - 1, m - 1 - i)) > tol) return false;
        return true;
    };

    Eigen::MatrixXd t_vecs;
    Eigen::VectorXd t_vals;
    bool converged = false;
    double last_beta = 0.0;
    bool exhausted = false;

    while (static_cast<int>(alphas.size()) < max_dim) {
        const Eigen::VectorXd& v = basis.back();
        Eigen::VectorXd w = op.matrix.multiply(v);
        const double alpha = v.dot(w);
        alphas.push_back(alpha);
        w -= alpha * v;
        if (basis.size() >= 2) w -= betas.back() * basis[basis.size() - 2];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) w -= q.dot(w) * q;
        const double beta = w.norm();
        last_beta = beta;
        if (ritz_ready(t_vecs, t_vals, beta)) { converged = true; break; }
        if (beta < 1e-14) {
            // Krylov space is invariant; restart from a fresh random direction.
            Eigen::VectorXd r(n);
            for (int i = 0; i < n; ++i) r(i) = rng.uniform(-1.0, 1.0);
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) r -= q.dot(r) * q;
            const double rn = r.norm();
            if (rn < 1e-14 || static_cast<int>(basis.size()) >= n) { exhausted = true; break; }
            betas.push_back(0.0);
            basis.push_back(r / rn);
        } else {
            betas.push_back(beta);
            basis.push_back(w / beta);
        }
    }

    if (!converged && exhausted && static_cast<int>(alphas.size()) >= k_low + k_high) {
        // Full invariant subspace reached; Ritz pairs are exact.
        const int m = static_cast<int>(alphas.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
                t(i, i + 1) = betas[static_cast<std::size_t>(i)];
                t(i + 1, i) = betas[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
        if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigendecomposition failed");
        t_vals = solver.eigenvalues();
        t_vecs = solver.eigenvectors();
        converged = true;
    }
    if (!converged)
        throw NumericalError("Lanczos did not converge within " + std::to_string(max_dim) + " iterations");

    const int m = static_cast<int>(t_vals.size());
    Eigen::MatrixXd v_mat(n, m);
    for (int j = 0; j < m; ++j) v_mat.col(j) = basis[static_cast<std::size_t>(j)];

    ExtremeEigenpairs out;
    out.low_values.resize(k_low);
    out.low_vectors.resize(n, k_low);
    for (int i = 0; i < k_low; ++i) {
        out.low_values(i) = t_vals(i);
        out.low_vectors.col(i) = v_mat * t_vecs.col(i);
        out.low_vectors.col(i).normalize();
    }
    out.high_values.resize(k_high);
    out.high_vectors.resize(n, k_high);
    for (int i = 0; i < k_high; ++i) {
        const int src = m - k_high + i;
        out.high_values(i) = t_vals(src);
        out.high_vectors.col(i) = v_mat * t_vecs.col(src);
        out.high_vectors.col(i).normalize();
    }
    detail::fix_column_signs(out.low_vectors);
    detail::fix_column_signs(out.high_vectors);
    return out;
}

inline Eigen::VectorXd graph_fourier(const Eigen::VectorXd& x, const SpectralDecomposition& dec) {
    if (x.size() != dec.eigenvalues.size()) throw DataError("graph_fourier: length mismatch");
    return dec.eigenvectors.transpose() * x;
}

inline Eigen::VectorXd inverse_graph_fourier(const Eigen::VectorXd& x_hat, const SpectralDecomposition& dec) {
    if (x_hat.size() != dec.eigenvalues.size()) throw DataError("inverse_graph_fourier: length mismatch");
    return dec.eigenvectors * x_hat;
}

enum class EdgeChange { insert, remove };

/// First-order shift of the y-th eigenvalue of A_hat when edge (u,v) is
/// inserted or deleted. The formula evaluates the degree-scaled entries
/// U_{y,i} / sqrt(d_i), which make the orthonormal columns into the
/// D-orthonormal generalized eigenvectors the expansion is written for.
inline double eigenvalue_delta_first_order(const SpectralDecomposition& dec, int y, int u, int v,
                                           EdgeChange change) {
    if (dec.basis != OperatorKind::adjacency_hat)
        throw ConfigError("first-order eigenvalue shift needs the adjacency basis");
    const int n = dec.n();
    if (y < 0 || y >= n) throw DataError("eigenvalue index out of range");
    if (u < 0 || u >= n || v < 0 || v >= n) throw DataError("node index out of range");
    if (u == v) throw DataError("self-loops are not supported");
    double su = 1.0, sv = 1.0;
    if (dec.inv_sqrt_deg.size() > 0) {
        su = dec.inv_sqrt_deg(u);
        sv = dec.inv_sqrt_deg(v);
        if (su == 0.0 || sv == 0.0)
            throw NumericalError("first-order shift is undefined at an isolated node");
    }
    const double uy = dec.eigenvectors(u, y) * su;
    const double vy = dec.eigenvectors(v, y) * sv;
    const double lam = dec.eigenvalues(y);
    const double delta = 2.0 * uy * vy - lam * (uy * uy + vy * vy);
    return change == EdgeChange::insert ? delta : -delta;
}

struct BandPartition {
    double p = 0.5;
    std::vector<int> low, mid, high;   // indices into the decomposition
};

/// Splits A_hat eigenvalues into [p,1] / (-p,p) / [-1,-p]; boundary values
/// at +-p land in low/high.
inline BandPartition band_partition(const SpectralDecomposition& dec, double p = 0.5) {
    if (dec.basis != OperatorKind::adjacency_hat)
        throw ConfigError("band partition is defined on the adjacency basis");
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("band threshold p must lie in (0, 1)");
    BandPartition bp;
    bp.p = p;
    for (int i = 0; i < dec.n(); ++i) {
        const double mu = dec.eigenvalues(i);
        if (mu >= p) bp.low.push_back(i);
        else if (mu <= -p) bp.high.push_back(i);
        else bp.mid.push_back(i);
    }
    return bp;
}

inline double rayleigh_quotient(const NormalizedOperator& op, const Eigen::VectorXd& x) {
    if (x.size() != op.n()) throw DataError("rayleigh_quotient: length mismatch");
    const double denom = x.squaredNorm();
    if (denom <= 0.0) throw DataError("rayleigh_quotient: zero vector");
    return x.dot(op.matrix.multiply(x)) / denom;
}

struct SpectrumShiftRow {
    int index;
    double lambda_clean;
    double lambda_attacked;
    double delta;
};

/// Laplacian spectra of both graphs, sorted ascending and paired by rank.
inline std::vector<SpectrumShiftRow> spectrum_shift_report(const Graph& g_clean, const Graph& g_attacked) {
    if (g_clean.n != g_attacked.n) throw DataError("spectrum_shift_report: node-count mismatch");
    const SpectralDecomposition dc = eig(laplacian(g_clean));
    const SpectralDecomposition da = eig(laplacian(g_attacked));
    std::vector<SpectrumShiftRow> rows;
    rows.reserve(static_cast<std::size_t>(g_clean.n));
    for (int i = 0; i < g_clean.n; ++i)
        rows.push_back({i, dc.eigenvalues(i), da.eigenvalues(i), da.eigenvalues(i) - dc.eigenvalues(i)});
    return rows;
}

inline std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_spectrum_csv(const std::vector<SpectrumShiftRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "index,lambda_clean,lambda_attacked,delta\n";
    for (const auto& r : rows)
        out << r.index << ',' << format_sig12(r.lambda_clean) << ',' << format_sig12(r.lambda_attacked)
            << ',' << format_sig12(r.delta) << '\n';
}

} // namespace midgcn
