#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "midgcn/errors.hpp"

namespace midgcn {

/// Square sparse matrix in compressed row form. Column indices are sorted
/// within each row. Carries real values; graph operators built on top are
/// symmetric but the structure itself does not assume it.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;    // size n + 1
    std::vector<int> col_idx;
    std::vector<double> values;

    CsrMatrix() = default;

    static CsrMatrix zero(int n) {
        CsrMatrix m;
        m.n = n;
        m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        return m;
    }

    // Builds from (row, col, value) entries. Entries may arrive unsorted but
    // must be unique.
    static CsrMatrix from_entries(int n, std::vector<std::tuple<int, int, double>> entries) {
        std::sort(entries.begin(), entries.end());
        CsrMatrix m;
        m.n = n;
        m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        m.col_idx.reserve(entries.size());
        m.values.reserve(entries.size());
        for (const auto& [i, j, v] : entries) {
            if (i < 0 || i >= n || j < 0 || j >= n)
                throw DataError("csr entry index out of range");
            m.row_ptr[static_cast<std::size_t>(i) + 1]++;
            m.col_idx.push_back(j);
            m.values.push_back(v);
        }
        for (int i = 0; i < n; ++i) m.row_ptr[static_cast<std::size_t>(i) + 1] += m.row_ptr[static_cast<std::size_t>(i)];
        return m;
    }

    std::size_t nnz() const { return col_idx.size(); }

    double at(int i, int j) const {
        const int lo = row_ptr[static_cast<std::size_t>(i)];
        const int hi = row_ptr[static_cast<std::size_t>(i) + 1];
        const auto begin = col_idx.begin() + lo;
        const auto end = col_idx.begin() + hi;
        const auto it = std::lower_bound(begin, end, j);
        if (it == end || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_idx.begin())];
    }

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        if (x.size() != n) throw DataError("csr matvec: length mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                acc += values[static_cast<std::size_t>(k)] * x[col_idx[static_cast<std::size_t>(k)]];
            y[i] = acc;
        }
        return y;
    }

    // Y = M * X for a dense block of column vectors.
    Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const {
        if (x.rows() != n) throw DataError("csr matmat: row count mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, x.cols());
        for (int c = 0; c < x.cols(); ++c) {
            const auto col = x.col(c);
            auto out = y.col(c);
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                    acc += values[static_cast<std::size_t>(k)] * col[col_idx[static_cast<std::size_t>(k)]];
                out[i] = acc;
            }
        }
        return y;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                d(i, col_idx[static_cast<std::size_t>(k)]) = values[static_cast<std::size_t>(k)];
        return d;
    }
};

/// Rectangular sparse matrix in row form, used for sparse feature blocks.
struct CsrRect {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    static CsrRect from_dense(const Eigen::MatrixXd& x) {
        CsrRect m;
        m.rows = static_cast<int>(x.rows());
        m.cols = static_cast<int>(x.cols());
        m.row_ptr.assign(static_cast<std::size_t>(m.rows) + 1, 0);
        for (int i = 0; i < m.rows; ++i) {
            for (int j = 0; j < m.cols; ++j) {
                if (x(i, j) != 0.0) {
                    m.col_idx.push_back(j);
                    m.values.push_back(x(i, j));
                }
            }
            m.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(m.col_idx.size());
        }
        return m;
    }

    // Y = M * W, with M rows x cols and W cols x k.
    Eigen::MatrixXd multiply(const Eigen::MatrixXd& w) const {
        if (w.rows() != cols) throw DataError("sparse multiply: shape mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, w.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                y.row(i) += values[static_cast<std::size_t>(k)] * w.row(col_idx[static_cast<std::size_t>(k)]);
        return y;
    }

    // Y = M^T * G, with G rows x k; result cols x k.
    Eigen::MatrixXd multiply_transposed(const Eigen::MatrixXd& g) const {
        if (g.rows() != rows) throw DataError("sparse transposed multiply: shape mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(cols, g.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                y.row(col_idx[static_cast<std::size_t>(k)]) += values[static_cast<std::size_t>(k)] * g.row(i);
        return y;
    }

    // As multiply, with each stored value scaled by its per-nonzero factor.
    Eigen::MatrixXd multiply_scaled(const Eigen::MatrixXd& w, const std::vector<double>& scale) const {
        if (w.rows() != cols) throw DataError("sparse multiply: shape mismatch");
        if (scale.size() != values.size()) throw DataError("sparse multiply: scale length mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, w.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                y.row(i) += scale[static_cast<std::size_t>(k)] * values[static_cast<std::size_t>(k)] *
                            w.row(col_idx[static_cast<std::size_t>(k)]);
        return y;
    }

    Eigen::MatrixXd multiply_transposed_scaled(const Eigen::MatrixXd& g, const std::vector<double>& scale) const {
        if (g.rows() != rows) throw DataError("sparse transposed multiply: shape mismatch");
        if (scale.size() != values.size()) throw DataError("sparse transposed multiply: scale length mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(cols, g.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                y.row(col_idx[static_cast<std::size_t>(k)]) += scale[static_cast<std::size_t>(k)] *
                                                               values[static_cast<std::size_t>(k)] * g.row(i);
        return y;
    }
};

} // namespace midgcn
