#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace synthbench {

// Dense row-major matrix of doubles. Rows are instances, columns attributes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : data_(rows * cols, fill), rows_(rows), cols_(cols) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw std::invalid_argument("Matrix::from_rows: ragged input");
            }
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i * cols_ + j];
        return out;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(idx[i], j);
        }
        return out;
    }

    Matrix select_columns(std::span<const std::size_t> idx) const {
        Matrix out(rows_, idx.size());
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = (*this)(i, idx[j]);
        }
        return out;
    }

    // Concatenate rows of two matrices with equal column counts.
    static Matrix vstack(const Matrix& a, const Matrix& b) {
        if (a.rows_ == 0) return b;
        if (b.rows_ == 0) return a;
        if (a.cols_ != b.cols_) throw std::invalid_argument("Matrix::vstack: column mismatch");
        Matrix out(a.rows_ + b.rows_, a.cols_);
        std::copy(a.data_.begin(), a.data_.end(), out.data_.begin());
        std::copy(b.data_.begin(), b.data_.end(),
                  out.data_.begin() + static_cast<std::ptrdiff_t>(a.data_.size()));
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }
    const std::vector<double>& data() const { return data_; }

private:
    std::vector<double> data_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace synthbench
