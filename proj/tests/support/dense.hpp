// Test-only dense linear algebra: LU with partial pivoting, log-determinant,
// and solves. Used to recompute REML/GLS quantities through the stacked
// error-contrast formulation, independently of the library's 2x2 path.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace testsupport {

class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
        return t;
    }

    DenseMatrix multiply(const DenseMatrix& other) const {
        if (cols_ != other.rows_) throw std::invalid_argument("dense multiply: shape mismatch");
        DenseMatrix out(rows_, other.cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double v = at(r, k);
                if (v == 0.0) continue;
                for (std::size_t c = 0; c < other.cols_; ++c) out.at(r, c) += v * other.at(k, c);
            }
        return out;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

struct LuDecomposition {
    DenseMatrix lu;
    std::vector<std::size_t> pivots;
    int sign{1};

    explicit LuDecomposition(DenseMatrix m) : lu(std::move(m)), pivots(lu.rows()) {
        const std::size_t n = lu.rows();
        if (lu.cols() != n) throw std::invalid_argument("LU: matrix must be square");
        for (std::size_t i = 0; i < n; ++i) pivots[i] = i;
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t best = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(lu.at(r, col)) > std::abs(lu.at(best, col))) best = r;
            if (best != col) {
                for (std::size_t c = 0; c < n; ++c) std::swap(lu.at(col, c), lu.at(best, c));
                std::swap(pivots[col], pivots[best]);
                sign = -sign;
            }
            const double pivot = lu.at(col, col);
            if (pivot == 0.0) throw std::runtime_error("LU: singular matrix");
            for (std::size_t r = col + 1; r < n; ++r) {
                const double f = lu.at(r, col) / pivot;
                lu.at(r, col) = f;
                for (std::size_t c = col + 1; c < n; ++c) lu.at(r, c) -= f * lu.at(col, c);
            }
        }
    }

    double log_abs_det() const {
        double sum = 0.0;
        for (std::size_t i = 0; i < lu.rows(); ++i) sum += std::log(std::abs(lu.at(i, i)));
        return sum;
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        const std::size_t n = lu.rows();
        if (rhs.size() != n) throw std::invalid_argument("LU solve: size mismatch");
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = rhs[pivots[i]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu.at(i, j) * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu.at(i, j) * x[j];
            x[i] /= lu.at(i, i);
        }
        return x;
    }
};

} // namespace testsupport
