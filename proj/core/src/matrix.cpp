#include "ccrgnn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), values_(static_cast<size_t>(rows) * cols, 0.0) {
    require(rows >= 0 && cols >= 0, "Matrix dimensions must be non-negative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require(rows >= 0 && cols >= 0, "Matrix dimensions must be non-negative");
    require(static_cast<long long>(values_.size()) == size(),
            "Matrix value count " + std::to_string(values_.size()) + " does not match shape " +
                shape_str());
}

Matrix Matrix::zeros(int rows, int cols) { return Matrix(rows, cols); }

Matrix Matrix::filled(int rows, int cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.values_.begin(), m.values_.end(), value);
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(const std::vector<double>& values) {
    return Matrix(static_cast<int>(values.size()), 1, values);
}

Matrix Matrix::row(const std::vector<double>& values) {
    return Matrix(1, static_cast<int>(values.size()), values);
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(),
            "matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    const int n = a.rows(), k = a.cols(), m = b.cols();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int i = 0; i < n; ++i) {
        const double* arow = pa + static_cast<size_t>(i) * k;
        double* orow = po + static_cast<size_t>(i) * m;
        for (int t = 0; t < k; ++t) {
            const double av = arow[t];
            if (av == 0.0) continue;
            const double* brow = pb + static_cast<size_t>(t) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    Matrix out = a;
    for (long long i = 0; i < a.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "sub shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    Matrix out = a;
    for (long long i = 0; i < a.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data()) v *= s;
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "hadamard shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    Matrix out = a;
    for (long long i = 0; i < a.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

double max_entry(const Matrix& a) {
    require(!a.empty(), "max_entry of empty matrix");
    return *std::max_element(a.data().begin(), a.data().end());
}

double min_entry(const Matrix& a) {
    require(!a.empty(), "min_entry of empty matrix");
    return *std::min_element(a.data().begin(), a.data().end());
}

double frobenius_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
    if (!a.same_shape(b)) return false;
    for (long long i = 0; i < a.size(); ++i) {
        if (std::abs(a.data()[i] - b.data()[i]) > tol) return false;
    }
    return true;
}

}  // namespace ccrgnn
