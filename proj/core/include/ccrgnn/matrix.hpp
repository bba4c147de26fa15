#pragma once

#include <string>
#include <vector>

namespace ccrgnn {

// Dense row-major matrix of doubles. Column vectors are n x 1.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled
    Matrix(int rows, int cols, std::vector<double> values);

    static Matrix zeros(int rows, int cols);
    static Matrix filled(int rows, int cols, double value);
    static Matrix identity(int n);
    static Matrix column(const std::vector<double>& values);
    static Matrix row(const std::vector<double>& values);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    long long size() const { return static_cast<long long>(rows_) * cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& at(int r, int c) { return values_[static_cast<size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return values_[static_cast<size_t>(r) * cols_ + c]; }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;
    bool all_finite() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> values_;
};

// Plain (untaped) arithmetic used internally and by non-differentiable paths.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);
double max_entry(const Matrix& a);
double min_entry(const Matrix& a);
double frobenius_sq(const Matrix& a);
bool approx_equal(const Matrix& a, const Matrix& b, double tol);

}  // namespace ccrgnn
