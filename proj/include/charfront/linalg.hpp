#pragma once

#include <cstddef>
#include <vector>

namespace charfront {

using Vec = std::vector<double>;

// Small dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix diag(const Vec& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec column(std::size_t j) const;
    Vec row(std::size_t i) const;
    void set_column(std::size_t j, const Vec& v);
    Matrix transpose() const;
    double max_abs() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, const Vec& x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);

// LU with partial pivoting. Throws std::runtime_error on exact singularity.
class LU {
public:
    explicit LU(const Matrix& a);
    Vec solve(const Vec& b) const;
    Matrix inverse() const;
    bool singular() const { return singular_; }

private:
    Matrix lu_;
    std::vector<std::size_t> piv_;
    bool singular_ = false;
};

Vec solve(const Matrix& a, const Vec& b);
Matrix inverse(const Matrix& a);

// Real eigenvalues of a general matrix by Hessenberg reduction and shifted QR
// (Wilkinson shifts). Throws Error(NonHyperbolic) if a complex pair appears or
// the iteration stalls. Result sorted ascending.
Vec real_eigenvalues(const Matrix& a);

struct EigenSystem {
    Vec lambdas;    // ascending
    Matrix rights;  // columns r_k, unit Euclidean length, largest entry positive
    Matrix lefts;   // rows l_k with lefts * rights = I
};

// Full eigensystem: QR eigenvalues, inverse iteration for right vectors, left
// vectors from the inverse of the right-vector matrix. Requires eigenvalue gaps
// above gap_tol, otherwise Error(NonHyperbolic).
EigenSystem eigensystem(const Matrix& a, double gap_tol = 1e-10);

}  // namespace charfront
