#pragma once

// Dense row-major matrices and the small eigenvalue kernels used across the
// toolkit. Everything here targets desk-scale dimensions (up to ~20).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ids {

class LinalgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] std::span<const double> data() const { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

    [[nodiscard]] double trace() const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] double frobenius() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

/// (M + Mᵀ)/2
Matrix symmetrize(const Matrix& m);
/// Mᵀ·X·M for square X.
Matrix congruence(const Matrix& m, const Matrix& x);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix block_diag(std::span<const Matrix> blocks);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// xᵀ·M·x
double quad_form(const Matrix& m, std::span<const double> x);

struct SymEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column k pairs with values[k]
};

/// Symmetric eigendecomposition: Householder tridiagonalization followed by
/// implicit-shift QL. Only the lower triangle of `s` is read.
SymEigen sym_eigen(const Matrix& s);
std::vector<double> sym_eigenvalues(const Matrix& s);
double lambda_max(const Matrix& s);
double lambda_min(const Matrix& s);

/// All eigenvalues of a general square matrix (balancing, Hessenberg
/// reduction, Francis double-shift QR). Throws LinalgError on non-convergence.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);
double spectral_radius(const Matrix& a);
/// Largest singular value.
double spectral_norm(const Matrix& a);

/// LU factorization with partial pivoting, reusable across right-hand sides.
class LuDecomposition {
public:
    explicit LuDecomposition(const Matrix& a);
    [[nodiscard]] bool singular() const { return singular_; }
    /// |min pivot| / |max pivot|, a cheap conditioning indicator.
    [[nodiscard]] double pivot_ratio() const { return pivot_ratio_; }
    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;
    [[nodiscard]] Matrix solve(const Matrix& b) const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
    double pivot_ratio_ = 0.0;
};

Matrix inverse(const Matrix& a);
/// Inverse of a symmetric positive definite matrix via its eigendecomposition;
/// throws when λ-max/λ-min exceeds `max_condition` or λ-min ≤ 0.
Matrix spd_inverse(const Matrix& s, double max_condition = 1e12);
double condition_number_spd(const Matrix& s);
bool is_positive_definite(const Matrix& s, double tol = 0.0);

std::string to_string(const Matrix& m, int precision = 6);

}  // namespace ids
