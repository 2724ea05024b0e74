#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mld {

// Dense real matrix, column-major storage. Columns are the natural unit of
// access throughout the library (training samples, residuals, atoms).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) {
        return data_[c * rows_ + r];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data_[c * rows_ + r];
    }

    std::span<double> col(std::size_t c) {
        return {data_.data() + c * rows_, rows_};
    }
    std::span<const double> col(std::size_t c) const {
        return {data_.data() + c * rows_, rows_};
    }

    void set_col(std::size_t c, std::span<const double> v);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm2_squared(std::span<const double> v);
double frobenius_norm(const Matrix& m);
double frobenius_norm_squared(const Matrix& m);

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
// y = A * x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
// y = A^T * x
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

Matrix transpose(const Matrix& m);
Matrix identity(std::size_t n);

// Columns of `m` indexed by `idx`, in order.
Matrix select_cols(const Matrix& m, std::span<const std::size_t> idx);

// MLDMAT1 binary format: 8-byte magic, rows and cols as 64-bit little-endian
// unsigned, then rows*cols IEEE-754 doubles, column-major, little-endian.
void write_mldmat(const std::string& path, const Matrix& m);
Matrix read_mldmat(const std::string& path);

// Same encoding as a block inside an already-open stream (dictionary and
// code containers embed MLDMAT1 blocks).
void write_mldmat_body(std::ostream& os, const Matrix& m);
Matrix read_mldmat_body(std::istream& is);

}  // namespace mld
