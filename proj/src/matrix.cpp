#include "mld/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <utility>

#include "mld/errors.hpp"

namespace mld {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionMismatch("Matrix: entry count does not match shape");
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
    if (v.size() != rows_)
        throw DimensionMismatch("set_col: wrong vector length");
    std::memcpy(data_.data() + c * rows_, v.data(), rows_ * sizeof(double));
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2_squared(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(norm2_squared(v)); }

double frobenius_norm_squared(const Matrix& m) {
    double s = 0.0;
    for (double x : m.data()) s += x * x;
    return s;
}

double frobenius_norm(const Matrix& m) {
    return std::sqrt(frobenius_norm_squared(m));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("matmul: inner dimensions disagree");
    Matrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i)
                c(i, j) += a(i, k) * bkj;
        }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionMismatch("matmul_at_b: row counts disagree");
    Matrix c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t i = 0; i < a.cols(); ++i)
            c(i, j) = dot(a.col(i), b.col(j));
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionMismatch("matmul_a_bt: column counts disagree");
    Matrix c(a.rows(), b.rows());
    for (std::size_t k = 0; k < a.cols(); ++k)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double bjk = b(j, k);
            if (bjk == 0.0) continue;
            for (std::size_t i = 0; i < a.rows(); ++i)
                c(i, j) += a(i, k) * bjk;
        }
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols())
        throw DimensionMismatch("matvec: length mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const auto col = a.col(j);
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += col[i] * xj;
    }
    return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows())
        throw DimensionMismatch("matvec_t: length mismatch");
    std::vector<double> y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
    return y;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
    return t;
}

Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix select_cols(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(m.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) out.set_col(j, m.col(idx[j]));
    return out;
}

namespace {

constexpr char kMatMagic[8] = {'M', 'L', 'D', 'M', 'A', 'T', '1', '\0'};

void put_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& os, double x) {
    put_u64(os, std::bit_cast<std::uint64_t>(x));
}

double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_u64(is));
}

}  // namespace

void write_mldmat_body(std::ostream& os, const Matrix& m) {
    os.write(kMatMagic, 8);
    put_u64(os, m.rows());
    put_u64(os, m.cols());
    for (double x : m.data()) put_f64(os, x);
}

Matrix read_mldmat_body(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMatMagic, 8) != 0)
        throw IoError("not an MLDMAT1 block");
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    std::vector<double> entries(rows * cols);
    for (auto& x : entries) x = get_f64(is);
    if (!is) throw IoError("truncated MLDMAT1 block");
    return Matrix(rows, cols, std::move(entries));
}

void write_mldmat(const std::string& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_mldmat_body(os, m);
    if (!os) throw IoError("write failed: " + path);
}

Matrix read_mldmat(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    return read_mldmat_body(is);
}

}  // namespace mld
