#include "mld/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mld/errors.hpp"

namespace mld {

namespace {

void fix_sign(std::span<double> v) {
    for (double x : v) {
        if (x != 0.0) {
            if (x < 0.0)
                for (auto& y : v) y = -y;
            return;
        }
    }
}

}  // namespace

std::vector<double> dominant_left_singular_vector(const Matrix& y,
                                                  std::span<const double> init,
                                                  std::size_t max_iters,
                                                  double tol) {
    if (y.cols() == 0) throw DimensionMismatch("power iteration: no columns");
    if (init.size() != y.rows())
        throw DimensionMismatch("power iteration: init length mismatch");
    if (frobenius_norm_squared(y) == 0.0)
        throw ZeroMatrix("power iteration: zero matrix");

    std::vector<double> psi(init.begin(), init.end());
    std::vector<double> next(y.rows());
    for (std::size_t it = 0; it < max_iters; ++it) {
        // Y Y^T psi computed as Y (Y^T psi): O(M T) per step
        const std::vector<double> proj = matvec_t(y, psi);
        next = matvec(y, proj);
        const double n = norm2(next);
        if (n == 0.0) {
            // psi orthogonal to the column span; nudge toward the first
            // nonzero column
            for (std::size_t j = 0; j < y.cols(); ++j) {
                const double cn = norm2(y.col(j));
                if (cn > 0.0) {
                    for (std::size_t i = 0; i < y.rows(); ++i)
                        psi[i] = y.col(j)[i] / cn;
                    break;
                }
            }
            continue;
        }
        for (auto& x : next) x /= n;
        double diff = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double d = next[i] - psi[i];
            diff += d * d;
        }
        psi = next;
        if (std::sqrt(diff) < tol) break;
    }
    fix_sign(psi);
    return psi;
}

Matrix cholesky(const Matrix& b) {
    if (b.rows() != b.cols())
        throw DimensionMismatch("cholesky: matrix not square");
    const std::size_t n = b.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = b(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0 || !std::isfinite(d))
            throw NotPositiveDefinite("cholesky: leading minor not positive");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = b(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

GeneralizedEig symmetric_eig(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("symmetric_eig: matrix not square");
    const std::size_t n = a.rows();
    Matrix m = a;
    Matrix v = identity(n);

    // cyclic Jacobi
    const std::size_t max_sweeps = 100;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (off <= 1e-30 * (1.0 + frobenius_norm_squared(m))) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

    GeneralizedEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = m(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i)
            out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

GeneralizedEig generalized_symmetric_eig(const Matrix& a, const Matrix& b,
                                         std::size_t d, EigSelect select) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw DimensionMismatch("generalized eig: shape mismatch");
    const std::size_t n = a.rows();
    if (d > n) throw DimensionMismatch("generalized eig: d exceeds size");

    const Matrix l = cholesky(b);

    // C = L^{-1} A L^{-T} via two triangular solves
    Matrix c(n, n);
    {
        // W = L^{-1} A: forward-substitute each column of A
        Matrix w(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = a(i, j);
                for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * w(k, j);
                w(i, j) = s / l(i, i);
            }
        }
        // C = W L^{-T}: forward-substitute each row of W against L
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = w(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= c(i, k) * l(j, k);
                c(i, j) = s / l(j, j);
            }
        }
        // symmetrize against roundoff
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double m = 0.5 * (c(i, j) + c(j, i));
                c(i, j) = c(j, i) = m;
            }
    }

    const GeneralizedEig full = symmetric_eig(c);

    GeneralizedEig out;
    out.eigenvalues.resize(d);
    out.eigenvectors = Matrix(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t src = (select == EigSelect::Smallest) ? j : n - 1 - j;
        out.eigenvalues[j] = full.eigenvalues[src];
        // v = L^{-T} u, back-substitution
        std::vector<double> v(n);
        for (std::size_t i = n; i-- > 0;) {
            double s = full.eigenvectors(i, src);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * v[k];
            v[i] = s / l(i, i);
        }
        out.eigenvectors.set_col(j, v);
    }
    return out;
}

double psnr(const Matrix& reference, const Matrix& estimate, double peak) {
    if (reference.rows() != estimate.rows() ||
        reference.cols() != estimate.cols())
        throw DimensionMismatch("psnr: shape mismatch");
    if (peak <= 0.0) throw Error("psnr: peak must be positive");
    double mse = 0.0;
    const auto& r = reference.data();
    const auto& e = estimate.data();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - e[i];
        mse += d * d;
    }
    mse /= static_cast<double>(r.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace mld
