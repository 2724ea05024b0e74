#pragma once

#include <vector>

#include "mld/matrix.hpp"

namespace mld {

// Dominant left singular vector of Y via the power iteration
// psi <- Y Y^T psi / ||Y Y^T psi||. Stops when successive iterates differ by
// less than `tol` in l2 norm, or after `max_iters`. The returned vector has
// its first nonzero entry made nonnegative so results are reproducible; the
// underlying direction is sign-ambiguous.
std::vector<double> dominant_left_singular_vector(
    const Matrix& y, std::span<const double> init, std::size_t max_iters = 100,
    double tol = 1e-10);

struct GeneralizedEig {
    std::vector<double> eigenvalues;  // d values
    Matrix eigenvectors;              // n x d, B-orthonormal columns
};

enum class EigSelect { Smallest, Largest };

// d extremal eigenpairs of A v = lambda B v for symmetric A and SPD B.
// Reduction via B = L L^T to a standard symmetric problem, solved with
// cyclic Jacobi rotations. Intended for small dense problems (n <= a few
// hundred).
GeneralizedEig generalized_symmetric_eig(const Matrix& a, const Matrix& b,
                                         std::size_t d, EigSelect select);

// All eigenpairs of a symmetric matrix, ascending eigenvalue order.
// Cyclic Jacobi; eigenvectors orthonormal.
GeneralizedEig symmetric_eig(const Matrix& a);

// Cholesky factor L (lower triangular) of an SPD matrix.
// Throws NotPositiveDefinite on failure.
Matrix cholesky(const Matrix& b);

// 10 log10(peak^2 / MSE). Identical inputs give +infinity.
double psnr(const Matrix& reference, const Matrix& estimate, double peak);

}  // namespace mld
