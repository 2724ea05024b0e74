#pragma once

#include <cstdint>
#include <vector>

#include "mld/matrix.hpp"

namespace mld {

// K-hyperline clustering: least-squares fit of K one-dimensional subspaces
// through the origin. Each sample is assigned to the line that retains most
// of its energy; centroids are dominant left singular vectors of the
// assigned columns.

struct Clustering {
    Matrix atoms;                         // M x K, unit-norm columns
    std::vector<std::size_t> assignments; // per sample cluster index
    std::vector<double> coefficients;     // y^T psi of the assigned atom
    double distortion = 0.0;              // total over samples
};

enum class InitStrategy { RandomSamples, RandomUnit };
enum class EmptyClusterPolicy { ReseedWorst };

struct ClusteringConfig {
    std::size_t k = 1;
    std::size_t max_outer_iters = 100;
    InitStrategy init = InitStrategy::RandomSamples;
    std::uint64_t seed = 0;
    EmptyClusterPolicy empty_policy = EmptyClusterPolicy::ReseedWorst;
    std::size_t restarts = 1;  // best-of-n restarts, seeds derived from `seed`
    std::size_t power_iters = 100;
    double power_tol = 1e-10;
};

// ||y||^2 - (y^T psi)^2: energy of y off the line spanned by unit psi.
double distortion(std::span<const double> y, std::span<const double> psi);

struct Assignment {
    std::vector<std::size_t> indices;
    std::vector<double> coefficients;
};

// Per column: argmax_j |y^T psi_j| (ties to the lowest index), coefficient
// is the signed correlation with the chosen atom.
Assignment assign(const Matrix& data, const Matrix& atoms);

Clustering fit(const Matrix& data, const ClusteringConfig& cfg);

// Max-min centroid distance between two clusterings of equal K:
// max_j min_l [ d(psi_j, lambda_l)^{1/2} + d(psi_l, lambda_j)^{1/2} ].
// Sign- and permutation-invariant; zero iff atom sets coincide up to both.
double centroid_distance(const Matrix& psi_atoms, const Matrix& lambda_atoms);

// Monte-Carlo estimate of the L1 distance between the distortion functions
// of two clusterings, averaged over the given sample columns.
double empirical_l1_distance(const Matrix& psi_atoms,
                             const Matrix& lambda_atoms,
                             const Matrix& samples);

// Per-iteration distortion history of the most recent fit; exposed for
// monotonicity checks.
Clustering fit_traced(const Matrix& data, const ClusteringConfig& cfg,
                      std::vector<double>* distortion_trace);

}  // namespace mld
