#pragma once

#include <string>
#include <vector>

#include "mld/matrix.hpp"

namespace mld {

// Sparse-code affinity graph over samples: W = |A^T A| with the diagonal
// zeroed, tau-sparsified per row, symmetrized by elementwise max.
struct AffinityGraph {
    Matrix w;                    // T x T, symmetric, nonnegative
    std::vector<double> degree;  // row sums
    Matrix laplacian;            // D - W
};

AffinityGraph sparse_code_graph(const Matrix& codes, std::size_t tau);

struct LabeledDataset {
    Matrix samples;               // M x T
    std::vector<int> labels;      // T class ids
};

struct Embedding {
    Matrix v;  // M x d projection directions
    std::size_t d = 0;
};

// Locality preserving projections: d smallest generalized eigenvectors of
// (Y L Y^T, Y D Y^T); diagonals are regularized when the factorization of
// Y D Y^T fails.
Embedding lpp(const Matrix& y, const AffinityGraph& graph, std::size_t d);

// Intra-class (tau neighbors) and inter-class (tau' neighbors) affinity
// matrices ranked by absolute sparse-code correlation, symmetrized by max.
struct LdeAffinities {
    Matrix intra;  // W
    Matrix inter;  // W'
};

LdeAffinities lde_affinities(const Matrix& codes,
                             const std::vector<int>& labels, std::size_t tau,
                             std::size_t tau_prime);

// Local discriminant embedding via the ratio-trace relaxation: d largest
// generalized eigenvectors of (Y L' Y^T, Y L Y^T).
Embedding lde(const Matrix& y, const Matrix& w_intra, const Matrix& w_inter,
              std::size_t d);

std::vector<double> embed(const Embedding& e, std::span<const double> sample);
Matrix embed_all(const Embedding& e, const Matrix& samples);

// Euclidean k-NN labels, ties broken by the lowest training index.
std::vector<int> knn_classify(const Matrix& train, const std::vector<int>& labels,
                              const Matrix& test, std::size_t k = 1);

// CSV loader: one sample per line, label in the last column.
LabeledDataset read_labeled_csv(const std::string& path);

}  // namespace mld
