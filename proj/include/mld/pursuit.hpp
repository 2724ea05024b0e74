#pragma once

#include <string>
#include <vector>

#include "mld/matrix.hpp"
#include "mld/mld.hpp"

namespace mld {

// One-atom-per-level code of a single vector. Reconstruction plus residual
// reproduces the encoder input exactly.
struct SparseCode {
    std::vector<std::size_t> atom_index;  // one per level used
    std::vector<double> coeff;
    std::vector<double> residual;  // M entries
    std::size_t levels_used = 0;
};

// Ensemble code: D (index, coefficient) pairs per level; the level
// approximation is the mean of the D one-sparse approximations.
struct EnsembleCode {
    std::vector<std::vector<std::size_t>> atom_index;  // [level][d]
    std::vector<std::vector<double>> coeff;            // [level][d]
    std::vector<double> residual;
    std::size_t levels_used = 0;
};

// Scalar-multiplication counter for the complexity contract: one correlate
// pass at level l costs M * K_l multiplications.
struct EncodeStats {
    std::size_t multiplications = 0;
};

// Correlate-and-max per level: pick the atom with the largest absolute
// correlation against the running residual (ties to the lowest index),
// subtract the 1-sparse approximation, continue. levels == 0 encodes against
// every level of the dictionary.
SparseCode mulp_encode(std::span<const double> y,
                       const MultilevelDictionary& dict,
                       std::size_t levels = 0, EncodeStats* stats = nullptr);

EnsembleCode rmld_encode(std::span<const double> y,
                         const RobustMultilevelDictionary& dict,
                         std::size_t levels = 0, EncodeStats* stats = nullptr);

std::vector<double> reconstruct(const SparseCode& code,
                                const MultilevelDictionary& dict);
std::vector<double> reconstruct(const EnsembleCode& code,
                                const RobustMultilevelDictionary& dict);

// Column-wise convenience wrappers.
std::vector<SparseCode> mulp_encode_all(const Matrix& data,
                                        const MultilevelDictionary& dict,
                                        std::size_t levels = 0,
                                        EncodeStats* stats = nullptr);
std::vector<EnsembleCode> rmld_encode_all(
    const Matrix& data, const RobustMultilevelDictionary& dict,
    std::size_t levels = 0, EncodeStats* stats = nullptr);

// Stacked coefficient matrix A, (sum K_l) x T, from per-sample codes.
Matrix stack_codes(const MultilevelDictionary& dict,
                   const std::vector<SparseCode>& codes);

// MLDCODE1 container: magic, sample count, M; then per sample levels_used,
// (level, index, coefficient) triples, and the residual vector.
void write_codes(const std::string& path, const std::vector<SparseCode>& codes,
                 std::size_t dim);
std::vector<SparseCode> read_codes(const std::string& path, std::size_t* dim);

}  // namespace mld
