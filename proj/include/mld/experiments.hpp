#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mld/datasets.hpp"
#include "mld/matrix.hpp"
#include "mld/mld.hpp"

namespace mld {

// Exact solver for the square assignment problem: returns the column
// permutation minimizing sum_i cost(i, perm[i]).
std::vector<std::size_t> solve_assignment(const Matrix& cost);

struct DictionaryDifference {
    double value = 0.0;
    // per level: the matched atom index and the optimal sign per atom of Psi
    std::vector<std::vector<std::size_t>> permutation;
    std::vector<std::vector<int>> signs;
};

// Minimum Frobenius norm of the difference between two dictionaries over
// per-level atom permutations and sign flips; the assignment is solved
// exactly with cost 2 - 2|psi^T lambda| per pair.
DictionaryDifference dictionary_difference(const MultilevelDictionary& psi,
                                           const MultilevelDictionary& lambda);

// Data source abstraction: produces `count` sample columns for a given seed.
using SampleSource = std::function<Matrix(std::size_t count,
                                          std::uint64_t seed)>;

struct StabilityRow {
    std::size_t t;
    std::size_t replace_count;
    std::size_t trial;
    double difference;
};

struct StabilityConfig {
    std::vector<std::size_t> t_values;
    std::vector<std::size_t> replace_counts;
    std::size_t trials = 10;
    std::size_t k = 8;
    std::size_t levels = 4;
    ClusteringConfig clustering;
    std::uint64_t seed = 0;
};

// Trains a dictionary, retrains after replacing n samples with fresh draws
// from the same source, and records the permutation/sign-invariant
// Frobenius distance between the two.
std::vector<StabilityRow> stability_experiment(const SampleSource& source,
                                               const StabilityConfig& cfg);

struct GeneralizationConfig {
    std::vector<std::size_t> t_values;
    std::size_t k = 8;
    std::size_t levels = 4;
    std::size_t rounds = 10;          // D for the ensemble variant
    double subset_fraction = 0.5;     // T_D / T
    std::vector<std::size_t> rounds_sweep;  // optional MSE-vs-rounds curve
    ClusteringConfig clustering;
    std::uint64_t seed = 0;
};

struct GeneralizationResult {
    // method is "mld" or "rmld"
    struct MseRow { std::string method; std::size_t t; double mse; };
    struct LevelRow { std::string method; std::size_t t; std::size_t levels;
                      double mse; };
    struct RoundsRow { std::size_t rounds; double train_mse; double test_mse; };
    std::vector<MseRow> mse;
    std::vector<LevelRow> per_level;
    std::vector<RoundsRow> per_rounds;
};

GeneralizationResult generalization_experiment(const SampleSource& source,
                                               const Matrix& test_set,
                                               const GeneralizationConfig& cfg);

struct MeasurementEnsemble {
    Matrix phi;  // N x M, i.i.d. standard normal entries
    std::optional<double> noise_snr_db;
    std::uint64_t seed = 0;
};

MeasurementEnsemble make_measurement_ensemble(
    std::size_t n, std::size_t m, std::optional<double> noise_snr_db,
    std::uint64_t seed);

// x = Phi y + eta per patch column; when noise_snr_db is set, AWGN is scaled
// to the target SNR of the projected signal over the whole call (per image).
Matrix measure(const Matrix& patches, const MeasurementEnsemble& ensemble);

struct RecoveryResult {
    GrayImage recovered;
    double psnr_db = 0.0;
};

// Patchwise compressed recovery: measure x = Phi y + eta per non-overlapping
// patch, encode x against the dictionary with each level's atoms projected
// through Phi and renormalized, reconstruct in the original space, and
// reassemble with the stored patch means.
RecoveryResult compressed_recovery(const GrayImage& image,
                                   const MultilevelDictionary& dict,
                                   const MeasurementEnsemble& ensemble,
                                   std::size_t levels = 0);
RecoveryResult compressed_recovery(const GrayImage& image,
                                   const RobustMultilevelDictionary& dict,
                                   const MeasurementEnsemble& ensemble,
                                   std::size_t levels = 0);

// Same recovery on raw patch columns; returns recovered columns. Shared by
// the image paths and the synthetic acceptance runs.
Matrix recover_patches(const Matrix& patches,
                       const MultilevelDictionary& dict,
                       const MeasurementEnsemble& ensemble,
                       std::size_t levels = 0);
Matrix recover_patches(const Matrix& patches,
                       const RobustMultilevelDictionary& dict,
                       const MeasurementEnsemble& ensemble,
                       std::size_t levels = 0);

double mean_squared_error(const Matrix& a, const Matrix& b);

}  // namespace mld
