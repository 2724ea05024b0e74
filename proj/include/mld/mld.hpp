#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mld/khyperline.hpp"
#include "mld/matrix.hpp"

namespace mld {

// Multilevel dictionary: an ordered list of per-level sub-dictionaries, each
// a set of unit-norm atoms fit to the previous level's residuals with a
// 1-sparse representation per level.
struct MultilevelDictionary {
    std::vector<Matrix> levels;  // each M x K_l, unit-norm columns
    double error_goal = 0.0;

    std::size_t dim() const { return levels.empty() ? 0 : levels[0].rows(); }
    std::size_t num_levels() const { return levels.size(); }
    std::vector<std::size_t> per_level_k() const;
    std::size_t total_atoms() const;
};

// Ensemble variant: D sub-dictionaries per level, trained on random subsets;
// approximations are averaged across the ensemble.
struct RobustMultilevelDictionary {
    std::vector<std::vector<Matrix>> levels;  // [level][d] -> M x K_l
    std::size_t rounds = 1;                   // D
    std::size_t subset_size = 0;              // T_D

    std::size_t dim() const {
        return levels.empty() ? 0 : levels[0][0].rows();
    }
    std::size_t num_levels() const { return levels.size(); }
};

// One (index, coefficient) pair per sample at one level; index is ignored
// where coeff == 0 and the sample was inactive.
struct LevelCodes {
    std::vector<std::size_t> index;
    std::vector<double> coeff;
};

struct TrainingTrace {
    std::vector<double> represented_energy;  // ||Psi_l A_l||_F^2
    std::vector<double> residual_energy;     // ||R_l||_F^2
    std::vector<std::size_t> active_count;   // |Lambda_{l-1}|
};

struct TrainResult {
    MultilevelDictionary dict;
    std::vector<LevelCodes> codes;  // one per populated level
    TrainingTrace trace;
    Matrix residual;  // M x T final residuals
};

// Multilevel dictionary learning. Level l clusters the residual columns
// whose squared norm exceeds error_goal; residuals of inactive samples pass
// through unchanged with zero codes. Stops when no sample is active or
// max_levels is reached. per_level_k may hold a single K broadcast to all
// levels.
TrainResult train(const Matrix& data, std::vector<std::size_t> per_level_k,
                  std::size_t max_levels, double error_goal,
                  const ClusteringConfig& cfg);

// MDL score for one level: residual description at variance sigma2 plus the
// cost of coding T coefficients, their locations, and K_l atoms. Any fixed
// logarithm base rescales all terms uniformly; log_base <= 0 selects the
// natural log.
double mdl_score(const Matrix& r_prev, const Matrix& atoms,
                 const LevelCodes& codes, std::size_t k, double sigma2,
                 double log_base = 0.0);

struct MdlConfig {
    double alpha = 0.5;  // fraction of level energy captured per level
    std::vector<std::size_t> candidate_k;
    std::size_t max_levels = 1;
};

struct MdlScoreEntry {
    std::size_t level;
    std::size_t k;
    double score;
};

struct EstimateResult {
    std::vector<std::size_t> selected_k;
    TrainResult training;
    std::vector<MdlScoreEntry> scores;
};

// Per level, fits one clustering per candidate K, scores each with the MDL
// criterion under the alpha-decay variance model sigma_l^2 = (1-alpha)^l E /
// (M T), and keeps the argmin-K clustering (ties to the smaller K).
EstimateResult estimate_level_sizes(const Matrix& data, const MdlConfig& cfg,
                                    const ClusteringConfig& clus_cfg);

struct RobustTrainResult {
    RobustMultilevelDictionary dict;
    TrainingTrace trace;
    Matrix residual;
};

// Ensemble (RMLD) learning: per level, D clusterings on random sample
// subsets of size subset_size; every active sample is approximated by the
// ensemble mean of its D one-sparse representations. rounds == 1 with
// subset_size == T reproduces plain training exactly.
RobustTrainResult train_robust(const Matrix& data, std::size_t k,
                               std::size_t max_levels, std::size_t rounds,
                               std::size_t subset_size,
                               const ClusteringConfig& cfg);

// Stacked coefficient matrix A, (sum K_l) x T, from per-level codes.
Matrix stack_coefficients(const MultilevelDictionary& dict,
                          const std::vector<LevelCodes>& codes);

// MLDDICT1 container: header (magic, M, L, robust flag, D, T_D, error goal,
// per-level K), then atoms per level as MLDMAT1 blocks (D blocks per level).
void write_mlddict(const std::string& path, const MultilevelDictionary& dict);
MultilevelDictionary read_mlddict(const std::string& path);
void write_rmlddict(const std::string& path,
                    const RobustMultilevelDictionary& dict);
RobustMultilevelDictionary read_rmlddict(const std::string& path);
bool mlddict_is_robust(const std::string& path);

}  // namespace mld
