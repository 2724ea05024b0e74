#include "mld/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mld/errors.hpp"
#include "mld/numerics.hpp"
#include "mld/pursuit.hpp"
#include "mld/rng.hpp"

namespace mld {

std::vector<std::size_t> solve_assignment(const Matrix& cost) {
    if (cost.rows() != cost.cols())
        throw SizeMismatch("solve_assignment: cost matrix not square");
    const std::size_t n = cost.rows();
    const double inf = std::numeric_limits<double>::infinity();

    // Hungarian algorithm with potentials, 1-based working arrays
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> perm(n, 0);
    for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
    return perm;
}

DictionaryDifference dictionary_difference(const MultilevelDictionary& psi,
                                           const MultilevelDictionary& lambda) {
    if (psi.num_levels() != lambda.num_levels() || psi.dim() != lambda.dim())
        throw SizeMismatch("dictionary_difference: shape mismatch");

    DictionaryDifference out;
    double total = 0.0;
    for (std::size_t l = 0; l < psi.num_levels(); ++l) {
        const Matrix& a = psi.levels[l];
        const Matrix& b = lambda.levels[l];
        if (a.cols() != b.cols())
            throw SizeMismatch("dictionary_difference: K mismatch at level " +
                               std::to_string(l + 1));
        const std::size_t k = a.cols();

        // pairwise cost with the optimal sign folded in:
        // ||psi - s*lambda||^2 = ||psi||^2 + ||lambda||^2 - 2|psi^T lambda|
        Matrix cost(k, k);
        for (std::size_t j = 0; j < k; ++j) {
            const double na = norm2_squared(a.col(j));
            for (std::size_t m = 0; m < k; ++m)
                cost(j, m) = na + norm2_squared(b.col(m)) -
                             2.0 * std::abs(dot(a.col(j), b.col(m)));
        }
        const auto perm = solve_assignment(cost);

        std::vector<int> signs(k, 1);
        for (std::size_t j = 0; j < k; ++j) {
            signs[j] = dot(a.col(j), b.col(perm[j])) >= 0.0 ? 1 : -1;
            total += cost(j, perm[j]);
        }
        out.permutation.push_back(perm);
        out.signs.push_back(std::move(signs));
    }
    out.value = total > 0.0 ? std::sqrt(total) : 0.0;
    return out;
}

std::vector<StabilityRow> stability_experiment(const SampleSource& source,
                                               const StabilityConfig& cfg) {
    std::vector<StabilityRow> rows;
    for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti) {
        const std::size_t t = cfg.t_values[ti];
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const std::uint64_t base = Rng::derive(cfg.seed, ti, trial);
            Matrix y1 = source(t, Rng::derive(base, 1));

            ClusteringConfig ccfg = cfg.clustering;
            ccfg.seed = Rng::derive(base, 2);
            const MultilevelDictionary dict1 =
                train(y1, {cfg.k}, cfg.levels, 0.0, ccfg).dict;

            for (std::size_t n : cfg.replace_counts) {
                if (n > t) continue;
                Matrix y2 = y1;
                if (n > 0) {
                    const Matrix fresh = source(n, Rng::derive(base, 3, n));
                    for (std::size_t i = 0; i < n; ++i)
                        y2.set_col(i, fresh.col(i));
                }
                const MultilevelDictionary dict2 =
                    train(y2, {cfg.k}, cfg.levels, 0.0, ccfg).dict;
                rows.push_back(
                    {t, n, trial, dictionary_difference(dict1, dict2).value});
            }
        }
    }
    return rows;
}

double mean_squared_error(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("mean_squared_error: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data().size());
}

namespace {

double test_mse(const Matrix& test, const MultilevelDictionary& dict,
                std::size_t levels = 0) {
    double err = 0.0;
    for (std::size_t i = 0; i < test.cols(); ++i) {
        const SparseCode code = mulp_encode(test.col(i), dict, levels);
        err += norm2_squared(code.residual);
    }
    return err / static_cast<double>(test.rows() * test.cols());
}

double test_mse(const Matrix& test, const RobustMultilevelDictionary& dict,
                std::size_t levels = 0) {
    double err = 0.0;
    for (std::size_t i = 0; i < test.cols(); ++i) {
        const EnsembleCode code = rmld_encode(test.col(i), dict, levels);
        err += norm2_squared(code.residual);
    }
    return err / static_cast<double>(test.rows() * test.cols());
}

}  // namespace

GeneralizationResult generalization_experiment(
    const SampleSource& source, const Matrix& test_set,
    const GeneralizationConfig& cfg) {
    GeneralizationResult out;
    for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti) {
        const std::size_t t = cfg.t_values[ti];
        const Matrix y = source(t, Rng::derive(cfg.seed, ti, 1));

        ClusteringConfig ccfg = cfg.clustering;
        ccfg.seed = Rng::derive(cfg.seed, ti, 2);
        const MultilevelDictionary dict =
            train(y, {cfg.k}, cfg.levels, 0.0, ccfg).dict;

        const std::size_t subset = std::max(
            cfg.k, static_cast<std::size_t>(
                       cfg.subset_fraction * static_cast<double>(t)));
        const RobustMultilevelDictionary rdict =
            train_robust(y, cfg.k, cfg.levels, cfg.rounds,
                         std::min(subset, t), ccfg)
                .dict;

        out.mse.push_back({"mld", t, test_mse(test_set, dict)});
        out.mse.push_back({"rmld", t, test_mse(test_set, rdict)});
        for (std::size_t lv = 1; lv <= dict.num_levels(); ++lv)
            out.per_level.push_back(
                {"mld", t, lv, test_mse(test_set, dict, lv)});
        for (std::size_t lv = 1; lv <= rdict.num_levels(); ++lv)
            out.per_level.push_back(
                {"rmld", t, lv, test_mse(test_set, rdict, lv)});

        if (ti + 1 == cfg.t_values.size()) {
            for (std::size_t d : cfg.rounds_sweep) {
                const auto res = train_robust(y, cfg.k, cfg.levels, d,
                                              std::min(subset, t), ccfg);
                out.per_rounds.push_back({d, test_mse(y, res.dict),
                                          test_mse(test_set, res.dict)});
            }
        }
    }
    return out;
}

MeasurementEnsemble make_measurement_ensemble(
    std::size_t n, std::size_t m, std::optional<double> noise_snr_db,
    std::uint64_t seed) {
    if (n > m)
        throw DimensionMismatch(
            "make_measurement_ensemble: more measurements than dimensions");
    Rng rng(Rng::derive(seed, 11));
    MeasurementEnsemble e;
    e.phi = Matrix(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) e.phi(i, j) = rng.gaussian();
    e.noise_snr_db = noise_snr_db;
    e.seed = seed;
    return e;
}

namespace {

struct ProjectedLevel {
    Matrix atoms;               // normalized projected atoms, N x K
    std::vector<double> norms;  // pre-normalization norms; < 1e-12 marks
                                // a degenerate (never selected) atom
};

ProjectedLevel project_level(const Matrix& phi, const Matrix& atoms) {
    ProjectedLevel p;
    p.atoms = matmul(phi, atoms);
    p.norms.resize(atoms.cols());
    for (std::size_t j = 0; j < atoms.cols(); ++j) {
        const double n = norm2(p.atoms.col(j));
        p.norms[j] = n;
        if (n < 1e-12) {
            auto col = p.atoms.col(j);
            std::fill(col.begin(), col.end(), 0.0);
        } else if (std::abs(n - 1.0) > 1e-12) {
            auto col = p.atoms.col(j);
            for (auto& x : col) x /= n;
        } else {
            // already unit to within atom tolerance; keep the exact entries
            // so an identity measurement reproduces plain pursuit bit for bit
            p.norms[j] = 1.0;
        }
    }
    return p;
}

// correlate-and-max in the measurement domain; returns (index, measured
// coefficient) or coefficient 0 when every atom is degenerate
std::pair<std::size_t, double> projected_pick(std::span<const double> x,
                                              const ProjectedLevel& lvl) {
    std::size_t best = 0;
    double best_abs = -1.0;
    double best_c = 0.0;
    for (std::size_t j = 0; j < lvl.atoms.cols(); ++j) {
        if (lvl.norms[j] < 1e-12) continue;
        const double c = dot(x, lvl.atoms.col(j));
        if (std::abs(c) > best_abs) {
            best_abs = std::abs(c);
            best_c = c;
            best = j;
        }
    }
    if (best_abs < 0.0) return {0, 0.0};
    return {best, best_c};
}

}  // namespace

Matrix measure(const Matrix& patches, const MeasurementEnsemble& ensemble) {
    Matrix x = matmul(ensemble.phi, patches);
    if (ensemble.noise_snr_db) {
        // AWGN scaled to the target SNR on the projected signal, per call
        // (per image), not per patch
        const double sig_power =
            frobenius_norm_squared(x) / static_cast<double>(x.data().size());
        const double sigma = std::sqrt(
            sig_power / std::pow(10.0, *ensemble.noise_snr_db / 10.0));
        Rng rng(Rng::derive(ensemble.seed, 13));
        for (auto& v : x.data()) v += sigma * rng.gaussian();
    }
    return x;
}

Matrix recover_patches(const Matrix& patches, const MultilevelDictionary& dict,
                       const MeasurementEnsemble& ensemble,
                       std::size_t levels) {
    if (dict.dim() != patches.rows() || ensemble.phi.cols() != dict.dim())
        throw DimensionMismatch("recover_patches: dimension mismatch");
    if (levels == 0) levels = dict.num_levels();

    std::vector<ProjectedLevel> proj;
    proj.reserve(levels);
    for (std::size_t l = 0; l < levels; ++l)
        proj.push_back(project_level(ensemble.phi, dict.levels[l]));

    Matrix x = measure(patches, ensemble);
    Matrix recovered(patches.rows(), patches.cols());
    std::vector<double> resid(x.rows());
    for (std::size_t i = 0; i < patches.cols(); ++i) {
        const auto xc = x.col(i);
        std::copy(xc.begin(), xc.end(), resid.begin());
        auto out = recovered.col(i);
        for (std::size_t l = 0; l < levels; ++l) {
            const auto [idx, c] = projected_pick(resid, proj[l]);
            if (c == 0.0) continue;
            const auto bhat = proj[l].atoms.col(idx);
            for (std::size_t m = 0; m < resid.size(); ++m)
                resid[m] -= c * bhat[m];
            const double a = c / proj[l].norms[idx];
            const auto psi = dict.levels[l].col(idx);
            for (std::size_t m = 0; m < out.size(); ++m) out[m] += a * psi[m];
        }
    }
    return recovered;
}

Matrix recover_patches(const Matrix& patches,
                       const RobustMultilevelDictionary& dict,
                       const MeasurementEnsemble& ensemble,
                       std::size_t levels) {
    if (dict.dim() != patches.rows() || ensemble.phi.cols() != dict.dim())
        throw DimensionMismatch("recover_patches: dimension mismatch");
    if (levels == 0) levels = dict.num_levels();
    const double inv_d = 1.0 / static_cast<double>(dict.rounds);

    std::vector<std::vector<ProjectedLevel>> proj(levels);
    for (std::size_t l = 0; l < levels; ++l)
        for (const auto& atoms : dict.levels[l])
            proj[l].push_back(project_level(ensemble.phi, atoms));

    Matrix x = measure(patches, ensemble);
    Matrix recovered(patches.rows(), patches.cols());
    std::vector<double> resid(x.rows());
    std::vector<double> meas_approx(x.rows());
    for (std::size_t i = 0; i < patches.cols(); ++i) {
        const auto xc = x.col(i);
        std::copy(xc.begin(), xc.end(), resid.begin());
        auto out = recovered.col(i);
        for (std::size_t l = 0; l < levels; ++l) {
            std::fill(meas_approx.begin(), meas_approx.end(), 0.0);
            std::vector<double> orig_approx(out.size(), 0.0);
            for (std::size_t d = 0; d < dict.rounds; ++d) {
                const auto [idx, c] = projected_pick(resid, proj[l][d]);
                if (c == 0.0) continue;
                const auto bhat = proj[l][d].atoms.col(idx);
                for (std::size_t m = 0; m < meas_approx.size(); ++m)
                    meas_approx[m] += c * bhat[m];
                const double a = c / proj[l][d].norms[idx];
                const auto psi = dict.levels[l][d].col(idx);
                for (std::size_t m = 0; m < orig_approx.size(); ++m)
                    orig_approx[m] += a * psi[m];
            }
            for (std::size_t m = 0; m < resid.size(); ++m)
                resid[m] -= meas_approx[m] * inv_d;
            for (std::size_t m = 0; m < out.size(); ++m)
                out[m] += orig_approx[m] * inv_d;
        }
    }
    return recovered;
}

namespace {

template <typename Dict>
RecoveryResult recover_image(const GrayImage& image, const Dict& dict,
                             const MeasurementEnsemble& ensemble,
                             std::size_t levels) {
    const std::size_t m = dict.dim();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(
        static_cast<double>(m))));
    if (side * side != m)
        throw DimensionMismatch("compressed_recovery: dict dim not a square");

    PatchSet patches = extract_patches(image, side, side, true);
    patches.patches = recover_patches(patches.patches, dict, ensemble, levels);

    RecoveryResult out;
    out.recovered = reassemble(patches, image.width, image.height, image.peak);
    const Matrix ref(image.pixels.size(), 1, image.pixels);
    const Matrix est(out.recovered.pixels.size(), 1, out.recovered.pixels);
    out.psnr_db = psnr(ref, est, image.peak);
    return out;
}

}  // namespace

RecoveryResult compressed_recovery(const GrayImage& image,
                                   const MultilevelDictionary& dict,
                                   const MeasurementEnsemble& ensemble,
                                   std::size_t levels) {
    return recover_image(image, dict, ensemble, levels);
}

RecoveryResult compressed_recovery(const GrayImage& image,
                                   const RobustMultilevelDictionary& dict,
                                   const MeasurementEnsemble& ensemble,
                                   std::size_t levels) {
    return recover_image(image, dict, ensemble, levels);
}

}  // namespace mld
