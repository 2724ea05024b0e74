#include "mld/khyperline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mld/errors.hpp"
#include "mld/numerics.hpp"
#include "mld/rng.hpp"

namespace mld {

namespace {

void check_unit_atoms(const Matrix& atoms) {
    for (std::size_t j = 0; j < atoms.cols(); ++j)
        if (std::abs(norm2(atoms.col(j)) - 1.0) > 1e-6)
            throw NonUnitAtom("atom " + std::to_string(j) + " is not unit-norm");
}

double total_distortion(const Matrix& data, const Matrix& atoms,
                        const std::vector<std::size_t>& assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.cols(); ++i) {
        const auto y = data.col(i);
        const double c = dot(y, atoms.col(assignments[i]));
        total += norm2_squared(y) - c * c;
    }
    return total;
}

Matrix init_atoms(const Matrix& data, const ClusteringConfig& cfg, Rng& rng) {
    const std::size_t m = data.rows();
    Matrix atoms(m, cfg.k);
    if (cfg.init == InitStrategy::RandomUnit) {
        for (std::size_t j = 0; j < cfg.k; ++j)
            atoms.set_col(j, rng.unit_vector(m));
        return atoms;
    }
    // K distinct data columns with nonzero norm, normalized
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < data.cols(); ++i)
        if (norm2_squared(data.col(i)) > 0.0) candidates.push_back(i);
    for (std::size_t j = 0; j < cfg.k; ++j) {
        const std::size_t pick = rng.uniform_index(candidates.size());
        const std::size_t idx = candidates[pick];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto y = data.col(idx);
        const double n = norm2(y);
        std::vector<double> atom(m);
        for (std::size_t i = 0; i < m; ++i) atom[i] = y[i] / n;
        atoms.set_col(j, atom);
    }
    return atoms;
}

Clustering fit_once(const Matrix& data, const ClusteringConfig& cfg,
                    std::uint64_t seed, std::vector<double>* trace) {
    Rng rng(seed);
    Matrix atoms = init_atoms(data, cfg, rng);
    const std::size_t t = data.cols();

    std::vector<std::size_t> prev_assign;
    for (std::size_t iter = 0; iter < cfg.max_outer_iters; ++iter) {
        Assignment a = assign(data, atoms);

        // reseed empty clusters from the currently worst-represented sample
        std::vector<std::size_t> counts(cfg.k, 0);
        for (auto idx : a.indices) ++counts[idx];
        bool reseeded = false;
        for (std::size_t j = 0; j < cfg.k; ++j) {
            if (counts[j] != 0) continue;
            std::size_t worst = 0;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < t; ++i) {
                const double d = norm2_squared(data.col(i)) -
                                 a.coefficients[i] * a.coefficients[i];
                if (d > worst_d && counts[a.indices[i]] > 1) {
                    worst_d = d;
                    worst = i;
                }
            }
            if (worst_d < 0.0) continue;
            const double n = norm2(data.col(worst));
            if (n == 0.0) continue;
            std::vector<double> atom(data.rows());
            for (std::size_t i = 0; i < data.rows(); ++i)
                atom[i] = data.col(worst)[i] / n;
            atoms.set_col(j, atom);
            --counts[a.indices[worst]];
            a.indices[worst] = j;
            a.coefficients[worst] = n;
            ++counts[j];
            reseeded = true;
        }

        if (trace) trace->push_back(total_distortion(data, atoms, a.indices));

        if (!reseeded && a.indices == prev_assign) break;
        prev_assign = a.indices;

        // centroid update: dominant left singular vector of the assigned
        // columns, warm-started from the current atom
        for (std::size_t j = 0; j < cfg.k; ++j) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < t; ++i)
                if (a.indices[i] == j) members.push_back(i);
            if (members.empty()) continue;
            const Matrix yj = select_cols(data, members);
            if (frobenius_norm_squared(yj) == 0.0) continue;
            atoms.set_col(j, dominant_left_singular_vector(
                                 yj, atoms.col(j), cfg.power_iters,
                                 cfg.power_tol));
        }
    }

    // final assignment against the final atoms, so the returned coefficients
    // are exactly the correlate-and-max codes
    Assignment final = assign(data, atoms);
    Clustering out;
    out.atoms = std::move(atoms);
    out.assignments = std::move(final.indices);
    out.coefficients = std::move(final.coefficients);
    out.distortion = total_distortion(data, out.atoms, out.assignments);
    return out;
}

}  // namespace

double distortion(std::span<const double> y, std::span<const double> psi) {
    if (y.size() != psi.size())
        throw DimensionMismatch("distortion: length mismatch");
    if (std::abs(norm2(psi) - 1.0) > 1e-6)
        throw NonUnitAtom("distortion: psi is not unit-norm");
    const double c = dot(y, psi);
    const double d = norm2_squared(y) - c * c;
    return d > 0.0 ? d : 0.0;
}

Assignment assign(const Matrix& data, const Matrix& atoms) {
    if (atoms.cols() == 0) throw SizeMismatch("assign: no atoms");
    if (data.rows() != atoms.rows())
        throw DimensionMismatch("assign: dimension mismatch");
    check_unit_atoms(atoms);

    Assignment out;
    out.indices.resize(data.cols());
    out.coefficients.resize(data.cols());
    for (std::size_t i = 0; i < data.cols(); ++i) {
        const auto y = data.col(i);
        std::size_t best = 0;
        double best_abs = -1.0;
        double best_c = 0.0;
        for (std::size_t j = 0; j < atoms.cols(); ++j) {
            const double c = dot(y, atoms.col(j));
            if (std::abs(c) > best_abs) {
                best_abs = std::abs(c);
                best_c = c;
                best = j;
            }
        }
        out.indices[i] = best;
        out.coefficients[i] = best_c;
    }
    return out;
}

Clustering fit(const Matrix& data, const ClusteringConfig& cfg) {
    return fit_traced(data, cfg, nullptr);
}

Clustering fit_traced(const Matrix& data, const ClusteringConfig& cfg,
                      std::vector<double>* distortion_trace) {
    if (cfg.k < 1 || cfg.max_outer_iters < 1)
        throw InvalidK("fit: K and max_outer_iters must be >= 1");
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < data.cols(); ++i)
        if (norm2_squared(data.col(i)) > 0.0) ++nonzero;
    if (nonzero == 0) throw ZeroData("fit: all-zero training matrix");
    if (nonzero < cfg.k)
        throw TooFewSamples("fit: fewer nonzero samples than clusters");

    Clustering best;
    best.distortion = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        const std::uint64_t seed =
            cfg.restarts == 1 ? cfg.seed : Rng::derive(cfg.seed, r);
        std::vector<double> trace;
        Clustering c = fit_once(data, cfg, seed,
                                distortion_trace ? &trace : nullptr);
        if (c.distortion < best.distortion) {
            best = std::move(c);
            if (distortion_trace) *distortion_trace = std::move(trace);
        }
    }
    return best;
}

double centroid_distance(const Matrix& psi_atoms, const Matrix& lambda_atoms) {
    if (psi_atoms.cols() != lambda_atoms.cols() ||
        psi_atoms.rows() != lambda_atoms.rows())
        throw SizeMismatch("centroid_distance: shape mismatch");
    check_unit_atoms(psi_atoms);
    check_unit_atoms(lambda_atoms);
    const std::size_t k = psi_atoms.cols();
    auto root_d = [](std::span<const double> a, std::span<const double> b) {
        const double c = dot(a, b);
        const double d = 1.0 - c * c;
        return d > 0.0 ? std::sqrt(d) : 0.0;
    };
    double max_term = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double min_term = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < k; ++l) {
            const double term = root_d(psi_atoms.col(j), lambda_atoms.col(l)) +
                                root_d(psi_atoms.col(l), lambda_atoms.col(j));
            min_term = std::min(min_term, term);
        }
        max_term = std::max(max_term, min_term);
    }
    return max_term;
}

double empirical_l1_distance(const Matrix& psi_atoms,
                             const Matrix& lambda_atoms,
                             const Matrix& samples) {
    if (psi_atoms.rows() != lambda_atoms.rows() ||
        psi_atoms.rows() != samples.rows())
        throw DimensionMismatch("empirical_l1_distance: dimension mismatch");
    if (samples.cols() == 0)
        throw EmptySamples("empirical_l1_distance: no samples");
    const Assignment ga = assign(samples, psi_atoms);
    const Assignment gb = assign(samples, lambda_atoms);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.cols(); ++i) {
        const double e = norm2_squared(samples.col(i));
        const double da = e - ga.coefficients[i] * ga.coefficients[i];
        const double db = e - gb.coefficients[i] * gb.coefficients[i];
        total += std::abs(da - db);
    }
    return total / static_cast<double>(samples.cols());
}

}  // namespace mld
