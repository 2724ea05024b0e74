#include "mld/mld.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "mld/errors.hpp"
#include "mld/rng.hpp"

namespace mld {

std::vector<std::size_t> MultilevelDictionary::per_level_k() const {
    std::vector<std::size_t> ks;
    ks.reserve(levels.size());
    for (const auto& l : levels) ks.push_back(l.cols());
    return ks;
}

std::size_t MultilevelDictionary::total_atoms() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.cols();
    return n;
}

namespace {

std::vector<std::size_t> active_set(const Matrix& r, double error_goal) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r.cols(); ++i)
        if (norm2_squared(r.col(i)) > error_goal) idx.push_back(i);
    return idx;
}

std::size_t clamp_k(std::size_t k, std::size_t limit, std::size_t level) {
    if (k <= limit) return k;
    std::cerr << "mld: level " << (level + 1) << ": clamping K from " << k
              << " to " << limit << " active samples\n";
    return limit;
}

}  // namespace

TrainResult train(const Matrix& data, std::vector<std::size_t> per_level_k,
                  std::size_t max_levels, double error_goal,
                  const ClusteringConfig& cfg) {
    if (data.cols() == 0) throw EmptyTrainingSet("train: no training samples");
    if (max_levels == 0) throw InvalidK("train: max_levels must be >= 1");
    if (per_level_k.empty()) throw InvalidK("train: per_level_k empty");
    if (per_level_k.size() == 1)
        per_level_k.assign(max_levels, per_level_k[0]);
    if (per_level_k.size() < max_levels)
        throw InvalidK("train: per_level_k shorter than max_levels");

    const std::size_t t = data.cols();
    TrainResult out;
    out.dict.error_goal = error_goal;
    out.residual = data;

    for (std::size_t l = 0; l < max_levels; ++l) {
        const std::vector<std::size_t> active =
            active_set(out.residual, error_goal);
        if (active.empty()) break;

        ClusteringConfig lcfg = cfg;
        lcfg.k = clamp_k(per_level_k[l], active.size(), l);
        lcfg.seed = Rng::derive(cfg.seed, l, 0);
        const Matrix r_hat = select_cols(out.residual, active);
        const Clustering clus = fit(r_hat, lcfg);

        LevelCodes codes;
        codes.index.assign(t, 0);
        codes.coeff.assign(t, 0.0);
        double rep_energy = 0.0;
        for (std::size_t j = 0; j < active.size(); ++j) {
            const std::size_t i = active[j];
            const std::size_t atom = clus.assignments[j];
            const double c = clus.coefficients[j];
            codes.index[i] = atom;
            codes.coeff[i] = c;
            rep_energy += c * c;
            auto r = out.residual.col(i);
            const auto psi = clus.atoms.col(atom);
            for (std::size_t m = 0; m < r.size(); ++m) r[m] -= c * psi[m];
        }

        out.dict.levels.push_back(clus.atoms);
        out.codes.push_back(std::move(codes));
        out.trace.represented_energy.push_back(rep_energy);
        out.trace.residual_energy.push_back(
            frobenius_norm_squared(out.residual));
        out.trace.active_count.push_back(active.size());
    }
    if (out.dict.levels.empty())
        throw EmptyTrainingSet("train: no sample exceeds the error goal");
    return out;
}

double mdl_score(const Matrix& r_prev, const Matrix& atoms,
                 const LevelCodes& codes, std::size_t k, double sigma2,
                 double log_base) {
    if (sigma2 <= 0.0) throw InvalidVariance("mdl_score: sigma2 must be > 0");
    const std::size_t t = r_prev.cols();
    const std::size_t m = r_prev.rows();
    if (codes.coeff.size() != t)
        throw DimensionMismatch("mdl_score: code count mismatch");

    double fit_err = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const auto r = r_prev.col(i);
        const auto psi = atoms.col(codes.index[i]);
        const double c = codes.coeff[i];
        for (std::size_t j = 0; j < m; ++j) {
            const double d = r[j] - c * psi[j];
            fit_err += d * d;
        }
    }

    const double scale = log_base > 0.0 ? 1.0 / std::log(log_base) : 1.0;
    auto lg = [scale](double x) { return std::log(x) * scale; };
    const double td = static_cast<double>(t);
    const double md = static_cast<double>(m);
    const double kd = static_cast<double>(k);
    // the data term is a negative log likelihood, so it rescales with the
    // base like the model-cost terms; the argmin is base-invariant
    return fit_err / (2.0 * sigma2) * scale + 0.5 * td * lg(md * td) +
           td * lg(td * kd) + 0.5 * kd * md * lg(md * td);
}

EstimateResult estimate_level_sizes(const Matrix& data, const MdlConfig& cfg,
                                    const ClusteringConfig& clus_cfg) {
    if (data.cols() == 0)
        throw EmptyTrainingSet("estimate_level_sizes: no samples");
    if (cfg.candidate_k.empty())
        throw InvalidK("estimate_level_sizes: empty candidate list");
    if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
        throw Error("estimate_level_sizes: alpha must lie in (0,1)");

    std::vector<std::size_t> candidates = cfg.candidate_k;
    std::sort(candidates.begin(), candidates.end());

    const double total_energy = frobenius_norm_squared(data);
    const std::size_t t_total = data.cols();
    const std::size_t m = data.rows();

    EstimateResult out;
    out.training.dict.error_goal = 0.0;
    out.training.residual = data;

    for (std::size_t l = 0; l < cfg.max_levels; ++l) {
        const std::vector<std::size_t> active =
            active_set(out.training.residual, 0.0);
        if (active.empty()) break;
        const Matrix r_hat = select_cols(out.training.residual, active);

        const double sigma2 = std::pow(1.0 - cfg.alpha,
                                       static_cast<double>(l + 1)) *
                              total_energy /
                              (static_cast<double>(m) *
                               static_cast<double>(t_total));

        Clustering best_clus;
        std::size_t best_k = 0;
        double best_score = 0.0;
        std::size_t last_eval = 0;
        for (std::size_t k : candidates) {
            const std::size_t kc = std::min(k, active.size());
            if (kc == last_eval) continue;  // clamp made it a duplicate
            last_eval = kc;

            ClusteringConfig lcfg = clus_cfg;
            lcfg.k = kc;
            lcfg.seed = Rng::derive(clus_cfg.seed, l, kc);
            Clustering clus = fit(r_hat, lcfg);

            LevelCodes hat_codes;
            hat_codes.index = clus.assignments;
            hat_codes.coeff = clus.coefficients;
            const double score =
                mdl_score(r_hat, clus.atoms, hat_codes, kc, sigma2);
            out.scores.push_back({l + 1, kc, score});
            if (best_k == 0 || score < best_score) {
                best_score = score;
                best_k = kc;
                best_clus = std::move(clus);
            }
        }

        LevelCodes codes;
        codes.index.assign(t_total, 0);
        codes.coeff.assign(t_total, 0.0);
        double rep_energy = 0.0;
        for (std::size_t j = 0; j < active.size(); ++j) {
            const std::size_t i = active[j];
            const double c = best_clus.coefficients[j];
            codes.index[i] = best_clus.assignments[j];
            codes.coeff[i] = c;
            rep_energy += c * c;
            auto r = out.training.residual.col(i);
            const auto psi = best_clus.atoms.col(best_clus.assignments[j]);
            for (std::size_t mm = 0; mm < r.size(); ++mm)
                r[mm] -= c * psi[mm];
        }
        out.selected_k.push_back(best_k);
        out.training.dict.levels.push_back(best_clus.atoms);
        out.training.codes.push_back(std::move(codes));
        out.training.trace.represented_energy.push_back(rep_energy);
        out.training.trace.residual_energy.push_back(
            frobenius_norm_squared(out.training.residual));
        out.training.trace.active_count.push_back(active.size());
    }
    return out;
}

RobustTrainResult train_robust(const Matrix& data, std::size_t k,
                               std::size_t max_levels, std::size_t rounds,
                               std::size_t subset_size,
                               const ClusteringConfig& cfg) {
    if (data.cols() == 0)
        throw EmptyTrainingSet("train_robust: no training samples");
    if (subset_size > data.cols())
        throw SubsetTooLarge("train_robust: subset larger than training set");
    if (rounds < 1) throw InvalidK("train_robust: rounds must be >= 1");

    RobustTrainResult out;
    out.dict.rounds = rounds;
    out.dict.subset_size = subset_size;
    out.residual = data;
    const double inv_d = 1.0 / static_cast<double>(rounds);

    for (std::size_t l = 0; l < max_levels; ++l) {
        const std::vector<std::size_t> active = active_set(out.residual, 0.0);
        if (active.empty()) break;
        const std::size_t td = std::min(subset_size, active.size());
        const std::size_t kl = clamp_k(k, td, l);

        std::vector<Matrix> ensemble;
        ensemble.reserve(rounds);
        for (std::size_t d = 0; d < rounds; ++d) {
            Rng subset_rng(Rng::derive(cfg.seed, 1000 + l, d));
            const std::vector<std::size_t> local =
                subset_rng.sample_indices(active.size(), td);
            std::vector<std::size_t> global(local.size());
            for (std::size_t j = 0; j < local.size(); ++j)
                global[j] = active[local[j]];
            const Matrix y_sub = select_cols(out.residual, global);

            ClusteringConfig dcfg = cfg;
            dcfg.k = kl;
            dcfg.seed = Rng::derive(cfg.seed, l, d);
            ensemble.push_back(fit(y_sub, dcfg).atoms);
        }

        // ensemble-mean approximation for every active sample
        const Matrix r_active = select_cols(out.residual, active);
        std::vector<Assignment> assigns;
        assigns.reserve(rounds);
        for (const auto& atoms : ensemble)
            assigns.push_back(assign(r_active, atoms));

        double rep_energy = 0.0;
        for (std::size_t j = 0; j < active.size(); ++j) {
            std::vector<double> approx(data.rows(), 0.0);
            for (std::size_t d = 0; d < rounds; ++d) {
                const double c = assigns[d].coefficients[j];
                const auto psi = ensemble[d].col(assigns[d].indices[j]);
                for (std::size_t m = 0; m < approx.size(); ++m)
                    approx[m] += c * psi[m];
            }
            for (auto& x : approx) x *= inv_d;
            rep_energy += norm2_squared(approx);
            auto r = out.residual.col(active[j]);
            for (std::size_t m = 0; m < r.size(); ++m) r[m] -= approx[m];
        }

        out.dict.levels.push_back(std::move(ensemble));
        out.trace.represented_energy.push_back(rep_energy);
        out.trace.residual_energy.push_back(
            frobenius_norm_squared(out.residual));
        out.trace.active_count.push_back(active.size());
    }
    return out;
}

Matrix stack_coefficients(const MultilevelDictionary& dict,
                          const std::vector<LevelCodes>& codes) {
    if (codes.empty()) throw EmptyCodes("stack_coefficients: no codes");
    const std::size_t t = codes[0].coeff.size();
    Matrix a(dict.total_atoms(), t);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < codes.size(); ++l) {
        for (std::size_t i = 0; i < t; ++i)
            if (codes[l].coeff[i] != 0.0)
                a(offset + codes[l].index[i], i) = codes[l].coeff[i];
        offset += dict.levels[l].cols();
    }
    return a;
}

namespace {

constexpr char kDictMagic[8] = {'M', 'L', 'D', 'D', 'I', 'C', 'T', '1'};

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

struct DictHeader {
    std::uint64_t m = 0;
    std::uint64_t l = 0;
    std::uint64_t flags = 0;  // bit 0: robust
    std::uint64_t rounds = 1;
    std::uint64_t subset_size = 0;
    double error_goal = 0.0;
    std::vector<std::uint64_t> per_level_k;
};

void write_header(std::ostream& os, const DictHeader& h) {
    os.write(kDictMagic, 8);
    put_u64(os, h.m);
    put_u64(os, h.l);
    put_u64(os, h.flags);
    put_u64(os, h.rounds);
    put_u64(os, h.subset_size);
    put_u64(os, std::bit_cast<std::uint64_t>(h.error_goal));
    for (auto k : h.per_level_k) put_u64(os, k);
}

DictHeader read_header(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kDictMagic, 8) != 0)
        throw IoError("not an MLDDICT1 file");
    DictHeader h;
    h.m = get_u64(is);
    h.l = get_u64(is);
    h.flags = get_u64(is);
    h.rounds = get_u64(is);
    h.subset_size = get_u64(is);
    h.error_goal = std::bit_cast<double>(get_u64(is));
    h.per_level_k.resize(h.l);
    for (auto& k : h.per_level_k) k = get_u64(is);
    if (!is) throw IoError("truncated MLDDICT1 header");
    return h;
}

}  // namespace

void write_mlddict(const std::string& path, const MultilevelDictionary& dict) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    DictHeader h;
    h.m = dict.dim();
    h.l = dict.num_levels();
    h.error_goal = dict.error_goal;
    for (const auto& lvl : dict.levels) h.per_level_k.push_back(lvl.cols());
    write_header(os, h);
    for (const auto& lvl : dict.levels) write_mldmat_body(os, lvl);
    if (!os) throw IoError("write failed: " + path);
}

MultilevelDictionary read_mlddict(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    const DictHeader h = read_header(is);
    if (h.flags & 1) throw IoError(path + " holds a robust dictionary");
    MultilevelDictionary dict;
    dict.error_goal = h.error_goal;
    for (std::uint64_t l = 0; l < h.l; ++l) {
        Matrix atoms = read_mldmat_body(is);
        if (atoms.rows() != h.m || atoms.cols() != h.per_level_k[l])
            throw IoError("MLDDICT1 level shape disagrees with header");
        dict.levels.push_back(std::move(atoms));
    }
    return dict;
}

void write_rmlddict(const std::string& path,
                    const RobustMultilevelDictionary& dict) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    DictHeader h;
    h.m = dict.dim();
    h.l = dict.num_levels();
    h.flags = 1;
    h.rounds = dict.rounds;
    h.subset_size = dict.subset_size;
    for (const auto& lvl : dict.levels) h.per_level_k.push_back(lvl[0].cols());
    write_header(os, h);
    for (const auto& lvl : dict.levels)
        for (const auto& atoms : lvl) write_mldmat_body(os, atoms);
    if (!os) throw IoError("write failed: " + path);
}

RobustMultilevelDictionary read_rmlddict(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    const DictHeader h = read_header(is);
    if (!(h.flags & 1)) throw IoError(path + " holds a plain dictionary");
    RobustMultilevelDictionary dict;
    dict.rounds = h.rounds;
    dict.subset_size = h.subset_size;
    for (std::uint64_t l = 0; l < h.l; ++l) {
        std::vector<Matrix> lvl;
        for (std::uint64_t d = 0; d < h.rounds; ++d) {
            Matrix atoms = read_mldmat_body(is);
            if (atoms.rows() != h.m || atoms.cols() != h.per_level_k[l])
                throw IoError("MLDDICT1 level shape disagrees with header");
            lvl.push_back(std::move(atoms));
        }
        dict.levels.push_back(std::move(lvl));
    }
    return dict;
}

bool mlddict_is_robust(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    return (read_header(is).flags & 1) != 0;
}

}  // namespace mld
