#include "mld/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mld/errors.hpp"
#include "mld/numerics.hpp"

namespace mld {

namespace {

// keep the tau largest entries per row (ties to the lower column), zero the
// rest, then symmetrize by elementwise max
void sparsify_and_symmetrize(Matrix& w, std::size_t tau) {
    const std::size_t t = w.rows();
    Matrix kept(t, t);
    std::vector<std::size_t> order(t);
    for (std::size_t i = 0; i < t; ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (w(i, a) != w(i, b)) return w(i, a) > w(i, b);
            return a < b;
        });
        for (std::size_t r = 0; r < std::min(tau, t); ++r) {
            const std::size_t j = order[r];
            if (w(i, j) <= 0.0) break;
            kept(i, j) = w(i, j);
        }
    }
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j)
            w(i, j) = std::max(kept(i, j), kept(j, i));
}

Matrix laplacian_of(const Matrix& w) {
    Matrix l(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) {
            deg += w(i, j);
            l(i, j) = -w(i, j);
        }
        l(i, i) += deg;
    }
    return l;
}

// Y S Y^T for symmetric S, symmetrized against roundoff
Matrix sandwich(const Matrix& y, const Matrix& s) {
    Matrix ys = matmul(y, s);
    Matrix out = matmul_a_bt(ys, y);
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = i + 1; j < out.cols(); ++j) {
            const double m = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = out(j, i) = m;
        }
    return out;
}

void regularize(Matrix& m) {
    double tr = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) tr += m(i, i);
    const double eps =
        1e-8 * (tr > 0.0 ? tr / static_cast<double>(m.rows()) : 1.0);
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += eps;
}

Embedding solve_embedding(Matrix num, Matrix den, std::size_t d,
                          EigSelect select) {
    // regularize only when the plain factorization fails
    try {
        cholesky(den);
    } catch (const NotPositiveDefinite&) {
        regularize(den);
        regularize(num);
    }
    const GeneralizedEig eig = generalized_symmetric_eig(num, den, d, select);
    Embedding e;
    e.v = eig.eigenvectors;
    e.d = d;
    return e;
}

}  // namespace

AffinityGraph sparse_code_graph(const Matrix& codes, std::size_t tau) {
    if (codes.cols() == 0) throw EmptyCodes("sparse_code_graph: no codes");
    if (tau < 1) throw Error("sparse_code_graph: tau must be >= 1");
    const std::size_t t = codes.cols();

    Matrix w = matmul_at_b(codes, codes);
    for (auto& x : w.data()) x = std::abs(x);
    for (std::size_t i = 0; i < t; ++i) w(i, i) = 0.0;
    sparsify_and_symmetrize(w, tau);

    AffinityGraph g;
    g.degree.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < t; ++j) deg += w(i, j);
        g.degree[i] = deg;
    }
    g.laplacian = laplacian_of(w);
    g.w = std::move(w);
    return g;
}

Embedding lpp(const Matrix& y, const AffinityGraph& graph, std::size_t d) {
    if (y.cols() != graph.w.cols())
        throw DimensionMismatch("lpp: sample count disagrees with graph");
    if (d > y.rows()) throw DimensionMismatch("lpp: d exceeds dimension");
    double total_degree = 0.0;
    for (double deg : graph.degree) total_degree += deg;
    if (total_degree == 0.0) throw DegenerateGraph("lpp: empty graph");

    const Matrix num = sandwich(y, graph.laplacian);
    Matrix yd = y;
    for (std::size_t i = 0; i < y.cols(); ++i) {
        auto col = yd.col(i);
        for (auto& x : col) x *= graph.degree[i];
    }
    Matrix den = matmul_a_bt(yd, y);
    for (std::size_t i = 0; i < den.rows(); ++i)
        for (std::size_t j = i + 1; j < den.cols(); ++j) {
            const double m = 0.5 * (den(i, j) + den(j, i));
            den(i, j) = den(j, i) = m;
        }
    return solve_embedding(num, den, d, EigSelect::Smallest);
}

LdeAffinities lde_affinities(const Matrix& codes,
                             const std::vector<int>& labels, std::size_t tau,
                             std::size_t tau_prime) {
    if (codes.cols() == 0) throw EmptyCodes("lde_affinities: no codes");
    if (labels.size() != codes.cols())
        throw DimensionMismatch("lde_affinities: label count mismatch");
    if (tau < 1 || tau_prime < 1)
        throw Error("lde_affinities: tau and tau' must be >= 1");
    const std::size_t t = codes.cols();

    Matrix corr = matmul_at_b(codes, codes);
    for (auto& x : corr.data()) x = std::abs(x);

    LdeAffinities out;
    out.intra = Matrix(t, t);
    out.inter = Matrix(t, t);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j) {
            if (i == j) continue;
            if (labels[i] == labels[j])
                out.intra(i, j) = corr(i, j);
            else
                out.inter(i, j) = corr(i, j);
        }
    sparsify_and_symmetrize(out.intra, tau);
    sparsify_and_symmetrize(out.inter, tau_prime);
    return out;
}

Embedding lde(const Matrix& y, const Matrix& w_intra, const Matrix& w_inter,
              std::size_t d) {
    if (y.cols() != w_intra.cols() || y.cols() != w_inter.cols())
        throw DimensionMismatch("lde: sample count disagrees with affinities");
    if (d > y.rows()) throw DimensionMismatch("lde: d exceeds dimension");
    const Matrix num = sandwich(y, laplacian_of(w_inter));
    const Matrix den = sandwich(y, laplacian_of(w_intra));
    return solve_embedding(num, den, d, EigSelect::Largest);
}

std::vector<double> embed(const Embedding& e, std::span<const double> sample) {
    return matvec_t(e.v, sample);
}

Matrix embed_all(const Embedding& e, const Matrix& samples) {
    return matmul_at_b(e.v, samples);
}

std::vector<int> knn_classify(const Matrix& train,
                              const std::vector<int>& labels,
                              const Matrix& test, std::size_t k) {
    if (train.cols() == 0) throw EmptyTrainSet("knn_classify: no training set");
    if (labels.size() != train.cols())
        throw DimensionMismatch("knn_classify: label count mismatch");
    if (train.rows() != test.rows())
        throw DimensionMismatch("knn_classify: dimension mismatch");
    if (k < 1) throw Error("knn_classify: k must be >= 1");
    k = std::min(k, train.cols());

    std::vector<int> out(test.cols());
    std::vector<std::size_t> order(train.cols());
    std::vector<double> dist(train.cols());
    for (std::size_t i = 0; i < test.cols(); ++i) {
        const auto x = test.col(i);
        for (std::size_t j = 0; j < train.cols(); ++j) {
            double s = 0.0;
            const auto y = train.col(j);
            for (std::size_t m = 0; m < x.size(); ++m) {
                const double diff = x[m] - y[m];
                s += diff * diff;
            }
            dist[j] = s;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        // equal distances resolve to the lowest training index
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) {
                      if (dist[a] != dist[b]) return dist[a] < dist[b];
                      return a < b;
                  });
        if (k == 1) {
            out[i] = labels[order[0]];
            continue;
        }
        std::map<int, std::size_t> votes;
        for (std::size_t r = 0; r < k; ++r) ++votes[labels[order[r]]];
        int best_label = labels[order[0]];
        std::size_t best_votes = 0;
        for (std::size_t r = 0; r < k; ++r) {
            const int lab = labels[order[r]];
            if (votes[lab] > best_votes) {
                best_votes = votes[lab];
                best_label = lab;
            }
        }
        out[i] = best_label;
    }
    return out;
}

LabeledDataset read_labeled_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.empty()) continue;
        labels.push_back(static_cast<int>(std::lround(vals.back())));
        vals.pop_back();
        if (!rows.empty() && rows.back().size() != vals.size())
            throw IoError(path + ": ragged rows");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw IoError(path + ": no samples");

    LabeledDataset ds;
    ds.samples = Matrix(rows[0].size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        ds.samples.set_col(i, rows[i]);
    ds.labels = std::move(labels);
    return ds;
}

}  // namespace mld
