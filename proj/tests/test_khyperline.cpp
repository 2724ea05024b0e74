#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mld/errors.hpp"
#include "mld/khyperline.hpp"
#include "mld/rng.hpp"

using namespace mld;

namespace {

Matrix from_cols(std::size_t rows, std::vector<std::vector<double>> cols) {
    Matrix m(rows, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) m.set_col(c, cols[c]);
    return m;
}

// two noisy planted lines in R^5
Matrix two_line_data(std::uint64_t seed, std::size_t t = 40) {
    Rng rng(seed);
    const auto l1 = rng.unit_vector(5);
    const auto l2 = rng.unit_vector(5);
    Matrix data(5, t);
    for (std::size_t i = 0; i < t; ++i) {
        const auto& line = i % 2 == 0 ? l1 : l2;
        const double c = rng.gaussian() + 2.0;
        auto col = data.col(i);
        for (std::size_t m = 0; m < 5; ++m)
            col[m] = c * line[m] + 0.05 * rng.gaussian();
    }
    return data;
}

double recompute_distortion(const Matrix& data, const Clustering& c) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.cols(); ++i)
        total += distortion(data.col(i), c.atoms.col(c.assignments[i]));
    return total;
}

}  // namespace

TEST_CASE("distortion closed-form cases") {
    const std::vector<double> e1 = {1, 0};
    CHECK(distortion(e1, e1) == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<double> perp = {0, 2};
    CHECK(distortion(perp, e1) == doctest::Approx(4.0).epsilon(1e-12));

    const std::vector<double> y = {3, 4};
    CHECK(distortion(y, e1) == doctest::Approx(16.0).epsilon(1e-12));

    const std::vector<double> not_unit = {0.5, 0.5};
    CHECK_THROWS_AS(distortion(y, not_unit), NonUnitAtom);
}

TEST_CASE("assign: correlation argmax with documented tie rule") {
    const Matrix atoms = from_cols(2, {{1, 0}, {0, 1}});

    const Matrix y1 = from_cols(2, {{1, 0}});
    auto a = assign(y1, atoms);
    CHECK(a.indices[0] == 0);
    CHECK(a.coefficients[0] == doctest::Approx(1.0));

    const Matrix y2 = from_cols(2, {{0, -2}});
    a = assign(y2, atoms);
    CHECK(a.indices[0] == 1);
    CHECK(a.coefficients[0] == doctest::Approx(-2.0));

    const double s = 1.0 / std::sqrt(2.0);
    const Matrix y3 = from_cols(2, {{s, s}});
    a = assign(y3, atoms);
    CHECK(a.indices[0] == 0);  // exact tie resolves to the lowest index
    CHECK(a.coefficients[0] == doctest::Approx(s));
}

TEST_CASE("assign is scale-direction invariant") {
    Rng rng(31);
    Matrix atoms(4, 3);
    for (std::size_t j = 0; j < 3; ++j) atoms.set_col(j, rng.unit_vector(4));
    Matrix y(4, 1);
    for (const double c : {2.5, -3.0, 0.001}) {
        y.set_col(0, rng.unit_vector(4));
        const auto base = assign(y, atoms);
        Matrix scaled = y;
        for (auto& x : scaled.data()) x *= c;
        const auto got = assign(scaled, atoms);
        CHECK(got.indices[0] == base.indices[0]);
        CHECK(got.coefficients[0] ==
              doctest::Approx(c * base.coefficients[0]).epsilon(1e-12));
    }
}

TEST_CASE("fit: two axis-aligned clusters are fit exactly") {
    std::vector<std::vector<double>> cols;
    for (int i = 0; i < 10; ++i) cols.push_back({1, 0});
    for (int i = 0; i < 10; ++i) cols.push_back({0, 1});
    const Matrix data = from_cols(2, cols);

    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.seed = 4;
    const auto c = fit(data, cfg);
    CHECK(c.distortion == doctest::Approx(0.0).epsilon(1e-18));
    for (std::size_t j = 0; j < 2; ++j) {
        const auto atom = c.atoms.col(j);
        CHECK(std::abs(std::abs(atom[0]) + std::abs(atom[1]) - 1.0) < 1e-10);
    }
}

TEST_CASE("fit: signed multiples of one axis collapse to a single line") {
    const Matrix data = from_cols(2, {{1, 0}, {2, 0}, {-3, 0}});
    ClusteringConfig cfg;
    cfg.k = 1;
    cfg.seed = 1;
    const auto c = fit(data, cfg);
    CHECK(c.distortion == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(std::abs(c.atoms(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.atoms(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit distortion field matches a from-scratch recomputation") {
    const Matrix data = two_line_data(8);
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.seed = 8;
    const auto c = fit(data, cfg);
    CHECK(c.distortion ==
          doctest::Approx(recompute_distortion(data, c)).epsilon(1e-9));
    for (std::size_t j = 0; j < c.atoms.cols(); ++j)
        CHECK(std::abs(norm2(c.atoms.col(j)) - 1.0) < 1e-12);
}

TEST_CASE("fit approaches a multi-restart oracle on planted two-line data") {
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix data = two_line_data(100 + seed);
        ClusteringConfig cfg;
        cfg.k = 2;
        cfg.seed = seed;
        cfg.restarts = 4;
        const auto c = fit(data, cfg);

        ClusteringConfig oracle_cfg = cfg;
        oracle_cfg.restarts = 200;
        const auto oracle = fit(data, oracle_cfg);
        CHECK(c.distortion >= oracle.distortion - 1e-9);
        if (c.distortion <= oracle.distortion + 1e-6) ++hits;
    }
    CHECK(hits >= 9);
}

TEST_CASE("fit distortion trace is monotone non-increasing") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Matrix data(6, 50);
        for (auto& x : data.data()) x = rng.gaussian();
        ClusteringConfig cfg;
        cfg.k = 4;
        cfg.seed = seed;
        std::vector<double> trace;
        fit_traced(data, cfg, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i)
            CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
}

TEST_CASE("fit input validation") {
    ClusteringConfig cfg;
    cfg.k = 3;
    CHECK_THROWS_AS(fit(Matrix(4, 2), cfg), ZeroData);
    Matrix two = from_cols(4, {{1, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK_THROWS_AS(fit(two, cfg), TooFewSamples);
}

TEST_CASE("centroid_distance: zero cases and exhaustive oracle") {
    const Matrix psi = from_cols(2, {{1, 0}, {0, 1}});
    CHECK(centroid_distance(psi, psi) == doctest::Approx(0.0).epsilon(1e-15));

    Matrix flipped = psi;
    for (auto& x : flipped.data()) x = -x;
    CHECK(centroid_distance(psi, flipped) ==
          doctest::Approx(0.0).epsilon(1e-15));

    const double th = 10.0 * std::numbers::pi / 180.0;
    const Matrix lam =
        from_cols(2, {{std::cos(th), std::sin(th)}, {0, 1}});
    // exhaustive max-min over all (j, l) pairs
    double expected = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < 2; ++l) {
            const double d1 = distortion(psi.col(j), lam.col(l));
            const double d2 = distortion(psi.col(l), lam.col(j));
            best = std::min(best, std::sqrt(d1) + std::sqrt(d2));
        }
        expected = std::max(expected, best);
    }
    CHECK(centroid_distance(psi, lam) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(centroid_distance(psi, lam) ==
          doctest::Approx(centroid_distance(lam, psi)).epsilon(1e-12));

    CHECK_THROWS_AS(centroid_distance(psi, from_cols(2, {{1, 0}})),
                    SizeMismatch);
}

TEST_CASE("centroid_distance vanishes for sign flips on random dictionaries") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix psi(4, 3);
        for (std::size_t j = 0; j < 3; ++j) psi.set_col(j, rng.unit_vector(4));
        Matrix lam = psi;
        for (std::size_t j = 0; j < 3; ++j)
            if (rng.uniform() < 0.5) {
                auto col = lam.col(j);
                for (auto& x : col) x = -x;
            }
        CHECK(centroid_distance(psi, lam) < 1e-7);
        // swapping two atoms keeps the set identical
        Matrix swapped = psi;
        for (std::size_t r = 0; r < 4; ++r)
            std::swap(swapped(r, 0), swapped(r, 2));
        CHECK(centroid_distance(psi, swapped) < 1e-7);
    }
}

TEST_CASE("empirical_l1_distance") {
    const Matrix psi = from_cols(2, {{1, 0}});
    const Matrix lam = from_cols(2, {{0, 1}});
    const Matrix samples = from_cols(2, {{1, 0}, {0, 1}});

    CHECK(empirical_l1_distance(psi, psi, samples) ==
          doctest::Approx(0.0).epsilon(1e-15));
    Matrix flipped = psi;
    for (auto& x : flipped.data()) x = -x;
    CHECK(empirical_l1_distance(psi, flipped, samples) ==
          doctest::Approx(0.0).epsilon(1e-15));
    CHECK(empirical_l1_distance(psi, lam, samples) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(empirical_l1_distance(psi, lam, Matrix(2, 0)),
                    EmptySamples);
}
