#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "mld/errors.hpp"
#include "mld/mld.hpp"
#include "mld/pursuit.hpp"
#include "mld/rng.hpp"

using namespace mld;

namespace {

MultilevelDictionary random_dict(std::size_t m,
                                 const std::vector<std::size_t>& ks,
                                 std::uint64_t seed) {
    Rng rng(seed);
    MultilevelDictionary dict;
    for (std::size_t k : ks) {
        Matrix level(m, k);
        for (std::size_t j = 0; j < k; ++j) level.set_col(j, rng.unit_vector(m));
        dict.levels.push_back(std::move(level));
    }
    return dict;
}

RobustMultilevelDictionary random_rdict(std::size_t m, std::size_t k,
                                        std::size_t l, std::size_t d,
                                        std::uint64_t seed) {
    Rng rng(seed);
    RobustMultilevelDictionary dict;
    dict.rounds = d;
    dict.subset_size = 0;
    for (std::size_t lev = 0; lev < l; ++lev) {
        std::vector<Matrix> ensemble;
        for (std::size_t j = 0; j < d; ++j) {
            Matrix atoms(m, k);
            for (std::size_t a = 0; a < k; ++a)
                atoms.set_col(a, rng.unit_vector(m));
            ensemble.push_back(std::move(atoms));
        }
        dict.levels.push_back(std::move(ensemble));
    }
    return dict;
}

}  // namespace

TEST_CASE("mulp_encode: worked two-level example") {
    MultilevelDictionary dict;
    Matrix l1(2, 2);
    l1(0, 0) = 1.0;
    l1(1, 1) = 1.0;
    Matrix l2(2, 1);
    l2(0, 0) = 1.0;
    dict.levels = {l1, l2};

    const std::vector<double> y = {3, 4};
    const auto code = mulp_encode(y, dict);
    REQUIRE(code.levels_used == 2);
    CHECK(code.atom_index[0] == 1);
    CHECK(code.coeff[0] == doctest::Approx(4.0));
    CHECK(code.atom_index[1] == 0);
    CHECK(code.coeff[1] == doctest::Approx(3.0));
    CHECK(norm2(code.residual) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mulp_encode: zero input gives zero code via the tie rule") {
    const auto dict = random_dict(4, {3, 3}, 5);
    const std::vector<double> y(4, 0.0);
    const auto code = mulp_encode(y, dict);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(code.atom_index[l] == 0);
        CHECK(code.coeff[l] == 0.0);
    }
    CHECK(norm2(code.residual) == 0.0);
}

TEST_CASE("mulp_encode: greedy pick equals exhaustive argmax per level") {
    const auto dict = random_dict(8, {4, 4, 4}, 9);
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const auto y = rng.unit_vector(8);
        const auto code = mulp_encode(y, dict);

        std::vector<double> r(y.begin(), y.end());
        double prev_norm = norm2(r);
        for (std::size_t l = 0; l < 3; ++l) {
            std::size_t best = 0;
            double best_abs = -1.0;
            for (std::size_t j = 0; j < dict.levels[l].cols(); ++j) {
                const double c = std::abs(dot(r, dict.levels[l].col(j)));
                if (c > best_abs) {
                    best_abs = c;
                    best = j;
                }
            }
            CHECK(code.atom_index[l] == best);
            const auto psi = dict.levels[l].col(best);
            const double c = dot(r, psi);
            for (std::size_t m = 0; m < r.size(); ++m) r[m] -= c * psi[m];
            CHECK(norm2(r) <= prev_norm + 1e-12);
            // chosen atom is orthogonal to the level's outgoing residual
            CHECK(std::abs(dot(r, psi)) <= 1e-10 * prev_norm);
            prev_norm = norm2(r);
        }

        // energy identity
        double coded = 0.0;
        for (double c : code.coeff) coded += c * c;
        CHECK(coded + norm2_squared(code.residual) ==
              doctest::Approx(norm2_squared(y)).epsilon(1e-8));
    }
}

TEST_CASE("reconstruct + residual is an exact round trip") {
    const auto dict = random_dict(6, {3, 2, 4}, 12);
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        auto y = rng.unit_vector(6);
        for (auto& x : y) x *= 3.0;
        const auto code = mulp_encode(y, dict);
        const auto rec = reconstruct(code, dict);
        double err = 0.0;
        for (std::size_t m = 0; m < 6; ++m) {
            const double d = y[m] - (rec[m] + code.residual[m]);
            err += d * d;
        }
        CHECK(std::sqrt(err) <= 1e-10 * norm2(y));
    }
}

TEST_CASE("encoding with fewer levels and monotone test MSE") {
    const auto dict = random_dict(8, {4, 4, 4, 4}, 21);
    Rng rng(22);
    Matrix data(8, 50);
    for (auto& x : data.data()) x = rng.gaussian();

    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t levels = 1; levels <= 4; ++levels) {
        const auto codes = mulp_encode_all(data, dict, levels);
        double mse = 0.0;
        for (const auto& c : codes) mse += norm2_squared(c.residual);
        CHECK(mse <= prev + 1e-12);
        prev = mse;
    }
    CHECK_THROWS_AS(mulp_encode(std::vector<double>(7, 1.0), dict),
                    DimensionMismatch);
    CHECK_THROWS_AS(mulp_encode(std::vector<double>(8, 1.0), dict, 5),
                    DimensionMismatch);
}

TEST_CASE("rmld_encode: D=1 reduces to mulp_encode") {
    const auto rdict = random_rdict(6, 3, 2, 1, 31);
    MultilevelDictionary dict;
    for (const auto& lev : rdict.levels) dict.levels.push_back(lev[0]);

    Rng rng(32);
    const auto y = rng.unit_vector(6);
    const auto ecode = rmld_encode(y, rdict);
    const auto scode = mulp_encode(y, dict);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(ecode.atom_index[l][0] == scode.atom_index[l]);
        CHECK(ecode.coeff[l][0] == scode.coeff[l]);
    }
    CHECK(ecode.residual == scode.residual);
}

TEST_CASE("rmld_encode: identical sub-dictionaries average to one pick") {
    auto rdict = random_rdict(6, 3, 2, 1, 41);
    rdict.levels[0].push_back(rdict.levels[0][0]);
    rdict.levels[0].push_back(rdict.levels[0][0]);
    rdict.levels[1].push_back(rdict.levels[1][0]);
    rdict.levels[1].push_back(rdict.levels[1][0]);
    rdict.rounds = 3;

    MultilevelDictionary dict;
    for (const auto& lev : rdict.levels) dict.levels.push_back(lev[0]);

    Rng rng(42);
    const auto y = rng.unit_vector(6);
    const auto ecode = rmld_encode(y, rdict);
    const auto scode = mulp_encode(y, dict);
    for (std::size_t m = 0; m < 6; ++m)
        CHECK(ecode.residual[m] == doctest::Approx(scode.residual[m]).epsilon(1e-12));
}

TEST_CASE("rmld_encode: exact reconstruction identity for D=3") {
    const auto rdict = random_rdict(7, 4, 3, 3, 51);
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const auto y = rng.unit_vector(7);
        const auto code = rmld_encode(y, rdict);
        const auto rec = reconstruct(code, rdict);
        double err = 0.0;
        for (std::size_t m = 0; m < 7; ++m) {
            const double d = y[m] - (rec[m] + code.residual[m]);
            err += d * d;
        }
        CHECK(std::sqrt(err) <= 1e-10);
    }
}

TEST_CASE("operation-count probe is exactly M * sum K_l per vector") {
    const auto dict = random_dict(8, {4, 6, 2}, 61);
    Rng rng(62);
    Matrix data(8, 10);
    for (auto& x : data.data()) x = rng.gaussian();

    EncodeStats stats;
    mulp_encode_all(data, dict, 0, &stats);
    CHECK(stats.multiplications == 10 * 8 * (4 + 6 + 2));

    const auto rdict = random_rdict(8, 4, 2, 3, 63);
    EncodeStats rstats;
    rmld_encode_all(data, rdict, 0, &rstats);
    CHECK(rstats.multiplications == 10 * 3 * 8 * (4 + 4));
}

TEST_CASE("stack_codes layout matches training-side stacking") {
    Rng rng(71);
    Matrix data(6, 60);
    for (auto& x : data.data()) x = rng.gaussian();
    ClusteringConfig cc;
    cc.seed = 71;
    const auto res = train(data, {3}, 2, 0.0, cc);

    const auto codes = mulp_encode_all(data, res.dict);
    const Matrix a = stack_codes(res.dict, codes);
    const Matrix a_train = stack_coefficients(res.dict, res.codes);
    REQUIRE(a.rows() == a_train.rows());
    REQUIRE(a.cols() == a_train.cols());
    // training codes are correlate-and-max codes of the same residual chain
    for (std::size_t i = 0; i < a.data().size(); ++i)
        CHECK(a.data()[i] == doctest::Approx(a_train.data()[i]).epsilon(1e-10));
}

TEST_CASE("codes round-trip bit-exactly through MLDCODE1") {
    const auto dict = random_dict(5, {3, 3}, 81);
    Rng rng(82);
    Matrix data(5, 25);
    for (auto& x : data.data()) x = rng.gaussian();
    const auto codes = mulp_encode_all(data, dict);

    const std::string path = "test_pursuit_codes.bin";
    write_codes(path, codes, 5);
    std::size_t dim = 0;
    const auto back = read_codes(path, &dim);
    CHECK(dim == 5);
    REQUIRE(back.size() == codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        CHECK(back[i].atom_index == codes[i].atom_index);
        CHECK(back[i].coeff == codes[i].coeff);
        CHECK(back[i].residual == codes[i].residual);
        CHECK(back[i].levels_used == codes[i].levels_used);
    }
    std::remove(path.c_str());
}
