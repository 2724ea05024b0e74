#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "mld/datasets.hpp"
#include "mld/mld.hpp"
#include "mld/pursuit.hpp"
#include "mld/subspace.hpp"

using namespace mld;

namespace {

std::string binary_path() {
    const char* p = std::getenv("MLDICT_BIN");
    REQUIRE_MESSAGE(p != nullptr, "MLDICT_BIN must point at the mldict binary");
    return p;
}

int run(const std::string& args) {
    const std::string cmd =
        binary_path() + " " + args + " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE_MESSAGE(is.good(), path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_two_class_csv(const std::string& train_path,
                         const std::string& test_path) {
    const auto a = synth_hyperlines(8, {3}, 2, 60, 0.02, 0.5, 71);
    const auto b = synth_hyperlines(8, {3}, 2, 60, 0.02, 0.5, 72);
    auto dump = [&](const std::string& path, std::size_t from, std::size_t to) {
        std::ofstream os(path);
        os.precision(17);
        for (int cls = 0; cls < 2; ++cls) {
            const Matrix& m = cls == 0 ? a.data : b.data;
            for (std::size_t i = from; i < to; ++i) {
                for (std::size_t r = 0; r < m.rows(); ++r)
                    os << m(r, i) << ",";
                os << cls << "\n";
            }
        }
    };
    dump(train_path, 0, 45);
    dump(test_path, 45, 60);
}

}  // namespace

TEST_CASE("train command is deterministic and matches the library") {
    const auto synth = synth_hyperlines(8, {4}, 2, 150, 0.02, 0.5, 91);
    write_mldmat("cli_data.mat", synth.data);

    REQUIRE(run("--seed 5 train --data cli_data.mat --k 4 --levels 2 "
                "--out cli_tr_a") == 0);
    REQUIRE(run("--seed 5 train --data cli_data.mat --k 4 --levels 2 "
                "--out cli_tr_b") == 0);
    CHECK(slurp("cli_tr_a.dict") == slurp("cli_tr_b.dict"));
    CHECK(slurp("cli_tr_a.trace.csv") == slurp("cli_tr_b.trace.csv"));

    ClusteringConfig cc;
    cc.seed = 5;
    const auto lib = train(synth.data, {4}, 2, 0.0, cc);
    const auto cli = read_mlddict("cli_tr_a.dict");
    REQUIRE(cli.num_levels() == lib.dict.num_levels());
    for (std::size_t l = 0; l < cli.num_levels(); ++l)
        CHECK(cli.levels[l].data() == lib.dict.levels[l].data());
}

TEST_CASE("encode command reproduces library codes byte for byte") {
    REQUIRE(run("--seed 5 encode --data cli_data.mat --dict cli_tr_a.dict "
                "--out cli_enc") == 0);

    const auto data = read_mldmat("cli_data.mat");
    const auto dict = read_mlddict("cli_tr_a.dict");
    const auto codes = mulp_encode_all(data, dict);
    write_codes("cli_enc_lib.codes", codes, dict.dim());
    CHECK(slurp("cli_enc.codes") == slurp("cli_enc_lib.codes"));
}

TEST_CASE("config file values are used and flags override them") {
    {
        std::ofstream os("cli_train.cfg");
        os << "data=cli_data.mat\n";
        os << "# comment\n";
        os << "k=4\n";
        os << "levels=2\n";
        os << "out=cli_tr_cfg\n";
    }
    REQUIRE(run("--seed 5 train --config cli_train.cfg") == 0);
    CHECK(slurp("cli_tr_cfg.dict") == slurp("cli_tr_a.dict"));

    // the flag wins over the file
    REQUIRE(run("--seed 5 train --config cli_train.cfg --out cli_tr_ovr "
                "--levels 1") == 0);
    const auto ovr = read_mlddict("cli_tr_ovr.dict");
    CHECK(ovr.num_levels() == 1);
}

TEST_CASE("subspace command matches an in-process run bit for bit") {
    write_two_class_csv("cli_sub_train.csv", "cli_sub_test.csv");
    REQUIRE(run("--seed 9 subspace --train cli_sub_train.csv "
                "--test cli_sub_test.csv --method lde --k 3 --levels 2 "
                "--embed-dim 2 --out cli_sub") == 0);

    const auto train_ds = read_labeled_csv("cli_sub_train.csv");
    const auto test_ds = read_labeled_csv("cli_sub_test.csv");
    ClusteringConfig cc;
    cc.seed = 9;
    const auto trained = train(train_ds.samples, {3}, 2, 0.0, cc);
    const auto codes = mulp_encode_all(train_ds.samples, trained.dict);
    const Matrix a = stack_codes(trained.dict, codes);
    const auto aff = lde_affinities(a, train_ds.labels, 4, 4);
    const auto emb = lde(train_ds.samples, aff.intra, aff.inter, 2);
    const auto pred = knn_classify(embed_all(emb, train_ds.samples),
                                   train_ds.labels,
                                   embed_all(emb, test_ds.samples), 1);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == test_ds.labels[i]) ++correct;
    const double accuracy =
        static_cast<double>(correct) / static_cast<double>(pred.size());

    std::ostringstream want;
    want.precision(17);
    want << "accuracy\n" << accuracy << "\n";
    CHECK(slurp("cli_sub.result.csv") == want.str());
}

TEST_CASE("recover with the identity ensemble matches plain encoding") {
    GrayImage img;
    img.width = img.height = 8;
    img.peak = 255.0;
    img.pixels.resize(64);
    for (std::size_t i = 0; i < 64; ++i)
        img.pixels[i] = static_cast<double>((i * 37) % 256);
    write_pgm("cli_img.pgm", img);

    const auto patches = extract_patches(img, 4, 4, true);
    write_mldmat("cli_patches.mat", patches.patches);
    REQUIRE(run("--seed 3 train --data cli_patches.mat --k 3 --levels 2 "
                "--out cli_rec_dict") == 0);
    REQUIRE(run("--seed 3 recover --image cli_img.pgm "
                "--dict cli_rec_dict.dict --identity --out cli_rec_a") == 0);
    REQUIRE(run("--seed 3 recover --image cli_img.pgm "
                "--dict cli_rec_dict.dict --identity --out cli_rec_b") == 0);
    CHECK(slurp("cli_rec_a.pgm") == slurp("cli_rec_b.pgm"));
    CHECK(slurp("cli_rec_a.result.csv") == slurp("cli_rec_b.result.csv"));
}

TEST_CASE("exit codes follow the documented convention") {
    CHECK(run("") == 2);                        // missing subcommand
    CHECK(run("train") == 2);                   // missing required flag
    CHECK(run("train --data cli_missing.mat") == 3);  // data error
    CHECK(run("--seed 1 recover --image cli_img.pgm "
              "--dict cli_rec_dict.dict") == 2);  // measurements unset
    CHECK(run("--help") == 0);
}
