// mldict: train / encode / recover / experiment driver around libmld.
//
// Every command takes flags plus an optional flat key=value config file
// (flags win), honors a single --seed, and writes a manifest echoing the
// fully resolved configuration next to its artifacts.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mld/datasets.hpp"
#include "mld/errors.hpp"
#include "mld/experiments.hpp"
#include "mld/khyperline.hpp"
#include "mld/matrix.hpp"
#include "mld/mld.hpp"
#include "mld/numerics.hpp"
#include "mld/pursuit.hpp"
#include "mld/rng.hpp"
#include "mld/subspace.hpp"

namespace {

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoull(tok));
    }
    return out;
}

std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw mld::IoError("cannot open config: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(is, line)) {
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line = line.substr(start);
        if (line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw mld::IoError("config line without '=': " + line);
        tokens.push_back("--" + line.substr(0, eq) + "=" + line.substr(eq + 1));
    }
    return tokens;
}

struct Manifest {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
    void add(const std::string& k, std::uint64_t v) { add(k, std::to_string(v)); }
    void add(const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        add(k, os.str());
    }
    void add_list(const std::string& k, const std::vector<std::size_t>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(v[i]);
        }
        add(k, s);
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw mld::IoError("cannot open for writing: " + path);
        for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
        if (!os) throw mld::IoError("write failed: " + path);
    }
};

std::ofstream open_csv(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw mld::IoError("cannot open for writing: " + path);
    os.precision(17);
    return os;
}

mld::ClusteringConfig clustering_config(std::uint64_t seed,
                                        std::size_t restarts) {
    mld::ClusteringConfig c;
    c.seed = seed;
    c.restarts = restarts;
    return c;
}

double encode_mse(const mld::Matrix& data,
                  const std::vector<mld::SparseCode>& codes) {
    double e = 0.0;
    for (const auto& c : codes)
        for (double r : c.residual) e += r * r;
    return e / static_cast<double>(data.rows() * data.cols());
}

// ----- train -------------------------------------------------------------

struct TrainOpts {
    std::string data_path;
    std::string k_list = "8";
    std::size_t levels = 4;
    double error_goal = 0.0;
    std::size_t restarts = 1;
    std::string out = "train";
};

int cmd_train(const TrainOpts& o, std::uint64_t seed) {
    const mld::Matrix data = mld::read_mldmat(o.data_path);
    const auto ks = parse_list(o.k_list);
    const auto res = mld::train(data, ks, o.levels, o.error_goal,
                                clustering_config(seed, o.restarts));
    mld::write_mlddict(o.out + ".dict", res.dict);

    auto trace = open_csv(o.out + ".trace.csv");
    trace << "level,active,represented_energy,residual_energy\n";
    for (std::size_t l = 0; l < res.trace.residual_energy.size(); ++l)
        trace << l + 1 << "," << res.trace.active_count[l] << ","
              << res.trace.represented_energy[l] << ","
              << res.trace.residual_energy[l] << "\n";

    Manifest m;
    m.add("command", std::string("train"));
    m.add("seed", seed);
    m.add("data", o.data_path);
    m.add("k", o.k_list);
    m.add("levels", o.levels);
    m.add("error-goal", o.error_goal);
    m.add("restarts", o.restarts);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "levels_populated=" << res.dict.num_levels() << "\n";
    return 0;
}

// ----- mdl-estimate ------------------------------------------------------

struct MdlOpts {
    std::string data_path;
    std::string candidates = "1,2,3,4,5,6";
    std::size_t levels = 4;
    double alpha = 0.5;
    double error_goal = 0.0;
    std::size_t restarts = 1;
    std::string out = "mdl";
};

int cmd_mdl_estimate(const MdlOpts& o, std::uint64_t seed) {
    const mld::Matrix data = mld::read_mldmat(o.data_path);
    mld::MdlConfig mc;
    mc.alpha = o.alpha;
    mc.candidate_k = parse_list(o.candidates);
    mc.max_levels = o.levels;
    const auto res = mld::estimate_level_sizes(
        data, mc, clustering_config(seed, o.restarts));
    mld::write_mlddict(o.out + ".dict", res.training.dict);

    auto scores = open_csv(o.out + ".scores.csv");
    scores << "level,k,score\n";
    for (const auto& e : res.scores)
        scores << e.level + 1 << "," << e.k << "," << e.score << "\n";

    // soft trend check: the per-level minimum score should not decrease
    std::vector<double> level_min;
    for (const auto& e : res.scores) {
        if (e.level >= level_min.size())
            level_min.resize(e.level + 1, e.score);
        level_min[e.level] = std::min(level_min[e.level], e.score);
    }
    for (std::size_t l = 1; l < level_min.size(); ++l)
        if (level_min[l] < level_min[l - 1]) {
            std::cerr << "warning: minimum score drops from level " << l
                      << " to " << l + 1 << "\n";
            break;
        }

    Manifest m;
    m.add("command", std::string("mdl-estimate"));
    m.add("seed", seed);
    m.add("data", o.data_path);
    m.add("candidates", o.candidates);
    m.add("levels", o.levels);
    m.add("alpha", o.alpha);
    m.add("error-goal", o.error_goal);
    m.add("restarts", o.restarts);
    m.add("out", o.out);
    m.add_list("selected-k", res.selected_k);
    m.write(o.out + ".manifest");

    std::cout << "selected_k=";
    for (std::size_t i = 0; i < res.selected_k.size(); ++i)
        std::cout << (i ? "," : "") << res.selected_k[i];
    std::cout << "\n";
    return 0;
}

// ----- encode ------------------------------------------------------------

struct EncodeOpts {
    std::string data_path;
    std::string dict_path;
    std::size_t levels = 0;
    std::string out = "encode";
};

int cmd_encode(const EncodeOpts& o, std::uint64_t seed) {
    const mld::Matrix data = mld::read_mldmat(o.data_path);
    double mse = 0.0;
    mld::Matrix recon(data.rows(), data.cols());
    if (mld::mlddict_is_robust(o.dict_path)) {
        const auto dict = mld::read_rmlddict(o.dict_path);
        const auto codes = mld::rmld_encode_all(data, dict, o.levels);
        for (std::size_t i = 0; i < codes.size(); ++i) {
            recon.set_col(i, mld::reconstruct(codes[i], dict));
            for (double r : codes[i].residual) mse += r * r;
        }
        mse /= static_cast<double>(data.rows() * data.cols());
    } else {
        const auto dict = mld::read_mlddict(o.dict_path);
        const auto codes = mld::mulp_encode_all(data, dict, o.levels);
        mld::write_codes(o.out + ".codes", codes, dict.dim());
        for (std::size_t i = 0; i < codes.size(); ++i)
            recon.set_col(i, mld::reconstruct(codes[i], dict));
        mse = encode_mse(data, codes);
    }
    mld::write_mldmat(o.out + ".recon.mat", recon);

    auto result = open_csv(o.out + ".result.csv");
    result << "mse\n" << mse << "\n";

    Manifest m;
    m.add("command", std::string("encode"));
    m.add("seed", seed);
    m.add("data", o.data_path);
    m.add("dict", o.dict_path);
    m.add("levels", o.levels);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "mse=" << mse << "\n";
    return 0;
}

// ----- recover -----------------------------------------------------------

struct RecoverOpts {
    std::string image_path;
    std::string dict_path;
    std::size_t measurements = 0;
    double snr_db = 0.0;
    bool has_snr = false;
    bool identity = false;
    std::size_t levels = 0;
    std::string out = "recover";
};

int cmd_recover(const RecoverOpts& o, std::uint64_t seed) {
    const mld::GrayImage image = mld::read_pgm(o.image_path);
    const bool robust = mld::mlddict_is_robust(o.dict_path);
    const std::size_t dim = robust ? mld::read_rmlddict(o.dict_path).dim()
                                   : mld::read_mlddict(o.dict_path).dim();

    std::optional<double> snr;
    if (o.has_snr) snr = o.snr_db;
    mld::MeasurementEnsemble ens;
    if (o.identity) {
        ens.phi = mld::identity(dim);
        ens.noise_snr_db = snr;
        ens.seed = seed;
    } else {
        if (o.measurements == 0)
            throw CLI::ValidationError(
                "recover", "--measurements required unless --identity");
        ens = mld::make_measurement_ensemble(o.measurements, dim, snr, seed);
    }

    mld::RecoveryResult res;
    if (robust)
        res = mld::compressed_recovery(image, mld::read_rmlddict(o.dict_path),
                                       ens, o.levels);
    else
        res = mld::compressed_recovery(image, mld::read_mlddict(o.dict_path),
                                       ens, o.levels);
    mld::write_pgm(o.out + ".pgm", res.recovered);

    auto result = open_csv(o.out + ".result.csv");
    result << "psnr_db\n" << res.psnr_db << "\n";

    Manifest m;
    m.add("command", std::string("recover"));
    m.add("seed", seed);
    m.add("image", o.image_path);
    m.add("dict", o.dict_path);
    m.add("measurements", o.identity ? dim : o.measurements);
    m.add("identity", std::string(o.identity ? "1" : "0"));
    if (o.has_snr) m.add("snr", o.snr_db);
    m.add("levels", o.levels);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "psnr_db=" << res.psnr_db << "\n";
    return 0;
}

// ----- synthetic source shared by stability / generalize ------------------

struct SynthOpts {
    std::size_t dim = 16;
    std::size_t k = 8;
    std::size_t levels = 4;
    double noise = 0.0;
    double decay = 0.5;
};

void add_synth_options(CLI::App* cmd, SynthOpts& s) {
    cmd->add_option("--dim", s.dim, "sample dimension");
    cmd->add_option("--synth-k", s.k, "planted atoms per level");
    cmd->add_option("--synth-levels", s.levels, "planted levels");
    cmd->add_option("--noise", s.noise, "additive noise sigma");
    cmd->add_option("--decay", s.decay, "per-level energy decay");
}

mld::SampleSource make_source(const SynthOpts& s, std::uint64_t seed,
                              mld::MultilevelDictionary* planted_out) {
    auto synth = mld::synth_hyperlines(s.dim, {s.k}, s.levels, 1, s.noise,
                                       s.decay, mld::Rng::derive(seed, 501));
    if (planted_out) *planted_out = synth.planted;
    auto planted = std::make_shared<mld::MultilevelDictionary>(
        std::move(synth.planted));
    const double noise = s.noise;
    const double decay = s.decay;
    return [planted, noise, decay](std::size_t count, std::uint64_t s2) {
        return mld::synth_samples(*planted, count, noise, decay, s2);
    };
}

// ----- stability ---------------------------------------------------------

struct StabilityOpts {
    SynthOpts synth;
    std::string t_values = "200,400";
    std::string replace_counts = "0,50,100";
    std::size_t trials = 10;
    std::size_t k = 8;
    std::size_t levels = 4;
    std::size_t restarts = 1;
    std::string out = "stability";
};

int cmd_stability(const StabilityOpts& o, std::uint64_t seed) {
    mld::StabilityConfig cfg;
    cfg.t_values = parse_list(o.t_values);
    cfg.replace_counts = parse_list(o.replace_counts);
    cfg.trials = o.trials;
    cfg.k = o.k;
    cfg.levels = o.levels;
    cfg.clustering = clustering_config(seed, o.restarts);
    cfg.seed = seed;

    const auto source = make_source(o.synth, seed, nullptr);
    const auto rows = mld::stability_experiment(source, cfg);

    auto csv = open_csv(o.out + ".csv");
    csv << "t,replace,trial,difference\n";
    for (const auto& r : rows)
        csv << r.t << "," << r.replace_count << "," << r.trial << ","
            << r.difference << "\n";

    Manifest m;
    m.add("command", std::string("stability"));
    m.add("seed", seed);
    m.add("dim", o.synth.dim);
    m.add("synth-k", o.synth.k);
    m.add("synth-levels", o.synth.levels);
    m.add("noise", o.synth.noise);
    m.add("decay", o.synth.decay);
    m.add("t-values", o.t_values);
    m.add("replace-counts", o.replace_counts);
    m.add("trials", o.trials);
    m.add("k", o.k);
    m.add("levels", o.levels);
    m.add("restarts", o.restarts);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "rows=" << rows.size() << "\n";
    return 0;
}

// ----- generalize ----------------------------------------------------------

struct GeneralizeOpts {
    SynthOpts synth;
    std::string t_values = "200,400";
    std::size_t test_count = 500;
    std::size_t k = 8;
    std::size_t levels = 4;
    std::size_t rounds = 10;
    double subset_fraction = 0.5;
    std::string rounds_sweep;
    std::size_t restarts = 1;
    std::string out = "generalize";
};

int cmd_generalize(const GeneralizeOpts& o, std::uint64_t seed) {
    mld::GeneralizationConfig cfg;
    cfg.t_values = parse_list(o.t_values);
    cfg.k = o.k;
    cfg.levels = o.levels;
    cfg.rounds = o.rounds;
    cfg.subset_fraction = o.subset_fraction;
    cfg.rounds_sweep = parse_list(o.rounds_sweep);
    cfg.clustering = clustering_config(seed, o.restarts);
    cfg.seed = seed;

    const auto source = make_source(o.synth, seed, nullptr);
    const mld::Matrix test_set =
        source(o.test_count, mld::Rng::derive(seed, 502));
    const auto res = mld::generalization_experiment(source, test_set, cfg);

    auto mse = open_csv(o.out + ".mse.csv");
    mse << "method,t,mse\n";
    for (const auto& r : res.mse)
        mse << r.method << "," << r.t << "," << r.mse << "\n";

    auto lvl = open_csv(o.out + ".levels.csv");
    lvl << "method,t,levels,mse\n";
    for (const auto& r : res.per_level)
        lvl << r.method << "," << r.t << "," << r.levels << "," << r.mse
            << "\n";

    auto rnd = open_csv(o.out + ".rounds.csv");
    rnd << "rounds,train_mse,test_mse\n";
    for (const auto& r : res.per_rounds)
        rnd << r.rounds << "," << r.train_mse << "," << r.test_mse << "\n";

    Manifest m;
    m.add("command", std::string("generalize"));
    m.add("seed", seed);
    m.add("dim", o.synth.dim);
    m.add("synth-k", o.synth.k);
    m.add("synth-levels", o.synth.levels);
    m.add("noise", o.synth.noise);
    m.add("decay", o.synth.decay);
    m.add("t-values", o.t_values);
    m.add("test-count", o.test_count);
    m.add("k", o.k);
    m.add("levels", o.levels);
    m.add("rounds", o.rounds);
    m.add("subset-fraction", o.subset_fraction);
    m.add("rounds-sweep", o.rounds_sweep);
    m.add("restarts", o.restarts);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "rows=" << res.mse.size() << "\n";
    return 0;
}

// ----- subspace ------------------------------------------------------------

struct SubspaceOpts {
    std::string train_csv;
    std::string test_csv;
    std::string method = "lde";
    std::size_t k = 8;
    std::size_t levels = 4;
    double error_goal = 0.0;
    std::size_t tau = 4;
    std::size_t tau_prime = 4;
    std::size_t embed_dim = 2;
    std::size_t knn = 1;
    std::size_t restarts = 1;
    std::string out = "subspace";
};

int cmd_subspace(const SubspaceOpts& o, std::uint64_t seed) {
    if (o.method != "lpp" && o.method != "lde")
        throw CLI::ValidationError("subspace", "--method must be lpp or lde");
    const auto train_ds = mld::read_labeled_csv(o.train_csv);
    const auto test_ds = mld::read_labeled_csv(o.test_csv);

    const auto trained =
        mld::train(train_ds.samples, {o.k}, o.levels, o.error_goal,
                   clustering_config(seed, o.restarts));
    const auto codes =
        mld::mulp_encode_all(train_ds.samples, trained.dict);
    const mld::Matrix a = mld::stack_codes(trained.dict, codes);

    mld::Embedding emb;
    if (o.method == "lpp") {
        const auto graph = mld::sparse_code_graph(a, o.tau);
        emb = mld::lpp(train_ds.samples, graph, o.embed_dim);
    } else {
        const auto aff =
            mld::lde_affinities(a, train_ds.labels, o.tau, o.tau_prime);
        emb = mld::lde(train_ds.samples, aff.intra, aff.inter, o.embed_dim);
    }

    const mld::Matrix z_train = mld::embed_all(emb, train_ds.samples);
    const mld::Matrix z_test = mld::embed_all(emb, test_ds.samples);
    const auto pred = mld::knn_classify(z_train, train_ds.labels, z_test,
                                        o.knn);

    std::size_t correct = 0;
    auto csv = open_csv(o.out + ".pred.csv");
    csv << "index,predicted,actual\n";
    for (std::size_t i = 0; i < pred.size(); ++i) {
        csv << i << "," << pred[i] << "," << test_ds.labels[i] << "\n";
        if (pred[i] == test_ds.labels[i]) ++correct;
    }
    const double accuracy =
        static_cast<double>(correct) / static_cast<double>(pred.size());

    auto result = open_csv(o.out + ".result.csv");
    result << "accuracy\n" << accuracy << "\n";

    Manifest m;
    m.add("command", std::string("subspace"));
    m.add("seed", seed);
    m.add("train", o.train_csv);
    m.add("test", o.test_csv);
    m.add("method", o.method);
    m.add("k", o.k);
    m.add("levels", o.levels);
    m.add("error-goal", o.error_goal);
    m.add("tau", o.tau);
    m.add("tau-prime", o.tau_prime);
    m.add("embed-dim", o.embed_dim);
    m.add("knn", o.knn);
    m.add("restarts", o.restarts);
    m.add("out", o.out);
    m.write(o.out + ".manifest");

    std::cout << "accuracy=" << accuracy << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilevel dictionary learning toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    // first occurrence wins, so command-line flags override appended
    // config-file tokens
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeFirst);

    std::uint64_t seed = 0;
    std::string config_path;
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--config", config_path, "flat key=value config file");

    TrainOpts train_o;
    auto* train_c = app.add_subcommand("train", "learn a dictionary");
    train_c->add_option("--data", train_o.data_path, "MLDMAT1 input")
        ->required();
    train_c->add_option("--k", train_o.k_list, "atoms per level (list)");
    train_c->add_option("--levels", train_o.levels, "maximum levels");
    train_c->add_option("--error-goal", train_o.error_goal, "stop energy");
    train_c->add_option("--restarts", train_o.restarts, "clustering restarts");
    train_c->add_option("--out", train_o.out, "output prefix");

    MdlOpts mdl_o;
    auto* mdl_c = app.add_subcommand("mdl-estimate", "pick level sizes");
    mdl_c->add_option("--data", mdl_o.data_path, "MLDMAT1 input")->required();
    mdl_c->add_option("--candidates", mdl_o.candidates, "candidate K list");
    mdl_c->add_option("--levels", mdl_o.levels, "maximum levels");
    mdl_c->add_option("--alpha", mdl_o.alpha, "energy decay fraction");
    mdl_c->add_option("--error-goal", mdl_o.error_goal, "stop energy");
    mdl_c->add_option("--restarts", mdl_o.restarts, "clustering restarts");
    mdl_c->add_option("--out", mdl_o.out, "output prefix");

    EncodeOpts enc_o;
    auto* enc_c = app.add_subcommand("encode", "encode samples");
    enc_c->add_option("--data", enc_o.data_path, "MLDMAT1 input")->required();
    enc_c->add_option("--dict", enc_o.dict_path, "MLDDICT1 dictionary")
        ->required();
    enc_c->add_option("--levels", enc_o.levels, "levels to use (0 = all)");
    enc_c->add_option("--out", enc_o.out, "output prefix");

    RecoverOpts rec_o;
    auto* rec_c = app.add_subcommand("recover", "compressed patch recovery");
    rec_c->add_option("--image", rec_o.image_path, "PGM input")->required();
    rec_c->add_option("--dict", rec_o.dict_path, "MLDDICT1 dictionary")
        ->required();
    rec_c->add_option("--measurements", rec_o.measurements,
                      "measurement count N");
    auto* snr_opt = rec_c->add_option("--snr", rec_o.snr_db,
                                      "measurement SNR in dB");
    rec_c->add_flag("--identity", rec_o.identity, "use the identity ensemble");
    rec_c->add_option("--levels", rec_o.levels, "levels to use (0 = all)");
    rec_c->add_option("--out", rec_o.out, "output prefix");

    StabilityOpts stab_o;
    auto* stab_c = app.add_subcommand("stability", "dictionary stability sweep");
    add_synth_options(stab_c, stab_o.synth);
    stab_c->add_option("--t-values", stab_o.t_values, "training set sizes");
    stab_c->add_option("--replace-counts", stab_o.replace_counts,
                       "samples replaced per retraining");
    stab_c->add_option("--trials", stab_o.trials, "trials per cell");
    stab_c->add_option("--k", stab_o.k, "atoms per level");
    stab_c->add_option("--levels", stab_o.levels, "maximum levels");
    stab_c->add_option("--restarts", stab_o.restarts, "clustering restarts");
    stab_c->add_option("--out", stab_o.out, "output prefix");

    GeneralizeOpts gen_o;
    auto* gen_c = app.add_subcommand("generalize", "test-set MSE sweep");
    add_synth_options(gen_c, gen_o.synth);
    gen_c->add_option("--t-values", gen_o.t_values, "training set sizes");
    gen_c->add_option("--test-count", gen_o.test_count, "test sample count");
    gen_c->add_option("--k", gen_o.k, "atoms per level");
    gen_c->add_option("--levels", gen_o.levels, "maximum levels");
    gen_c->add_option("--rounds", gen_o.rounds, "ensemble rounds D");
    gen_c->add_option("--subset-fraction", gen_o.subset_fraction,
                      "T_D as a fraction of T");
    gen_c->add_option("--rounds-sweep", gen_o.rounds_sweep,
                      "rounds list for the MSE-vs-rounds curve");
    gen_c->add_option("--restarts", gen_o.restarts, "clustering restarts");
    gen_c->add_option("--out", gen_o.out, "output prefix");

    SubspaceOpts sub_o;
    auto* sub_c = app.add_subcommand("subspace", "graph embedding + 1-NN");
    sub_c->add_option("--train", sub_o.train_csv, "labeled train CSV")
        ->required();
    sub_c->add_option("--test", sub_o.test_csv, "labeled test CSV")
        ->required();
    sub_c->add_option("--method", sub_o.method, "lpp or lde");
    sub_c->add_option("--k", sub_o.k, "atoms per level");
    sub_c->add_option("--levels", sub_o.levels, "maximum levels");
    sub_c->add_option("--error-goal", sub_o.error_goal, "stop energy");
    sub_c->add_option("--tau", sub_o.tau, "intra-class neighbors");
    sub_c->add_option("--tau-prime", sub_o.tau_prime, "inter-class neighbors");
    sub_c->add_option("--embed-dim", sub_o.embed_dim, "embedding dimension");
    sub_c->add_option("--knn", sub_o.knn, "neighbors for classification");
    sub_c->add_option("--restarts", sub_o.restarts, "clustering restarts");
    sub_c->add_option("--out", sub_o.out, "output prefix");

    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string value;
        if (args[i] == "--config" && i + 1 < args.size())
            value = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            value = args[i].substr(9);
        else
            continue;
        try {
            const auto extra = config_tokens(value);
            args.insert(args.end(), extra.begin(), extra.end());
        } catch (const mld::IoError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
        break;
    }

    try {
        // CLI11 consumes reversed arguments
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train_c->parsed()) return cmd_train(train_o, seed);
        if (mdl_c->parsed()) return cmd_mdl_estimate(mdl_o, seed);
        if (enc_c->parsed()) return cmd_encode(enc_o, seed);
        if (rec_c->parsed()) {
            rec_o.has_snr = snr_opt->count() > 0;
            return cmd_recover(rec_o, seed);
        }
        if (stab_c->parsed()) return cmd_stability(stab_o, seed);
        if (gen_c->parsed()) return cmd_generalize(gen_o, seed);
        if (sub_c->parsed()) return cmd_subspace(sub_o, seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mld::NotPositiveDefinite& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const mld::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
