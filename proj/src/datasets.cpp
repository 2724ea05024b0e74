#include "mld/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mld/errors.hpp"
#include "mld/rng.hpp"

namespace mld {

namespace {

// Skips PGM whitespace and '#' comment lines.
int next_token(std::istream& is, std::string& tok) {
    tok.clear();
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return -1;
    do {
        tok.push_back(static_cast<char>(c));
        c = is.get();
    } while (c != EOF && !std::isspace(c));
    return 0;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    std::string tok;
    if (next_token(is, tok) < 0 || tok != "P5")
        throw IoError(path + ": not a binary PGM (P5)");
    std::size_t w, h, maxval;
    if (next_token(is, tok) < 0) throw IoError(path + ": truncated header");
    w = std::stoull(tok);
    if (next_token(is, tok) < 0) throw IoError(path + ": truncated header");
    h = std::stoull(tok);
    if (next_token(is, tok) < 0) throw IoError(path + ": truncated header");
    maxval = std::stoull(tok);
    if (maxval == 0 || maxval > 255)
        throw IoError(path + ": only 8-bit PGM supported");

    GrayImage img;
    img.width = w;
    img.height = h;
    img.peak = static_cast<double>(maxval);
    img.pixels.resize(w * h);
    std::vector<unsigned char> raw(w * h);
    is.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (!is) throw IoError(path + ": truncated pixel data");
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = static_cast<double>(raw[i]);
    return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const int maxval = static_cast<int>(std::lround(img.peak));
    os << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, img.peak);
        raw[i] = static_cast<unsigned char>(std::lround(v));
    }
    os.write(reinterpret_cast<const char*>(raw.data()),
             static_cast<std::streamsize>(raw.size()));
    if (!os) throw IoError("write failed: " + path);
}

PatchSet extract_patches(const GrayImage& img, std::size_t side,
                         std::size_t stride, bool subtract_mean,
                         std::uint64_t seed, std::size_t max_count) {
    if (side > img.width || side > img.height)
        throw ImageTooSmall("extract_patches: patch exceeds image");
    if (stride < 1) throw Error("extract_patches: stride must be >= 1");

    std::vector<PatchOrigin> origins;
    for (std::size_t y = 0; y + side <= img.height; y += stride)
        for (std::size_t x = 0; x + side <= img.width; x += stride)
            origins.push_back({0, x, y});

    if (max_count > 0 && max_count < origins.size()) {
        Rng rng(seed);
        const auto keep = rng.sample_indices(origins.size(), max_count);
        std::vector<PatchOrigin> kept;
        kept.reserve(max_count);
        for (auto i : keep) kept.push_back(origins[i]);
        origins = std::move(kept);
    }

    PatchSet set;
    set.patch_side = side;
    set.origins = origins;
    set.patches = Matrix(side * side, origins.size());
    set.means.resize(origins.size(), 0.0);
    for (std::size_t p = 0; p < origins.size(); ++p) {
        const auto& o = origins[p];
        // column-major within the patch: x varies slowest
        std::size_t r = 0;
        double sum = 0.0;
        for (std::size_t dx = 0; dx < side; ++dx)
            for (std::size_t dy = 0; dy < side; ++dy) {
                const double v = img.at(o.x + dx, o.y + dy);
                set.patches(r++, p) = v;
                sum += v;
            }
        if (subtract_mean) {
            const double mean = sum / static_cast<double>(side * side);
            set.means[p] = mean;
            for (std::size_t i = 0; i < side * side; ++i)
                set.patches(i, p) -= mean;
        }
    }
    return set;
}

GrayImage reassemble(const PatchSet& patches, std::size_t width,
                     std::size_t height, double peak) {
    const std::size_t side = patches.patch_side;
    GrayImage img;
    img.width = width;
    img.height = height;
    img.peak = peak;
    img.pixels.assign(width * height, 0.0);
    std::vector<bool> covered(width * height, false);

    for (std::size_t p = 0; p < patches.patches.cols(); ++p) {
        const auto& o = patches.origins[p];
        if (o.x + side > width || o.y + side > height)
            throw IncompleteTiling("reassemble: patch outside target");
        std::size_t r = 0;
        for (std::size_t dx = 0; dx < side; ++dx)
            for (std::size_t dy = 0; dy < side; ++dy) {
                const std::size_t pix = (o.y + dy) * width + (o.x + dx);
                if (covered[pix])
                    throw IncompleteTiling("reassemble: overlapping patches");
                covered[pix] = true;
                img.pixels[pix] = std::clamp(
                    patches.patches(r++, p) + patches.means[p], 0.0, peak);
            }
    }
    for (bool c : covered)
        if (!c) throw IncompleteTiling("reassemble: uncovered pixels");
    return img;
}

SynthData synth_hyperlines(std::size_t dim,
                           const std::vector<std::size_t>& k_per_level,
                           std::size_t levels, std::size_t count,
                           double noise_sigma, double energy_decay,
                           std::uint64_t seed) {
    if (count < 1) throw EmptyTrainingSet("synth_hyperlines: count must be >= 1");
    if (noise_sigma < 0.0)
        throw Error("synth_hyperlines: noise_sigma must be >= 0");

    Rng atom_rng(Rng::derive(seed, 1));
    SynthData out;
    for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t k =
            k_per_level.size() == 1 ? k_per_level[0] : k_per_level.at(l);
        Matrix atoms(dim, k);
        for (std::size_t j = 0; j < k; ++j)
            atoms.set_col(j, atom_rng.unit_vector(dim));
        out.planted.levels.push_back(std::move(atoms));
    }

    out.data = synth_samples(out.planted, count, noise_sigma, energy_decay,
                             Rng::derive(seed, 2));
    return out;
}

Matrix synth_samples(const MultilevelDictionary& planted, std::size_t count,
                     double noise_sigma, double energy_decay,
                     std::uint64_t seed) {
    const std::size_t dim = planted.dim();
    Rng rng(seed);
    Matrix data(dim, count);
    for (std::size_t i = 0; i < count; ++i) {
        auto col = data.col(i);
        for (std::size_t l = 0; l < planted.num_levels(); ++l) {
            const auto& atoms = planted.levels[l];
            const std::size_t j = rng.uniform_index(atoms.cols());
            const double scale =
                std::sqrt(std::pow(energy_decay, static_cast<double>(l)));
            const double c = rng.gaussian() * scale;
            const auto psi = atoms.col(j);
            for (std::size_t m = 0; m < dim; ++m) col[m] += c * psi[m];
        }
        if (noise_sigma > 0.0)
            for (std::size_t m = 0; m < dim; ++m)
                col[m] += noise_sigma * rng.gaussian();
    }
    return data;
}

void write_patchset(const std::string& matrix_path,
                    const std::string& meta_path, const PatchSet& patches) {
    write_mldmat(matrix_path, patches.patches);
    std::ofstream os(meta_path);
    if (!os) throw IoError("cannot open for writing: " + meta_path);
    os << "# image_id x y mean side=" << patches.patch_side << "\n";
    os.precision(17);
    for (std::size_t p = 0; p < patches.patches.cols(); ++p) {
        const auto& o = patches.origins[p];
        os << o.image_id << " " << o.x << " " << o.y << " " << patches.means[p]
           << "\n";
    }
    if (!os) throw IoError("write failed: " + meta_path);
}

PatchSet read_patchset(const std::string& matrix_path,
                       const std::string& meta_path) {
    PatchSet set;
    set.patches = read_mldmat(matrix_path);
    std::ifstream is(meta_path);
    if (!is) throw IoError("cannot open: " + meta_path);
    std::string line;
    if (!std::getline(is, line)) throw IoError(meta_path + ": empty");
    const auto pos = line.find("side=");
    if (pos == std::string::npos) throw IoError(meta_path + ": missing side");
    set.patch_side = std::stoull(line.substr(pos + 5));
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        PatchOrigin o;
        double mean;
        ls >> o.image_id >> o.x >> o.y >> mean;
        if (!ls) throw IoError(meta_path + ": malformed line");
        set.origins.push_back(o);
        set.means.push_back(mean);
    }
    if (set.origins.size() != set.patches.cols())
        throw IoError(meta_path + ": patch count disagrees with matrix");
    return set;
}

}  // namespace mld
