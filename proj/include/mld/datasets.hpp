#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mld/matrix.hpp"
#include "mld/mld.hpp"

namespace mld {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    double peak = 255.0;
    std::vector<double> pixels;  // row-major, size width*height

    double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    double at(std::size_t x, std::size_t y) const {
        return pixels[y * width + x];
    }
};

// Binary PGM (P5), 8-bit depth, bit-exact round trip.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);

struct PatchOrigin {
    std::size_t image_id = 0;
    std::size_t x = 0;
    std::size_t y = 0;
};

struct PatchSet {
    std::size_t patch_side = 8;
    Matrix patches;             // side^2 rows, one column per patch
    std::vector<double> means;  // subtracted DC per patch (0 if not removed)
    std::vector<PatchOrigin> origins;
};

// Raster-order patch extraction; vectorization is column-major within the
// patch. With subtract_mean, each stored patch has zero mean and the DC is
// recorded for reassembly. max_count == 0 keeps every patch; otherwise a
// uniform random subset of that size is kept (seeded).
PatchSet extract_patches(const GrayImage& img, std::size_t side,
                         std::size_t stride, bool subtract_mean,
                         std::uint64_t seed = 0, std::size_t max_count = 0);

// Inverse of extraction for an exact tiling (stride == side): places each
// patch at its origin, restores its mean, clamps to [0, peak].
GrayImage reassemble(const PatchSet& patches, std::size_t width,
                     std::size_t height, double peak = 255.0);

struct SynthData {
    Matrix data;                  // M x T samples
    MultilevelDictionary planted; // ground-truth atoms per level
};

// Planted-hyperline generator: random unit atoms per level, samples built as
// sums of per-level 1-sparse contributions whose energies follow the decay
// ratio, plus isotropic Gaussian noise.
SynthData synth_hyperlines(std::size_t dim,
                           const std::vector<std::size_t>& k_per_level,
                           std::size_t levels, std::size_t count,
                           double noise_sigma, double energy_decay,
                           std::uint64_t seed);

// Fresh samples from an existing planted dictionary (same probability space,
// new coefficient and noise draws).
Matrix synth_samples(const MultilevelDictionary& planted, std::size_t count,
                     double noise_sigma, double energy_decay,
                     std::uint64_t seed);

// PatchSet serialization: MLDMAT1 matrix plus a sidecar text file
// (one line per patch: image id, x, y, mean).
void write_patchset(const std::string& matrix_path,
                    const std::string& meta_path, const PatchSet& patches);
PatchSet read_patchset(const std::string& matrix_path,
                       const std::string& meta_path);

}  // namespace mld
