#include "mld/pursuit.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mld/errors.hpp"

namespace mld {

namespace {

// argmax_j |r^T psi_j|, ties to the lowest index; counts M*K mults
std::pair<std::size_t, double> correlate_and_max(std::span<const double> r,
                                                 const Matrix& atoms,
                                                 EncodeStats* stats) {
    std::size_t best = 0;
    double best_abs = -1.0;
    double best_c = 0.0;
    for (std::size_t j = 0; j < atoms.cols(); ++j) {
        const double c = dot(r, atoms.col(j));
        if (std::abs(c) > best_abs) {
            best_abs = std::abs(c);
            best_c = c;
            best = j;
        }
    }
    if (stats) stats->multiplications += atoms.rows() * atoms.cols();
    return {best, best_c};
}

}  // namespace

SparseCode mulp_encode(std::span<const double> y,
                       const MultilevelDictionary& dict, std::size_t levels,
                       EncodeStats* stats) {
    if (y.size() != dict.dim())
        throw DimensionMismatch("mulp_encode: dimension mismatch");
    if (levels == 0) levels = dict.num_levels();
    if (levels > dict.num_levels())
        throw DimensionMismatch("mulp_encode: more levels than trained");

    SparseCode code;
    code.levels_used = levels;
    code.residual.assign(y.begin(), y.end());
    for (std::size_t l = 0; l < levels; ++l) {
        const auto [idx, c] = correlate_and_max(code.residual,
                                                dict.levels[l], stats);
        code.atom_index.push_back(idx);
        code.coeff.push_back(c);
        const auto psi = dict.levels[l].col(idx);
        for (std::size_t m = 0; m < code.residual.size(); ++m)
            code.residual[m] -= c * psi[m];
    }
    return code;
}

EnsembleCode rmld_encode(std::span<const double> y,
                         const RobustMultilevelDictionary& dict,
                         std::size_t levels, EncodeStats* stats) {
    if (y.size() != dict.dim())
        throw DimensionMismatch("rmld_encode: dimension mismatch");
    if (levels == 0) levels = dict.num_levels();
    if (levels > dict.num_levels())
        throw DimensionMismatch("rmld_encode: more levels than trained");

    const double inv_d = 1.0 / static_cast<double>(dict.rounds);
    EnsembleCode code;
    code.levels_used = levels;
    code.residual.assign(y.begin(), y.end());
    for (std::size_t l = 0; l < levels; ++l) {
        std::vector<std::size_t> indices;
        std::vector<double> coeffs;
        std::vector<double> approx(code.residual.size(), 0.0);
        for (const auto& atoms : dict.levels[l]) {
            const auto [idx, c] = correlate_and_max(code.residual, atoms,
                                                    stats);
            indices.push_back(idx);
            coeffs.push_back(c);
            const auto psi = atoms.col(idx);
            for (std::size_t m = 0; m < approx.size(); ++m)
                approx[m] += c * psi[m];
        }
        for (std::size_t m = 0; m < approx.size(); ++m) {
            approx[m] *= inv_d;
            code.residual[m] -= approx[m];
        }
        code.atom_index.push_back(std::move(indices));
        code.coeff.push_back(std::move(coeffs));
    }
    return code;
}

std::vector<double> reconstruct(const SparseCode& code,
                                const MultilevelDictionary& dict) {
    if (code.levels_used > dict.num_levels())
        throw DictMismatch("reconstruct: code uses more levels than dict has");
    std::vector<double> y(dict.dim(), 0.0);
    for (std::size_t l = 0; l < code.levels_used; ++l) {
        if (code.atom_index[l] >= dict.levels[l].cols())
            throw DictMismatch("reconstruct: atom index out of range");
        const auto psi = dict.levels[l].col(code.atom_index[l]);
        const double c = code.coeff[l];
        for (std::size_t m = 0; m < y.size(); ++m) y[m] += c * psi[m];
    }
    return y;
}

std::vector<double> reconstruct(const EnsembleCode& code,
                                const RobustMultilevelDictionary& dict) {
    if (code.levels_used > dict.num_levels())
        throw DictMismatch("reconstruct: code uses more levels than dict has");
    const double inv_d = 1.0 / static_cast<double>(dict.rounds);
    std::vector<double> y(dict.dim(), 0.0);
    for (std::size_t l = 0; l < code.levels_used; ++l) {
        if (code.atom_index[l].size() != dict.rounds)
            throw DictMismatch("reconstruct: round count disagrees");
        std::vector<double> approx(y.size(), 0.0);
        for (std::size_t d = 0; d < dict.rounds; ++d) {
            const auto psi = dict.levels[l][d].col(code.atom_index[l][d]);
            const double c = code.coeff[l][d];
            for (std::size_t m = 0; m < approx.size(); ++m)
                approx[m] += c * psi[m];
        }
        for (std::size_t m = 0; m < y.size(); ++m) y[m] += approx[m] * inv_d;
    }
    return y;
}

std::vector<SparseCode> mulp_encode_all(const Matrix& data,
                                        const MultilevelDictionary& dict,
                                        std::size_t levels,
                                        EncodeStats* stats) {
    std::vector<SparseCode> out;
    out.reserve(data.cols());
    for (std::size_t i = 0; i < data.cols(); ++i)
        out.push_back(mulp_encode(data.col(i), dict, levels, stats));
    return out;
}

std::vector<EnsembleCode> rmld_encode_all(const Matrix& data,
                                          const RobustMultilevelDictionary& dict,
                                          std::size_t levels,
                                          EncodeStats* stats) {
    std::vector<EnsembleCode> out;
    out.reserve(data.cols());
    for (std::size_t i = 0; i < data.cols(); ++i)
        out.push_back(rmld_encode(data.col(i), dict, levels, stats));
    return out;
}

Matrix stack_codes(const MultilevelDictionary& dict,
                   const std::vector<SparseCode>& codes) {
    Matrix a(dict.total_atoms(), codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const auto& c = codes[i];
        if (c.levels_used > dict.num_levels())
            throw DictMismatch("stack_codes: code uses more levels than dict");
        std::size_t offset = 0;
        for (std::size_t l = 0; l < c.levels_used; ++l) {
            a(offset + c.atom_index[l], i) = c.coeff[l];
            offset += dict.levels[l].cols();
        }
    }
    return a;
}

namespace {

constexpr char kCodeMagic[8] = {'M', 'L', 'D', 'C', 'O', 'D', 'E', '1'};

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

}  // namespace

void write_codes(const std::string& path, const std::vector<SparseCode>& codes,
                 std::size_t dim) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kCodeMagic, 8);
    put_u64(os, codes.size());
    put_u64(os, dim);
    for (const auto& c : codes) {
        put_u64(os, c.levels_used);
        for (std::size_t l = 0; l < c.levels_used; ++l) {
            put_u64(os, l + 1);
            put_u64(os, c.atom_index[l]);
            put_u64(os, std::bit_cast<std::uint64_t>(c.coeff[l]));
        }
        for (double x : c.residual)
            put_u64(os, std::bit_cast<std::uint64_t>(x));
    }
    if (!os) throw IoError("write failed: " + path);
}

std::vector<SparseCode> read_codes(const std::string& path, std::size_t* dim) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCodeMagic, 8) != 0)
        throw IoError("not an MLDCODE1 file");
    const std::uint64_t count = get_u64(is);
    const std::uint64_t m = get_u64(is);
    if (dim) *dim = m;
    std::vector<SparseCode> codes(count);
    for (auto& c : codes) {
        c.levels_used = get_u64(is);
        c.atom_index.resize(c.levels_used);
        c.coeff.resize(c.levels_used);
        for (std::size_t l = 0; l < c.levels_used; ++l) {
            get_u64(is);  // level tag, redundant with position
            c.atom_index[l] = get_u64(is);
            c.coeff[l] = std::bit_cast<double>(get_u64(is));
        }
        c.residual.resize(m);
        for (auto& x : c.residual) x = std::bit_cast<double>(get_u64(is));
    }
    if (!is) throw IoError("truncated MLDCODE1 file");
    return codes;
}

}  // namespace mld
