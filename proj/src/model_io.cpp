#include "bcp/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace bcp {
namespace {

constexpr std::array<char, 4> kDenseMagic{'B', 'C', 'P', 'D'};
constexpr std::array<char, 4> kBinaryMagic{'B', 'C', 'P', 'B'};

template <class U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t b = 0; b < sizeof(U); ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <class U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw FormatError("unexpected end of model file");
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(bytes[b]) << (8 * b);
    return value;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

void put_matrix(std::ostream& out, const Matrix& m) {
    for (double v : m.values()) put_f64(out, v);
}

void get_matrix(std::istream& in, Matrix& m) {
    for (double& v : m.values()) v = get_f64(in);
}

void put_bits(std::ostream& out, const BitMatrix& m) {
    for (std::uint64_t w : m.all_words()) put_le(out, w);
}

void get_bits(std::istream& in, BitMatrix& m) {
    for (std::uint64_t& w : m.all_words()) w = get_le<std::uint64_t>(in);
    m.mask_tails();
}

std::array<char, 4> read_magic(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in) throw FormatError("model file too short");
    return magic;
}

struct Header {
    std::uint8_t kind;
    std::uint64_t ne, nr, dim;
};

Header read_header(std::istream& in) {
    const auto version = get_le<std::uint32_t>(in);
    if (version != kFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
    Header h{};
    h.kind = get_le<std::uint8_t>(in);
    h.ne = get_le<std::uint64_t>(in);
    h.nr = get_le<std::uint64_t>(in);
    h.dim = get_le<std::uint64_t>(in);
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
    if (h.ne > kLimit || h.nr > kLimit || h.dim > kLimit || (h.ne * h.dim) > kLimit || (h.nr * h.dim) > kLimit)
        throw FormatError("model dimensions out of range");
    return h;
}

ModelKind checked_kind(std::uint8_t raw) {
    if (raw > static_cast<std::uint8_t>(ModelKind::BDistMult)) throw FormatError("unknown model kind byte");
    return static_cast<ModelKind>(raw);
}

}  // namespace

void write_dense(std::ostream& out, const DenseFactors& f) {
    out.write(kDenseMagic.data(), kDenseMagic.size());
    put_le(out, kFormatVersion);
    put_le(out, static_cast<std::uint8_t>(f.kind()));
    put_le(out, static_cast<std::uint64_t>(f.num_entities()));
    put_le(out, static_cast<std::uint64_t>(f.num_relations()));
    put_le(out, static_cast<std::uint64_t>(f.dim()));
    put_matrix(out, f.subject());
    if (!f.tied()) put_matrix(out, f.object());
    put_matrix(out, f.relation());
}

DenseFactors read_dense(std::istream& in) {
    if (read_magic(in) != kDenseMagic) throw FormatError("not a dense model file (bad magic)");
    const Header h = read_header(in);
    DenseFactors f(checked_kind(h.kind), h.ne, h.nr, h.dim);
    get_matrix(in, f.subject());
    if (!f.tied()) get_matrix(in, f.object());
    get_matrix(in, f.relation());
    return f;
}

void write_binary(std::ostream& out, const BinaryFactors& f) {
    out.write(kBinaryMagic.data(), kBinaryMagic.size());
    put_le(out, kFormatVersion);
    std::uint8_t kind = static_cast<std::uint8_t>(f.kind());
    if (f.vq()) kind |= kVqFlag;
    put_le(out, kind);
    put_le(out, static_cast<std::uint64_t>(f.num_entities()));
    put_le(out, static_cast<std::uint64_t>(f.num_relations()));
    put_le(out, static_cast<std::uint64_t>(f.dim()));
    put_f64(out, f.delta());
    if (f.vq())
        for (double s : f.scales()) put_f64(out, s);
    put_bits(out, f.subject());
    if (!f.tied()) put_bits(out, f.object());
    put_bits(out, f.relation());
}

BinaryFactors read_binary(std::istream& in) {
    if (read_magic(in) != kBinaryMagic) throw FormatError("not a binary model file (bad magic)");
    const Header h = read_header(in);
    const bool vq = (h.kind & kVqFlag) != 0;
    const ModelKind kind = checked_kind(h.kind & static_cast<std::uint8_t>(~kVqFlag));
    if (!is_binarized(kind)) throw FormatError("binary model file with non-binarized kind");
    const double delta = get_f64(in);
    if (!(delta > 0.0)) throw FormatError("binary model file with non-positive delta");
    BinaryFactors f(kind, h.ne, h.nr, h.dim, delta);
    if (vq) {
        const double sa = get_f64(in), sb = get_f64(in), sc = get_f64(in);
        f.set_vq_scales(sa, sb, sc);
    }
    get_bits(in, f.subject());
    if (!f.tied()) get_bits(in, f.object());
    get_bits(in, f.relation());
    return f;
}

void save_dense(const std::filesystem::path& path, const DenseFactors& f) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_dense(out, f);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

DenseFactors load_dense(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_dense(in);
}

void save_binary(const std::filesystem::path& path, const BinaryFactors& f) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_binary(out, f);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

BinaryFactors load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_binary(in);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const auto magic = read_magic(in);
    in.seekg(0);
    if (magic == kDenseMagic) return read_dense(in);
    if (magic == kBinaryMagic) return read_binary(in);
    throw FormatError(path.string() + ": unrecognized model file");
}

std::size_t dense_file_size(ModelKind kind, std::size_t num_entities, std::size_t num_relations, std::size_t dim) {
    const std::size_t entity_rows = is_tied(kind) ? num_entities : 2 * num_entities;
    return kDenseHeaderBytes + 8 * dim * (entity_rows + num_relations);
}

std::size_t binary_file_size(ModelKind kind, bool vq, std::size_t num_entities, std::size_t num_relations,
                             std::size_t dim) {
    const std::size_t entity_rows = is_tied(kind) ? num_entities : 2 * num_entities;
    return kDenseHeaderBytes + 8 + (vq ? 24 : 0) + 8 * words_for(dim) * (entity_rows + num_relations);
}

}  // namespace bcp
