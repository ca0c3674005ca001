#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>

#include "bcp/binary.hpp"
#include "bcp/dense.hpp"

namespace bcp {

// Dense file: "BCPD", u32 version, u8 kind, u64 N_e, u64 N_r, u64 D, then A,
// B (absent when tied), C as row-major little-endian f64.
//
// Binary file: "BCPB", u32 version, u8 kind, u64 N_e, u64 N_r, u64 D,
// f64 delta, [f64 scale_a, scale_b, scale_c when kind has kVqFlag], then
// ceil(D/64) little-endian u64 words per row for A, B (absent when tied), C.
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint8_t kVqFlag = 0x80;
inline constexpr std::size_t kDenseHeaderBytes = 4 + 4 + 1 + 8 * 3;

class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

void write_dense(std::ostream& out, const DenseFactors& f);
DenseFactors read_dense(std::istream& in);
void write_binary(std::ostream& out, const BinaryFactors& f);
BinaryFactors read_binary(std::istream& in);

void save_dense(const std::filesystem::path& path, const DenseFactors& f);
DenseFactors load_dense(const std::filesystem::path& path);
void save_binary(const std::filesystem::path& path, const BinaryFactors& f);
BinaryFactors load_binary(const std::filesystem::path& path);

using Model = std::variant<DenseFactors, BinaryFactors>;
// Dispatches on the magic bytes.
Model load_model(const std::filesystem::path& path);

// Byte sizes the writers produce.
std::size_t dense_file_size(ModelKind kind, std::size_t num_entities, std::size_t num_relations, std::size_t dim);
std::size_t binary_file_size(ModelKind kind, bool vq, std::size_t num_entities, std::size_t num_relations,
                             std::size_t dim);

}  // namespace bcp
