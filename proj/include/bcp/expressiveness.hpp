#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcp/binary.hpp"
#include "bcp/random.hpp"

namespace bcp {

// Exact binary CP encoding of an arbitrary boolean tensor with
// D = 8 * N_e * N_r. Rows are sequences of 2 * N_e * N_r four-bit blocks.
// A page is 2 * N_e consecutive blocks, a halfpage N_e blocks.

enum class Block : std::uint8_t {
    P,     // [+, +, -, -]
    Q,     // [+, -, +, -]
    R,     // [+, +, +, +]
    NegR,  // [-, -, -, -]
};

inline constexpr std::size_t kBlockBits = 4;

std::array<double, 4> block_values(Block block, double delta);
std::array<bool, 4> block_bits(Block block);
const char* block_name(Block block);

class BoolTensor {
   public:
    BoolTensor() = default;
    BoolTensor(std::size_t num_entities, std::size_t num_relations);

    // Values in (i, j, k) row-major order, k fastest. Throws
    // std::invalid_argument on any entry other than 0 or 1.
    static BoolTensor from_values(std::size_t num_entities, std::size_t num_relations, std::span<const int> values);
    // Entry number n (row-major) is bit n of `mask`; needs N_e^2 N_r <= 64.
    static BoolTensor from_mask(std::size_t num_entities, std::size_t num_relations, std::uint64_t mask);
    static BoolTensor random(std::size_t num_entities, std::size_t num_relations, Rng& rng);

    std::size_t num_entities() const { return ne_; }
    std::size_t num_relations() const { return nr_; }
    bool at(std::size_t i, std::size_t j, std::size_t k) const { return cells_[index(i, j, k)] != 0; }
    void set(std::size_t i, std::size_t j, std::size_t k, bool value) { cells_[index(i, j, k)] = value; }

   private:
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const;

    std::size_t ne_ = 0;
    std::size_t nr_ = 0;
    std::vector<std::uint8_t> cells_;
};

// Block addressing. The *_1 functions use the 1-based algebra of the
// construction (gamma in [1, 2 N_e N_r], k in [1, N_r], m in [1, N_e]); the
// unsuffixed ones are their 0-based translations used by the encoder.
class EncoderLayout {
   public:
    EncoderLayout(std::size_t num_entities, std::size_t num_relations);

    std::size_t num_entities() const { return ne_; }
    std::size_t num_relations() const { return nr_; }
    std::size_t num_blocks() const { return 2 * ne_ * nr_; }
    std::size_t dim() const { return kBlockBits * num_blocks(); }

    std::size_t iota_1(std::size_t gamma) const { return ((gamma - 1) % (2 * ne_)) % ne_ + 1; }
    std::size_t kappa_1(std::size_t gamma) const { return (gamma - 1) / (2 * ne_) + 1; }
    std::size_t alpha_1(std::size_t k, std::size_t m) const { return 2 * ne_ * (k - 1) + m; }
    std::size_t beta_1(std::size_t k, std::size_t m) const { return alpha_1(k, m) + ne_; }

    std::size_t iota(std::size_t gamma) const { return iota_1(gamma + 1) - 1; }
    std::size_t kappa(std::size_t gamma) const { return kappa_1(gamma + 1) - 1; }
    std::size_t alpha(std::size_t k, std::size_t m) const { return alpha_1(k + 1, m + 1) - 1; }
    std::size_t beta(std::size_t k, std::size_t m) const { return beta_1(k + 1, m + 1) - 1; }
    bool first_halfpage(std::size_t gamma) const { return gamma % (2 * ne_) < ne_; }

    // Block assignment of the construction (0-based indices).
    Block a_block(std::size_t i, std::size_t gamma) const;
    Block b_block(const BoolTensor& x, std::size_t j, std::size_t gamma) const;
    Block c_block(std::size_t k, std::size_t gamma) const;

   private:
    std::size_t ne_;
    std::size_t nr_;
};

inline constexpr double kExactDelta = 0.5;

// Builds the B-CP factors; reconstruction is exact at delta = 1/2.
BinaryFactors encode(const BoolTensor& x, double delta = kExactDelta);

struct Mismatch {
    std::size_t i = 0, j = 0, k = 0;
    int expected = 0;
    double score = 0.0;
};

struct ReconstructionReport {
    std::size_t checked = 0;
    std::vector<Mismatch> mismatches;
    std::optional<std::string> warning;

    bool ok() const { return mismatches.empty(); }
};

// Scores every (i, j, k) with the bitwise kernel and compares against x
// exactly. Throws std::invalid_argument on a shape mismatch.
ReconstructionReport verify_reconstruction(const BinaryFactors& factors, const BoolTensor& x);

struct StructureReport {
    std::size_t checks = 0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

// Blockwise audit of an encoder output: periodicity of A, p on alpha(k, i),
// q elsewhere, halfpage equality of B, C = r on its own page and sign flips
// across halfpages of foreign pages, the pairwise and remainder zero sums,
// and theta_ijk = 2 * (alpha(k, i) block term).
StructureReport check_block_structure(const BinaryFactors& factors, const EncoderLayout& layout);

// (a o b) c^T of block gamma in units of scale^3, i.e. an integer in [-4, 4].
int block_term(BitSpan a, BitSpan b, BitSpan c, std::size_t gamma);

}  // namespace bcp
