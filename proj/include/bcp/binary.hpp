#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "bcp/dense.hpp"

namespace bcp {

// Bit d lives in word d / 64 at position d % 64. A set bit encodes +scale,
// a clear bit -scale.
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

// Mask of the valid bits in the last word of a `bits`-long vector.
constexpr std::uint64_t tail_mask(std::size_t bits) {
    const std::size_t rem = bits % kWordBits;
    return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

// Non-owning view of a packed bit row.
struct BitSpan {
    std::span<const std::uint64_t> words;
    std::size_t len = 0;

    bool test(std::size_t d) const { return (words[d / kWordBits] >> (d % kWordBits)) & 1u; }
};

class BitVector {
   public:
    BitVector() = default;
    explicit BitVector(std::size_t len) : len_(len), words_(words_for(len), 0) {}
    // Tail bits past `len` are cleared.
    BitVector(std::vector<std::uint64_t> words, std::size_t len);

    std::size_t size() const { return len_; }
    std::span<const std::uint64_t> words() const { return words_; }
    bool test(std::size_t d) const { return (words_[d / kWordBits] >> (d % kWordBits)) & 1u; }
    void set(std::size_t d, bool value);
    BitSpan view() const { return {words_, len_}; }
    operator BitSpan() const { return view(); }

    friend bool operator==(const BitVector&, const BitVector&) = default;

   private:
    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

// Rows of equal bit length stored contiguously.
class BitMatrix {
   public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t dim)
        : rows_(rows), dim_(dim), stride_(words_for(dim)), words_(rows * words_for(dim), 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t dim() const { return dim_; }
    std::size_t words_per_row() const { return stride_; }

    BitSpan row(std::size_t r) const { return {{words_.data() + r * stride_, stride_}, dim_}; }
    std::span<std::uint64_t> row_words(std::size_t r) { return {words_.data() + r * stride_, stride_}; }
    std::span<const std::uint64_t> all_words() const { return words_; }
    std::span<std::uint64_t> all_words() { return words_; }

    bool test(std::size_t r, std::size_t d) const { return row(r).test(d); }
    void set(std::size_t r, std::size_t d, bool value);
    void set_row(std::size_t r, BitSpan bits);
    // Clears bits past dim() in every row.
    void mask_tails();

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

   private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::size_t stride_ = 0;
    std::vector<std::uint64_t> words_;
};

std::size_t hamming(BitSpan p, BitSpan q);

// BitC = h(a, XNOR(b, c)), complement masked to the logical length.
inline std::size_t bitc(BitSpan a, BitSpan b, BitSpan c) {
    const std::size_t n = a.words.size();
    std::size_t count = 0;
    for (std::size_t w = 0; w + 1 < n; ++w)
        count += static_cast<std::size_t>(std::popcount(a.words[w] ^ ~(b.words[w] ^ c.words[w])));
    if (n > 0) {
        const std::uint64_t last = (a.words[n - 1] ^ ~(b.words[n - 1] ^ c.words[n - 1])) & tail_mask(a.len);
        count += static_cast<std::size_t>(std::popcount(last));
    }
    return count;
}

// Q_delta(x): +delta when x >= 0, else -delta. Throws on NaN or delta <= 0.
double quantize(double x, double delta);

// Bit d set iff v[d] >= 0.
BitVector binarize_row(std::span<const double> v, double delta);

// Binarized factor matrices. `scales` holds the magnitude of A, B and C
// entries: (delta, delta, delta) for B-CP, per-matrix alphas for VQ.
class BinaryFactors {
   public:
    BinaryFactors() = default;
    BinaryFactors(ModelKind kind, std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                  double delta);

    ModelKind kind() const { return kind_; }
    bool tied() const { return is_tied(kind_); }
    bool vq() const { return vq_; }
    std::size_t dim() const { return dim_; }
    std::size_t num_entities() const { return subject_.rows(); }
    std::size_t num_relations() const { return relation_.rows(); }
    double delta() const { return delta_; }
    const std::array<double, 3>& scales() const { return scales_; }
    // s_A * s_B * s_C, which is delta^3 for B-CP.
    double scale_product() const { return scales_[0] * scales_[1] * scales_[2]; }

    // Switches to per-matrix scales (VQ); for tied kinds scale_b must equal scale_a.
    void set_vq_scales(double scale_a, double scale_b, double scale_c);

    BitMatrix& subject() { return subject_; }
    const BitMatrix& subject() const { return subject_; }
    BitMatrix& object() { return tied() ? subject_ : object_; }
    const BitMatrix& object() const { return tied() ? subject_ : object_; }
    BitMatrix& relation() { return relation_; }
    const BitMatrix& relation() const { return relation_; }

    BitSpan a(EntityId i) const { return subject_.row(i); }
    BitSpan b(EntityId j) const { return object().row(j); }
    BitSpan c(RelationId k) const { return relation_.row(k); }

    void check_indices(EntityId i, EntityId j, RelationId k) const;

    friend bool operator==(const BinaryFactors&, const BinaryFactors&) = default;

   private:
    ModelKind kind_ = ModelKind::BCP;
    bool vq_ = false;
    std::size_t dim_ = 0;
    double delta_ = 0.5;
    std::array<double, 3> scales_{0.5, 0.5, 0.5};
    BitMatrix subject_;
    BitMatrix object_;
    BitMatrix relation_;
};

// Reference scorer: expands to +-scale values and sums the triple products.
double score_binary_float(const BinaryFactors& f, EntityId i, EntityId j, RelationId k);

// scale_product * (D - 2 BitC). Throws std::invalid_argument on length mismatch.
double score_bitwise(BitSpan a, BitSpan b, BitSpan c, double scale_product);
double score_bitwise(const BinaryFactors& f, EntityId i, EntityId j, RelationId k);

// Straight-through gradients: the data term uses the binarized rows, the L2
// term the latent real rows.
Gradients ste_gradients(const DenseFactors& f, EntityId i, EntityId j, RelationId k, int x,
                        const TrainConfig& config);
double ste_grad_step(DenseFactors& f, EntityId i, EntityId j, RelationId k, int x, const TrainConfig& config);

// Binarizes every row of the latent factors. Binarized output kind follows
// tying: CP/B-CP -> B-CP, DistMult/B-DistMult -> B-DistMult.
BinaryFactors freeze(const DenseFactors& f, double delta);

// Expands to dense factors with entries +-scale (kind keeps its tying).
DenseFactors unpack(const BinaryFactors& f);

}  // namespace bcp
