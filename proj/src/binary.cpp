#include "bcp/binary.hpp"

#include <cmath>
#include <stdexcept>

namespace bcp {

BitVector::BitVector(std::vector<std::uint64_t> words, std::size_t len) : len_(len), words_(std::move(words)) {
    if (words_.size() != words_for(len)) throw std::invalid_argument("word count does not match bit length");
    if (!words_.empty()) words_.back() &= tail_mask(len);
}

void BitVector::set(std::size_t d, bool value) {
    if (d >= len_) throw std::out_of_range("bit index out of range");
    const std::uint64_t bit = std::uint64_t{1} << (d % kWordBits);
    if (value)
        words_[d / kWordBits] |= bit;
    else
        words_[d / kWordBits] &= ~bit;
}

void BitMatrix::set(std::size_t r, std::size_t d, bool value) {
    if (r >= rows_ || d >= dim_) throw std::out_of_range("bit index out of range");
    const std::uint64_t bit = std::uint64_t{1} << (d % kWordBits);
    auto& word = words_[r * stride_ + d / kWordBits];
    if (value)
        word |= bit;
    else
        word &= ~bit;
}

void BitMatrix::set_row(std::size_t r, BitSpan bits) {
    if (r >= rows_) throw std::out_of_range("row index out of range");
    if (bits.len != dim_) throw std::invalid_argument("row length mismatch");
    auto dst = row_words(r);
    for (std::size_t w = 0; w < stride_; ++w) dst[w] = bits.words[w];
    if (stride_ > 0) dst[stride_ - 1] &= tail_mask(dim_);
}

void BitMatrix::mask_tails() {
    if (stride_ == 0) return;
    for (std::size_t r = 0; r < rows_; ++r) words_[r * stride_ + stride_ - 1] &= tail_mask(dim_);
}

std::size_t hamming(BitSpan p, BitSpan q) {
    if (p.len != q.len) throw std::invalid_argument("bit vectors differ in length");
    std::size_t count = 0;
    for (std::size_t w = 0; w < p.words.size(); ++w)
        count += static_cast<std::size_t>(std::popcount(p.words[w] ^ q.words[w]));
    return count;
}

double quantize(double x, double delta) {
    if (std::isnan(x)) throw std::invalid_argument("cannot quantize NaN");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    return x >= 0.0 ? delta : -delta;
}

BitVector binarize_row(std::span<const double> v, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    BitVector out(v.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
        if (std::isnan(v[d])) throw std::invalid_argument("cannot binarize NaN component");
        if (v[d] >= 0.0) out.set(d, true);
    }
    return out;
}

BinaryFactors::BinaryFactors(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                             std::size_t dim, double delta)
    : kind_(kind),
      dim_(dim),
      delta_(delta),
      scales_{delta, delta, delta},
      subject_(num_entities, dim),
      object_(is_tied(kind) ? 0 : num_entities, is_tied(kind) ? 0 : dim),
      relation_(num_relations, dim) {
    if (!is_binarized(kind)) throw std::invalid_argument("binary factors need a binarized model kind");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
}

void BinaryFactors::set_vq_scales(double scale_a, double scale_b, double scale_c) {
    if (scale_a < 0.0 || scale_b < 0.0 || scale_c < 0.0) throw std::invalid_argument("scales must be >= 0");
    if (tied() && scale_a != scale_b) throw std::invalid_argument("tied factors share one scale");
    vq_ = true;
    scales_ = {scale_a, scale_b, scale_c};
}

void BinaryFactors::check_indices(EntityId i, EntityId j, RelationId k) const {
    if (i >= num_entities() || j >= num_entities()) throw std::out_of_range("entity index out of range");
    if (k >= num_relations()) throw std::out_of_range("relation index out of range");
}

double score_binary_float(const BinaryFactors& f, EntityId i, EntityId j, RelationId k) {
    f.check_indices(i, j, k);
    const auto a = f.a(i);
    const auto b = f.b(j);
    const auto c = f.c(k);
    const auto& s = f.scales();
    double sum = 0.0;
    for (std::size_t d = 0; d < f.dim(); ++d) {
        const double av = a.test(d) ? s[0] : -s[0];
        const double bv = b.test(d) ? s[1] : -s[1];
        const double cv = c.test(d) ? s[2] : -s[2];
        sum += av * bv * cv;
    }
    return sum;
}

double score_bitwise(BitSpan a, BitSpan b, BitSpan c, double scale_product) {
    if (a.len != b.len || a.len != c.len) throw std::invalid_argument("bit rows differ in length");
    const auto count = static_cast<double>(bitc(a, b, c));
    return scale_product * (static_cast<double>(a.len) - 2.0 * count);
}

double score_bitwise(const BinaryFactors& f, EntityId i, EntityId j, RelationId k) {
    f.check_indices(i, j, k);
    return score_bitwise(f.a(i), f.b(j), f.c(k), f.scale_product());
}

Gradients ste_gradients(const DenseFactors& f, EntityId i, EntityId j, RelationId k, int x,
                        const TrainConfig& config) {
    f.check_indices(i, j, k);
    const double delta = config.delta;
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    const auto a = f.a(i);
    const auto b = f.b(j);
    const auto c = f.c(k);
    const std::size_t dim = f.dim();

    std::vector<double> qa(dim), qb(dim), qc(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        qa[d] = quantize(a[d], delta);
        qb[d] = quantize(b[d], delta);
        qc[d] = quantize(c[d], delta);
    }

    Gradients g;
    g.theta = triple_dot(qa, qb, qc);
    g.loss = logistic_loss(x, g.theta);
    const double coef = sigmoid(g.theta) - static_cast<double>(x);
    g.a.resize(dim);
    g.b.resize(dim);
    g.c.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        g.a[d] = coef * qb[d] * qc[d] + 2.0 * config.lambda_a * a[d];
        g.b[d] = coef * qa[d] * qc[d] + 2.0 * config.lambda_b * b[d];
        g.c[d] = coef * qa[d] * qb[d] + 2.0 * config.lambda_c * c[d];
    }
    return g;
}

double ste_grad_step(DenseFactors& f, EntityId i, EntityId j, RelationId k, int x, const TrainConfig& config) {
    const Gradients g = ste_gradients(f, i, j, k, x, config);
    auto apply = [&](std::span<double> row, const std::vector<double>& grad) {
        for (std::size_t d = 0; d < row.size(); ++d) row[d] -= config.eta * grad[d];
    };
    apply(f.a(i), g.a);
    apply(f.b(j), g.b);
    apply(f.c(k), g.c);
    return g.loss;
}

namespace {

void binarize_into(const Matrix& src, BitMatrix& dst, double delta) {
    for (std::size_t r = 0; r < src.rows(); ++r) dst.set_row(r, binarize_row(src.row(r), delta));
}

void expand_into(const BitMatrix& src, Matrix& dst, double scale) {
    for (std::size_t r = 0; r < src.rows(); ++r)
        for (std::size_t d = 0; d < src.dim(); ++d) dst(r, d) = src.test(r, d) ? scale : -scale;
}

}  // namespace

BinaryFactors freeze(const DenseFactors& f, double delta) {
    const ModelKind kind = f.tied() ? ModelKind::BDistMult : ModelKind::BCP;
    BinaryFactors out(kind, f.num_entities(), f.num_relations(), f.dim(), delta);
    binarize_into(f.subject(), out.subject(), delta);
    if (!f.tied()) binarize_into(f.object(), out.object(), delta);
    binarize_into(f.relation(), out.relation(), delta);
    return out;
}

DenseFactors unpack(const BinaryFactors& f) {
    DenseFactors out(f.kind(), f.num_entities(), f.num_relations(), f.dim());
    expand_into(f.subject(), out.subject(), f.scales()[0]);
    if (!f.tied()) expand_into(f.object(), out.object(), f.scales()[1]);
    expand_into(f.relation(), out.relation(), f.scales()[2]);
    return out;
}

}  // namespace bcp
