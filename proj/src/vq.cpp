#include "bcp/vq.hpp"

#include <cmath>
#include <stdexcept>

namespace bcp {

VqMatrix vq_quantize(const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("vq_quantize needs a nonempty matrix");
    VqMatrix q{BitMatrix(x.rows(), x.cols()), 0.0};
    double l1 = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double v = x(r, c);
            if (std::isnan(v)) throw std::invalid_argument("vq_quantize: NaN entry");
            if (v >= 0.0) q.signs.set(r, c, true);
            l1 += std::abs(v);
        }
    }
    q.alpha = l1 / static_cast<double>(x.rows() * x.cols());
    return q;
}

Matrix vq_reconstruct(const VqMatrix& q) {
    Matrix out(q.signs.rows(), q.signs.dim());
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = q.signs.test(r, c) ? q.alpha : -q.alpha;
    return out;
}

BinaryFactors vq_apply(const DenseFactors& f) {
    const ModelKind kind = f.tied() ? ModelKind::BDistMult : ModelKind::BCP;
    VqMatrix qa = vq_quantize(f.subject());
    VqMatrix qc = vq_quantize(f.relation());
    VqMatrix qb = f.tied() ? VqMatrix{} : vq_quantize(f.object());
    const double alpha_b = f.tied() ? qa.alpha : qb.alpha;

    // Delta is unused for VQ scoring; the header keeps 1.0 there.
    BinaryFactors out(kind, f.num_entities(), f.num_relations(), f.dim(), 1.0);
    out.subject() = std::move(qa.signs);
    if (!f.tied()) out.object() = std::move(qb.signs);
    out.relation() = std::move(qc.signs);
    out.set_vq_scales(qa.alpha, alpha_b, qc.alpha);
    return out;
}

}  // namespace bcp
