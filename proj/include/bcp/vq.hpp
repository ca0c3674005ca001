#pragma once

#include "bcp/binary.hpp"
#include "bcp/dense.hpp"

namespace bcp {

// X ~= alpha * S with S in {+1, -1}^(rows x cols) packed row-wise
// (set bit = +1). alpha is 0 only for an all-zero source.
struct VqMatrix {
    BitMatrix signs;
    double alpha = 0.0;
};

// Closed-form minimizer of ||X - alpha S||_F: S = sign(X) with sign(0) = +1,
// alpha = mean |x|. Throws on an empty matrix or NaN entries.
VqMatrix vq_quantize(const Matrix& x);

// Dense reconstruction alpha * S.
Matrix vq_reconstruct(const VqMatrix& q);

// Quantizes A, B and C independently. The result scores with
// alpha_A * alpha_B * alpha_C * (D - 2 BitC).
BinaryFactors vq_apply(const DenseFactors& f);

}  // namespace bcp
