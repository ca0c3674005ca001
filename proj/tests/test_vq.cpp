#include <gtest/gtest.h>

#include <cmath>

#include "bcp/model_io.hpp"
#include "bcp/vq.hpp"
#include "oracles.hpp"

using namespace bcp;

namespace {

double frobenius_sq(const Matrix& x, const Matrix& y) {
    double s = 0;
    for (std::size_t n = 0; n < x.values().size(); ++n) s += (x.values()[n] - y.values()[n]) * (x.values()[n] - y.values()[n]);
    return s;
}

// min over every sign matrix and alpha in a grid on [0, max|x|].
double brute_min_error(const Matrix& x, std::size_t grid) {
    const std::size_t cells = x.rows() * x.cols();
    double top = 0;
    for (double v : x.values()) top = std::max(top, std::abs(v));
    double best = INFINITY;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        for (std::size_t g = 0; g < grid; ++g) {
            const double alpha = top * static_cast<double>(g) / static_cast<double>(grid - 1);
            double err = 0;
            for (std::size_t n = 0; n < cells; ++n) {
                const double v = (mask >> n & 1u) ? alpha : -alpha;
                err += (x.values()[n] - v) * (x.values()[n] - v);
            }
            best = std::min(best, err);
        }
    }
    return best;
}

}  // namespace

TEST(Vq, ClosedFormOnKnownMatrix) {
    Matrix x(2, 2);
    x(0, 0) = 1.0, x(0, 1) = -3.0, x(1, 0) = 0.0, x(1, 1) = 2.0;
    const VqMatrix q = vq_quantize(x);
    EXPECT_DOUBLE_EQ(q.alpha, 1.5);
    EXPECT_TRUE(q.signs.test(0, 0));
    EXPECT_FALSE(q.signs.test(0, 1));
    EXPECT_TRUE(q.signs.test(1, 0));
    const Matrix r = vq_reconstruct(q);
    EXPECT_EQ(r(0, 1), -1.5);
    EXPECT_EQ(r(1, 0), 1.5);
}

TEST(Vq, BeatsEverySignMatrixOnTwoByTwo) {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix x(2, 2);
        for (double& v : x.values()) v = uniform_real(rng, -2.0, 2.0);
        const double closed = frobenius_sq(x, vq_reconstruct(vq_quantize(x)));
        EXPECT_LE(closed, brute_min_error(x, 1000) + 1e-12);
    }
}

TEST(Vq, CoarseGridWithTiesAndZeros) {
    const double grid[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix x(2, 3);
        for (double& v : x.values()) v = grid[uniform_index(rng, 5)];
        const double closed = frobenius_sq(x, vq_reconstruct(vq_quantize(x)));
        EXPECT_LE(closed, brute_min_error(x, 201) + 1e-12);
    }
}

TEST(Vq, ZeroMatrixGivesZeroAlpha) {
    const VqMatrix q = vq_quantize(Matrix(3, 4));
    EXPECT_EQ(q.alpha, 0.0);
    EXPECT_EQ(frobenius_sq(Matrix(3, 4), vq_reconstruct(q)), 0.0);
}

TEST(Vq, RejectsEmptyAndNaN) {
    EXPECT_THROW(vq_quantize(Matrix(0, 3)), std::invalid_argument);
    Matrix x(1, 2);
    x(0, 1) = std::nan("");
    EXPECT_THROW(vq_quantize(x), std::invalid_argument);
}

TEST(Vq, AppliedModelScoresWithAlphaProduct) {
    TrainConfig c;
    c.dim = 37;
    Rng rng(1);
    const DenseFactors f = init_factors(c, 4, 3, rng);
    const BinaryFactors q = vq_apply(f);
    EXPECT_TRUE(q.vq());
    const double pa = vq_quantize(f.subject()).alpha, pb = vq_quantize(f.object()).alpha,
                 pc = vq_quantize(f.relation()).alpha;
    EXPECT_EQ(q.scales(), (std::array<double, 3>{pa, pb, pc}));
    for (EntityId i = 0; i < 4; ++i)
        for (EntityId j = 0; j < 4; ++j) {
            const double expected = oracle::expanded_score(q.a(i), q.b(j), q.c(2), pa, pb, pc);
            EXPECT_NEAR(score_bitwise(q, i, j, 2), expected, 1e-15);
        }
}

TEST(Vq, TiedModelSharesOneEntityScale) {
    TrainConfig c;
    c.kind = ModelKind::DistMult;
    c.dim = 12;
    Rng rng(1);
    const BinaryFactors q = vq_apply(init_factors(c, 4, 3, rng));
    EXPECT_EQ(q.kind(), ModelKind::BDistMult);
    EXPECT_EQ(q.scales()[0], q.scales()[1]);
}
