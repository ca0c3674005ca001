#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bcp/dense.hpp"
#include "oracles.hpp"

using namespace bcp;

namespace {

TrainConfig config(ModelKind kind, std::size_t dim) {
    TrainConfig c;
    c.kind = kind;
    c.dim = dim;
    return c;
}

}  // namespace

TEST(ModelKind, ParsesNames) {
    EXPECT_EQ(parse_model_kind("CP"), ModelKind::CP);
    EXPECT_EQ(parse_model_kind("b-cp"), ModelKind::BCP);
    EXPECT_EQ(parse_model_kind("B-DistMult"), ModelKind::BDistMult);
    EXPECT_THROW(parse_model_kind("transe"), std::invalid_argument);
    for (auto k : {ModelKind::CP, ModelKind::DistMult, ModelKind::BCP, ModelKind::BDistMult})
        EXPECT_EQ(parse_model_kind(to_string(k)), k);
}

TEST(Config, RejectsInvalidValues) {
    auto bad = [](auto mutate) {
        TrainConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), std::invalid_argument);
    };
    bad([](TrainConfig& c) { c.eta = 0.0; });
    bad([](TrainConfig& c) { c.dim = 0; });
    bad([](TrainConfig& c) { c.lambda_b = -1e-9; });
    bad([](TrainConfig& c) { c.epochs = kMaxEpochs + 1; });
    bad([](TrainConfig& c) { c.neg_per_pos = 0; });
    bad([](TrainConfig& c) {
        c.kind = ModelKind::BCP;
        c.delta = 0.0;
    });
    TrainConfig ok;
    ok.delta = 0.0;  // ignored for real-valued kinds
    EXPECT_NO_THROW(ok.validate());
}

TEST(Init, EntriesWithinBoundAndSpread) {
    Rng rng(4);
    const auto f = init_factors(config(ModelKind::CP, 50), 20, 10, rng);
    const double bound = std::sqrt(6.0) / std::sqrt(100.0);
    EXPECT_DOUBLE_EQ(init_bound(50), bound);
    double mean = 0, sq = 0;
    std::size_t n = 0;
    for (const Matrix* m : {&f.subject(), &f.object(), &f.relation()})
        for (double v : m->values()) {
            EXPECT_LE(std::abs(v), bound);
            mean += v;
            sq += v * v;
            ++n;
        }
    mean /= n;
    // uniform on [-b, b]: mean 0, variance b^2/3
    EXPECT_NEAR(mean, 0.0, 4 * bound / std::sqrt(3.0 * n));
    EXPECT_NEAR(sq / n, bound * bound / 3, 0.1 * bound * bound / 3);
}

TEST(Init, TiedKindsHaveOneEntityMatrix) {
    Rng rng(4);
    const auto f = init_factors(config(ModelKind::DistMult, 8), 5, 3, rng);
    EXPECT_EQ(&f.subject(), &f.object());
    for (EntityId i = 0; i < 5; ++i)
        for (EntityId j = 0; j < 5; ++j) EXPECT_EQ(score(f, i, j, 0), score(f, j, i, 0));
}

TEST(Score, MatchesTripleLoop) {
    Rng rng(8);
    const auto f = init_factors(config(ModelKind::CP, 17), 6, 4, rng);
    for (EntityId i = 0; i < 6; ++i)
        for (EntityId j = 0; j < 6; ++j)
            for (RelationId k = 0; k < 4; ++k) {
                double s = 0;
                for (std::size_t d = 0; d < 17; ++d) s += f.subject()(i, d) * f.object()(j, d) * f.relation()(k, d);
                EXPECT_NEAR(score(f, i, j, k), s, 1e-15);
            }
    EXPECT_THROW(score(f, 6, 0, 0), std::out_of_range);
    EXPECT_THROW(score(f, 0, 0, 4), std::out_of_range);
}

TEST(Loss, StableAndMatchesExtendedPrecision) {
    for (double theta : {-800.0, -40.0, -3.0, -1e-8, 0.0, 2.5, 37.0, 800.0}) {
        for (int x : {0, 1}) {
            const double got = logistic_loss(x, theta);
            EXPECT_TRUE(std::isfinite(got));
            EXPECT_GE(got, 0.0);
            const long double ref = oracle::loss_ld(x, theta);
            if (std::isfinite(static_cast<double>(ref)) && std::abs(theta) < 40)
                EXPECT_NEAR(got, static_cast<double>(ref), 1e-14 * std::max(1.0, static_cast<double>(ref)));
        }
    }
    EXPECT_DOUBLE_EQ(logistic_loss(1, 800.0 - 1600.0), 800.0);
    EXPECT_DOUBLE_EQ(logistic_loss(0, 0.0), std::log(2.0));
    EXPECT_DOUBLE_EQ(logistic_loss(1, 3.0), logistic_loss(0, -3.0));
    EXPECT_EQ(sigmoid(-1000.0), 0.0);
    EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Gradients, MatchCentralDifferences) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dim = 1 + uniform_index(rng, 16);
        TrainConfig cfg = config(ModelKind::CP, dim);
        cfg.lambda_a = uniform_real(rng, 0.0, 0.1);
        cfg.lambda_b = uniform_real(rng, 0.0, 0.1);
        cfg.lambda_c = uniform_real(rng, 0.0, 0.1);
        DenseFactors f(ModelKind::CP, 2, 1, dim);
        for (Matrix* m : {&f.subject(), &f.object(), &f.relation()})
            for (double& v : m->values()) v = uniform_real(rng, -1.5, 1.5);
        const int x = trial % 2;
        const Gradients g = dense_gradients(f, 0, 1, 0, x, cfg);

        std::vector<double> a(f.a(0).begin(), f.a(0).end()), b(f.b(1).begin(), f.b(1).end()),
            c(f.c(0).begin(), f.c(0).end());
        auto obj = [&] { return oracle::objective(x, a, b, c, cfg); };
        for (std::size_t d = 0; d < dim; ++d) {
            EXPECT_LT(oracle::rel_err(g.a[d], oracle::central_diff(a, d, obj)), 1e-7);
            EXPECT_LT(oracle::rel_err(g.b[d], oracle::central_diff(b, d, obj)), 1e-7);
            EXPECT_LT(oracle::rel_err(g.c[d], oracle::central_diff(c, d, obj)), 1e-7);
        }
    }
}

TEST(GradStep, UsesPreStepValuesForAllRows) {
    Rng rng(3);
    TrainConfig cfg = config(ModelKind::CP, 4);
    cfg.eta = 0.5;
    DenseFactors f = init_factors(cfg, 3, 2, rng);
    const DenseFactors before = f;
    const Gradients g = dense_gradients(before, 2, 1, 0, 0, cfg);
    grad_step(f, 2, 1, 0, 0, cfg);
    for (std::size_t d = 0; d < 4; ++d) {
        EXPECT_DOUBLE_EQ(f.a(2)[d], before.a(2)[d] - 0.5 * g.a[d]);
        EXPECT_DOUBLE_EQ(f.b(1)[d], before.b(1)[d] - 0.5 * g.b[d]);
        EXPECT_DOUBLE_EQ(f.c(0)[d], before.c(0)[d] - 0.5 * g.c[d]);
    }
}

TEST(GradStep, TiedSelfLoopAppliesBothGradients) {
    Rng rng(3);
    TrainConfig cfg = config(ModelKind::DistMult, 4);
    DenseFactors f = init_factors(cfg, 3, 2, rng);
    const DenseFactors before = f;
    const Gradients g = dense_gradients(before, 1, 1, 0, 1, cfg);
    grad_step(f, 1, 1, 0, 1, cfg);
    for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(f.a(1)[d], before.a(1)[d] - cfg.eta * (g.a[d] + g.b[d]), 1e-15);
}

TEST(Negatives, CorruptObjectOnlyAndAvoidTrainFacts) {
    Vocab v;
    for (int e = 0; e < 6; ++e) v.add_entity("e" + std::to_string(e));
    v.add_relation("r");
    const TripleStore s(v, {{0, 1, 0}, {0, 2, 0}, {3, 4, 0}});
    Rng rng(17);
    const Triple pos{0, 1, 0};
    std::map<EntityId, int> counts;
    const int n = 40000;
    for (const Triple& t : sample_negatives(s, pos, n, rng)) {
        EXPECT_EQ(t.subject, 0u);
        EXPECT_EQ(t.relation, 0u);
        EXPECT_FALSE(s.is_train_fact(t));
        ++counts[t.object];
    }
    // uniform over the 4 allowed objects: chi-square with 3 dof, p = 0.001 cut 16.27
    ASSERT_EQ(counts.size(), 4u);
    double chi2 = 0;
    for (auto [obj, c] : counts) chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    EXPECT_LT(chi2, 16.27);
}

TEST(Negatives, SaturatedRowAcceptsAfterRetries) {
    Vocab v;
    v.add_entity("a");
    v.add_entity("b");
    v.add_relation("r");
    const TripleStore s(v, {{0, 0, 0}, {0, 1, 0}});
    Rng rng(1);
    const auto neg = sample_negatives(s, {0, 0, 0}, 3, rng);
    EXPECT_EQ(neg.size(), 3u);
    EXPECT_THROW(sample_negatives(s, {0, 0, 0}, 0, rng), std::invalid_argument);
}
