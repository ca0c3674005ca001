#include <gtest/gtest.h>

#include "bcp/binary.hpp"
#include "bcp/train.hpp"

using namespace bcp;

namespace {

TripleStore ring_store(std::size_t n) {
    Vocab v;
    for (std::size_t e = 0; e < n; ++e) v.add_entity("e" + std::to_string(e));
    v.add_relation("next");
    v.add_relation("self");
    std::vector<Triple> train, valid;
    for (std::size_t e = 0; e < n; ++e) {
        auto id = static_cast<EntityId>(e);
        train.push_back({id, static_cast<EntityId>((e + 1) % n), 0});
        (e % 4 == 0 ? valid : train).push_back({id, id, 1});
    }
    return TripleStore(std::move(v), std::move(train), std::move(valid));
}

TrainConfig small(ModelKind kind) {
    TrainConfig c;
    c.kind = kind;
    c.dim = 16;
    c.epochs = 30;
    c.eta = 0.1;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Train, LossDecreasesForEveryKind) {
    const TripleStore s = ring_store(12);
    for (auto kind : {ModelKind::CP, ModelKind::DistMult, ModelKind::BCP, ModelKind::BDistMult}) {
        const TrainResult r = train(s, small(kind));
        ASSERT_EQ(r.history.size(), 30u);
        EXPECT_LT(r.history.back().mean_loss, r.history.front().mean_loss) << to_string(kind);
        EXPECT_EQ(r.history.front().steps, s.train().size() * 6);
        EXPECT_EQ(r.total_steps, 30 * s.train().size() * 6);
    }
}

TEST(Train, SameSeedSameFactors) {
    const TripleStore s = ring_store(10);
    for (auto kind : {ModelKind::CP, ModelKind::BCP}) {
        const auto a = train(s, small(kind));
        const auto b = train(s, small(kind));
        EXPECT_EQ(a.factors, b.factors);
        TrainConfig other = small(kind);
        other.seed = 6;
        EXPECT_FALSE(train(s, other).factors == a.factors);
    }
}

TEST(Train, ValidationScheduleAndBestSnapshot) {
    const TripleStore s = ring_store(12);
    TrainConfig cfg = small(ModelKind::CP);
    cfg.epochs = 25;
    std::vector<std::size_t> validated;
    std::vector<DenseFactors> snapshots;
    int calls = 0;
    TrainCallbacks cb;
    cb.validate_every = 10;
    // second validation is the best one
    cb.validate = [&](const DenseFactors& f) {
        snapshots.push_back(f);
        return ++calls == 2 ? 0.9 : 0.1;
    };
    cb.on_epoch = [&](const EpochStats& st) {
        if (st.valid_mrr) validated.push_back(st.epoch);
    };
    const TrainResult r = train(s, cfg, cb);
    EXPECT_EQ(validated, (std::vector<std::size_t>{10, 20, 25}));
    EXPECT_EQ(r.best_epoch, 20u);
    EXPECT_EQ(*r.best_valid_mrr, 0.9);
    EXPECT_EQ(r.factors, snapshots[1]);
}

TEST(Train, WithoutValidationKeepsFinalFactors) {
    const TripleStore s = ring_store(8);
    TrainConfig cfg = small(ModelKind::CP);
    cfg.epochs = 3;
    const TrainResult r = train(s, cfg);
    EXPECT_EQ(r.best_epoch, 3u);
    EXPECT_FALSE(r.best_valid_mrr);
}

TEST(Train, ResumeContinuesFromGivenFactors) {
    const TripleStore s = ring_store(8);
    TrainConfig cfg = small(ModelKind::CP);
    cfg.epochs = 0;
    const TrainResult first = train(s, small(ModelKind::CP));
    const TrainResult zero = train(s, cfg, {}, first.factors);
    EXPECT_EQ(zero.factors, first.factors);

    DenseFactors wrong(ModelKind::CP, 8, 2, 4);
    EXPECT_THROW(train(s, small(ModelKind::CP), {}, wrong), std::invalid_argument);
}

TEST(Train, DivergenceIsReported) {
    const TripleStore s = ring_store(8);
    TrainConfig cfg = small(ModelKind::CP);
    cfg.eta = 1e200;
    cfg.lambda_a = cfg.lambda_b = cfg.lambda_c = 1.0;
    EXPECT_THROW(train(s, cfg), TrainingDiverged);
}

TEST(Train, EmptyTrainSplitRejected) {
    Vocab v;
    v.add_entity("a");
    v.add_relation("r");
    EXPECT_THROW(train(TripleStore(v, {}), small(ModelKind::CP)), std::invalid_argument);
}

TEST(Train, BinarizedTrainingFitsTheRing) {
    const TripleStore s = ring_store(8);
    TrainConfig cfg = small(ModelKind::BCP);
    cfg.dim = 32;
    cfg.epochs = 200;
    cfg.eta = 0.05;
    const BinaryFactors f = freeze(train(s, cfg).factors, cfg.delta);
    std::size_t top = 0;
    for (EntityId e = 0; e < 8; ++e) {
        const EntityId want = (e + 1) % 8;
        bool best = true;
        for (EntityId o = 0; o < 8; ++o)
            if (o != want && score_bitwise(f, e, o, 0) >= score_bitwise(f, e, want, 0)) best = false;
        top += best;
    }
    EXPECT_GE(top, 6u);
}
