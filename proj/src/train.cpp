#include "bcp/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bcp/binary.hpp"

namespace bcp {

TrainResult train(const TripleStore& store, const TrainConfig& config, const TrainCallbacks& callbacks,
                  std::optional<DenseFactors> initial) {
    config.validate();
    if (store.train().empty()) throw std::invalid_argument("training split is empty");

    Rng rng(config.seed);
    TrainResult result;
    if (initial) {
        if (initial->num_entities() != store.num_entities() || initial->num_relations() != store.num_relations() ||
            initial->dim() != config.dim || initial->tied() != is_tied(config.kind))
            throw std::invalid_argument("initial factors do not match the dataset/config shape");
        result.factors = std::move(*initial);
    } else {
        result.factors = init_factors(config, store.num_entities(), store.num_relations(), rng);
    }
    DenseFactors& f = result.factors;

    const auto step = is_binarized(config.kind) ? &ste_grad_step : &grad_step;
    std::vector<Triple> order(store.train().begin(), store.train().end());
    std::optional<DenseFactors> best;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle(std::span<Triple>(order), rng);
        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (const Triple& pos : order) {
            loss_sum += step(f, pos.subject, pos.object, pos.relation, 1, config);
            ++steps;
            for (const Triple& neg : sample_negatives(store, pos, config.neg_per_pos, rng)) {
                loss_sum += step(f, neg.subject, neg.object, neg.relation, 0, config);
                ++steps;
            }
        }
        if (!std::isfinite(loss_sum) || !f.all_finite())
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                   " (non-finite loss or parameters); lower eta");

        EpochStats stats{epoch, loss_sum / static_cast<double>(steps), steps, std::nullopt};
        result.total_steps += steps;

        const bool validate_now = callbacks.validate && callbacks.validate_every > 0 &&
                                  (epoch % callbacks.validate_every == 0 || epoch == config.epochs);
        if (validate_now) {
            const double mrr = callbacks.validate(f);
            stats.valid_mrr = mrr;
            if (!result.best_valid_mrr || mrr > *result.best_valid_mrr) {
                result.best_valid_mrr = mrr;
                result.best_epoch = epoch;
                best = f;
            }
        }
        result.history.push_back(stats);
        if (callbacks.on_epoch) callbacks.on_epoch(stats);
    }

    if (best) {
        result.factors = std::move(*best);
    } else {
        result.best_epoch = config.epochs;
    }
    return result;
}

}  // namespace bcp
