#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bcp/dense.hpp"
#include "bcp/kg.hpp"

namespace bcp {

class TrainingDiverged : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;  // mean logistic loss over all steps of the epoch
    std::size_t steps = 0;
    std::optional<double> valid_mrr;
};

struct TrainCallbacks {
    std::function<void(const EpochStats&)> on_epoch;
    // Returns a model-selection score (filtered validation MRR). When set, the
    // best-scoring snapshot is returned instead of the final factors.
    std::function<double(const DenseFactors&)> validate;
    std::size_t validate_every = 20;
};

struct TrainResult {
    DenseFactors factors;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    std::optional<double> best_valid_mrr;
    std::size_t total_steps = 0;
};

// SGD over shuffled training triples: per positive one step with x = 1 and one
// step with x = 0 per sampled negative. Binarized kinds use the
// straight-through step on latent real factors; freeze() the result.
// `initial` resumes from existing latent factors.
TrainResult train(const TripleStore& store, const TrainConfig& config, const TrainCallbacks& callbacks = {},
                  std::optional<DenseFactors> initial = std::nullopt);

}  // namespace bcp
