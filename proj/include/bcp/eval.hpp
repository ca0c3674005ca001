#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "bcp/binary.hpp"
#include "bcp/dense.hpp"
#include "bcp/kg.hpp"
#include "bcp/random.hpp"

namespace bcp {

// theta(subject, object, relation). Must be safe to call concurrently.
using Scorer = std::function<double(EntityId, EntityId, RelationId)>;

// The returned scorers reference `f`; keep it alive while they are in use.
Scorer make_scorer(const DenseFactors& f);
Scorer make_scorer(const BinaryFactors& f);

enum class Side { Subject, Object };

// Mid-rank of the true entity among all N_e replacements on `side`:
// 1 + #{greater} + #{equal} / 2, where competitors forming a known fact are
// dropped when `filtered` is set.
double filtered_rank(const Scorer& scorer, const TripleStore& store, const Triple& triple, Side side,
                     bool filtered = true);

struct RankReport {
    double mrr = 0.0;
    std::map<int, double> hits;
    std::size_t n_queries = 0;
};

struct EvalOptions {
    Split split = Split::Test;
    std::vector<int> hits_at{1, 3, 10};
    bool filtered = true;
    // On an augmented store, rank the subject side of (i, j, k) as the
    // object side of (j, i, k^-1). Filtering still uses (l, j, k).
    bool subject_via_inverse = false;
    std::size_t threads = 1;
};

// Two queries per triple (subject and object side).
RankReport evaluate_ranking(const Scorer& scorer, const TripleStore& store, const EvalOptions& options = {});

// Expected MRR of a scorer producing i.i.d. continuous scores, under the
// same candidate sets: mean over queries of H_m / m with m = 1 + #competitors.
double random_scorer_mrr(const TripleStore& store, const EvalOptions& options = {});

struct PrAucReport {
    double auc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Step-wise area under the precision-recall curve; tied scores form a single
// threshold. Throws std::invalid_argument when `positives` is empty.
double pr_auc(std::span<const double> positives, std::span<const double> negatives);

inline constexpr int kMaxNegativeDraws = 10000;

// `count` distinct-from-known uniform triples over base relations.
// Throws std::runtime_error when kMaxNegativeDraws draws fail in a row.
std::vector<Triple> generate_negatives(const TripleStore& store, std::size_t count, Rng& rng);

PrAucReport evaluate_pr_auc(const Scorer& scorer, const TripleStore& store, std::uint64_t seed,
                            Split split = Split::Test);

struct BenchRow {
    std::size_t dim = 0;
    double float_ns = 0.0;
    double bitwise_ns = 0.0;
};

inline constexpr std::size_t kMinBenchReps = 10000;

// Single-threaded per-score wall time of the dense triple product versus the
// XNOR/popcount kernel over random rows. Throws when reps < kMinBenchReps.
std::vector<BenchRow> bench_scoring(std::span<const std::size_t> dims, std::size_t reps, std::uint64_t seed = 1);

}  // namespace bcp
