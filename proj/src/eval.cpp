#include "bcp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <stdexcept>
#include <thread>

namespace bcp {

Scorer make_scorer(const DenseFactors& f) {
    return [&f](EntityId i, EntityId j, RelationId k) { return score(f, i, j, k); };
}

Scorer make_scorer(const BinaryFactors& f) {
    return [&f](EntityId i, EntityId j, RelationId k) { return score_bitwise(f, i, j, k); };
}

namespace {

struct QueryCounts {
    std::size_t greater = 0;
    std::size_t equal = 0;
    std::size_t competitors = 0;
};

// Counts competitors l != target; `score_of(l)` scores the corrupted triple
// and `known(l)` says whether it is a known fact.
template <class ScoreFn, class KnownFn>
QueryCounts count_competitors(std::size_t num_entities, EntityId target, double target_score, ScoreFn&& score_of,
                              KnownFn&& known, bool filtered) {
    QueryCounts q;
    for (EntityId l = 0; l < num_entities; ++l) {
        if (l == target) continue;
        if (filtered && known(l)) continue;
        ++q.competitors;
        const double s = score_of(l);
        if (s > target_score)
            ++q.greater;
        else if (s == target_score)
            ++q.equal;
    }
    return q;
}

QueryCounts query(const Scorer& scorer, const TripleStore& store, const Triple& t, Side side, bool filtered,
                  bool via_inverse) {
    const std::size_t ne = store.num_entities();
    if (side == Side::Object) {
        const double target = scorer(t.subject, t.object, t.relation);
        return count_competitors(
            ne, t.object, target, [&](EntityId l) { return scorer(t.subject, l, t.relation); },
            [&](EntityId l) { return store.is_known_fact(t.subject, l, t.relation); }, filtered);
    }
    if (via_inverse) {
        const RelationId inv = store.vocab().inverse(t.relation);
        const double target = scorer(t.object, t.subject, inv);
        return count_competitors(
            ne, t.subject, target, [&](EntityId l) { return scorer(t.object, l, inv); },
            [&](EntityId l) { return store.is_known_fact(l, t.object, t.relation); }, filtered);
    }
    const double target = scorer(t.subject, t.object, t.relation);
    return count_competitors(
        ne, t.subject, target, [&](EntityId l) { return scorer(l, t.object, t.relation); },
        [&](EntityId l) { return store.is_known_fact(l, t.object, t.relation); }, filtered);
}

double mid_rank(const QueryCounts& q) {
    return 1.0 + static_cast<double>(q.greater) + static_cast<double>(q.equal) / 2.0;
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t q = 0; q < n; ++q) fn(q);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t end = std::min(n, (t + 1) * chunk);
                for (std::size_t q = t * chunk; q < end; ++q) fn(q);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

double filtered_rank(const Scorer& scorer, const TripleStore& store, const Triple& triple, Side side,
                     bool filtered) {
    return mid_rank(query(scorer, store, triple, side, filtered, false));
}

RankReport evaluate_ranking(const Scorer& scorer, const TripleStore& store, const EvalOptions& options) {
    const auto triples = store.split(options.split);
    if (triples.empty()) throw std::invalid_argument("evaluation split is empty");
    if (options.subject_via_inverse && !store.augmented())
        throw std::invalid_argument("subject_via_inverse needs an inverse-augmented store");

    // ranks[2q] subject side, ranks[2q + 1] object side; summed in index order.
    std::vector<double> ranks(2 * triples.size());
    parallel_for(triples.size(), options.threads, [&](std::size_t q) {
        ranks[2 * q] = mid_rank(
            query(scorer, store, triples[q], Side::Subject, options.filtered, options.subject_via_inverse));
        ranks[2 * q + 1] = mid_rank(query(scorer, store, triples[q], Side::Object, options.filtered, false));
    });

    RankReport report;
    report.n_queries = ranks.size();
    double rr_sum = 0.0;
    for (int n : options.hits_at) report.hits[n] = 0.0;
    for (double r : ranks) {
        rr_sum += 1.0 / r;
        for (auto& [n, h] : report.hits)
            if (r <= n) h += 1.0;
    }
    const double nq = static_cast<double>(ranks.size());
    report.mrr = rr_sum / nq;
    for (auto& [n, h] : report.hits) h /= nq;
    return report;
}

double random_scorer_mrr(const TripleStore& store, const EvalOptions& options) {
    const auto triples = store.split(options.split);
    if (triples.empty()) throw std::invalid_argument("evaluation split is empty");
    const Scorer zero = [](EntityId, EntityId, RelationId) { return 0.0; };
    // Harmonic numbers up to N_e.
    std::vector<double> harmonic(store.num_entities() + 1, 0.0);
    for (std::size_t m = 1; m < harmonic.size(); ++m) harmonic[m] = harmonic[m - 1] + 1.0 / static_cast<double>(m);
    double sum = 0.0;
    for (const auto& t : triples) {
        for (Side side : {Side::Subject, Side::Object}) {
            const auto q = query(zero, store, t, side, options.filtered, false);
            const std::size_t m = q.competitors + 1;
            sum += harmonic[m] / static_cast<double>(m);
        }
    }
    return sum / static_cast<double>(2 * triples.size());
}

double pr_auc(std::span<const double> positives, std::span<const double> negatives) {
    if (positives.empty()) throw std::invalid_argument("pr_auc needs at least one positive");
    std::vector<std::pair<double, bool>> scored;
    scored.reserve(positives.size() + negatives.size());
    for (double s : positives) scored.emplace_back(s, true);
    for (double s : negatives) scored.emplace_back(s, false);
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

    const double n_pos = static_cast<double>(positives.size());
    double tp = 0.0, fp = 0.0, prev_recall = 0.0, auc = 0.0;
    for (std::size_t idx = 0; idx < scored.size();) {
        const double threshold = scored[idx].first;
        while (idx < scored.size() && scored[idx].first == threshold) {
            (scored[idx].second ? tp : fp) += 1.0;
            ++idx;
        }
        const double recall = tp / n_pos;
        const double precision = tp / (tp + fp);
        auc += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return auc;
}

std::vector<Triple> generate_negatives(const TripleStore& store, std::size_t count, Rng& rng) {
    const std::uint64_t ne = store.num_entities();
    const std::uint64_t nr = store.vocab().base_relations();
    std::vector<Triple> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        bool found = false;
        for (int attempt = 0; attempt < kMaxNegativeDraws && !found; ++attempt) {
            Triple t{static_cast<EntityId>(uniform_index(rng, ne)), static_cast<EntityId>(uniform_index(rng, ne)),
                     static_cast<RelationId>(uniform_index(rng, nr))};
            if (!store.is_known_fact(t)) {
                out.push_back(t);
                found = true;
            }
        }
        if (!found) throw std::runtime_error("could not draw an unknown triple; graph is too dense");
    }
    return out;
}

PrAucReport evaluate_pr_auc(const Scorer& scorer, const TripleStore& store, std::uint64_t seed, Split split) {
    const auto triples = store.split(split);
    if (triples.empty()) throw std::invalid_argument("evaluation split is empty");
    Rng rng(seed);
    const auto negatives = generate_negatives(store, triples.size(), rng);
    std::vector<double> pos, neg;
    pos.reserve(triples.size());
    neg.reserve(negatives.size());
    for (const auto& t : triples) pos.push_back(scorer(t.subject, t.object, t.relation));
    for (const auto& t : negatives) neg.push_back(scorer(t.subject, t.object, t.relation));
    return {pr_auc(pos, neg), pos.size(), neg.size()};
}

std::vector<BenchRow> bench_scoring(std::span<const std::size_t> dims, std::size_t reps, std::uint64_t seed) {
    if (reps < kMinBenchReps) throw std::invalid_argument("bench_scoring needs reps >= " + std::to_string(kMinBenchReps));
    using clock = std::chrono::steady_clock;
    constexpr std::size_t kPool = 64;
    Rng rng(seed);
    std::vector<BenchRow> rows;
    volatile double sink = 0.0;

    for (std::size_t dim : dims) {
        if (dim == 0) throw std::invalid_argument("bench dimension must be positive");
        Matrix dense(3 * kPool, dim);
        for (double& v : dense.values()) v = uniform_real(rng, -1.0, 1.0);
        BitMatrix bits(3 * kPool, dim);
        for (std::size_t r = 0; r < bits.rows(); ++r) bits.set_row(r, binarize_row(dense.row(r), 1.0));
        const double scale = 0.125;

        auto run_float = [&](std::size_t n) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t i = r % kPool, j = kPool + (r * 7 + 3) % kPool, k = 2 * kPool + (r * 13 + 5) % kPool;
                acc += triple_dot(dense.row(i), dense.row(j), dense.row(k));
            }
            return acc;
        };
        auto run_bits = [&](std::size_t n) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t i = r % kPool, j = kPool + (r * 7 + 3) % kPool, k = 2 * kPool + (r * 13 + 5) % kPool;
                acc += score_bitwise(bits.row(i), bits.row(j), bits.row(k), scale);
            }
            return acc;
        };

        sink = sink + run_float(reps / 10) + run_bits(reps / 10);
        auto t0 = clock::now();
        sink = sink + run_float(reps);
        auto t1 = clock::now();
        sink = sink + run_bits(reps);
        auto t2 = clock::now();

        const double n = static_cast<double>(reps);
        rows.push_back({dim, std::chrono::duration<double, std::nano>(t1 - t0).count() / n,
                        std::chrono::duration<double, std::nano>(t2 - t1).count() / n});
    }
    return rows;
}

}  // namespace bcp
