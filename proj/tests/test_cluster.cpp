#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "bcp/cluster.hpp"
#include "oracles.hpp"

using namespace bcp;

namespace {

void expect_same(const Dendrogram& got, const Dendrogram& want) {
    ASSERT_EQ(got.merges.size(), want.merges.size());
    for (std::size_t t = 0; t < got.merges.size(); ++t) {
        EXPECT_EQ(got.merges[t].a, want.merges[t].a) << "merge " << t;
        EXPECT_EQ(got.merges[t].b, want.merges[t].b) << "merge " << t;
        EXPECT_EQ(got.merges[t].height, want.merges[t].height) << "merge " << t;
        EXPECT_EQ(got.merges[t].size, want.merges[t].size) << "merge " << t;
    }
}

}  // namespace

TEST(Distance, EuclideanOfExpandedVectors) {
    Rng rng(1);
    const BitMatrix m = oracle::random_bits(2, 70, rng);
    double sq = 0;
    for (std::size_t d = 0; d < 70; ++d) {
        const double x = m.test(0, d) ? 0.3 : -0.3, y = m.test(1, d) ? 0.3 : -0.3;
        sq += (x - y) * (x - y);
    }
    EXPECT_NEAR(binary_euclidean(m.row(0), m.row(1), 0.3), std::sqrt(sq), 1e-12);
}

TEST(SingleLinkage, MatchesNaiveReference) {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 20);
        const std::size_t dim = 1 + uniform_index(rng, trial % 2 ? 6 : 80);  // small dims force ties
        const BitMatrix m = oracle::random_bits(n, dim, rng);
        const Clustering c = single_linkage(m, 0.5, 1);
        expect_same(c.dendrogram, oracle::brute_single_linkage(m, 0.5));
    }
}

TEST(SingleLinkage, HeightsAreMonotoneAndSizesAddUp) {
    Rng rng(7);
    const BitMatrix m = oracle::random_bits(15, 40, rng);
    const Clustering c = single_linkage(m, 1.0, 1);
    for (std::size_t t = 1; t < c.dendrogram.merges.size(); ++t)
        EXPECT_LE(c.dendrogram.merges[t - 1].height, c.dendrogram.merges[t].height);
    EXPECT_EQ(c.dendrogram.merges.back().size, 15u);
}

TEST(SingleLinkage, CutGivesKGroups) {
    // three tight groups far apart
    BitMatrix m(6, 30);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t d = 0; d < 30; ++d) m.set(r, d, (d / 10) == r / 2);
    m.set(1, 29, true);
    const Clustering c = single_linkage(m, 0.5, 3);
    EXPECT_EQ(c.labels, (std::vector<std::size_t>{0, 0, 1, 1, 2, 2}));
    EXPECT_EQ(single_linkage(m, 0.5, 6).labels, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(single_linkage(m, 0.5, 1).labels, std::vector<std::size_t>(6, 0));
    EXPECT_THROW(single_linkage(m, 0.5, 0), std::invalid_argument);
    EXPECT_THROW(single_linkage(m, 0.5, 7), std::invalid_argument);
}

TEST(SingleLinkage, PartitionStableUnderRowPermutation) {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        // rows are prefixes of ones of length 2^r - 1, so all pairwise distances differ
        const std::size_t n = 8;
        const std::size_t dim = 200;
        std::vector<std::size_t> len(n);
        for (std::size_t r = 0; r < n; ++r) len[r] = (std::size_t{1} << r) - 1;
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        shuffle(std::span<std::size_t>(perm), rng);
        BitMatrix a(n, dim), b(n, dim);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t d = 0; d < len[r]; ++d) {
                a.set(r, d, true);
                b.set(perm[r], d, true);
            }
        const std::size_t k = 1 + uniform_index(rng, n);
        const auto la = single_linkage(a, 0.5, k).labels;
        const auto lb = single_linkage(b, 0.5, k).labels;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) EXPECT_EQ(la[x] == la[y], lb[perm[x]] == lb[perm[y]]);
    }
}

TEST(Cut, LabelsCanonicalByFirstAppearance) {
    Dendrogram d;
    d.leaves = 4;
    d.merges = {{2, 3, 1.0, 2}, {0, 4, 2.0, 3}, {1, 5, 3.0, 4}};
    EXPECT_EQ(cut_labels(d, 0), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(cut_labels(d, 1), (std::vector<std::size_t>{0, 1, 2, 2}));
    EXPECT_EQ(cut_labels(d, 2), (std::vector<std::size_t>{0, 1, 0, 0}));
    EXPECT_THROW(cut_labels(d, 4), std::invalid_argument);
}
