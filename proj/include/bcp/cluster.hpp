#pragma once

#include <cstddef>
#include <vector>

#include "bcp/binary.hpp"

namespace bcp {

// Euclidean distance between the +-delta expansions of two bit rows:
// 2 * delta * sqrt(hamming(p, q)).
double binary_euclidean(BitSpan p, BitSpan q, double delta);

// One agglomeration step. Leaves are 0..n-1; the cluster created by merge t
// gets id n + t.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;
};

struct Clustering {
    Dendrogram dendrogram;
    // Cut at k clusters; labels numbered by first appearance in row order.
    std::vector<std::size_t> labels;
};

// Single-linkage agglomeration to a single cluster; labels are taken after
// the first n - k merges. Among equal distances the pair with the lowest
// (min-row-index of a, min-row-index of b) merges first.
// Throws std::invalid_argument when k < 1 or k > rows.
Clustering single_linkage(const BitMatrix& rows, double delta, std::size_t k);

// Labels after applying the first `merges` steps of `d`, canonically numbered.
std::vector<std::size_t> cut_labels(const Dendrogram& d, std::size_t merges);

}  // namespace bcp
