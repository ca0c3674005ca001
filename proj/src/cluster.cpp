#include "bcp/cluster.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bcp {

double binary_euclidean(BitSpan p, BitSpan q, double delta) {
    if (p.len != q.len) throw std::invalid_argument("bit vectors differ in length");
    return 2.0 * delta * std::sqrt(static_cast<double>(hamming(p, q)));
}

namespace {

struct Nearest {
    std::uint32_t dist = std::numeric_limits<std::uint32_t>::max();
    std::size_t slot = 0;  // meaningful only when dist != max
};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

}  // namespace

Clustering single_linkage(const BitMatrix& rows, double delta, std::size_t k) {
    const std::size_t n = rows.rows();
    if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, number of rows]");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");

    // Slot s holds the cluster whose smallest row index is s. Distances are
    // Hamming counts; the Euclidean height is monotone in them.
    std::vector<std::uint32_t> dist(n * n, 0);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y)
            dist[x * n + y] = dist[y * n + x] = static_cast<std::uint32_t>(hamming(rows.row(x), rows.row(y)));

    std::vector<bool> active(n, true);
    std::vector<std::size_t> cluster_id(n), cluster_size(n, 1);
    std::iota(cluster_id.begin(), cluster_id.end(), std::size_t{0});
    std::vector<Nearest> best(n);

    auto recompute = [&](std::size_t x) {
        Nearest nb;
        for (std::size_t y = x + 1; y < n; ++y)
            if (active[y] && dist[x * n + y] < nb.dist) nb = {dist[x * n + y], y};
        best[x] = nb;
    };
    for (std::size_t x = 0; x < n; ++x) recompute(x);

    Clustering out;
    out.dendrogram.leaves = n;
    out.dendrogram.merges.reserve(n > 0 ? n - 1 : 0);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t x = 0; x < n; ++x)
            if (active[x] && best[x].dist != kNone && (a == n || best[x].dist < best[a].dist)) a = x;
        const std::size_t b = best[a].slot;
        const std::uint32_t h = best[a].dist;

        out.dendrogram.merges.push_back({cluster_id[a], cluster_id[b],
                                         2.0 * delta * std::sqrt(static_cast<double>(h)),
                                         cluster_size[a] + cluster_size[b]});
        cluster_id[a] = n + step;
        cluster_size[a] += cluster_size[b];
        active[b] = false;

        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a) continue;
            const std::uint32_t merged = std::min(dist[a * n + x], dist[b * n + x]);
            dist[a * n + x] = dist[x * n + a] = merged;
        }
        recompute(a);
        for (std::size_t x = 0; x < b; ++x) {
            if (!active[x] || x == a) continue;
            if (best[x].dist != kNone && best[x].slot == b) {
                recompute(x);
            } else if (x < a) {
                const std::uint32_t d = dist[x * n + a];
                if (d < best[x].dist || (d == best[x].dist && a < best[x].slot)) best[x] = {d, a};
            }
        }
    }

    out.labels = cut_labels(out.dendrogram, n - k);
    return out;
}

std::vector<std::size_t> cut_labels(const Dendrogram& d, std::size_t merges) {
    const std::size_t n = d.leaves;
    if (merges > d.merges.size()) throw std::invalid_argument("cut exceeds the number of merges");
    std::vector<std::size_t> parent(n + merges);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t t = 0; t < merges; ++t) {
        parent[d.merges[t].a] = n + t;
        parent[d.merges[t].b] = n + t;
    }
    auto root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> label_of(n + merges, std::numeric_limits<std::size_t>::max());
    std::size_t next = 0;
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t r = root(leaf);
        if (label_of[r] == std::numeric_limits<std::size_t>::max()) label_of[r] = next++;
        labels[leaf] = label_of[r];
    }
    return labels;
}

}  // namespace bcp
