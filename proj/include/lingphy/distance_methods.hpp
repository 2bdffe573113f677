#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "lingphy/dataio.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

namespace detail {

// Active cluster during agglomeration. `rep` is the smallest taxon name in
// the cluster and drives deterministic tie-breaking.
struct Cluster {
    int node;
    int size;
    double height;
    std::string rep;
};

inline bool pair_key_less(const Cluster& a1, const Cluster& b1,
                          const Cluster& a2, const Cluster& b2) {
    auto key = [](const Cluster& x, const Cluster& y) {
        return std::pair<const std::string&, const std::string&>(
            std::min(x.rep, y.rep), std::max(x.rep, y.rep));
    };
    return key(a1, b1) < key(a2, b2);
}

} // namespace detail

// Unweighted pair-group clustering: repeatedly merge the two closest
// clusters at height d/2, with cluster-to-cluster distance the arithmetic
// mean over all cross pairs. Output is rooted and ultrametric; branch length
// = parent height - child height. Ties go to the lexicographically smallest
// taxon pair.
inline PhyloTree upgma(const DistanceMatrix& dm) {
    std::size_t n = dm.size();
    PhyloTree t;
    // nodes are created children-first; parents link up afterwards
    std::vector<detail::Cluster> active;
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = dm.at(i, j);

    struct Pending {
        std::string name;
        int parent = -1;
        std::optional<double> length;
        std::vector<int> children; // indices into pending
    };
    std::vector<Pending> pending(n);
    for (std::size_t i = 0; i < n; ++i) {
        pending[i].name = dm.taxa()[i];
        active.push_back({static_cast<int>(i), 1, 0.0, dm.taxa()[i]});
    }

    auto dist_index = [&](int a, int b) -> double& { return d[a][b]; };

    std::vector<int> live;
    for (std::size_t i = 0; i < n; ++i) live.push_back(static_cast<int>(i));

    while (live.size() > 1) {
        int bi = -1, bj = -1;
        for (std::size_t x = 0; x < live.size(); ++x)
            for (std::size_t y = x + 1; y < live.size(); ++y) {
                int i = live[x], j = live[y];
                if (bi < 0) { bi = i; bj = j; continue; }
                double cur = dist_index(i, j), best = dist_index(bi, bj);
                if (cur < best ||
                    (cur == best &&
                     detail::pair_key_less(active[i], active[j], active[bi], active[bj]))) {
                    bi = i;
                    bj = j;
                }
            }
        double h = dist_index(bi, bj) / 2.0;
        int u = static_cast<int>(pending.size());
        pending.push_back({});
        // canonical child order falls out of serialization; keep merge order here
        pending[u].children = {bi, bj};
        pending[bi].parent = u;
        pending[bj].parent = u;
        pending[bi].length = h - active[bi].height;
        pending[bj].length = h - active[bj].height;

        int si = active[bi].size, sj = active[bj].size;
        d.emplace_back(pending.size(), 0.0);
        for (auto& row : d) row.resize(pending.size(), 0.0);
        for (int k : live) {
            if (k == bi || k == bj) continue;
            double mean = (si * dist_index(bi, k) + sj * dist_index(bj, k)) / (si + sj);
            d[u][k] = d[k][u] = mean;
        }
        active.push_back({u, si + sj, h, std::min(active[bi].rep, active[bj].rep)});
        live.erase(std::remove(live.begin(), live.end(), bi), live.end());
        live.erase(std::remove(live.begin(), live.end(), bj), live.end());
        live.push_back(u);
    }

    // materialize the pending structure into a PhyloTree, root first
    std::vector<int> map(pending.size(), -1);
    int root_pending = live.front();
    std::vector<int> stack{root_pending};
    while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        int parent_node = pending[p].parent < 0 ? -1 : map[pending[p].parent];
        map[p] = t.add_node(parent_node, pending[p].name, pending[p].length);
        for (int c : pending[p].children) stack.push_back(c);
    }
    t.validate();
    return t;
}

// Saitou-Nei neighbor joining: join the pair minimizing
// Q(i,j) = (r-2) d(i,j) - S(i) - S(j), limb lengths by the standard formula,
// reduction d(u,k) = (d(i,k)+d(j,k)-d(i,j))/2. Returns an unrooted tree
// (hub of degree 3); negative limb lengths are kept as computed.
inline PhyloTree neighbor_joining(const DistanceMatrix& dm) {
    std::size_t n = dm.size();
    if (n < 3) throw std::invalid_argument("neighbor joining requires at least 3 taxa");

    struct Pending {
        std::string name;
        std::vector<std::pair<int, double>> children; // (pending index, limb length)
    };
    std::vector<Pending> pending(n);
    std::vector<detail::Cluster> meta;
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        pending[i].name = dm.taxa()[i];
        meta.push_back({static_cast<int>(i), 1, 0.0, dm.taxa()[i]});
        for (std::size_t j = 0; j < n; ++j) d[i][j] = dm.at(i, j);
    }
    std::vector<int> live;
    for (std::size_t i = 0; i < n; ++i) live.push_back(static_cast<int>(i));

    while (live.size() > 3) {
        std::size_t r = live.size();
        std::vector<double> rowsum(pending.size(), 0.0);
        for (int i : live)
            for (int k : live)
                if (k != i) rowsum[i] += d[i][k];
        int bi = -1, bj = -1;
        double bq = 0.0;
        for (std::size_t x = 0; x < live.size(); ++x)
            for (std::size_t y = x + 1; y < live.size(); ++y) {
                int i = live[x], j = live[y];
                double q = (static_cast<double>(r) - 2.0) * d[i][j] - rowsum[i] - rowsum[j];
                if (bi < 0 || q < bq ||
                    (q == bq && detail::pair_key_less(meta[i], meta[j], meta[bi], meta[bj]))) {
                    bi = i;
                    bj = j;
                    bq = q;
                }
            }
        double dij = d[bi][bj];
        double li = dij / 2.0 + (rowsum[bi] - rowsum[bj]) / (2.0 * (static_cast<double>(r) - 2.0));
        double lj = dij - li;
        int u = static_cast<int>(pending.size());
        pending.push_back({});
        pending[u].children = {{bi, li}, {bj, lj}};
        d.emplace_back(pending.size(), 0.0);
        for (auto& row : d) row.resize(pending.size(), 0.0);
        for (int k : live) {
            if (k == bi || k == bj) continue;
            double v = (d[bi][k] + d[bj][k] - dij) / 2.0;
            d[u][k] = d[k][u] = v;
        }
        meta.push_back({u, meta[bi].size + meta[bj].size, 0.0,
                        std::min(meta[bi].rep, meta[bj].rep)});
        live.erase(std::remove(live.begin(), live.end(), bi), live.end());
        live.erase(std::remove(live.begin(), live.end(), bj), live.end());
        live.push_back(u);
    }

    // final three joined at one hub; closed-form limb lengths
    std::sort(live.begin(), live.end(),
              [&](int a, int b) { return meta[a].rep < meta[b].rep; });
    int a = live[0], b = live[1], c = live[2];
    double la = (d[a][b] + d[a][c] - d[b][c]) / 2.0;
    double lb = (d[a][b] + d[b][c] - d[a][c]) / 2.0;
    double lc = (d[a][c] + d[b][c] - d[a][b]) / 2.0;
    int hub = static_cast<int>(pending.size());
    pending.push_back({});
    pending[hub].children = {{a, la}, {b, lb}, {c, lc}};

    PhyloTree t;
    struct Frame { int pending_index; int parent_node; std::optional<double> length; };
    std::vector<Frame> stack{{hub, -1, std::nullopt}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        int idx = t.add_node(f.parent_node, pending[f.pending_index].name, f.length);
        for (const auto& [child, len] : pending[f.pending_index].children)
            stack.push_back({child, idx, len});
    }
    t.set_rooted(false);
    t.validate();
    return t;
}

} // namespace lingphy
