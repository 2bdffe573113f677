#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lingphy/dataio.hpp"
#include "lingphy/enumerate.hpp"
#include "lingphy/newick.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

enum class ParsimonyKind { wagner, camin_sokal, dollo, compatibility };

inline const char* to_string(ParsimonyKind k) {
    switch (k) {
    case ParsimonyKind::wagner: return "wagner";
    case ParsimonyKind::camin_sokal: return "camin-sokal";
    case ParsimonyKind::dollo: return "dollo";
    case ParsimonyKind::compatibility: return "compatibility";
    }
    return "?";
}

namespace detail {

inline constexpr int kInfCost = 1 << 20;

// Per-leaf allowed-state bitmask for every binary character:
// bit 0 = state 0 allowed, bit 1 = state 1 allowed; '?' allows both.
struct BinaryColumns {
    std::size_t n_chars = 0;
    std::vector<std::vector<std::uint8_t>> masks; // [character][taxon row]

    static BinaryColumns from(const CharacterMatrix& m, bool reject_polymorphic) {
        BinaryColumns out;
        out.n_chars = m.character_count();
        out.masks.assign(out.n_chars, std::vector<std::uint8_t>(m.taxon_count(), 3));
        for (std::size_t j = 0; j < m.character_count(); ++j)
            for (std::size_t i = 0; i < m.taxon_count(); ++i) {
                const auto& cell = m.cell(i, j);
                if (cell.is_missing()) continue; // wildcard
                std::uint8_t mask = 0;
                for (int s : cell.states) {
                    if (s != 0 && s != 1)
                        throw std::invalid_argument("parsimony scoring requires a binary matrix");
                    mask |= static_cast<std::uint8_t>(1 << s);
                }
                if (reject_polymorphic && cell.is_polymorphic())
                    throw std::invalid_argument(
                        "polymorphic cells are not supported under this parsimony (taxon " +
                        m.taxa()[i] + ", character " + m.character_names()[j] + ")");
                out.masks[j][i] = mask;
            }
        return out;
    }
};

// Tree traversal order plus node -> matrix-row mapping, built once per tree.
struct ScoringIndex {
    std::vector<int> postorder;
    std::vector<int> row; // -1 for internal nodes
    int root;

    ScoringIndex(const PhyloTree& t, const CharacterMatrix& m) {
        postorder = t.postorder();
        root = t.root();
        row.assign(t.node_count(), -1);
        std::size_t leaves = 0;
        for (int v = 0; v < t.node_count(); ++v) {
            if (!t.is_leaf(v)) continue;
            row[v] = m.index_of(t.node(v).name); // throws on unknown taxon
            ++leaves;
        }
        if (leaves != m.taxon_count())
            throw std::invalid_argument("tree and matrix taxa differ");
    }
};

// Minimum number of state changes under free reversibility (two-state
// Sankoff; equals the Fitch count on binary trees, exact for any degree).
inline int wagner_column(const PhyloTree& t, const ScoringIndex& ix,
                         const std::vector<std::uint8_t>& mask) {
    std::vector<std::array<int, 2>> cost(t.node_count());
    for (int v : ix.postorder) {
        if (t.is_leaf(v)) {
            std::uint8_t m = mask[ix.row[v]];
            cost[v] = {(m & 1) ? 0 : kInfCost, (m & 2) ? 0 : kInfCost};
        } else {
            cost[v] = {0, 0};
            for (int c : t.node(v).children) {
                cost[v][0] += std::min(cost[c][0], cost[c][1] + 1);
                cost[v][1] += std::min(cost[c][1], cost[c][0] + 1);
            }
        }
    }
    return std::min(cost[ix.root][0], cost[ix.root][1]);
}

// Irreversible 0->1 changes, ancestral state 0 above the root: a change on
// the root's stem edge is allowed and counts. ones_ok = every determinate
// leaf below can carry state 1.
inline int camin_sokal_column(const PhyloTree& t, const ScoringIndex& ix,
                              const std::vector<std::uint8_t>& mask) {
    std::vector<char> ones_ok(t.node_count(), 1);
    std::vector<int> cost0(t.node_count(), 0);
    for (int v : ix.postorder) {
        if (t.is_leaf(v)) {
            std::uint8_t m = mask[ix.row[v]];
            ones_ok[v] = (m & 2) ? 1 : 0;
            cost0[v] = (m & 1) ? 0 : kInfCost;
        } else {
            for (int c : t.node(v).children) {
                ones_ok[v] = ones_ok[v] && ones_ok[c];
                cost0[v] += std::min(cost0[c], ones_ok[c] ? 1 : kInfCost);
                cost0[v] = std::min(cost0[v], kInfCost);
            }
        }
    }
    return std::min(cost0[ix.root], ones_ok[ix.root] ? 1 : kInfCost);
}

// Single 0->1 gain at the last common ancestor of the determinate 1-leaves
// (possibly on the root's stem), plus the minimum number of 1->0 losses
// below it.
inline int dollo_column(const PhyloTree& t, const ScoringIndex& ix,
                        const std::vector<std::uint8_t>& mask) {
    std::vector<int> det_ones;
    for (int v : ix.postorder)
        if (t.is_leaf(v) && mask[ix.row[v]] == 2) det_ones.push_back(v);
    if (det_ones.empty()) return 0;

    std::vector<int> depth(t.node_count(), 0);
    for (int v : t.preorder())
        if (v != ix.root) depth[v] = depth[t.node(v).parent] + 1;
    auto lca = [&](int a, int b) {
        while (a != b) {
            if (depth[a] < depth[b]) b = t.node(b).parent;
            else a = t.node(a).parent;
        }
        return a;
    };
    int gain = det_ones.front();
    for (int v : det_ones) gain = lca(gain, v);

    // zeros_ok = subtree contains no determinate 1-leaf; cost1 = losses
    // needed inside the subtree if its root keeps state 1
    std::vector<char> zeros_ok(t.node_count(), 1);
    std::vector<int> cost1(t.node_count(), 0);
    for (int v : ix.postorder) {
        if (t.is_leaf(v)) {
            std::uint8_t m = mask[ix.row[v]];
            zeros_ok[v] = (m & 1) ? 1 : 0;
            cost1[v] = (m & 2) ? 0 : kInfCost;
        } else {
            for (int c : t.node(v).children) {
                zeros_ok[v] = zeros_ok[v] && zeros_ok[c];
                cost1[v] += std::min(cost1[c], zeros_ok[c] ? 1 : kInfCost);
                cost1[v] = std::min(cost1[v], kInfCost);
            }
        }
    }
    return 1 + cost1[gain];
}

inline void require_rooted(const PhyloTree& t, const char* kind) {
    if (!t.rooted())
        throw std::invalid_argument(std::string(kind) + " parsimony requires a rooted tree");
}

} // namespace detail

// Per-character score breakdown; the total score is its sum.
inline std::vector<int> parsimony_character_scores(ParsimonyKind kind, const PhyloTree& t,
                                                   const CharacterMatrix& m) {
    bool reject_poly = kind == ParsimonyKind::camin_sokal || kind == ParsimonyKind::dollo;
    if (reject_poly) detail::require_rooted(t, to_string(kind));
    auto cols = detail::BinaryColumns::from(m, reject_poly);
    detail::ScoringIndex ix(t, m);
    std::vector<int> out(cols.n_chars, 0);
    for (std::size_t j = 0; j < cols.n_chars; ++j) {
        switch (kind) {
        case ParsimonyKind::wagner:
            out[j] = detail::wagner_column(t, ix, cols.masks[j]);
            break;
        case ParsimonyKind::camin_sokal:
            out[j] = detail::camin_sokal_column(t, ix, cols.masks[j]);
            break;
        case ParsimonyKind::dollo:
            out[j] = detail::dollo_column(t, ix, cols.masks[j]);
            break;
        case ParsimonyKind::compatibility:
            out[j] = detail::wagner_column(t, ix, cols.masks[j]) <= 1 ? 1 : 0;
            break;
        }
    }
    return out;
}

inline long long parsimony_score(ParsimonyKind kind, const PhyloTree& t,
                                 const CharacterMatrix& m) {
    long long total = 0;
    for (int s : parsimony_character_scores(kind, t, m)) total += s;
    return total;
}

inline long long wagner_score(const PhyloTree& t, const CharacterMatrix& m) {
    return parsimony_score(ParsimonyKind::wagner, t, m);
}
inline long long camin_sokal_score(const PhyloTree& t, const CharacterMatrix& m) {
    return parsimony_score(ParsimonyKind::camin_sokal, t, m);
}
inline long long dollo_score(const PhyloTree& t, const CharacterMatrix& m) {
    return parsimony_score(ParsimonyKind::dollo, t, m);
}
// Number of characters evolvable with at most one change on the tree.
inline long long compatibility_score(const PhyloTree& t, const CharacterMatrix& m) {
    return parsimony_score(ParsimonyKind::compatibility, t, m);
}
// Historical scoring criterion for the South-Central Dravidian data; its
// assumptions coincide with irreversible-change parsimony, so this is an
// alias kept for report labeling.
inline long long krishnamurti_score(const PhyloTree& t, const CharacterMatrix& m) {
    return parsimony_score(ParsimonyKind::camin_sokal, t, m);
}

struct SearchOptions {
    bool keep_table = false; // retain (tree, score) for every topology
    int threads = 1;
};

struct SearchResult {
    ParsimonyKind kind{};
    long long best = 0;
    std::vector<std::string> optima;          // canonical rooted newicks
    std::vector<std::string> optima_unrooted; // deduped classes (root-invariant kinds)
    std::vector<std::vector<int>> per_character; // breakdown per optimum
    std::optional<std::vector<std::pair<std::string, long long>>> table;
};

// Scores every rooted binary topology; minimizes changes (maximizes for
// compatibility) and retains all co-optimal trees. Deterministic for any
// thread count: ranges are merged in index order.
inline SearchResult exhaustive_search(ParsimonyKind kind, const CharacterMatrix& m,
                                      const SearchOptions& opts = {}) {
    RootedTreeEnumeration seq(m.taxa());
    bool maximize = kind == ParsimonyKind::compatibility;
    std::uint64_t count = seq.size();
    int threads = std::max(1, opts.threads);
    if (static_cast<std::uint64_t>(threads) > count) threads = static_cast<int>(count);

    struct Local {
        long long best;
        std::vector<std::uint64_t> optima;
        std::vector<std::pair<std::string, long long>> table;
    };
    std::vector<Local> locals(threads);
    auto run_range = [&](int who, std::uint64_t lo, std::uint64_t hi) {
        Local& L = locals[who];
        L.best = 0;
        bool first = true;
        for (std::uint64_t i = lo; i < hi; ++i) {
            PhyloTree t = seq[i];
            long long s = parsimony_score(kind, t, m);
            if (opts.keep_table) L.table.emplace_back(write_newick(t, false), s);
            bool better = first || (maximize ? s > L.best : s < L.best);
            if (better) {
                L.best = s;
                L.optima.clear();
                first = false;
            }
            if (s == L.best) L.optima.push_back(i);
        }
    };

    if (threads == 1) {
        run_range(0, 0, count);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (count + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            std::uint64_t lo = chunk * w, hi = std::min(count, chunk * (w + 1));
            pool.emplace_back(run_range, w, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    SearchResult res;
    res.kind = kind;
    bool first = true;
    for (const Local& L : locals) {
        if (L.optima.empty()) continue;
        if (first || (maximize ? L.best > res.best : L.best < res.best)) {
            res.best = L.best;
            first = false;
        }
    }
    for (const Local& L : locals) {
        if (L.optima.empty() || L.best != res.best) continue;
        for (std::uint64_t i : L.optima) {
            PhyloTree t = seq[i];
            res.optima.push_back(write_newick(t, false));
            res.per_character.push_back(parsimony_character_scores(kind, t, m));
        }
    }
    if (opts.keep_table) {
        res.table.emplace();
        for (Local& L : locals)
            for (auto& row : L.table) res.table->push_back(std::move(row));
    }
    if (kind == ParsimonyKind::wagner || kind == ParsimonyKind::compatibility) {
        std::set<std::string> seen;
        for (const auto& nwk : res.optima) {
            std::string u = write_newick(unroot(parse_newick(nwk)), false);
            if (seen.insert(u).second) res.optima_unrooted.push_back(u);
        }
    }
    return res;
}

// Full exhaustive score table, sorted (ascending by score; descending for
// compatibility), ties in canonical-newick order. top_k = 0 keeps all.
inline std::vector<std::pair<std::string, long long>>
rank_trees(ParsimonyKind kind, const CharacterMatrix& m, std::size_t top_k,
           const SearchOptions& opts = {}) {
    SearchOptions with_table = opts;
    with_table.keep_table = true;
    auto res = exhaustive_search(kind, m, with_table);
    auto table = std::move(*res.table);
    bool maximize = kind == ParsimonyKind::compatibility;
    std::sort(table.begin(), table.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return maximize ? a.second > b.second : a.second < b.second;
        return a.first < b.first;
    });
    if (top_k > 0 && table.size() > top_k) table.resize(top_k);
    return table;
}

} // namespace lingphy
