#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lingphy/common.hpp"

namespace lingphy {

// Sorted, duplicate-free list of taxon names. Used both for whole taxon sets
// and for the canonical block of a bipartition / the leaf set of a clade.
using TaxonSet = std::vector<std::string>;
using Split = TaxonSet; // canonical block: the side not containing the smallest taxon
using Clade = TaxonSet;

struct TreeNode {
    int parent = -1;
    std::vector<int> children;
    std::string name;                 // taxon name; empty for internal nodes
    std::optional<double> length;     // length of the edge above this node
    std::optional<std::string> label; // internal-node annotation (e.g. consensus support)

    bool is_leaf() const { return children.empty(); }
};

// Leaf-labeled tree, rooted or unrooted. An unrooted tree is stored with an
// arbitrary internal node acting as a hub of degree >= 3 and rooted() false.
// All algorithms treat trees as immutable values; "mutating" operations
// return fresh trees.
class PhyloTree {
public:
    PhyloTree() = default;

    static PhyloTree single_leaf(const std::string& name) {
        require_valid_taxon_name(name);
        PhyloTree t;
        t.nodes_.push_back(TreeNode{});
        t.nodes_[0].name = name;
        t.root_ = 0;
        return t;
    }

    // Building API: returns the index of the new node.
    int add_node(int parent, std::string name = "", std::optional<double> length = std::nullopt) {
        int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{});
        nodes_[idx].parent = parent;
        nodes_[idx].name = std::move(name);
        nodes_[idx].length = length;
        if (parent >= 0) {
            nodes_[parent].children.push_back(idx);
        } else {
            root_ = idx;
        }
        return idx;
    }

    int root() const { return root_; }
    void set_root(int r) { root_ = r; }
    bool rooted() const { return rooted_; }
    void set_rooted(bool r) { rooted_ = r; }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int i) const { return nodes_[i]; }
    TreeNode& node(int i) { return nodes_[i]; }

    bool is_leaf(int i) const { return nodes_[i].is_leaf(); }

    int leaf_count() const {
        int n = 0;
        for (const auto& nd : nodes_) n += nd.is_leaf() ? 1 : 0;
        return n;
    }

    std::vector<int> leaves() const {
        std::vector<int> out;
        for (int i = 0; i < node_count(); ++i)
            if (nodes_[i].is_leaf()) out.push_back(i);
        return out;
    }

    TaxonSet taxa() const {
        TaxonSet out;
        for (const auto& nd : nodes_)
            if (nd.is_leaf()) out.push_back(nd.name);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<int> postorder() const {
        std::vector<int> order, stack{root_};
        order.reserve(nodes_.size());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (int c : nodes_[v].children) stack.push_back(c);
        }
        std::reverse(order.begin(), order.end());
        return order;
    }

    std::vector<int> preorder() const {
        std::vector<int> order;
        order.reserve(nodes_.size());
        preorder_into(root_, order);
        return order;
    }

    bool is_binary() const {
        for (int i = 0; i < node_count(); ++i) {
            const auto& nd = nodes_[i];
            if (nd.is_leaf()) continue;
            std::size_t want = (i == root_) ? (rooted_ ? 2 : 3) : 2;
            if (nd.children.size() != want) return false;
        }
        return true;
    }

    bool has_lengths() const {
        for (int i = 0; i < node_count(); ++i)
            if (i != root_ && !nodes_[i].length) return false;
        return true;
    }

    bool has_negative_lengths() const {
        for (const auto& nd : nodes_)
            if (nd.length && *nd.length < 0) return true;
        return false;
    }

    // Structural invariants: one root, consistent parent/child links, unique
    // valid leaf names, finite lengths.
    void validate() const {
        if (nodes_.empty() || root_ < 0 || root_ >= node_count())
            throw std::invalid_argument("tree has no root");
        if (nodes_[root_].parent != -1)
            throw std::invalid_argument("root has a parent");
        std::vector<char> seen(nodes_.size(), 0);
        std::set<std::string> names;
        for (int v : preorder()) {
            if (seen[v]) throw std::invalid_argument("cycle in tree");
            seen[v] = 1;
            const auto& nd = nodes_[v];
            for (int c : nd.children)
                if (nodes_[c].parent != v)
                    throw std::invalid_argument("parent/child link mismatch");
            if (nd.is_leaf()) {
                require_valid_taxon_name(nd.name);
                if (!names.insert(nd.name).second)
                    throw std::invalid_argument("duplicate leaf label: " + nd.name);
            }
            if (nd.length && !std::isfinite(*nd.length))
                throw std::invalid_argument("non-finite branch length");
        }
        for (char s : seen)
            if (!s) throw std::invalid_argument("disconnected node in tree");
    }

private:
    void preorder_into(int v, std::vector<int>& order) const {
        order.push_back(v);
        for (int c : nodes_[v].children) preorder_into(c, order);
    }

    std::vector<TreeNode> nodes_;
    int root_ = -1;
    bool rooted_ = true;
};

namespace detail {

// Smallest taxon name under each node; drives the canonical child ordering.
inline std::vector<std::string> min_taxon_map(const PhyloTree& t) {
    std::vector<std::string> mt(t.node_count());
    for (int v : t.postorder()) {
        const auto& nd = t.node(v);
        if (nd.is_leaf()) {
            mt[v] = nd.name;
        } else {
            mt[v] = mt[nd.children.front()];
            for (int c : nd.children)
                if (mt[c] < mt[v]) mt[v] = mt[c];
        }
    }
    return mt;
}

inline std::vector<int> canonical_children(const PhyloTree& t, int v,
                                           const std::vector<std::string>& mintax) {
    std::vector<int> cs = t.node(v).children;
    std::sort(cs.begin(), cs.end(),
              [&](int a, int b) { return mintax[a] < mintax[b]; });
    return cs;
}

inline std::vector<TaxonSet> subtree_leafsets(const PhyloTree& t) {
    std::vector<TaxonSet> ls(t.node_count());
    for (int v : t.postorder()) {
        const auto& nd = t.node(v);
        if (nd.is_leaf()) {
            ls[v] = {nd.name};
        } else {
            TaxonSet merged;
            for (int c : nd.children) {
                TaxonSet next;
                std::merge(merged.begin(), merged.end(), ls[c].begin(), ls[c].end(),
                           std::back_inserter(next));
                merged.swap(next);
            }
            ls[v] = std::move(merged);
        }
    }
    return ls;
}

inline TaxonSet set_difference(const TaxonSet& all, const TaxonSet& block) {
    TaxonSet out;
    std::set_difference(all.begin(), all.end(), block.begin(), block.end(),
                        std::back_inserter(out));
    return out;
}

// Undirected view of a tree with the root edge suppressed, used for
// re-rooting and unrooting.
struct UndirectedView {
    struct Arc {
        int to;
        std::optional<double> length;
    };
    std::vector<std::string> names; // leaf names, empty for internal
    std::vector<std::vector<Arc>> adj;

    explicit UndirectedView(const PhyloTree& t) {
        names.resize(t.node_count());
        adj.resize(t.node_count());
        for (int v = 0; v < t.node_count(); ++v)
            names[v] = t.node(v).name;
        int root = t.root();
        bool suppress_root = t.node(root).children.size() == 2;
        for (int v = 0; v < t.node_count(); ++v) {
            int p = t.node(v).parent;
            if (p < 0) continue;
            if (suppress_root && p == root) continue;
            link(v, p, t.node(v).length);
        }
        if (suppress_root) {
            int a = t.node(root).children[0];
            int b = t.node(root).children[1];
            std::optional<double> merged;
            const auto &la = t.node(a).length, &lb = t.node(b).length;
            if (la && lb) merged = *la + *lb;
            else if (la) merged = la;
            else if (lb) merged = lb;
            link(a, b, merged);
        }
    }

    void link(int a, int b, std::optional<double> length) {
        adj[a].push_back({b, length});
        adj[b].push_back({a, length});
    }

    // Rebuild a rooted structure starting from `start`, entering via `from`
    // (or -1 to make `start` the root).
    void build(int start, int from, PhyloTree& out, int out_parent,
               std::optional<double> in_length) const {
        int idx = out_parent < 0 ? out.add_node(-1, names[start])
                                 : out.add_node(out_parent, names[start], in_length);
        for (const Arc& arc : adj[start])
            if (arc.to != from) build(arc.to, start, out, idx, arc.length);
    }

    int find_leaf(const std::string& name) const {
        for (int v = 0; v < static_cast<int>(adj.size()); ++v)
            if (adj[v].size() == 1 && names[v] == name) return v;
        return -1;
    }
};

} // namespace detail

// All internal bipartitions of the unrooted version of the tree, canonical
// block = side not containing the smallest taxon; trivial splits excluded.
inline std::set<Split> splits_of(const PhyloTree& t) {
    TaxonSet all = t.taxa();
    std::size_t n = all.size();
    std::set<Split> out;
    if (n < 4) return out; // no non-trivial splits possible
    auto leafsets = detail::subtree_leafsets(t);
    const std::string& smallest = all.front();
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        const TaxonSet& block = leafsets[v];
        if (block.size() < 2 || block.size() > n - 2) continue;
        bool has_smallest = std::binary_search(block.begin(), block.end(), smallest);
        out.insert(has_smallest ? detail::set_difference(all, block) : block);
    }
    return out;
}

// Leaf sets of internal non-root nodes of a rooted tree.
inline std::set<Clade> clades_of(const PhyloTree& t) {
    if (!t.rooted())
        throw std::invalid_argument("clades are defined for rooted trees only");
    std::set<Clade> out;
    auto leafsets = detail::subtree_leafsets(t);
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root() || t.is_leaf(v)) continue;
        out.insert(leafsets[v]);
    }
    return out;
}

enum class RfMode { rooted, unrooted };

// Robinson-Foulds distance: symmetric difference of non-trivial split sets
// (unrooted mode) or of non-root clade sets (rooted mode).
inline int rf_distance(const PhyloTree& a, const PhyloTree& b, RfMode mode) {
    if (a.taxa() != b.taxa())
        throw std::invalid_argument("rf_distance: taxon sets differ");
    auto sym_diff_size = [](const std::set<TaxonSet>& x, const std::set<TaxonSet>& y) {
        std::vector<TaxonSet> diff;
        std::set_symmetric_difference(x.begin(), x.end(), y.begin(), y.end(),
                                      std::back_inserter(diff));
        return static_cast<int>(diff.size());
    };
    if (mode == RfMode::unrooted) return sym_diff_size(splits_of(a), splits_of(b));
    return sym_diff_size(clades_of(a), clades_of(b));
}

// Unrooted copy of a tree; the root of a rooted binary tree is suppressed and
// its two edges merged. The stored hub is canonical (the internal vertex next
// to the smallest taxon), so equal unrooted topologies serialize identically.
// Requires n >= 3 taxa.
inline PhyloTree unroot(const PhyloTree& t) {
    if (t.leaf_count() < 3)
        throw std::invalid_argument("cannot unroot a tree with fewer than 3 taxa");
    detail::UndirectedView view(t);
    int leaf = view.find_leaf(t.taxa().front());
    int hub = view.adj[leaf][0].to;
    PhyloTree out;
    view.build(hub, -1, out, -1, std::nullopt);
    out.set_rooted(false);
    return out;
}

// Root on the pendant edge of `outgroup`; its length is split evenly across
// the two root edges. Re-rooting a tree already rooted at the outgroup is the
// identity.
inline PhyloTree root_at_outgroup(const PhyloTree& t, const std::string& outgroup) {
    bool found = false;
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_leaf(v) && t.node(v).name == outgroup) found = true;
    if (!found)
        throw std::invalid_argument("outgroup \"" + outgroup + "\" is not a leaf of the tree");

    if (t.rooted()) {
        for (int c : t.node(t.root()).children)
            if (t.is_leaf(c) && t.node(c).name == outgroup) return t;
    }
    detail::UndirectedView view(t);
    int leaf = view.find_leaf(outgroup);
    const auto& arc = view.adj[leaf][0];
    std::optional<double> half;
    if (arc.length) half = *arc.length / 2.0;

    PhyloTree out;
    int root = out.add_node(-1);
    out.add_node(root, outgroup, half);
    view.build(arc.to, leaf, out, root, half);
    return out;
}

// Deterministic monospace cladogram; children in canonical order, negative
// lengths clamped to zero for display only.
inline std::string render_ascii(const PhyloTree& t) {
    auto mintax = detail::min_taxon_map(t);
    std::string out;
    auto text_of = [&](int v) {
        const auto& nd = t.node(v);
        std::string s = nd.is_leaf() ? nd.name : "*";
        if (nd.length) s += ":" + format_double(std::max(0.0, *nd.length));
        if (nd.label) s += " [" + *nd.label + "]";
        return s;
    };
    struct Frame { int node; std::string prefix; bool last; bool is_root; };
    std::vector<Frame> stack{{t.root(), "", true, true}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.is_root) {
            out += text_of(f.node) + "\n";
        } else {
            out += f.prefix + (f.last ? "`-- " : "|-- ") + text_of(f.node) + "\n";
        }
        auto cs = detail::canonical_children(t, f.node, mintax);
        std::string child_prefix =
            f.is_root ? "" : f.prefix + (f.last ? "    " : "|   ");
        for (auto it = cs.rbegin(); it != cs.rend(); ++it)
            stack.push_back({*it, child_prefix, *it == cs.back(), false});
    }
    return out;
}

} // namespace lingphy
