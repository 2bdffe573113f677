#pragma once

#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "lingphy/tree.hpp"

namespace lingphy {

// Exhaustive enumeration is capped here: beyond 9 taxa the rooted topology
// count (2n-3)!! outgrows exhaustive scoring.
inline constexpr int kEnumerationCap = 9;

// Number of rooted binary leaf-labeled topologies: (2n-3)!!.
inline std::uint64_t tree_count(int n_taxa) {
    if (n_taxa < 2)
        throw std::invalid_argument("tree_count requires at least 2 taxa");
    std::uint64_t count = 1;
    for (int k = 3; k <= n_taxa; ++k) {
        std::uint64_t factor = 2 * static_cast<std::uint64_t>(k) - 3;
        if (count > UINT64_MAX / factor)
            throw std::overflow_error("tree_count overflows 64 bits");
        count *= factor;
    }
    return count;
}

// Rooted binary topology with the given enumeration index, built by stepwise
// leaf addition: the k-th leaf can attach above any of the 2k-3 existing
// nodes or above the root, giving a mixed-radix code that addresses every
// topology exactly once.
inline PhyloTree nth_rooted_tree(const std::vector<std::string>& taxa, std::uint64_t index) {
    int n = static_cast<int>(taxa.size());
    if (n < 2) throw std::invalid_argument("enumeration requires at least 2 taxa");

    PhyloTree t;
    int root = t.add_node(-1);
    t.add_node(root, taxa[0]);
    t.add_node(root, taxa[1]);

    for (int k = 2; k < n; ++k) {
        std::uint64_t radix = 2 * static_cast<std::uint64_t>(k) - 1;
        std::uint64_t pos = index % radix;
        index /= radix;
        if (pos + 1 == radix) {
            // new root above the old one
            int old_root = t.root();
            int new_root = t.add_node(-1);
            t.node(old_root).parent = new_root;
            t.node(new_root).children.push_back(old_root);
            t.add_node(new_root, taxa[k]);
            t.set_root(new_root);
        } else {
            // subdivide the edge above the pos-th non-root node in preorder
            auto order = t.preorder();
            int v = -1;
            std::uint64_t seen = 0;
            for (int u : order) {
                if (u == t.root()) continue;
                if (seen++ == pos) { v = u; break; }
            }
            int parent = t.node(v).parent;
            int mid = t.add_node(parent);
            t.node(parent).children.pop_back(); // take mid out of the appended slot
            for (int& c : t.node(parent).children)
                if (c == v) c = mid;
            t.node(v).parent = mid;
            t.node(mid).children.push_back(v);
            t.add_node(mid, taxa[k]);
        }
    }
    if (index != 0)
        throw std::out_of_range("tree index out of range");
    return t;
}

// Lazy, index-addressable sequence of all rooted binary topologies on the
// given taxa, in deterministic order. Random access allows consumers to
// partition the index range.
class RootedTreeEnumeration {
public:
    explicit RootedTreeEnumeration(std::vector<std::string> taxa)
        : taxa_(std::move(taxa)) {
        int n = static_cast<int>(taxa_.size());
        if (n < 2)
            throw std::invalid_argument("enumeration requires at least 2 taxa");
        if (n > kEnumerationCap)
            throw CapabilityError("enumeration capped at " + std::to_string(kEnumerationCap) +
                                  " taxa, got " + std::to_string(n));
        for (const auto& name : taxa_) require_valid_taxon_name(name);
        count_ = tree_count(n);
    }

    std::uint64_t size() const { return count_; }
    const std::vector<std::string>& taxa() const { return taxa_; }

    PhyloTree operator[](std::uint64_t index) const {
        if (index >= count_) throw std::out_of_range("tree index out of range");
        return nth_rooted_tree(taxa_, index);
    }

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = PhyloTree;
        using difference_type = std::ptrdiff_t;

        iterator(const RootedTreeEnumeration* seq, std::uint64_t i) : seq_(seq), i_(i) {}
        PhyloTree operator*() const { return (*seq_)[i_]; }
        iterator& operator++() { ++i_; return *this; }
        iterator operator++(int) { iterator copy = *this; ++i_; return copy; }
        bool operator==(const iterator& o) const { return i_ == o.i_; }
        bool operator!=(const iterator& o) const { return i_ != o.i_; }
        std::uint64_t index() const { return i_; }

    private:
        const RootedTreeEnumeration* seq_;
        std::uint64_t i_;
    };

    iterator begin() const { return iterator(this, 0); }
    iterator end() const { return iterator(this, count_); }

private:
    std::vector<std::string> taxa_;
    std::uint64_t count_ = 0;
};

inline RootedTreeEnumeration enumerate_rooted_trees(std::vector<std::string> taxa) {
    return RootedTreeEnumeration(std::move(taxa));
}

} // namespace lingphy
