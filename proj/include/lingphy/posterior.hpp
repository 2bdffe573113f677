#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lingphy/newick.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

// One cold-chain draw: canonical Newick with branch lengths.
struct SampleRecord {
    long long generation = 0;
    std::string newick;
    double log_posterior = 0.0;
};

// Cold-chain samples of one analysis. Burn-in is applied by every consumer,
// so early samples can never influence estimates.
struct PosteriorSample {
    std::vector<SampleRecord> records;
    double burn_in_fraction = 0.25;

    std::size_t burn_in_count() const {
        return static_cast<std::size_t>(records.size() * burn_in_fraction);
    }

    std::span<const SampleRecord> post_burn_in() const {
        std::size_t skip = burn_in_count();
        return {records.data() + skip, records.size() - skip};
    }

    // One line per sample: generation, log posterior, Newick (tab-separated).
    void write_tsv(std::ostream& out) const {
        for (const auto& r : records)
            out << r.generation << '\t' << format_double(r.log_posterior) << '\t' << r.newick
                << '\n';
    }
};

// Frequency of every non-trivial split among post-burn-in topologies.
inline std::map<Split, double> split_frequencies(const PosteriorSample& s) {
    auto recs = s.post_burn_in();
    if (recs.empty()) throw std::invalid_argument("empty post-burn-in sample");
    std::map<std::string, std::pair<std::set<Split>, int>> by_topology;
    for (const auto& r : recs) {
        auto t = parse_newick(r.newick, Rootedness::rooted);
        auto key = write_newick(t, false);
        auto [it, fresh] = by_topology.try_emplace(key);
        if (fresh) it->second.first = splits_of(t);
        ++it->second.second;
    }
    std::map<Split, double> freq;
    for (const auto& [key, entry] : by_topology)
        for (const auto& split : entry.first)
            freq[split] += static_cast<double>(entry.second) / recs.size();
    return freq;
}

// Average deviation of split frequencies between two analyses: mean absolute
// difference over the union of splits reaching frequency >= 0.1 in at least
// one of them. Zero when no split qualifies.
inline double asdsf(const PosteriorSample& a, const PosteriorSample& b) {
    auto fa = split_frequencies(a);
    auto fb = split_frequencies(b);
    std::set<Split> pool;
    for (const auto& [s, f] : fa)
        if (f >= 0.1) pool.insert(s);
    for (const auto& [s, f] : fb)
        if (f >= 0.1) pool.insert(s);
    if (pool.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : pool) {
        auto ia = fa.find(s), ib = fb.find(s);
        double va = ia == fa.end() ? 0.0 : ia->second;
        double vb = ib == fb.end() ? 0.0 : ib->second;
        sum += std::fabs(va - vb);
    }
    return sum / static_cast<double>(pool.size());
}

// Majority-rule consensus over post-burn-in rooted samples: every clade with
// frequency > threshold is included (threshold >= 0.5 keeps them pairwise
// compatible); internal nodes carry their support as a label.
inline PhyloTree consensus_tree(const PosteriorSample& s, double threshold = 0.5) {
    if (threshold < 0.5 || threshold >= 1.0)
        throw std::invalid_argument("consensus threshold must lie in [0.5, 1)");
    auto recs = s.post_burn_in();
    if (recs.empty()) throw std::invalid_argument("empty post-burn-in sample");

    std::map<Clade, int> counts;
    TaxonSet taxa;
    for (const auto& r : recs) {
        auto t = parse_newick(r.newick, Rootedness::rooted);
        if (taxa.empty()) taxa = t.taxa();
        else if (t.taxa() != taxa)
            throw std::invalid_argument("samples mix different taxon sets");
        for (const auto& c : clades_of(t)) ++counts[c];
    }

    struct Entry {
        Clade clade;
        double support;
    };
    std::vector<Entry> included;
    for (const auto& [clade, n] : counts) {
        double f = static_cast<double>(n) / recs.size();
        if (f > threshold) included.push_back({clade, f});
    }
    std::sort(included.begin(), included.end(), [](const Entry& a, const Entry& b) {
        if (a.clade.size() != b.clade.size()) return a.clade.size() > b.clade.size();
        return a.clade < b.clade;
    });

    auto contains = [](const Clade& big, const Clade& small) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    };
    auto disjoint = [](const Clade& a, const Clade& b) {
        TaxonSet inter;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(inter));
        return inter.empty();
    };

    PhyloTree t;
    int root = t.add_node(-1);
    std::vector<Clade> node_clade{taxa};
    std::vector<int> node_index{root};

    for (const auto& e : included) {
        // parent: smallest placed clade strictly containing this one
        int parent = 0;
        for (std::size_t k = 1; k < node_clade.size(); ++k)
            if (node_clade[k].size() > e.clade.size() && contains(node_clade[k], e.clade) &&
                node_clade[k].size() < node_clade[parent].size())
                parent = static_cast<int>(k);
        // constructive compatibility guarantee
        for (const auto& placed : node_clade)
            if (!contains(placed, e.clade) && !contains(e.clade, placed) &&
                !disjoint(placed, e.clade))
                throw std::logic_error("incompatible clades in consensus input");
        int v = t.add_node(node_index[parent]);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", e.support);
        t.node(v).label = buf;
        node_clade.push_back(e.clade);
        node_index.push_back(v);
    }

    for (const auto& name : taxa) {
        int best = 0;
        for (std::size_t k = 1; k < node_clade.size(); ++k)
            if (std::binary_search(node_clade[k].begin(), node_clade[k].end(), name) &&
                node_clade[k].size() < node_clade[best].size())
                best = static_cast<int>(k);
        t.add_node(node_index[best], name);
    }
    t.validate();
    return t;
}

} // namespace lingphy
