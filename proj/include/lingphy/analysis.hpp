#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lingphy/dataio.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

enum class Verdict { correct, failed, tied };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::failed: return "wrong";
    case Verdict::tied: return "tied";
    }
    return "?";
}

// One closeness claim: "subject is closer to `closer` than to `further`",
// judged against the shared-cognate counts.
struct Prediction {
    std::string subject, closer, further;
    long long s_closer = 0, s_further = 0;
    Verdict verdict = Verdict::correct;
};

// Audit of every tree-resolved taxon triple. A prediction is wrong only when
// the counts strictly contradict it; an exact tie supports neither side and
// is listed separately but not counted against the tree.
struct PredictionReport {
    std::vector<Prediction> predictions;
    int total = 0;
    int correct = 0; // not contradicted (ties included)
    int failed = 0;
    int tied = 0;

    std::vector<Prediction> failures() const {
        std::vector<Prediction> out;
        for (const auto& p : predictions)
            if (p.verdict == Verdict::failed) out.push_back(p);
        return out;
    }
    std::vector<Prediction> ties() const {
        std::vector<Prediction> out;
        for (const auto& p : predictions)
            if (p.verdict == Verdict::tied) out.push_back(p);
        return out;
    }
    bool has_failure(const std::string& subject, const std::string& closer,
                     const std::string& further) const {
        for (const auto& p : predictions)
            if (p.verdict == Verdict::failed && p.subject == subject && p.closer == closer &&
                p.further == further)
                return true;
        return false;
    }
};

// Every triple {A,B,C} the rooted tree resolves as AB|C yields two claims:
// s(A,B) > s(A,C) and s(A,B) > s(B,C). Unresolved triples (multifurcations,
// or any triple of an unrooted tree) yield nothing.
inline PredictionReport closeness_predictions(const PhyloTree& tree,
                                              const SimilarityMatrix& s) {
    {
        TaxonSet expect = s.taxa();
        std::sort(expect.begin(), expect.end());
        if (tree.taxa() != expect)
            throw std::invalid_argument("tree and similarity matrix taxa differ");
    }
    // an unrooted tree resolves no triples: every 3-leaf restriction is a star
    if (!tree.rooted()) return {};

    std::vector<int> depth(tree.node_count(), 0);
    for (int v : tree.preorder())
        if (v != tree.root()) depth[v] = depth[tree.node(v).parent] + 1;
    auto lca_depth = [&](int a, int b) {
        while (a != b) {
            if (depth[a] < depth[b]) b = tree.node(b).parent;
            else a = tree.node(a).parent;
        }
        return depth[a];
    };

    auto leaves = tree.leaves();
    std::sort(leaves.begin(), leaves.end(),
              [&](int a, int b) { return tree.node(a).name < tree.node(b).name; });

    PredictionReport report;
    auto judge = [&](const std::string& subject, const std::string& closer,
                     const std::string& further) {
        Prediction p;
        p.subject = subject;
        p.closer = closer;
        p.further = further;
        p.s_closer = s.at(subject, closer);
        p.s_further = s.at(subject, further);
        if (p.s_closer > p.s_further) p.verdict = Verdict::correct;
        else if (p.s_closer < p.s_further) p.verdict = Verdict::failed;
        else p.verdict = Verdict::tied;
        report.predictions.push_back(p);
    };

    std::size_t n = leaves.size();
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y)
            for (std::size_t z = y + 1; z < n; ++z) {
                int a = leaves[x], b = leaves[y], c = leaves[z];
                int dab = lca_depth(a, b), dac = lca_depth(a, c), dbc = lca_depth(b, c);
                int in1, in2, out;
                if (dab > dac && dab > dbc) { in1 = a; in2 = b; out = c; }
                else if (dac > dab && dac > dbc) { in1 = a; in2 = c; out = b; }
                else if (dbc > dab && dbc > dac) { in1 = b; in2 = c; out = a; }
                else continue; // unresolved
                const std::string &n1 = tree.node(in1).name, &n2 = tree.node(in2).name,
                                  &no = tree.node(out).name;
                judge(n1, n2, no);
                judge(n2, n1, no);
            }

    report.total = static_cast<int>(report.predictions.size());
    for (const auto& p : report.predictions) {
        if (p.verdict == Verdict::failed) ++report.failed;
        else ++report.correct; // strict wins and ties both count as not wrong
        if (p.verdict == Verdict::tied) ++report.tied;
    }
    return report;
}

// Line-oriented record: subject, closer, further, both counts, verdict.
inline void write_predictions_tsv(const PredictionReport& r, std::ostream& out) {
    for (const auto& p : r.predictions)
        out << p.subject << '\t' << p.closer << '\t' << p.further << '\t' << p.s_closer << '\t'
            << p.s_further << '\t' << to_string(p.verdict) << '\n';
    out << "total\t" << r.total << "\tcorrect\t" << r.correct << "\twrong\t" << r.failed
        << "\ttied\t" << r.tied << '\n';
}

inline std::string prediction_summary(const PredictionReport& r) {
    std::ostringstream out;
    out << r.total << " predictions: " << r.correct << " correct";
    if (r.tied > 0) out << " (" << r.tied << " by tie)";
    out << ", " << r.failed << " wrong";
    return out.str();
}

// Side-by-side comparison of two trees on the same taxa: RF distances plus
// the shared and differing splits/clades.
struct TreeComparison {
    int rf_unrooted = 0;
    std::optional<int> rf_rooted; // absent unless both trees are rooted
    std::vector<Split> shared_splits, only_a_splits, only_b_splits;
    std::vector<Clade> shared_clades, only_a_clades, only_b_clades;
};

inline TreeComparison compare_trees_report(const PhyloTree& a, const PhyloTree& b) {
    if (a.taxa() != b.taxa())
        throw std::invalid_argument("compared trees have different taxa");
    TreeComparison cmp;
    auto sa = splits_of(a), sb = splits_of(b);
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(cmp.shared_splits));
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::back_inserter(cmp.only_a_splits));
    std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(),
                        std::back_inserter(cmp.only_b_splits));
    cmp.rf_unrooted = static_cast<int>(cmp.only_a_splits.size() + cmp.only_b_splits.size());
    if (a.rooted() && b.rooted()) {
        auto ca = clades_of(a), cb = clades_of(b);
        std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                              std::back_inserter(cmp.shared_clades));
        std::set_difference(ca.begin(), ca.end(), cb.begin(), cb.end(),
                            std::back_inserter(cmp.only_a_clades));
        std::set_difference(cb.begin(), cb.end(), ca.begin(), ca.end(),
                            std::back_inserter(cmp.only_b_clades));
        cmp.rf_rooted =
            static_cast<int>(cmp.only_a_clades.size() + cmp.only_b_clades.size());
    }
    return cmp;
}

namespace detail {

inline std::string join_taxa(const TaxonSet& ts) {
    std::string out = "{";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) out += ",";
        out += ts[i];
    }
    return out + "}";
}

} // namespace detail

inline std::string comparison_text(const TreeComparison& cmp) {
    std::ostringstream out;
    out << "unrooted RF distance: " << cmp.rf_unrooted << "\n";
    if (cmp.rf_rooted) out << "rooted RF distance: " << *cmp.rf_rooted << "\n";
    auto dump = [&](const char* title, const std::vector<TaxonSet>& sets) {
        if (sets.empty()) return;
        out << title << ":";
        for (const auto& s : sets) out << ' ' << detail::join_taxa(s);
        out << "\n";
    };
    dump("splits only in first", cmp.only_a_splits);
    dump("splits only in second", cmp.only_b_splits);
    dump("clades only in first", cmp.only_a_clades);
    dump("clades only in second", cmp.only_b_clades);
    return out.str();
}

inline nlohmann::json comparison_json(const TreeComparison& cmp) {
    nlohmann::json j;
    j["rf_unrooted"] = cmp.rf_unrooted;
    if (cmp.rf_rooted) j["rf_rooted"] = *cmp.rf_rooted;
    j["shared_splits"] = cmp.shared_splits;
    j["only_first_splits"] = cmp.only_a_splits;
    j["only_second_splits"] = cmp.only_b_splits;
    j["shared_clades"] = cmp.shared_clades;
    j["only_first_clades"] = cmp.only_a_clades;
    j["only_second_clades"] = cmp.only_b_clades;
    return j;
}

} // namespace lingphy
