#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lingphy/newick.hpp"
#include "lingphy/parsimony.hpp"
#include "test_support.hpp"

using namespace lingphy;

namespace {

CharacterMatrix one_column(const std::vector<std::string>& taxa, const std::string& states) {
    std::vector<CharacterCell> col;
    for (char c : states)
        col.push_back(c == '?' ? CharacterCell::missing() : CharacterCell::of(c - '0'));
    return support::column_matrix(taxa, col);
}

} // namespace

TEST_CASE("wagner_score examples") {
    auto t = parse_newick("((A,B),(C,D));");
    CHECK(wagner_score(t, one_column({"A", "B", "C", "D"}, "0011")) == 1);
    CHECK(wagner_score(t, one_column({"A", "B", "C", "D"}, "0101")) == 2);
    CHECK(wagner_score(t, one_column({"A", "B", "C", "D"}, "1111")) == 0);
    CHECK(wagner_score(t, one_column({"A", "B", "C", "D"}, "0000")) == 0);
}

TEST_CASE("camin_sokal_score examples") {
    auto chain = parse_newick("(((A,B),C),D);");
    CHECK(camin_sokal_score(chain, one_column({"A", "B", "C", "D"}, "1100")) == 1);
    CHECK(camin_sokal_score(chain, one_column({"A", "B", "C", "D"}, "1010")) == 2);
    CHECK(camin_sokal_score(chain, one_column({"A", "B", "C", "D"}, "0000")) == 0);
    // every leaf changed: a single change on the root stem explains it
    CHECK(camin_sokal_score(chain, one_column({"A", "B", "C", "D"}, "1111")) == 1);
}

TEST_CASE("dollo_score examples") {
    auto t = parse_newick("((A,B),(C,D));");
    CHECK(dollo_score(t, one_column({"A", "B", "C", "D"}, "1110")) == 2); // gain + one loss
    CHECK(dollo_score(t, one_column({"A", "B", "C", "D"}, "1100")) == 1); // gain only
    CHECK(dollo_score(t, one_column({"A", "B", "C", "D"}, "0000")) == 0);
    CHECK(dollo_score(t, one_column({"A", "B", "C", "D"}, "0100")) == 1); // single leaf
}

TEST_CASE("compatibility_score examples") {
    auto t = parse_newick("((A,B),(C,D));");
    CHECK(compatibility_score(t, one_column({"A", "B", "C", "D"}, "1100")) == 1); // clade
    CHECK(compatibility_score(t, one_column({"A", "B", "C", "D"}, "0101")) == 0); // needs 2 changes
    CHECK(compatibility_score(t, one_column({"A", "B", "C", "D"}, "1111")) == 1); // constant
}

TEST_CASE("krishnamurti_score is camin_sokal_score") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        int n = 3 + static_cast<int>(rng() % 4);
        auto taxa = support::letters(n);
        auto t = support::random_rooted_tree(taxa, rng);
        auto m = support::random_binary_matrix(taxa, 5, rng, 0.1);
        CHECK(krishnamurti_score(t, m) == camin_sokal_score(t, m));
    }
}

TEST_CASE("scorers match the brute-force labeling oracle") {
    std::mt19937_64 rng(17);
    const ParsimonyKind kinds[] = {ParsimonyKind::wagner, ParsimonyKind::camin_sokal,
                                   ParsimonyKind::dollo};
    for (ParsimonyKind kind : kinds) {
        for (int rep = 0; rep < 200; ++rep) {
            int n = 3 + static_cast<int>(rng() % 4); // 3..6 taxa
            auto taxa = support::letters(n);
            auto t = support::random_rooted_tree(taxa, rng);
            auto col = support::random_binary_column(n, rng, 0.2);
            auto m = support::column_matrix(taxa, col);
            long long got = parsimony_score(kind, t, m);
            int want = support::oracle_parsimony(kind, t, m, 0);
            INFO(to_string(kind) << " on " << write_newick(t, false));
            CHECK(got == want);
        }
    }
}

TEST_CASE("compatibility equals wagner_score <= 1") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 3 + static_cast<int>(rng() % 4);
        auto taxa = support::letters(n);
        auto t = support::random_rooted_tree(taxa, rng);
        auto m = support::column_matrix(taxa, support::random_binary_column(n, rng, 0.2));
        bool compatible = compatibility_score(t, m) == 1;
        CHECK(compatible == (wagner_score(t, m) <= 1));
    }
}

TEST_CASE("fewer constraints never cost more changes") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 3 + static_cast<int>(rng() % 4);
        auto taxa = support::letters(n);
        auto t = support::random_rooted_tree(taxa, rng);
        auto m = support::column_matrix(taxa, support::random_binary_column(n, rng, 0.2));
        long long w = wagner_score(t, m);
        CHECK(w <= camin_sokal_score(t, m));
        CHECK(w <= dollo_score(t, m));
    }
}

TEST_CASE("wagner_score is invariant under rooting") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 4 + static_cast<int>(rng() % 3);
        auto taxa = support::letters(n);
        auto t = support::random_rooted_tree(taxa, rng);
        auto m = support::random_binary_matrix(taxa, 4, rng, 0.1);
        long long base = wagner_score(t, m);
        auto u = unroot(t);
        CHECK(wagner_score(u, m) == base);
        for (const auto& taxon : taxa)
            CHECK(wagner_score(root_at_outgroup(u, taxon), m) == base);
    }
}

TEST_CASE("constant and duplicated columns behave additively") {
    std::mt19937_64 rng(37);
    auto taxa = support::letters(5);
    auto t = support::random_rooted_tree(taxa, rng);
    auto col = support::random_binary_column(5, rng);
    std::vector<std::vector<CharacterCell>> cells(5);
    for (std::size_t i = 0; i < 5; ++i) cells[i] = {col[i]};
    CharacterMatrix base(taxa, cells);

    // + constant column: no score change
    for (std::size_t i = 0; i < 5; ++i) cells[i].push_back(CharacterCell::of(0));
    CharacterMatrix with_const(taxa, cells);
    // duplicated informative column: contribution doubles
    std::vector<std::vector<CharacterCell>> dup(5);
    for (std::size_t i = 0; i < 5; ++i) dup[i] = {col[i], col[i]};
    CharacterMatrix doubled(taxa, dup);

    for (ParsimonyKind kind : {ParsimonyKind::wagner, ParsimonyKind::camin_sokal,
                               ParsimonyKind::dollo}) {
        long long s = parsimony_score(kind, t, base);
        CHECK(parsimony_score(kind, t, with_const) == s);
        CHECK(parsimony_score(kind, t, doubled) == 2 * s);
    }
}

TEST_CASE("camin-sokal and dollo preconditions") {
    auto taxa = support::letters(4);
    auto unrooted = parse_newick("(A,B,(C,D));");
    auto m = one_column(taxa, "0011");
    CHECK_THROWS_AS(camin_sokal_score(unrooted, m), std::invalid_argument);
    CHECK_THROWS_AS(dollo_score(unrooted, m), std::invalid_argument);
    CHECK_NOTHROW(wagner_score(unrooted, m));

    // polymorphic cells are fine for wagner, rejected for the rooted kinds
    std::vector<CharacterCell> col{CharacterCell{{0, 1}}, CharacterCell::of(1),
                                   CharacterCell::of(0), CharacterCell::of(1)};
    auto poly = support::column_matrix(taxa, col);
    auto rooted = parse_newick("((A,B),(C,D));");
    CHECK_NOTHROW(wagner_score(rooted, poly));
    CHECK_THROWS_AS(camin_sokal_score(rooted, poly), std::invalid_argument);
    CHECK_THROWS_AS(dollo_score(rooted, poly), std::invalid_argument);

    // taxon mismatch
    auto other = parse_newick("((A,B),(C,E));");
    CHECK_THROWS_AS(wagner_score(other, m), std::invalid_argument);
    // non-binary states
    auto multi = support::column_matrix(taxa, {CharacterCell::of(2), CharacterCell::of(0),
                                               CharacterCell::of(0), CharacterCell::of(1)});
    CHECK_THROWS_AS(wagner_score(rooted, multi), std::invalid_argument);
}

TEST_CASE("exhaustive_search finds exactly the trees with the clade") {
    auto taxa = std::vector<std::string>{"A", "B", "C"};
    auto m = one_column(taxa, "110"); // 1-set {A,B}
    auto res = exhaustive_search(ParsimonyKind::camin_sokal, m);
    CHECK(res.best == 1);
    REQUIRE(res.optima.size() == 1);
    CHECK(res.optima[0] == "((A,B),C);");
    REQUIRE(res.per_character.size() == 1);
    CHECK(res.per_character[0] == std::vector<int>{1});
}

TEST_CASE("exhaustive_search on a constant matrix keeps every topology") {
    auto taxa = support::letters(4);
    auto m = one_column(taxa, "0000");
    auto res = exhaustive_search(ParsimonyKind::wagner, m);
    CHECK(res.best == 0);
    CHECK(res.optima.size() == 15);
    CHECK(res.optima_unrooted.size() == 3); // unrooted classes on 4 taxa
}

TEST_CASE("exhaustive_search recovers a homoplasy-free generating tree") {
    // one character per non-root edge of the generating topology
    auto truth = parse_newick("(Gondi,(Konda,((Kui,Kuvi),(Pengo,Manda))));");
    auto leafsets = lingphy::detail::subtree_leafsets(truth);
    auto taxa = truth.taxa();
    std::vector<std::vector<CharacterCell>> cells(taxa.size());
    int n_chars = 0;
    for (int v = 0; v < truth.node_count(); ++v) {
        if (v == truth.root()) continue;
        ++n_chars;
        for (std::size_t i = 0; i < taxa.size(); ++i) {
            bool inside = std::binary_search(leafsets[v].begin(), leafsets[v].end(), taxa[i]);
            cells[i].push_back(CharacterCell::of(inside ? 1 : 0));
        }
    }
    CharacterMatrix m(taxa, cells);
    auto res = exhaustive_search(ParsimonyKind::camin_sokal, m);
    CHECK(res.best == n_chars); // one change per generating character
    bool found = false;
    for (const auto& nwk : res.optima)
        if (nwk == write_newick(truth, false)) found = true;
    CHECK(found);
}

TEST_CASE("exhaustive_search is invariant under taxon relabeling") {
    std::mt19937_64 rng(41);
    auto taxa = support::letters(5);
    auto m = support::random_binary_matrix(taxa, 6, rng);
    auto res = exhaustive_search(ParsimonyKind::camin_sokal, m);

    // relabel A<->E and rerun; optima must map through the relabeling
    std::vector<std::string> swapped = {"E", "B", "C", "D", "A"};
    std::vector<std::vector<CharacterCell>> cells;
    for (const auto& name : taxa) {
        std::string from = name == "A" ? "E" : name == "E" ? "A" : name;
        std::vector<CharacterCell> row;
        for (std::size_t j = 0; j < m.character_count(); ++j)
            row.push_back(m.cell(m.index_of(from), j));
        cells.push_back(row);
    }
    CharacterMatrix relabeled(taxa, cells);
    auto res2 = exhaustive_search(ParsimonyKind::camin_sokal, relabeled);
    CHECK(res2.best == res.best);

    std::set<std::string> mapped;
    for (const auto& nwk : res.optima) {
        std::string out;
        for (char c : nwk) out += (c == 'A') ? 'E' : (c == 'E') ? 'A' : c;
        mapped.insert(write_newick(parse_newick(out), false));
    }
    CHECK(mapped == std::set<std::string>(res2.optima.begin(), res2.optima.end()));
}

TEST_CASE("exhaustive_search is identical across thread counts") {
    std::mt19937_64 rng(43);
    auto taxa = support::letters(6);
    auto m = support::random_binary_matrix(taxa, 8, rng, 0.05);
    SearchOptions seq_opts;
    seq_opts.keep_table = true;
    SearchOptions par_opts = seq_opts;
    par_opts.threads = 4;
    for (ParsimonyKind kind : {ParsimonyKind::wagner, ParsimonyKind::compatibility}) {
        auto a = exhaustive_search(kind, m, seq_opts);
        auto b = exhaustive_search(kind, m, par_opts);
        CHECK(a.best == b.best);
        CHECK(a.optima == b.optima);
        CHECK(a.optima_unrooted == b.optima_unrooted);
        CHECK(*a.table == *b.table);
    }
}

TEST_CASE("exhaustive_search taxon-count limits") {
    auto taxa = support::letters(10);
    std::mt19937_64 rng(47);
    auto m = support::random_binary_matrix(taxa, 2, rng);
    CHECK_THROWS_AS(exhaustive_search(ParsimonyKind::wagner, m), CapabilityError);
}

TEST_CASE("rank_trees") {
    auto taxa = std::vector<std::string>{"A", "B", "C"};
    auto m = one_column(taxa, "110");
    auto ranked = rank_trees(ParsimonyKind::camin_sokal, m, 0);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].first == "((A,B),C);");
    CHECK(ranked[0].second == 1);
    CHECK(ranked[1].second == 2);
    CHECK(ranked[2].second == 2);
    CHECK(ranked[1].first < ranked[2].first); // stable tie order

    auto top1 = rank_trees(ParsimonyKind::camin_sokal, m, 1);
    auto best = exhaustive_search(ParsimonyKind::camin_sokal, m);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].second == best.best);
    CHECK(top1[0].first == best.optima[0]);

    // compatibility ranks descending
    auto compat = rank_trees(ParsimonyKind::compatibility, m, 0);
    CHECK(compat.front().second >= compat.back().second);
}
