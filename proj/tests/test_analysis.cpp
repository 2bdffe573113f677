#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "lingphy/analysis.hpp"
#include "lingphy/builtin.hpp"
#include "lingphy/distance_methods.hpp"
#include "lingphy/newick.hpp"
#include "test_support.hpp"

using namespace lingphy;

TEST_CASE("reference-tree audit against the shared-cognate counts") {
    auto report = closeness_predictions(builtin_reference_tree(), builtin_scd());
    CHECK(report.total == 40);
    CHECK(report.correct == 37);
    CHECK(report.failed == 3);
    CHECK(report.tied == 1);

    // the three wrong predictions, with their observed counts
    CHECK(report.has_failure("Kuvi", "Konda", "Gondi"));
    CHECK(report.has_failure("Konda", "Manda", "Gondi"));
    CHECK(report.has_failure("Manda", "Konda", "Gondi"));
    auto fails = report.failures();
    REQUIRE(fails.size() == 3);
    for (const auto& f : fails) {
        if (f.subject == "Kuvi") {
            CHECK(f.s_closer == 20);
            CHECK(f.s_further == 22);
        } else if (f.subject == "Konda") {
            CHECK(f.s_closer == 9);
            CHECK(f.s_further == 16);
        } else {
            CHECK(f.subject == "Manda");
            CHECK(f.s_closer == 9);
            CHECK(f.s_further == 10);
        }
    }

    // the single exact tie: Kui shares 18 items with both Konda and Gondi
    auto ties = report.ties();
    REQUIRE(ties.size() == 1);
    CHECK(ties[0].subject == "Kui");
    CHECK(ties[0].closer == "Konda");
    CHECK(ties[0].further == "Gondi");
    CHECK(ties[0].s_closer == 18);
    CHECK(ties[0].s_further == 18);

    CHECK(prediction_summary(report) == "40 predictions: 37 correct (1 by tie), 3 wrong");
}

TEST_CASE("the clustering tree avoids the reference tree's wrong predictions") {
    auto upgma_tree = upgma(similarity_to_distance(builtin_scd()));
    auto report = closeness_predictions(upgma_tree, builtin_scd());
    CHECK(report.total == 40);
    CHECK_FALSE(report.has_failure("Kuvi", "Konda", "Gondi"));
    CHECK_FALSE(report.has_failure("Konda", "Manda", "Gondi"));
    CHECK_FALSE(report.has_failure("Manda", "Konda", "Gondi"));
    // it has its own failures, all involving the Gondi/Konda pairing
    CHECK(report.failed == 5);
    CHECK(report.tied == 0);
    for (const auto& f : report.failures())
        CHECK((f.closer == "Gondi" || f.closer == "Konda"));
}

TEST_CASE("small and unresolved trees") {
    SimilarityMatrix two({"A", "B"}, {{0, 3}, {3, 0}});
    auto cherry = parse_newick("(A,B);");
    CHECK(closeness_predictions(cherry, two).total == 0);

    SimilarityMatrix four({"A", "B", "C", "D"},
                          {{0, 5, 4, 3}, {5, 0, 2, 6}, {4, 2, 0, 1}, {3, 6, 1, 0}});
    auto star = parse_newick("(A,B,C,D);");
    CHECK(closeness_predictions(star, four).total == 0); // unrooted: nothing resolves

    auto partial = parse_newick("((A,B),C,D);", Rootedness::rooted);
    auto report = closeness_predictions(partial, four);
    // only the two triples containing both A and B are resolved
    CHECK(report.total == 4);
}

TEST_CASE("every binary tree on six taxa makes 40 predictions") {
    std::mt19937_64 rng(61);
    auto s = builtin_scd();
    auto taxa = s.taxa();
    std::sort(taxa.begin(), taxa.end());
    for (int rep = 0; rep < 25; ++rep) {
        auto t = support::random_rooted_tree(taxa, rng);
        auto report = closeness_predictions(t, s);
        CHECK(report.total == 40); // 2 * C(6,3)
        CHECK(report.total == report.correct + report.failed);
        CHECK(report.tied <= report.correct);
    }
}

TEST_CASE("a contradicted prediction is listed exactly once") {
    auto report = closeness_predictions(builtin_reference_tree(), builtin_scd());
    int count = 0;
    for (const auto& p : report.predictions)
        if (p.subject == "Kuvi" && p.closer == "Konda" && p.further == "Gondi" &&
            p.verdict == Verdict::failed)
            ++count;
    CHECK(count == 1);
}

TEST_CASE("matrix taxon order does not change the report") {
    auto tree = builtin_reference_tree();
    auto s = builtin_scd();
    auto base = closeness_predictions(tree, s);
    auto shuffled =
        s.reordered({"Pengo", "Gondi", "Manda", "Kui", "Konda", "Kuvi"});
    auto again = closeness_predictions(tree, shuffled);
    CHECK(again.total == base.total);
    CHECK(again.correct == base.correct);
    CHECK(again.failed == base.failed);
    CHECK(again.tied == base.tied);
    for (const auto& f : base.failures())
        CHECK(again.has_failure(f.subject, f.closer, f.further));
}

TEST_CASE("prediction TSV output") {
    auto report = closeness_predictions(builtin_reference_tree(), builtin_scd());
    std::ostringstream out;
    write_predictions_tsv(report, out);
    std::string text = out.str();
    CHECK(text.find("Kuvi\tKonda\tGondi\t20\t22\twrong") != std::string::npos);
    CHECK(text.find("total\t40\tcorrect\t37\twrong\t3\ttied\t1") != std::string::npos);
}

TEST_CASE("compare_trees_report") {
    auto fig3 = builtin_reference_tree();
    auto same = compare_trees_report(fig3, fig3);
    CHECK(same.rf_unrooted == 0);
    REQUIRE(same.rf_rooted.has_value());
    CHECK(*same.rf_rooted == 0);
    CHECK(same.only_a_splits.empty());
    CHECK(same.only_b_clades.empty());

    auto upgma_tree = upgma(similarity_to_distance(builtin_scd()));
    auto cmp = compare_trees_report(upgma_tree, fig3);
    CHECK(cmp.rf_unrooted == 0);
    REQUIRE(cmp.rf_rooted.has_value());
    CHECK(*cmp.rf_rooted == 2);
    REQUIRE(cmp.only_a_clades.size() == 1);
    CHECK(cmp.only_a_clades[0] == Clade{"Gondi", "Konda"});
    REQUIRE(cmp.only_b_clades.size() == 1);
    CHECK(cmp.only_b_clades[0] == Clade{"Konda", "Kui", "Kuvi", "Manda", "Pengo"});

    // unrooted comparand: rooted RF unavailable
    auto nj_tree = neighbor_joining(similarity_to_distance(builtin_scd()));
    auto cmp2 = compare_trees_report(nj_tree, fig3);
    CHECK_FALSE(cmp2.rf_rooted.has_value());
    CHECK(cmp2.rf_unrooted == 2);

    CHECK_THROWS_AS(compare_trees_report(fig3, parse_newick("(A,B,C);")),
                    std::invalid_argument);

    std::string text = comparison_text(cmp);
    CHECK(text.find("unrooted RF distance: 0") != std::string::npos);
    CHECK(text.find("rooted RF distance: 2") != std::string::npos);
    auto j = comparison_json(cmp);
    CHECK(j["rf_rooted"] == 2);
    CHECK(j["only_first_clades"].size() == 1);
}
