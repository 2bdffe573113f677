#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lingphy/builtin.hpp"
#include "lingphy/distance_methods.hpp"
#include "lingphy/newick.hpp"
#include "test_support.hpp"

using namespace lingphy;

namespace {

double root_to_leaf(const PhyloTree& t, int leaf) {
    double d = 0.0;
    for (int v = leaf; v != t.root(); v = t.node(v).parent) d += t.node(v).length.value_or(0.0);
    return d;
}

std::optional<double> pendant_length(const PhyloTree& t, const std::string& name) {
    for (int v = 0; v < t.node_count(); ++v)
        if (t.is_leaf(v) && t.node(v).name == name) return t.node(v).length;
    return std::nullopt;
}

} // namespace

TEST_CASE("upgma on the shared-cognate matrix") {
    auto d = similarity_to_distance(builtin_scd());
    auto t = upgma(d);
    CHECK(t.rooted());
    CHECK(write_newick(t, false) == "((Gondi,Konda),((Kui,Kuvi),(Manda,Pengo)));");

    // merge heights from the exact hand computation
    CHECK(*pendant_length(t, "Kui") == Catch::Approx(0.0056818181818181816).margin(1e-12));
    CHECK(*pendant_length(t, "Manda") == Catch::Approx(0.0087719298245614038).margin(1e-12));
    CHECK(*pendant_length(t, "Gondi") == Catch::Approx(0.03125).margin(1e-12));
    for (int leaf : t.leaves())
        CHECK(root_to_leaf(t, leaf) == Catch::Approx(0.03507608985).margin(1e-9));
}

TEST_CASE("upgma two taxa") {
    DistanceMatrix d({"A", "B"}, {{0.0, 0.4}, {0.4, 0.0}});
    auto t = upgma(d);
    CHECK(write_newick(t, false) == "(A,B);");
    CHECK(*pendant_length(t, "A") == Catch::Approx(0.2).margin(1e-12));
    CHECK(*pendant_length(t, "B") == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("upgma ultrametric three taxa") {
    DistanceMatrix d({"A", "B", "C"}, {{0, 2, 6}, {2, 0, 6}, {6, 6, 0}});
    auto t = upgma(d);
    CHECK(write_newick(t, false) == "((A,B),C);");
    CHECK(*pendant_length(t, "A") == Catch::Approx(1.0).margin(1e-12));
    CHECK(*pendant_length(t, "C") == Catch::Approx(3.0).margin(1e-12));
    for (int leaf : t.leaves())
        CHECK(root_to_leaf(t, leaf) == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("upgma output is always ultrametric with non-negative lengths") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 3 + static_cast<int>(rng() % 8);
        auto taxa = support::letters(n);
        std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) m[i][j] = m[j][i] = u(rng);
        auto t = upgma(DistanceMatrix(taxa, m));
        CHECK_FALSE(t.has_negative_lengths());
        auto leaves = t.leaves();
        double h0 = root_to_leaf(t, leaves.front());
        for (int leaf : leaves) CHECK(root_to_leaf(t, leaf) == Catch::Approx(h0).margin(1e-9));
    }
}

TEST_CASE("neighbor joining on the shared-cognate matrix") {
    auto d = similarity_to_distance(builtin_scd());
    auto t = neighbor_joining(d);
    CHECK_FALSE(t.rooted());
    // frozen output of the plain Q-criterion recurrence on this matrix
    CHECK(write_newick(t, false) == "(((Gondi,Konda),Kuvi),Kui,(Manda,Pengo));");
    CHECK(*pendant_length(t, "Gondi") == Catch::Approx(0.03407761829).margin(1e-9));
    CHECK(*pendant_length(t, "Kuvi") == Catch::Approx(-0.00382286886).margin(1e-9));
    CHECK(*pendant_length(t, "Kui") == Catch::Approx(0.0004951841183).margin(1e-9));
    CHECK(t.has_negative_lengths());

    auto rooted = root_at_outgroup(t, "Gondi");
    CHECK(write_newick(rooted, false) == "(Gondi,(Konda,((Kui,(Manda,Pengo)),Kuvi)));");
    // differs from the comparative-method reference in the Kui/Kuvi grouping
    auto reference = builtin_reference_tree();
    CHECK(rf_distance(rooted, reference, RfMode::unrooted) == 2);
    CHECK(rf_distance(rooted, reference, RfMode::rooted) == 2);
}

TEST_CASE("neighbor joining inverts an additive matrix exactly") {
    // path distances of ((A:1,B:2):1,(C:3,D:1))
    DistanceMatrix d({"A", "B", "C", "D"},
                     {{0, 3, 5, 3}, {3, 0, 6, 4}, {5, 6, 0, 4}, {3, 4, 4, 0}});
    auto t = neighbor_joining(d);
    CHECK(write_newick(t, false) == "((A,B),C,D);");
    CHECK(*pendant_length(t, "A") == Catch::Approx(1.0).margin(1e-12));
    CHECK(*pendant_length(t, "B") == Catch::Approx(2.0).margin(1e-12));
    CHECK(*pendant_length(t, "C") == Catch::Approx(3.0).margin(1e-12));
    CHECK(*pendant_length(t, "D") == Catch::Approx(1.0).margin(1e-12));
    // internal edge length 1
    for (int v = 0; v < t.node_count(); ++v)
        if (!t.is_leaf(v) && v != t.root())
            CHECK(*t.node(v).length == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("neighbor joining three taxa closed form") {
    DistanceMatrix d({"A", "B", "C"}, {{0, 2, 4}, {2, 0, 6}, {4, 6, 0}});
    auto t = neighbor_joining(d);
    CHECK(*pendant_length(t, "A") == Catch::Approx(0.0).margin(1e-12));
    CHECK(*pendant_length(t, "B") == Catch::Approx(2.0).margin(1e-12));
    CHECK(*pendant_length(t, "C") == Catch::Approx(4.0).margin(1e-12));
    CHECK_THROWS_AS(neighbor_joining(DistanceMatrix({"A", "B"}, {{0, 1}, {1, 0}})),
                    std::invalid_argument);
}

TEST_CASE("neighbor joining recovers random additive trees") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 4 + static_cast<int>(rng() % 7); // 4..10
        auto truth = support::random_rooted_tree_with_lengths(support::letters(n), rng, 0.05, 2.0);
        auto d = support::path_distance_matrix(truth);
        auto inferred = neighbor_joining(d);
        CHECK(rf_distance(inferred, truth, RfMode::unrooted) == 0);
    }
}

TEST_CASE("distance methods are deterministic") {
    auto d = similarity_to_distance(builtin_scd());
    CHECK(write_newick(upgma(d)) == write_newick(upgma(d)));
    CHECK(write_newick(neighbor_joining(d)) == write_newick(neighbor_joining(d)));
}

TEST_CASE("taxon order does not change the topology") {
    auto d = similarity_to_distance(builtin_scd());
    std::vector<std::string> order = {"Manda", "Kui", "Gondi", "Pengo", "Kuvi", "Konda"};
    auto d2 = d.reordered(order);
    CHECK(write_newick(upgma(d2), false) == write_newick(upgma(d), false));
    CHECK(write_newick(neighbor_joining(d2), false) == write_newick(neighbor_joining(d), false));

    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        auto truth = support::random_rooted_tree_with_lengths(support::letters(6), rng, 0.05, 2.0);
        auto dm = support::path_distance_matrix(truth);
        std::vector<std::string> perm = dm.taxa();
        std::shuffle(perm.begin(), perm.end(), rng);
        auto shuffled = dm.reordered(perm);
        CHECK(write_newick(upgma(shuffled), false) == write_newick(upgma(dm), false));
        // unrooted topologies agree; the stored hub may differ, so compare
        // the canonical unrooted form
        CHECK(write_newick(unroot(neighbor_joining(shuffled)), false) ==
              write_newick(unroot(neighbor_joining(dm)), false));
    }
}
