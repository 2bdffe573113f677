#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lingphy/likelihood.hpp"
#include "lingphy/mcmc.hpp"
#include "lingphy/newick.hpp"
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

TEST_CASE("transition probabilities") {
    CHECK(p_stay(0.0) == 1.0);
    CHECK(p_change(0.0) == 0.0);
    CHECK(p_stay(100.0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(p_change(100.0) == Catch::Approx(0.5).margin(1e-12));
    for (double t : {0.01, 0.1, 1.0, 5.0})
        CHECK(p_stay(t) + p_change(t) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("likelihood of a single leaf is the stationary prior") {
    auto t = PhyloTree::single_leaf("A");
    CHECK(log_likelihood(t, one_column({"A"}, "0")) == Catch::Approx(std::log(0.5)).margin(1e-12));
    CHECK(log_likelihood(t, one_column({"A"}, "1")) == Catch::Approx(std::log(0.5)).margin(1e-12));
}

TEST_CASE("cherry with long branches decouples to 1/4") {
    auto t = parse_newick("(A:60,B:60);");
    CHECK(log_likelihood(t, one_column({"A", "B"}, "00")) ==
          Catch::Approx(std::log(0.25)).margin(1e-9));
}

TEST_CASE("cherry closed form") {
    auto t = parse_newick("(A:0.1,B:0.1);");
    // sum over root states of 1/2 * P(root->0 over .1) * P(root->1 over .1)
    double expected = p_stay(0.1) * p_change(0.1);
    CHECK(log_likelihood(t, one_column({"A", "B"}, "01")) ==
          Catch::Approx(std::log(expected)).margin(1e-12));
    double expected00 =
        0.5 * (p_stay(0.1) * p_stay(0.1) + p_change(0.1) * p_change(0.1));
    CHECK(log_likelihood(t, one_column({"A", "B"}, "00")) ==
          Catch::Approx(std::log(expected00)).margin(1e-12));
}

TEST_CASE("missing and polymorphic cells sum over their states") {
    auto t = parse_newick("(A:0.3,B:0.4);");
    CHECK(log_likelihood(t, one_column({"A", "B"}, "0?")) ==
          Catch::Approx(std::log(0.5)).margin(1e-12));
    std::vector<CharacterCell> col{CharacterCell::of(0), CharacterCell{{0, 1}}};
    CHECK(log_likelihood(t, support::column_matrix({"A", "B"}, col)) ==
          Catch::Approx(std::log(0.5)).margin(1e-12));
}

TEST_CASE("likelihood is invariant under global state relabeling") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 4 + static_cast<int>(rng() % 4);
        auto taxa = support::letters(n);
        auto t = support::random_rooted_tree_with_lengths(taxa, rng, 0.05, 1.5);
        auto m = support::random_binary_matrix(taxa, 6, rng, 0.1);
        std::vector<std::vector<CharacterCell>> flipped(n);
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m.character_count(); ++j) {
                auto cell = m.cell(i, j);
                for (int& s : cell.states) s = 1 - s;
                std::sort(cell.states.begin(), cell.states.end());
                flipped[i].push_back(cell);
            }
        CharacterMatrix fm(taxa, flipped);
        CHECK(log_likelihood(t, m) == Catch::Approx(log_likelihood(t, fm)).margin(1e-9));
    }
}

TEST_CASE("likelihood preconditions") {
    auto taxa = std::vector<std::string>{"A", "B"};
    auto m = one_column(taxa, "01");
    CHECK_THROWS_AS(log_likelihood(parse_newick("(A:0.0,B:0.1);"), m), std::invalid_argument);
    CHECK_THROWS_AS(log_likelihood(parse_newick("(A:-0.2,B:0.1);"), m), std::invalid_argument);
    CHECK_THROWS_AS(log_likelihood(parse_newick("(A,B);"), m), std::invalid_argument);
}

TEST_CASE("discrete gamma rates") {
    CHECK(discrete_gamma_rates(1.0, 1) == std::vector<double>{1.0});
    for (double shape : {0.2, 0.5, 1.0, 2.0, 10.0}) {
        auto rates = discrete_gamma_rates(shape, 4);
        REQUIRE(rates.size() == 4);
        double mean = 0.0;
        for (std::size_t k = 0; k < rates.size(); ++k) {
            CHECK(rates[k] > 0.0);
            if (k) CHECK(rates[k] > rates[k - 1]);
            mean += rates[k];
        }
        CHECK(mean / 4 == Catch::Approx(1.0).margin(1e-9));
    }
    // more variation for smaller shape
    CHECK(discrete_gamma_rates(0.2, 4).front() < discrete_gamma_rates(2.0, 4).front());
    CHECK_THROWS_AS(discrete_gamma_rates(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(discrete_gamma_rates(1.0, 0), std::invalid_argument);
}

TEST_CASE("gamma rate averaging changes the likelihood") {
    auto t = parse_newick("((A:0.2,B:0.4):0.1,(C:0.3,D:0.2):0.2);");
    auto m = one_column({"A", "B", "C", "D"}, "0110");
    double flat = log_likelihood(t, m);
    double gamma = log_likelihood(t, m, discrete_gamma_rates(0.5, 4));
    CHECK(flat != gamma);
}

TEST_CASE("log_posterior orders branch lengths past the optimum") {
    McmcConfig cfg;
    auto m = one_column({"A", "B"}, "01");
    auto near = parse_newick("(A:0.15,B:0.15);");
    auto far = parse_newick("(A:3.0,B:3.0);");
    auto very_far = parse_newick("(A:6.0,B:6.0);");
    CHECK(log_posterior(far, 1.0, m, cfg) < log_posterior(near, 1.0, m, cfg));
    CHECK(log_posterior(very_far, 1.0, m, cfg) < log_posterior(far, 1.0, m, cfg));

    // identical states give identical values
    ChainState s1{near, 1.0, 0.0, 1, 1.0};
    ChainState s2{near, 1.0, 0.0, 1, 1.0};
    CHECK(log_posterior(s1, m, cfg) == log_posterior(s2, m, cfg));
}
