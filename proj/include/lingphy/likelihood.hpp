#pragma once

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lingphy/dataio.hpp"
#include "lingphy/parsimony.hpp" // BinaryColumns, ScoringIndex
#include "lingphy/tree.hpp"

namespace lingphy {

// Two-state symmetric Markov model with stationary distribution (1/2, 1/2).
inline double p_stay(double t) { return 0.5 + 0.5 * std::exp(-2.0 * t); }
inline double p_change(double t) { return 0.5 - 0.5 * std::exp(-2.0 * t); }

// Discrete gamma rate categories (equal probability, mean-of-slice rates,
// shape = rate so the mean rate is 1).
inline std::vector<double> discrete_gamma_rates(double shape, int categories) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (categories < 1) throw std::invalid_argument("need at least one rate category");
    if (categories == 1) return {1.0};
    std::vector<double> rates(categories);
    double prev_cut = 0.0; // gamma_p(shape+1, .) at the lower boundary
    for (int k = 0; k < categories; ++k) {
        double cut;
        if (k + 1 == categories) {
            cut = 1.0;
        } else {
            double q = static_cast<double>(k + 1) / categories;
            double boundary = boost::math::gamma_p_inv(shape, q); // rate-1 quantile
            cut = boost::math::gamma_p(shape + 1.0, boundary);
        }
        rates[k] = categories * (cut - prev_cut);
        prev_cut = cut;
    }
    return rates;
}

namespace detail {

// Pruning over precomputed leaf masks; rates average a gamma mixture.
inline double log_likelihood_masks(const PhyloTree& t, const std::vector<int>& node_row,
                                   const BinaryColumns& cols,
                                   const std::vector<double>& rates) {
    auto order = t.postorder();
    int root = t.root();
    std::size_t n_nodes = t.node_count();
    std::vector<std::array<double, 2>> partial(n_nodes);
    double total = 0.0;
    for (std::size_t j = 0; j < cols.n_chars; ++j) {
        double char_lik = 0.0;
        for (double rate : rates) {
            for (int v : order) {
                if (t.is_leaf(v)) {
                    std::uint8_t m = cols.masks[j][node_row[v]];
                    partial[v] = {(m & 1) ? 1.0 : 0.0, (m & 2) ? 1.0 : 0.0};
                } else {
                    partial[v] = {1.0, 1.0};
                    for (int c : t.node(v).children) {
                        double len = *t.node(c).length * rate;
                        double stay = p_stay(len), change = p_change(len);
                        partial[v][0] *= stay * partial[c][0] + change * partial[c][1];
                        partial[v][1] *= change * partial[c][0] + stay * partial[c][1];
                    }
                }
            }
            char_lik += 0.5 * (partial[root][0] + partial[root][1]);
        }
        total += std::log(char_lik / rates.size());
    }
    return total;
}

inline std::vector<int> node_row_map(const PhyloTree& t, const CharacterMatrix& m) {
    ScoringIndex ix(t, m);
    return ix.row;
}

} // namespace detail

// Log likelihood of a binary character matrix on a tree with positive branch
// lengths; characters are independent, '?' sums over both states, polymorphic
// cells over their listed states.
inline double log_likelihood(const PhyloTree& t, const CharacterMatrix& m,
                             const std::vector<double>& rates = {1.0}) {
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        if (!t.node(v).length || *t.node(v).length <= 0.0)
            throw std::invalid_argument("log_likelihood requires positive branch lengths");
    }
    if (rates.empty()) throw std::invalid_argument("need at least one rate");
    auto cols = detail::BinaryColumns::from(m, /*reject_polymorphic=*/false);
    auto rows = detail::node_row_map(t, m);
    return detail::log_likelihood_masks(t, rows, cols, rates);
}

} // namespace lingphy
