#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "lingphy/common.hpp"
#include "lingphy/likelihood.hpp"
#include "lingphy/posterior.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

enum class RateMode { constant, gamma_fixed, gamma_sampled };

struct McmcConfig {
    int n_chains = 4;
    double temperature = 0.20;
    long long max_generations = 100000;
    int sample_interval = 100;
    double burn_in_fraction = 0.25;
    double asdsf_threshold = 0.01;
    long long check_interval = 1000;
    // convergence is only tested once each analysis has this many
    // post-burn-in samples, so a lucky first draw cannot end the run
    int min_samples_before_check = 50;
    std::uint64_t seed = 0;

    RateMode rate_mode = RateMode::constant;
    double gamma_shape = 1.0;
    int gamma_categories = 4;
    double shape_min = 0.1;
    double shape_max = 10.0;

    double branch_prior_rate = 10.0; // exponential prior on branch lengths
    double initial_branch_length = 0.1;
    std::optional<double> frozen_branch_length; // topology-only sampling

    void validate() const {
        if (n_chains < 1) throw std::invalid_argument("need at least one chain");
        if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
        if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
            throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
        if (!(asdsf_threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
        if (sample_interval < 1) throw std::invalid_argument("sample interval must be >= 1");
        if (max_generations < 1) throw std::invalid_argument("generation cap must be >= 1");
        if (gamma_categories < 1) throw std::invalid_argument("need gamma categories >= 1");
        if (!(gamma_shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
        if (!(shape_min > 0.0 && shape_min < shape_max))
            throw std::invalid_argument("invalid shape prior interval");
        if (!(branch_prior_rate > 0.0))
            throw std::invalid_argument("branch prior rate must be positive");
        if (frozen_branch_length && !(*frozen_branch_length > 0.0))
            throw std::invalid_argument("frozen branch length must be positive");
    }
};

// beta_i = 1 / (1 + T (i - 1)); chain 1 is the cold chain.
inline double chain_beta(int chain_number, double temperature) {
    if (chain_number < 1) throw std::invalid_argument("chain numbers start at 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    return 1.0 / (1.0 + temperature * (chain_number - 1));
}

// State-swap acceptance between two heated chains, computed in log space.
inline double swap_probability(double beta_i, double log_post_i, double beta_j,
                               double log_post_j) {
    double log_ratio = (beta_i - beta_j) * (log_post_j - log_post_i);
    return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

struct ChainState {
    PhyloTree tree;
    double shape = 1.0;     // gamma shape when sampled
    double log_post = 0.0;
    int heat_index = 1;     // 1 = cold
    double beta = 1.0;
};

inline double swap_probability(const ChainState& a, const ChainState& b) {
    return swap_probability(a.beta, a.log_post, b.beta, b.log_post);
}

struct MoveStats {
    long long proposed = 0;
    long long accepted = 0;
    double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

// Log prior: uniform over topologies, iid Exponential(rate) on branch
// lengths, uniform shape prior on [shape_min, shape_max] when sampled.
inline double log_prior(const PhyloTree& t, double shape, const McmcConfig& cfg) {
    if (cfg.rate_mode == RateMode::gamma_sampled &&
        (shape < cfg.shape_min || shape > cfg.shape_max))
        return -std::numeric_limits<double>::infinity();
    double lp = 0.0;
    double rate = cfg.branch_prior_rate;
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root()) continue;
        lp += std::log(rate) - rate * *t.node(v).length;
    }
    return lp;
}

inline std::vector<double> rates_for(const McmcConfig& cfg, double shape) {
    switch (cfg.rate_mode) {
    case RateMode::constant: return {1.0};
    case RateMode::gamma_fixed: return discrete_gamma_rates(cfg.gamma_shape, cfg.gamma_categories);
    case RateMode::gamma_sampled: return discrete_gamma_rates(shape, cfg.gamma_categories);
    }
    return {1.0};
}

inline double log_posterior(const PhyloTree& t, double shape, const CharacterMatrix& m,
                            const McmcConfig& cfg) {
    double prior = log_prior(t, shape, cfg);
    if (!std::isfinite(prior)) return prior;
    return log_likelihood(t, m, rates_for(cfg, shape)) + prior;
}

inline double log_posterior(const ChainState& s, const CharacterMatrix& m,
                            const McmcConfig& cfg) {
    return log_posterior(s.tree, s.shape, m, cfg);
}

// Random rooted binary tree by stepwise leaf addition; works for any taxon
// count (no enumeration involved).
inline PhyloTree random_rooted_topology(const std::vector<std::string>& taxa,
                                        std::mt19937_64& rng) {
    if (taxa.size() < 2) throw std::invalid_argument("need at least 2 taxa");
    PhyloTree t;
    int root = t.add_node(-1);
    t.add_node(root, taxa[0]);
    t.add_node(root, taxa[1]);
    for (std::size_t k = 2; k < taxa.size(); ++k) {
        std::uint64_t pos = rng() % (2 * k - 1);
        if (pos + 1 == 2 * k - 1) {
            int old_root = t.root();
            int new_root = t.add_node(-1);
            t.node(old_root).parent = new_root;
            t.node(new_root).children.push_back(old_root);
            t.add_node(new_root, taxa[k]);
            t.set_root(new_root);
        } else {
            auto order = t.preorder();
            int v = -1;
            std::uint64_t seen = 0;
            for (int u : order) {
                if (u == t.root()) continue;
                if (seen++ == pos) { v = u; break; }
            }
            int parent = t.node(v).parent;
            int mid = t.add_node(parent);
            t.node(parent).children.pop_back();
            for (int& c : t.node(parent).children)
                if (c == v) c = mid;
            t.node(v).parent = mid;
            t.node(mid).children.push_back(v);
            t.add_node(mid, taxa[k]);
        }
    }
    return t;
}

// Nearest-neighbor interchange on a rooted binary tree: pick an internal
// non-root node v, swap one of its children with its sibling. Symmetric
// proposal; returns false when the tree is too small to have such an edge.
inline bool propose_nni(PhyloTree& t, std::mt19937_64& rng) {
    std::vector<int> internal;
    for (int v = 0; v < t.node_count(); ++v)
        if (!t.is_leaf(v) && v != t.root()) internal.push_back(v);
    if (internal.empty()) return false;
    int v = internal[rng() % internal.size()];
    int u = t.node(v).parent;
    int sibling = -1;
    for (int c : t.node(u).children)
        if (c != v) sibling = c;
    int child = t.node(v).children[rng() % t.node(v).children.size()];
    for (int& c : t.node(u).children)
        if (c == sibling) c = child;
    for (int& c : t.node(v).children)
        if (c == child) c = sibling;
    t.node(child).parent = u;
    t.node(sibling).parent = v;
    return true;
}

// One chain of the coupled sampler. Exposed so heated-chain behavior can be
// exercised directly at any beta.
class Chain {
public:
    Chain(const CharacterMatrix& m, const McmcConfig& cfg, int analysis, int chain_index)
        : m_(&m), cfg_(&cfg),
          rng_(derive_seed(cfg.seed, static_cast<std::uint64_t>(analysis) + 1,
                           static_cast<std::uint64_t>(chain_index) + 1)) {
        state_.heat_index = chain_index + 1;
        state_.beta = chain_beta(state_.heat_index, cfg.temperature);
        state_.shape = cfg.gamma_shape;
        state_.tree = random_rooted_topology(m.taxa(), rng_);
        double len = cfg.frozen_branch_length.value_or(cfg.initial_branch_length);
        for (int v = 0; v < state_.tree.node_count(); ++v)
            if (v != state_.tree.root()) state_.tree.node(v).length = len;
        state_.log_post = log_posterior(state_, m, cfg);
    }

    const ChainState& state() const { return state_; }
    ChainState& state() { return state_; }

    const MoveStats& nni_stats() const { return nni_; }
    const MoveStats& branch_stats() const { return branch_; }
    const MoveStats& shape_stats() const { return shape_; }

    // One generation: a structural proposal (topology or branch length),
    // plus a shape move when the shape is sampled.
    void step() {
        bool frozen = cfg_->frozen_branch_length.has_value();
        bool do_nni = frozen || uniform() < 0.5;
        if (do_nni) {
            propose_topology();
        } else {
            propose_branch_length();
        }
        if (cfg_->rate_mode == RateMode::gamma_sampled) propose_shape();
    }

private:
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

    void accept_or_reject(ChainState& proposal, double log_hastings, MoveStats& stats) {
        ++stats.proposed;
        double log_accept = state_.beta * (proposal.log_post - state_.log_post) + log_hastings;
        if (log_accept >= 0.0 || std::log(uniform()) < log_accept) {
            state_.tree = std::move(proposal.tree);
            state_.shape = proposal.shape;
            state_.log_post = proposal.log_post;
            ++stats.accepted;
        }
    }

    void propose_topology() {
        ChainState proposal = state_;
        if (!propose_nni(proposal.tree, rng_)) return;
        proposal.log_post = log_posterior(proposal, *m_, *cfg_);
        accept_or_reject(proposal, 0.0, nni_);
    }

    void propose_branch_length() {
        static const double lambda = 2.0 * std::log(1.7);
        ChainState proposal = state_;
        std::vector<int> branches;
        for (int v = 0; v < proposal.tree.node_count(); ++v)
            if (v != proposal.tree.root()) branches.push_back(v);
        int v = branches[rng_() % branches.size()];
        double mult = std::exp(lambda * (uniform() - 0.5));
        proposal.tree.node(v).length = *proposal.tree.node(v).length * mult;
        proposal.log_post = log_posterior(proposal, *m_, *cfg_);
        accept_or_reject(proposal, std::log(mult), branch_);
    }

    void propose_shape() {
        static const double lambda = 2.0 * std::log(1.5);
        ChainState proposal = state_;
        double mult = std::exp(lambda * (uniform() - 0.5));
        proposal.shape = state_.shape * mult;
        proposal.log_post = log_posterior(proposal, *m_, *cfg_);
        accept_or_reject(proposal, std::log(mult), shape_);
    }

    const CharacterMatrix* m_;
    const McmcConfig* cfg_;
    std::mt19937_64 rng_;
    ChainState state_;
    MoveStats nni_, branch_, shape_;
};

struct Mc3Diagnostics {
    long long generations = 0;
    double final_asdsf = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    MoveStats nni, branch, shape;
    long long swaps_proposed = 0;
    long long swaps_accepted = 0;
};

struct Mc3Result {
    std::array<PosteriorSample, 2> analyses;
    Mc3Diagnostics diagnostics;
};

// Two independent Metropolis-coupled analyses. Each generation every chain
// makes one sweep, then one random pair per analysis attempts a state swap;
// the cold chain is sampled at the configured interval. Terminates when the
// post-burn-in ASDSF between the analyses drops below the threshold, or at
// the generation cap (reported via the converged flag, never an exception).
// Fully deterministic given (config, seed).
inline Mc3Result mc3_run(const CharacterMatrix& m, const McmcConfig& cfg) {
    cfg.validate();
    if (m.taxon_count() < 2) throw std::invalid_argument("need at least 2 taxa");

    Mc3Result result;
    result.analyses[0].burn_in_fraction = cfg.burn_in_fraction;
    result.analyses[1].burn_in_fraction = cfg.burn_in_fraction;

    std::vector<std::vector<Chain>> chains(2);
    std::array<std::mt19937_64, 2> swap_rng{
        std::mt19937_64(derive_seed(cfg.seed, 101, 0)),
        std::mt19937_64(derive_seed(cfg.seed, 102, 0)),
    };
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < cfg.n_chains; ++c) chains[a].emplace_back(m, cfg, a, c);

    auto record = [&](int a, long long gen) {
        const ChainState& cold = chains[a][0].state();
        result.analyses[a].records.push_back(
            {gen, write_newick(cold.tree, true), cold.log_post});
    };

    bool converged = false;
    long long gen = 0;
    while (gen < cfg.max_generations && !converged) {
        ++gen;
        for (int a = 0; a < 2; ++a) {
            for (auto& chain : chains[a]) chain.step();
            if (cfg.n_chains >= 2) {
                auto& rng = swap_rng[a];
                int i = static_cast<int>(rng() % cfg.n_chains);
                int j = static_cast<int>(rng() % (cfg.n_chains - 1));
                if (j >= i) ++j;
                ChainState& si = chains[a][i].state();
                ChainState& sj = chains[a][j].state();
                double p = swap_probability(si, sj);
                ++result.diagnostics.swaps_proposed;
                if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p) {
                    std::swap(si.tree, sj.tree);
                    std::swap(si.shape, sj.shape);
                    std::swap(si.log_post, sj.log_post);
                    ++result.diagnostics.swaps_accepted;
                }
            }
        }
        if (gen % cfg.sample_interval == 0) {
            record(0, gen);
            record(1, gen);
        }
        if (gen % cfg.check_interval == 0) {
            std::size_t have0 = result.analyses[0].post_burn_in().size();
            std::size_t have1 = result.analyses[1].post_burn_in().size();
            if (have0 >= static_cast<std::size_t>(cfg.min_samples_before_check) &&
                have1 >= static_cast<std::size_t>(cfg.min_samples_before_check)) {
                double dev = asdsf(result.analyses[0], result.analyses[1]);
                result.diagnostics.final_asdsf = dev;
                if (dev < cfg.asdsf_threshold) converged = true;
            }
        }
    }

    result.diagnostics.generations = gen;
    result.diagnostics.converged = converged;
    if (!result.analyses[0].post_burn_in().empty() &&
        !result.analyses[1].post_burn_in().empty())
        result.diagnostics.final_asdsf = asdsf(result.analyses[0], result.analyses[1]);

    for (int a = 0; a < 2; ++a)
        for (auto& chain : chains[a]) {
            auto add = [](MoveStats& tot, const MoveStats& s) {
                tot.proposed += s.proposed;
                tot.accepted += s.accepted;
            };
            add(result.diagnostics.nni, chain.nni_stats());
            add(result.diagnostics.branch, chain.branch_stats());
            add(result.diagnostics.shape, chain.shape_stats());
        }
    return result;
}

// Post-burn-in samples of both analyses pooled into one sample (burn-in
// already applied), for consensus building.
inline PosteriorSample pooled_post_burn_in(const Mc3Result& r) {
    PosteriorSample out;
    out.burn_in_fraction = 0.0;
    for (const auto& analysis : r.analyses)
        for (const auto& rec : analysis.post_burn_in()) out.records.push_back(rec);
    return out;
}

} // namespace lingphy
