// Command-line front end: distance methods, parsimony search, Bayesian MCMC,
// prediction audits and tree utilities over the bundled or user-supplied data.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lingphy/analysis.hpp"
#include "lingphy/builtin.hpp"
#include "lingphy/dataio.hpp"
#include "lingphy/distance_methods.hpp"
#include "lingphy/enumerate.hpp"
#include "lingphy/mcmc.hpp"
#include "lingphy/newick.hpp"
#include "lingphy/parsimony.hpp"
#include "lingphy/posterior.hpp"
#include "lingphy/tree.hpp"

using namespace lingphy;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCapability = 3;

int env_threads() {
    const char* v = std::getenv("LINGPHY_THREADS");
    if (!v) return 1;
    int n = std::atoi(v);
    return n > 0 ? n : 1;
}

struct MatrixArgs {
    std::string input;
    std::vector<std::string> builtins;
    bool as_similarity = false;
    bool as_distance = false;

    void add_to(CLI::App* cmd, bool with_kind_flags = true) {
        cmd->add_option("--input", input, "matrix file (lower-triangular format)");
        cmd->add_option("--builtin", builtins, "bundled input by name (scd)");
        if (with_kind_flags) {
            auto* sim = cmd->add_flag("--similarity", as_similarity,
                                      "treat input as shared-cognate counts (d = 1/s)");
            auto* dis = cmd->add_flag("--distance", as_distance, "treat input as distances");
            sim->excludes(dis);
            dis->excludes(sim);
        }
    }

    DistanceMatrix resolve_distance() const {
        bool builtin_scd = false;
        for (const auto& b : builtins) {
            if (b == "scd") builtin_scd = true;
            else throw ParseError("unknown builtin matrix: " + b);
        }
        if (builtin_scd && !input.empty())
            throw ParseError("give either --input or --builtin, not both");
        if (builtin_scd) {
            if (as_distance)
                throw ParseError("builtin scd holds similarities; drop --distance");
            return similarity_to_distance(builtin_scd_data());
        }
        if (input.empty()) throw ParseError("no input matrix (use --input or --builtin scd)");
        if (as_similarity) return similarity_to_distance(load_similarity(input));
        return load_distance(input);
    }

    static SimilarityMatrix builtin_scd_data() { return builtin_scd(); }
};

std::ostream& info_stream(bool quiet) { return quiet ? std::cerr : std::cout; }

void print_tree(const PhyloTree& t, bool quiet) {
    std::cout << write_newick(t, true) << "\n";
    if (t.has_negative_lengths())
        std::cerr << "warning: negative branch lengths present (kept in the Newick output, "
                     "clamped to zero in the cladogram)\n";
    info_stream(quiet) << render_ascii(t);
}

ParsimonyKind parse_kind(const std::string& name) {
    if (name == "wagner") return ParsimonyKind::wagner;
    if (name == "camin-sokal") return ParsimonyKind::camin_sokal;
    if (name == "dollo") return ParsimonyKind::dollo;
    if (name == "compat" || name == "compatibility") return ParsimonyKind::compatibility;
    throw ParseError("unknown parsimony kind: " + name);
}

RateMode parse_rate_mode(const std::string& name) {
    if (name == "constant") return RateMode::constant;
    if (name == "gamma-fixed") return RateMode::gamma_fixed;
    if (name == "gamma-sampled") return RateMode::gamma_sampled;
    throw ParseError("unknown rate mode: " + name);
}

int run_upgma(const MatrixArgs& args, bool quiet) {
    print_tree(upgma(args.resolve_distance()), quiet);
    return kExitOk;
}

int run_nj(const MatrixArgs& args, const std::string& root_at, bool quiet) {
    PhyloTree t = neighbor_joining(args.resolve_distance());
    if (!root_at.empty()) t = root_at_outgroup(t, root_at);
    print_tree(t, quiet);
    return kExitOk;
}

int run_parsimony(const std::string& chars_path, const std::string& kind_name, bool exhaustive,
                  const std::string& score_tree, long long top_k, bool quiet) {
    auto m = load_characters(chars_path);
    ParsimonyKind kind = parse_kind(kind_name);

    if (!score_tree.empty()) {
        auto t = parse_newick(score_tree);
        std::cout << "score\t" << parsimony_score(kind, t, m) << "\n";
        auto breakdown = parsimony_character_scores(kind, t, m);
        auto& out = info_stream(quiet);
        out << "per-character:";
        for (int s : breakdown) out << ' ' << s;
        out << "\n";
        return kExitOk;
    }
    if (!exhaustive && top_k == 0)
        throw ParseError("choose --score-tree, --exhaustive, or --top K");

    SearchOptions opts;
    opts.threads = env_threads();
    if (top_k > 0) {
        auto ranked = rank_trees(kind, m, static_cast<std::size_t>(top_k), opts);
        int rank = 1;
        for (const auto& [nwk, score] : ranked)
            std::cout << "rank\t" << rank++ << '\t' << score << '\t' << nwk << "\n";
        return kExitOk;
    }
    auto res = exhaustive_search(kind, m, opts);
    std::cout << "best\t" << res.best << "\n";
    for (const auto& nwk : res.optima) std::cout << "optimum\t" << nwk << "\n";
    for (const auto& nwk : res.optima_unrooted)
        std::cout << "unrooted-class\t" << nwk << "\n";
    info_stream(quiet) << to_string(kind) << ": " << tree_count(static_cast<int>(m.taxon_count()))
                       << " topologies scored, " << res.optima.size() << " optimal\n";
    return kExitOk;
}

int run_bayes(const std::string& chars_path, McmcConfig cfg, const std::string& rates,
              double consensus_threshold, const std::string& sample_log, bool quiet) {
    cfg.rate_mode = parse_rate_mode(rates);
    auto m = load_characters(chars_path);
    auto result = mc3_run(m, cfg);

    auto pooled = pooled_post_burn_in(result);
    auto consensus = consensus_tree(pooled, consensus_threshold);
    std::cout << write_newick(consensus, true) << "\n";

    const auto& d = result.diagnostics;
    std::cout << "generations\t" << d.generations << "\n";
    std::cout << "asdsf\t" << format_double(d.final_asdsf) << "\n";
    std::cout << "converged\t" << (d.converged ? "yes" : "no") << "\n";
    std::cout << "accept-nni\t" << format_double(d.nni.rate()) << "\n";
    std::cout << "accept-branch\t" << format_double(d.branch.rate()) << "\n";
    std::cout << "accept-shape\t" << format_double(d.shape.rate()) << "\n";
    std::cout << "swaps\t" << d.swaps_accepted << "\t" << d.swaps_proposed << "\n";

    if (!sample_log.empty()) {
        for (int a = 0; a < 2; ++a) {
            std::string path = sample_log + ".run" + std::to_string(a + 1) + ".tsv";
            std::ofstream out(path);
            if (!out) throw ParseError("cannot write sample log: " + path);
            result.analyses[a].write_tsv(out);
        }
    }
    auto freq = split_frequencies(pooled);
    auto& out = info_stream(quiet);
    out << "split support (pooled post-burn-in):\n";
    for (const auto& [split, f] : freq) {
        out << "  {";
        for (std::size_t i = 0; i < split.size(); ++i) out << (i ? "," : "") << split[i];
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", f);
        out << "} " << buf << "\n";
    }
    out << render_ascii(consensus);
    return kExitOk;
}

int run_predict(const std::string& tree_arg, const std::string& input,
                const std::vector<std::string>& builtins, bool quiet) {
    std::optional<PhyloTree> tree;
    std::optional<SimilarityMatrix> matrix;
    for (const auto& b : builtins) {
        if (b == "fig3") tree = builtin_reference_tree();
        else if (b == "scd") matrix = builtin_scd();
        else throw ParseError("unknown builtin: " + b);
    }
    if (!tree_arg.empty()) tree = parse_newick(tree_arg);
    if (!input.empty()) matrix = load_similarity(input);
    if (!matrix) matrix = builtin_scd(); // default data
    if (!tree) throw ParseError("no tree given (use --tree or --builtin fig3)");

    auto report = closeness_predictions(*tree, *matrix);
    write_predictions_tsv(report, std::cout);
    info_stream(quiet) << prediction_summary(report) << "\n";
    return kExitOk;
}

int run_glotto(double c, double r) {
    std::cout << format_double(glotto_divergence_time({c, r})) << "\n";
    return kExitOk;
}

int run_enumerate(const std::vector<std::string>& taxa, bool count_only) {
    auto seq = enumerate_rooted_trees(taxa);
    if (count_only) {
        std::cout << seq.size() << "\n";
        return kExitOk;
    }
    for (const auto& t : seq) std::cout << write_newick(t, false) << "\n";
    return kExitOk;
}

int run_compare(const std::string& first, const std::string& second, bool as_json) {
    auto a = parse_newick(first);
    auto b = parse_newick(second);
    auto cmp = compare_trees_report(a, b);
    if (as_json) std::cout << comparison_json(cmp).dump(2) << "\n";
    else std::cout << comparison_text(cmp);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phylogenetic inference toolkit for historical linguistics"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "machine output only on stdout; commentary to stderr");

    // upgma
    auto* upgma_cmd = app.add_subcommand("upgma", "ultrametric clustering tree");
    MatrixArgs upgma_args;
    upgma_args.add_to(upgma_cmd);

    // nj
    auto* nj_cmd = app.add_subcommand("nj", "neighbor-joining tree");
    MatrixArgs nj_args;
    nj_args.add_to(nj_cmd);
    std::string nj_root;
    nj_cmd->add_option("--root-at", nj_root, "root the result at this outgroup taxon");

    // parsimony
    auto* par_cmd = app.add_subcommand("parsimony", "character-based tree scoring and search");
    std::string par_chars, par_kind = "wagner", par_tree;
    bool par_exhaustive = false;
    long long par_top = 0;
    par_cmd->add_option("--chars", par_chars, "character matrix file")->required();
    par_cmd->add_option("--kind", par_kind, "wagner|camin-sokal|dollo|compat");
    par_cmd->add_flag("--exhaustive", par_exhaustive, "score every rooted topology");
    par_cmd->add_option("--score-tree", par_tree, "score one tree given as Newick");
    par_cmd->add_option("--top", par_top, "print the K best topologies");

    // bayes
    auto* bayes_cmd = app.add_subcommand("bayes", "Bayesian MCMC with heated chains");
    std::string bayes_chars, bayes_rates = "constant", bayes_log;
    McmcConfig cfg;
    double consensus_threshold = 0.5;
    bayes_cmd->add_option("--chars", bayes_chars, "character matrix file")->required();
    bayes_cmd->add_option("--chains", cfg.n_chains, "chains per analysis");
    bayes_cmd->add_option("--temp", cfg.temperature, "heating temperature");
    bayes_cmd->add_option("--seed", cfg.seed, "random seed");
    bayes_cmd->add_option("--max-gen", cfg.max_generations, "generation cap");
    bayes_cmd->add_option("--threshold", cfg.asdsf_threshold, "ASDSF convergence threshold");
    bayes_cmd->add_option("--sample-interval", cfg.sample_interval, "generations per sample");
    bayes_cmd->add_option("--burn-in", cfg.burn_in_fraction, "burn-in fraction");
    bayes_cmd->add_option("--rates", bayes_rates, "constant|gamma-fixed|gamma-sampled");
    bayes_cmd->add_option("--alpha", cfg.gamma_shape, "gamma shape (fixed mode / start value)");
    bayes_cmd->add_option("--categories", cfg.gamma_categories, "discrete gamma categories");
    bayes_cmd->add_option("--consensus-threshold", consensus_threshold,
                          "majority-rule clade threshold");
    bayes_cmd->add_option("--sample-log", bayes_log, "write per-analysis sample TSVs here");

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "closeness-prediction audit of a tree");
    std::string pred_tree, pred_input;
    std::vector<std::string> pred_builtins;
    pred_cmd->add_option("--tree", pred_tree, "tree to audit (Newick)");
    pred_cmd->add_option("--input", pred_input, "similarity matrix file");
    pred_cmd->add_option("--builtin", pred_builtins, "bundled inputs by name (fig3, scd)");

    // glotto
    auto* glotto_cmd = app.add_subcommand("glotto", "glottochronological divergence time");
    double glotto_c = 0.0, glotto_r = 0.806;
    glotto_cmd->add_option("--c", glotto_c, "shared cognate proportion in (0,1]")->required();
    glotto_cmd->add_option("--r", glotto_r, "retention rate in (0,1)");

    // enumerate
    auto* enum_cmd = app.add_subcommand("enumerate", "all rooted binary topologies");
    std::vector<std::string> enum_taxa;
    bool enum_count = false;
    enum_cmd->add_option("--taxa", enum_taxa, "comma-separated taxon names")
        ->required()
        ->delimiter(',');
    enum_cmd->add_flag("--count-only", enum_count, "print the topology count only");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "compare two trees");
    std::string cmp_first, cmp_second;
    bool cmp_json = false;
    cmp_cmd->add_option("--first", cmp_first, "first tree (Newick)")->required();
    cmp_cmd->add_option("--second", cmp_second, "second tree (Newick)")->required();
    cmp_cmd->add_flag("--json", cmp_json, "machine-readable JSON report");

    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (app.got_subcommand(upgma_cmd)) return run_upgma(upgma_args, quiet);
        if (app.got_subcommand(nj_cmd)) return run_nj(nj_args, nj_root, quiet);
        if (app.got_subcommand(par_cmd))
            return run_parsimony(par_chars, par_kind, par_exhaustive, par_tree, par_top, quiet);
        if (app.got_subcommand(bayes_cmd))
            return run_bayes(bayes_chars, cfg, bayes_rates, consensus_threshold, bayes_log, quiet);
        if (app.got_subcommand(pred_cmd))
            return run_predict(pred_tree, pred_input, pred_builtins, quiet);
        if (app.got_subcommand(glotto_cmd)) return run_glotto(glotto_c, glotto_r);
        if (app.got_subcommand(enum_cmd)) return run_enumerate(enum_taxa, enum_count);
        if (app.got_subcommand(cmp_cmd)) return run_compare(cmp_first, cmp_second, cmp_json);
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapability;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
