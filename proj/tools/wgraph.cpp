// Command-line front end: simulation sweeps, network fits, motif estimates
// and graphon grids.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgraph/graph.hpp"
#include "wgraph/graphon_posterior.hpp"
#include "wgraph/motifs.hpp"
#include "wgraph/serialize.hpp"
#include "wgraph/simstudy.hpp"
#include "wgraph/vbem.hpp"

namespace fs = std::filesystem;
using namespace wgraph;

namespace {

/// "triangle,square" or row strings; row-string motifs are separated by ';'
/// since their rows are comma separated.
std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ';');) {
        std::stringstream parts(item);
        bool in_rows = false;
        for (std::string p; std::getline(parts, p, ',');) {
            const bool row = !p.empty() && p.find_first_not_of("01") == std::string::npos;
            if (row && in_rows)
                out.back() += "," + p;
            else if (!p.empty())
                out.push_back(p);
            in_rows = row;
        }
    }
    return out;
}

struct FitFlags
{
    int q_max = 15;
    int restarts = 5;
    int max_iter = 500;
    double tol = 1e-6;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--qmax", q_max, "Largest number of groups")->check(CLI::PositiveNumber);
        cmd->add_option("--restarts", restarts, "Initialisations per Q")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", max_iter, "VBEM iteration cap")->check(CLI::PositiveNumber);
        cmd->add_option("--tol", tol, "Relative lower-bound tolerance");
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--threads", threads, "Worker threads");
    }

    FitConfig config() const { return FitConfig{max_iter, tol, restarts, seed}; }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Graphon and motif-probability estimation with averaged stochastic block models"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run the product-form simulation sweep");
    std::string sim_config;
    std::string sim_out;
    int sim_replicates = 0;
    unsigned sim_threads = 0;
    simulate->add_option("--config", sim_config, "JSON configuration (defaults used when omitted)");
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--replicates", sim_replicates, "Replicates per cell (overrides the config)")->check(CLI::PositiveNumber);
    simulate->add_option("--threads", sim_threads, "Worker threads (overrides the config)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit an edge list and emit graphon and motif estimates");
    std::string fit_input, fit_out, fit_motifs = "triangle,square";
    std::size_t fit_grid = 100;
    bool include_tau = false;
    FitFlags fit_flags;
    fit_cmd->add_option("--input", fit_input, "Edge list")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit_out, "Output directory")->required();
    fit_cmd->add_option("--grid", fit_grid, "Grid cells per axis")->check(CLI::Range(2, 100000));
    fit_cmd->add_option("--motifs", fit_motifs, "Comma separated motif names or row strings");
    fit_cmd->add_flag("--include-tau", include_tau, "Write soft labels to fit.json");
    fit_flags.add(fit_cmd);

    // motif
    auto* motif_cmd = app.add_subcommand("motif", "Estimate one motif probability");
    std::string motif_input, motif_name = "triangle", motif_method = "posterior";
    std::uint64_t motif_samples = 0;
    FitFlags motif_flags;
    motif_flags.q_max = 10;
    motif_cmd->add_option("--input", motif_input, "Edge list")->required()->check(CLI::ExistingFile);
    motif_cmd->add_option("--motif", motif_name, "Motif name or row string");
    motif_cmd->add_option("--method", motif_method, "posterior, averaged or empirical")
        ->check(CLI::IsMember({"posterior", "averaged", "empirical"}));
    motif_cmd->add_option("--samples", motif_samples, "Sampled tuples for the empirical method (0 = exhaustive)");
    motif_flags.add(motif_cmd);

    // graphon-grid
    auto* grid_cmd = app.add_subcommand("graphon-grid", "Write the posterior-mean graphon on a grid");
    std::string grid_input, grid_out;
    std::size_t grid_m = 100;
    bool grid_averaged = false;
    FitFlags grid_flags;
    grid_flags.q_max = 10;
    grid_cmd->add_option("--input", grid_input, "Edge list")->required()->check(CLI::ExistingFile);
    grid_cmd->add_option("--out", grid_out, "Output CSV")->required();
    grid_cmd->add_option("--grid", grid_m, "Grid cells per axis")->check(CLI::Range(2, 100000));
    grid_cmd->add_flag("--averaged", grid_averaged, "Average over Q instead of using the MAP Q");
    grid_flags.add(grid_cmd);

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Draw a product-form W-graph and write its edge list");
    double sample_rho = 0.1, sample_lambda = 1.0;
    std::size_t sample_n = 100;
    std::uint64_t sample_seed = 1;
    std::string sample_out;
    sample_cmd->add_option("--rho", sample_rho, "Mean density");
    sample_cmd->add_option("--lambda", sample_lambda, "Concentration");
    sample_cmd->add_option("--n", sample_n, "Number of nodes")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sample_seed, "Random seed");
    sample_cmd->add_option("--out", sample_out, "Output edge list")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            SimConfig config = sim_config.empty() ? SimConfig{} : SimConfig::from_json(read_json(sim_config));
            if (sim_replicates > 0) config.replicates = sim_replicates;
            if (sim_threads > 0) config.threads = sim_threads;
            const auto result = run_simulation(config, fs::path(sim_out));
            for (const auto& cell : result.skipped_cells) std::cerr << "skipped invalid cell " << cell << '\n';
            std::cerr << result.rows.size() << " replicates, " << result.failures << " failed\n";
            return result.failures == result.rows.size() && !result.rows.empty() ? 1 : 0;
        }
        if (*fit_cmd) {
            AnalyzeOptions opt;
            opt.q_max = fit_flags.q_max;
            opt.grid = fit_grid;
            opt.motifs = split_list(fit_motifs);
            opt.fit = fit_flags.config();
            opt.threads = fit_flags.threads;
            opt.include_tau = include_tau;
            const auto rep = analyze_network(fit_input, opt, fs::path(fit_out));
            std::cout << Json{{"nodes", rep.nodes}, {"edges", rep.edges}, {"map_q", rep.ensemble.map_q}}.dump() << '\n';
            return 0;
        }
        if (*motif_cmd) {
            const auto input = read_edge_list(motif_input);
            const auto motif = motif_from_string(motif_name);
            MotifProbability p;
            if (motif_method == "empirical") {
                p = empirical_frequency(input.graph, motif,
                                        motif_samples ? FrequencyMode::sampled(motif_samples, motif_flags.seed)
                                                      : FrequencyMode::exhaustive());
            } else {
                const auto ens = fit_ensemble(input.graph, motif_flags.q_max, motif_flags.config(), motif_flags.threads);
                p.method = MotifMethod::posterior_mean;
                p.value = motif_method == "averaged" ? mu_averaged(ens, motif) : mu_map(ens, motif);
            }
            std::cout << to_json(motif, p).dump() << '\n';
            return 0;
        }
        if (*grid_cmd) {
            const auto input = read_edge_list(grid_input);
            const auto ens = fit_ensemble(input.graph, grid_flags.q_max, grid_flags.config(), grid_flags.threads);
            const auto grid = grid_averaged ? grid_estimate(ens, grid_m, grid_flags.threads)
                                            : grid_estimate(ens.map_fit(), grid_m, grid_flags.threads);
            write_grid_csv(grid, grid_out);
            return 0;
        }
        if (*sample_cmd) {
            const auto [graph, latent] = sample_wgraph(GraphonSpec::product_form(sample_rho, sample_lambda), sample_n, sample_seed);
            write_edge_list(graph, sample_out);
            std::cerr << graph.num_nodes() << " nodes, " << graph.num_edges() << " edges\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
