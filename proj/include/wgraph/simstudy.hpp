#ifndef WGRAPH_SIMSTUDY_HPP
#define WGRAPH_SIMSTUDY_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wgraph/graph.hpp"
#include "wgraph/motifs.hpp"
#include "wgraph/serialize.hpp"
#include "wgraph/vbem.hpp"

namespace wgraph {

/// Root mean squared difference between the true graphon evaluated on the
/// estimate's cell midpoints and the estimate itself.
double rmse(const GraphonSpec& truth, const GraphonSpec& estimate_grid);

struct KlResult
{
    double value = 0.0;
    /// Set when the estimate is 0 or 1 but the truth is not; value is +inf.
    bool degenerate = false;
};

/// KL divergence between Bernoulli(mu_true) and Bernoulli(mu_est), with
/// 0 log 0 = 0.
KlResult kl_bernoulli(double mu_true, double mu_est);

struct SimConfig
{
    std::vector<std::size_t> n{100, 316};
    std::vector<double> log10_rho{-2.0, -1.5, -1.0};
    std::vector<double> lambda{1.0, 2.0, 3.0, 5.0};
    int replicates = 100;
    int q_max = 10;
    std::size_t grid = 100;
    std::vector<std::string> motifs{"triangle", "square"};
    std::uint64_t seed = 1;
    unsigned threads = 1;
    FitConfig fit{};

    /// Throws std::invalid_argument on empty lists or non-positive counts.
    void validate() const;

    static SimConfig from_json(const Json& j);
    Json to_json() const;
};

struct MotifMetrics
{
    std::string motif;
    double mu_true = 0.0;
    double mu_map = 0.0;
    double mu_averaged = 0.0;
    KlResult kl_map;
    KlResult kl_averaged;
};

struct MetricsRow
{
    std::size_t n = 0;
    double log10_rho = 0.0;
    double lambda = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::size_t edges = 0;
    int map_q = 0;
    double rmse_map = 0.0;
    double rmse_averaged = 0.0;
    std::vector<MotifMetrics> motifs;
    std::vector<double> elbos;
    std::vector<double> weights;
    double wall_seconds = 0.0;
};

/// Seed for one replicate of one design cell.
std::uint64_t replicate_seed(std::uint64_t master, std::size_t n, double log10_rho, double lambda, int replicate);

/// Sample, fit Q = 1..q_max, then score the MAP and averaged estimates.
/// Failures are caught and reported in the row.
MetricsRow run_replicate(const SimConfig& config, std::size_t n, double log10_rho, double lambda, int replicate);

struct SimulationResult
{
    std::vector<MetricsRow> rows;
    std::size_t failures = 0;
    /// Design cells with lambda > 1/sqrt(rho) (W would exceed 1).
    std::vector<std::string> skipped_cells;
};

/// Runs every valid cell x replicate. When out_dir is given, writes
/// metrics.csv, q_posterior.csv, summary.csv, timings.csv and manifest.json.
SimulationResult run_simulation(const SimConfig& config, const std::optional<std::filesystem::path>& out_dir);

/// Writers used by run_simulation; exposed for tests.
void write_metrics_csv(const SimConfig& config, const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
void write_summary_csv(const SimConfig& config, const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

/// Median and quartiles with linear interpolation between order statistics.
struct Quartiles
{
    double q1 = 0.0, median = 0.0, q3 = 0.0;
};
Quartiles quartiles(std::vector<double> values);

struct MotifEstimate
{
    std::string motif;
    double mu_map = 0.0;
    double mu_averaged = 0.0;
    double empirical = 0.0;
};

struct EstimateReport
{
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t self_loops_dropped = 0;
    FitEnsemble ensemble;
    GraphonSpec grid_map = GraphonSpec::constant(0.0);
    GraphonSpec grid_averaged = GraphonSpec::constant(0.0);
    std::vector<MotifEstimate> motifs;
};

struct AnalyzeOptions
{
    int q_max = 15;
    std::size_t grid = 100;
    std::vector<std::string> motifs{"triangle", "square"};
    FitConfig fit{};
    unsigned threads = 1;
    bool include_tau = false;
};

/// Edge list -> ensemble fit -> graphon grids and motif estimates. When
/// out_dir is given, writes report.json, fit.json, q_posterior.csv,
/// grid.csv, grid.json, grid_long.csv, grid_averaged.csv, motifs.json.
EstimateReport analyze_network(const std::filesystem::path& edge_list,
                               const AnalyzeOptions& options,
                               const std::optional<std::filesystem::path>& out_dir);

EstimateReport analyze_graph(const Graph& graph, const AnalyzeOptions& options);

} // namespace wgraph

#endif
