#include "wgraph/simstudy.hpp"
#include "wgraph/graphon_posterior.hpp"
#include "wgraph/parallel.hpp"
#include "wgraph/random.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>
#include <stdexcept>

namespace wgraph {

namespace {

constexpr const char* kVersion = "wgraph 0.1.0";

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string cell_label(std::size_t n, double log10_rho, double lambda)
{
    return "n=" + std::to_string(n) + " log10_rho=" + format_number(log10_rho) + " lambda=" + format_number(lambda);
}

bool cell_valid(double log10_rho, double lambda)
{
    const double rho = std::pow(10.0, log10_rho);
    return rho * lambda * lambda <= 1.0 + 1e-12;
}

std::string kl_field(const KlResult& kl) { return kl.degenerate ? "inf" : format_number(kl.value); }

} // namespace

double rmse(const GraphonSpec& truth, const GraphonSpec& estimate_grid)
{
    const auto* g = std::get_if<Grid>(&estimate_grid.variant());
    if (!g) throw std::invalid_argument("rmse: estimate must be a grid graphon");
    const double m = static_cast<double>(g->m);
    double total = 0.0;
    for (std::size_t i = 0; i < g->m; ++i)
        for (std::size_t j = 0; j < g->m; ++j) {
            const double d = truth((i + 0.5) / m, (j + 0.5) / m) - g->at(i, j);
            total += d * d;
        }
    return std::sqrt(total / (m * m));
}

KlResult kl_bernoulli(double mu_true, double mu_est)
{
    if (!(mu_true >= 0.0 && mu_true <= 1.0) || !(mu_est >= 0.0 && mu_est <= 1.0))
        throw std::invalid_argument("kl_bernoulli: probabilities must lie in [0,1]");
    auto term = [](double p, double q) -> double {
        if (p == 0.0) return 0.0;
        if (q == 0.0) return std::numeric_limits<double>::infinity();
        return p * std::log(p / q);
    };
    const double kl = term(mu_true, mu_est) + term(1.0 - mu_true, 1.0 - mu_est);
    if (!std::isfinite(kl)) return {std::numeric_limits<double>::infinity(), true};
    return {std::max(0.0, kl), false};
}

// ---------------------------------------------------------------------------
// SimConfig

void SimConfig::validate() const
{
    if (n.empty() || log10_rho.empty() || lambda.empty() || motifs.empty())
        throw std::invalid_argument("SimConfig: every design list must be nonempty");
    if (replicates < 1) throw std::invalid_argument("SimConfig: replicates must be >= 1");
    if (q_max < 1) throw std::invalid_argument("SimConfig: q_max must be >= 1");
    if (grid < 2) throw std::invalid_argument("SimConfig: grid must be >= 2");
    for (auto x : n)
        if (x < 4) throw std::invalid_argument("SimConfig: graph sizes must be >= 4");
    for (const auto& m : motifs) motif_from_string(m);
}

SimConfig SimConfig::from_json(const Json& j)
{
    SimConfig c;
    if (j.contains("n")) c.n = j.at("n").get<std::vector<std::size_t>>();
    if (j.contains("log10_rho")) c.log10_rho = j.at("log10_rho").get<std::vector<double>>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<std::vector<double>>();
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
    if (j.contains("q_max")) c.q_max = j.at("q_max").get<int>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::size_t>();
    if (j.contains("motifs")) c.motifs = j.at("motifs").get<std::vector<std::string>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallelism")) c.threads = j.at("parallelism").get<unsigned>();
    if (j.contains("fit")) {
        const auto& f = j.at("fit");
        if (f.contains("max_iter")) c.fit.max_iter = f.at("max_iter").get<int>();
        if (f.contains("tol")) c.fit.tol = f.at("tol").get<double>();
        if (f.contains("restarts")) c.fit.restarts = f.at("restarts").get<int>();
    }
    c.validate();
    return c;
}

Json SimConfig::to_json() const
{
    return Json{{"n", n},
                {"log10_rho", log10_rho},
                {"lambda", lambda},
                {"replicates", replicates},
                {"q_max", q_max},
                {"grid", grid},
                {"motifs", motifs},
                {"seed", seed},
                {"parallelism", threads},
                {"fit", {{"max_iter", fit.max_iter}, {"tol", fit.tol}, {"restarts", fit.restarts}}}};
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t n, double log10_rho, double lambda, int replicate)
{
    return derive_seed(master, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(log10_rho),
                                std::bit_cast<std::uint64_t>(lambda), static_cast<std::uint64_t>(replicate)});
}

// ---------------------------------------------------------------------------
// Simulation

MetricsRow run_replicate(const SimConfig& config, std::size_t n, double log10_rho, double lambda, int replicate)
{
    const auto start = std::chrono::steady_clock::now();
    MetricsRow row;
    row.n = n;
    row.log10_rho = log10_rho;
    row.lambda = lambda;
    row.replicate = replicate;
    row.seed = replicate_seed(config.seed, n, log10_rho, lambda, replicate);
    try {
        const double rho = std::pow(10.0, log10_rho);
        const auto truth = GraphonSpec::product_form(rho, lambda);
        const auto [graph, latent] = sample_wgraph(truth, n, derive_seed(row.seed, {1}));
        row.edges = graph.num_edges();

        FitConfig fit_cfg = config.fit;
        fit_cfg.seed = derive_seed(row.seed, {2});
        const auto ens = fit_ensemble(graph, config.q_max, fit_cfg);
        row.map_q = ens.map_q;
        row.elbos = ens.elbos();
        row.weights = ens.weights;

        row.rmse_map = rmse(truth, grid_estimate(ens.map_fit(), config.grid));
        row.rmse_averaged = rmse(truth, grid_estimate(ens, config.grid));

        for (const auto& name : config.motifs) {
            const auto motif = motif_from_string(name);
            MotifMetrics mm;
            mm.motif = motif.name();
            mm.mu_true = mu_product_form(rho, lambda, motif);
            mm.mu_map = mu_map(ens, motif);
            mm.mu_averaged = mu_averaged(ens, motif);
            mm.kl_map = kl_bernoulli(mm.mu_true, mm.mu_map);
            mm.kl_averaged = kl_bernoulli(mm.mu_true, mm.mu_averaged);
            row.motifs.push_back(std::move(mm));
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

Quartiles quartiles(std::vector<double> v)
{
    if (v.empty()) return {std::nan(""), std::nan(""), std::nan("")};
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

void write_metrics_csv(const SimConfig& config, const std::vector<MetricsRow>& rows, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "n,log10_rho,lambda,replicate,seed,status,edges,map_q,rmse_map,rmse_averaged";
    for (const auto& name : config.motifs) {
        const auto m = motif_from_string(name).name();
        out << ",mu_true_" << m << ",mu_map_" << m << ",kl_" << m << ",kl_flag_" << m << ",mu_avg_" << m << ",kl_avg_" << m;
    }
    for (int Q = 1; Q <= config.q_max; ++Q) out << ",elbo_q" << Q;
    out << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << format_number(r.log10_rho) << ',' << format_number(r.lambda) << ',' << r.replicate << ','
            << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << r.edges << ',' << r.map_q << ','
            << format_number(r.rmse_map) << ',' << format_number(r.rmse_averaged);
        for (std::size_t k = 0; k < config.motifs.size(); ++k) {
            if (r.ok) {
                const auto& m = r.motifs[k];
                out << ',' << format_number(m.mu_true) << ',' << format_number(m.mu_map) << ',' << kl_field(m.kl_map) << ','
                    << (m.kl_map.degenerate ? 1 : 0) << ',' << format_number(m.mu_averaged) << ','
                    << kl_field(m.kl_averaged);
            } else {
                out << ",,,,,,";
            }
        }
        for (int Q = 1; Q <= config.q_max; ++Q)
            out << ',' << (r.ok ? format_number(r.elbos[Q - 1]) : std::string());
        out << '\n';
    }
}

void write_summary_csv(const SimConfig& config, const std::vector<MetricsRow>& rows, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "n,log10_rho,lambda,replicates_ok,failures,map_q_mode,rmse_q1,rmse_median,rmse_q3";
    for (const auto& name : config.motifs) {
        const auto m = motif_from_string(name).name();
        out << ",kl_" << m << "_q1,kl_" << m << "_median,kl_" << m << "_q3,kl_" << m << "_degenerate";
    }
    out << '\n';

    std::map<std::tuple<std::size_t, double, double>, std::vector<const MetricsRow*>> cells;
    for (const auto& r : rows) cells[{r.n, r.log10_rho, r.lambda}].push_back(&r);
    for (const auto& [key, members] : cells) {
        const auto& [n, lr, lambda] = key;
        std::vector<double> rm;
        std::map<int, int> q_counts;
        std::size_t failures = 0;
        for (const auto* r : members) {
            if (!r->ok) {
                ++failures;
                continue;
            }
            rm.push_back(r->rmse_map);
            ++q_counts[r->map_q];
        }
        int mode = 0, best = -1;
        for (const auto& [q, c] : q_counts)
            if (c > best) {
                best = c;
                mode = q;
            }
        const auto rq = quartiles(rm);
        out << n << ',' << format_number(lr) << ',' << format_number(lambda) << ',' << rm.size() << ',' << failures << ','
            << mode << ',' << format_number(rq.q1) << ',' << format_number(rq.median) << ',' << format_number(rq.q3);
        for (std::size_t k = 0; k < config.motifs.size(); ++k) {
            std::vector<double> kl;
            std::size_t degenerate = 0;
            for (const auto* r : members) {
                if (!r->ok) continue;
                if (r->motifs[k].kl_map.degenerate)
                    ++degenerate;
                else
                    kl.push_back(r->motifs[k].kl_map.value);
            }
            const auto kq = quartiles(kl);
            out << ',' << format_number(kq.q1) << ',' << format_number(kq.median) << ',' << format_number(kq.q3) << ','
                << degenerate;
        }
        out << '\n';
    }
}

namespace {

void write_q_posterior(const SimConfig& config, const std::vector<MetricsRow>& rows, const std::filesystem::path& dir)
{
    {
        auto out = open_out(dir / "q_posterior.csv");
        out << "n,log10_rho,lambda,replicate,Q,weight\n";
        for (const auto& r : rows) {
            if (!r.ok) continue;
            for (int Q = 1; Q <= config.q_max; ++Q)
                out << r.n << ',' << format_number(r.log10_rho) << ',' << format_number(r.lambda) << ',' << r.replicate
                    << ',' << Q << ',' << format_number(r.weights[Q - 1]) << '\n';
        }
    }
    // per-cell averaged posterior of Q and MAP counts (histogram data)
    std::map<std::tuple<std::size_t, double, double>, std::pair<std::vector<double>, std::vector<int>>> cells;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        auto& [mean, counts] = cells[{r.n, r.log10_rho, r.lambda}];
        mean.resize(config.q_max, 0.0);
        counts.resize(config.q_max, 0);
        for (int Q = 1; Q <= config.q_max; ++Q) mean[Q - 1] += r.weights[Q - 1];
        ++counts[r.map_q - 1];
    }
    auto out = open_out(dir / "q_posterior_summary.csv");
    out << "n,log10_rho,lambda,Q,mean_weight,map_count\n";
    for (const auto& [key, value] : cells) {
        const auto& [n, lr, lambda] = key;
        const auto& [mean, counts] = value;
        int total = 0;
        for (int c : counts) total += c;
        for (int Q = 1; Q <= config.q_max; ++Q)
            out << n << ',' << format_number(lr) << ',' << format_number(lambda) << ',' << Q << ','
                << format_number(mean[Q - 1] / total) << ',' << counts[Q - 1] << '\n';
    }
}

} // namespace

SimulationResult run_simulation(const SimConfig& config, const std::optional<std::filesystem::path>& out_dir)
{
    config.validate();
    struct Task
    {
        std::size_t n;
        double log10_rho, lambda;
        int replicate;
    };
    SimulationResult result;
    std::vector<Task> tasks;
    for (auto n : config.n)
        for (double lr : config.log10_rho)
            for (double lambda : config.lambda) {
                if (!cell_valid(lr, lambda)) {
                    result.skipped_cells.push_back(cell_label(n, lr, lambda));
                    continue;
                }
                for (int r = 0; r < config.replicates; ++r) tasks.push_back({n, lr, lambda, r});
            }

    result.rows.resize(tasks.size());
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
        const auto& t = tasks[i];
        result.rows[i] = run_replicate(config, t.n, t.log10_rho, t.lambda, t.replicate);
    });
    for (const auto& r : result.rows) result.failures += r.ok ? 0 : 1;

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        write_metrics_csv(config, result.rows, *out_dir / "metrics.csv");
        write_summary_csv(config, result.rows, *out_dir / "summary.csv");
        write_q_posterior(config, result.rows, *out_dir);
        {
            auto out = open_out(*out_dir / "timings.csv");
            out << "n,log10_rho,lambda,replicate,wall_seconds\n";
            for (const auto& r : result.rows)
                out << r.n << ',' << format_number(r.log10_rho) << ',' << format_number(r.lambda) << ',' << r.replicate
                    << ',' << format_number(r.wall_seconds) << '\n';
        }
        Json seeds = Json::array();
        Json errors = Json::array();
        for (const auto& r : result.rows) {
            seeds.push_back({{"cell", cell_label(r.n, r.log10_rho, r.lambda)}, {"replicate", r.replicate}, {"seed", r.seed}});
            if (!r.ok)
                errors.push_back({{"cell", cell_label(r.n, r.log10_rho, r.lambda)}, {"replicate", r.replicate}, {"error", r.error}});
        }
        write_json(Json{{"tool", kVersion},
                        {"command", "simulate"},
                        {"config", config.to_json()},
                        {"skipped_cells", result.skipped_cells},
                        {"failures", result.failures},
                        {"errors", std::move(errors)},
                        {"seeds", std::move(seeds)}},
                   *out_dir / "manifest.json");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Network analysis

EstimateReport analyze_graph(const Graph& graph, const AnalyzeOptions& options)
{
    EstimateReport rep;
    rep.nodes = graph.num_nodes();
    rep.edges = graph.num_edges();
    rep.ensemble = fit_ensemble(graph, options.q_max, options.fit, options.threads);
    rep.grid_map = grid_estimate(rep.ensemble.map_fit(), options.grid, options.threads);
    rep.grid_averaged = grid_estimate(rep.ensemble, options.grid, options.threads);
    for (const auto& name : options.motifs) {
        const auto motif = motif_from_string(name);
        MotifEstimate est;
        est.motif = motif.name();
        est.mu_map = mu_map(rep.ensemble, motif);
        est.mu_averaged = mu_averaged(rep.ensemble, motif);
        if (static_cast<std::size_t>(motif.k()) <= graph.num_nodes())
            est.empirical = graph.num_nodes() <= 500
                                ? empirical_frequency(graph, motif, FrequencyMode::exhaustive()).value
                                : empirical_frequency(graph, motif, FrequencyMode::sampled(1'000'000, options.fit.seed)).value;
        rep.motifs.push_back(std::move(est));
    }
    return rep;
}

EstimateReport analyze_network(const std::filesystem::path& edge_list,
                               const AnalyzeOptions& options,
                               const std::optional<std::filesystem::path>& out_dir)
{
    const auto input = read_edge_list(edge_list);
    auto rep = analyze_graph(input.graph, options);
    rep.self_loops_dropped = input.self_loops_dropped;
    if (!out_dir) return rep;

    std::filesystem::create_directories(*out_dir);
    write_json(to_json(rep.ensemble, options.include_tau), *out_dir / "fit.json");
    write_grid_csv(rep.grid_map, *out_dir / "grid.csv");
    write_grid_long_csv(rep.grid_map, *out_dir / "grid_long.csv");
    write_json(grid_to_json(rep.grid_map), *out_dir / "grid.json");
    write_grid_csv(rep.grid_averaged, *out_dir / "grid_averaged.csv");
    {
        auto out = open_out(*out_dir / "q_posterior.csv");
        out << "Q,elbo,weight\n";
        const auto e = rep.ensemble.elbos();
        for (int Q = 1; Q <= rep.ensemble.q_max(); ++Q)
            out << Q << ',' << format_number(e[Q - 1]) << ',' << format_number(rep.ensemble.weights[Q - 1]) << '\n';
    }
    Json motifs = Json::array();
    for (const auto& m : rep.motifs)
        motifs.push_back({{"motif", m.motif}, {"mu_map", m.mu_map}, {"mu_averaged", m.mu_averaged}, {"empirical", m.empirical}});
    write_json(motifs, *out_dir / "motifs.json");
    write_json(Json{{"tool", kVersion},
                    {"command", "fit"},
                    {"input", edge_list.filename().string()},
                    {"nodes", rep.nodes},
                    {"edges", rep.edges},
                    {"self_loops_dropped", rep.self_loops_dropped},
                    {"q_max", options.q_max},
                    {"grid", options.grid},
                    {"seed", options.fit.seed},
                    {"restarts", options.fit.restarts},
                    {"map_q", rep.ensemble.map_q},
                    {"weights", rep.ensemble.weights},
                    {"warnings", rep.ensemble.warnings}},
               *out_dir / "report.json");
    return rep;
}

} // namespace wgraph
