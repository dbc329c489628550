#include "shp/simulator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "shp/error.hpp"
#include "shp/rng.hpp"

namespace shp {

namespace {

constexpr int kMaxParamAttempts = 100;

// Stream tags for seed derivation.
constexpr std::uint64_t kDagStream = 0xda9;
constexpr std::uint64_t kParamStream = 0x9a7a;
constexpr std::uint64_t kEventStream = 0xe7e;

void check_interval(const Interval& r, const char* name) {
    if (!(r.lo >= 0.0) || !std::isfinite(r.hi))
        throw ValidationError(std::string(name) + " bounds must be finite and non-negative");
}

double uniform_in(Rng& rng, const Interval& r) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.n_nodes == 0) throw ValidationError("n_nodes must be positive");
    if (!(cfg.avg_indegree >= 0.0)) throw ValidationError("avg_indegree must be >= 0");
    if (cfg.n_nodes > 1 && cfg.avg_indegree > (static_cast<double>(cfg.n_nodes) - 1.0) / 2.0)
        throw ValidationError("avg_indegree exceeds (n_nodes - 1) / 2");
    check_interval(cfg.alpha_range, "alpha_range");
    check_interval(cfg.mu_range, "mu_range");
    check_interval(cfg.self_alpha_range, "self_alpha_range");
    if (!(cfg.delta > 0.0) || !std::isfinite(cfg.delta)) throw ValidationError("delta must be positive");
    if (cfg.n_bins == 0) throw ValidationError("n_bins must be positive");
    if (!(cfg.beta > 0.0)) throw ValidationError("beta must be positive");
    if (cfg.generator == Generator::Continuous && std::isinf(cfg.beta))
        throw ValidationError("the continuous generator needs a finite beta");
}

std::vector<std::string> default_node_names(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) names.push_back("v" + std::to_string(i));
    return names;
}

CausalGraph random_dag(std::size_t n, double avg_indegree, std::uint64_t seed) {
    if (n == 0) throw ValidationError("random_dag needs at least one node");
    CausalGraph g(default_node_names(n));
    if (n == 1) return g;
    if (!(avg_indegree >= 0.0) || avg_indegree > (static_cast<double>(n) - 1.0) / 2.0)
        throw ValidationError("avg_indegree " + std::to_string(avg_indegree) + " infeasible for " +
                              std::to_string(n) + " nodes");
    Rng rng(seed);
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::shuffle(order.begin(), order.end(), rng);
    const double p = 2.0 * avg_indegree / (static_cast<double>(n) - 1.0);
    std::bernoulli_distribution coin(std::min(p, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) g.add_edge(order[i], order[j]);
    return g;
}

Matrix<double> branching_matrix(const ShpParams& params, KernelKind kind) {
    const std::size_t n = params.nodes();
    Matrix<double> b(n, n, 0.0);
    const double r = decay_factor(params.beta, params.delta);
    // Discrete kernel mass: delta * sum_{j>=0} r^j, self term starts at j = 1.
    const double cross = params.delta / (1.0 - r);
    const double self = params.delta * r / (1.0 - r);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t v = 0; v < n; ++v) {
            const double a = params.alpha(s, v);
            b(s, v) = kind == KernelKind::Continuous ? a : a * (s == v ? self : cross);
        }
    return b;
}

double spectral_radius(const ShpParams& params, KernelKind kind) {
    const auto b = branching_matrix(params, kind);
    const auto n = static_cast<Eigen::Index>(b.rows());
    if (n == 0) return 0.0;
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = b(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

ShpParams sample_params(const CausalGraph& g, const SimConfig& cfg, std::uint64_t seed) {
    if (!is_acyclic(g)) throw ValidationError("sample_params needs an acyclic graph");
    check_interval(cfg.alpha_range, "alpha_range");
    check_interval(cfg.mu_range, "mu_range");
    Rng rng(seed);
    const std::size_t n = g.size();
    double last_radius = 0.0;
    for (int attempt = 0; attempt < kMaxParamAttempts; ++attempt) {
        ShpParams p = ShpParams::zeros(n, cfg.beta, cfg.delta);
        for (const auto& e : g.edges()) p.alpha(e.from, e.to) = uniform_in(rng, cfg.alpha_range);
        if (cfg.self_excitation)
            for (NodeIndex v = 0; v < n; ++v) p.alpha(v, v) = uniform_in(rng, cfg.self_alpha_range);
        for (NodeIndex v = 0; v < n; ++v) p.mu[v] = uniform_in(rng, cfg.mu_range);
        last_radius = spectral_radius(p, KernelKind::Discrete);
        if (!std::isinf(cfg.beta)) last_radius = std::max(last_radius, spectral_radius(p, KernelKind::Continuous));
        if (last_radius < 1.0) return p;
    }
    throw ValidationError("no stable parameters after " + std::to_string(kMaxParamAttempts) +
                          " attempts; last spectral radius " + std::to_string(last_radius));
}

ContinuousSequence simulate_continuous(const ShpParams& params, const CausalGraph& g, double horizon,
                                       std::uint64_t seed) {
    check_support(params, g);
    if (std::isinf(params.beta)) throw ValidationError("continuous simulation needs a finite beta");
    if (!(horizon >= 0.0)) throw ValidationError("horizon must be non-negative");
    const double radius = spectral_radius(params, KernelKind::Continuous);
    if (radius >= 1.0)
        throw ValidationError("unstable parameters: spectral radius " + std::to_string(radius));

    const std::size_t n = params.nodes();
    const double beta = params.beta;
    const double mu_total = std::accumulate(params.mu.begin(), params.mu.end(), 0.0);
    std::vector<double> excitation(n, 0.0);  // sum_j alpha beta e^{-beta (t - t_j)} per target
    std::vector<double> rates(n, 0.0);
    std::vector<EventRecord> records;
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double t = 0.0;
    double bound = mu_total;
    while (bound > 0.0) {
        const double wait = std::exponential_distribution<double>(bound)(rng);
        const double decay = std::exp(-beta * wait);
        t += wait;
        if (t > horizon) break;
        double total = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            excitation[v] *= decay;
            rates[v] = params.mu[v] + excitation[v];
            total += rates[v];
        }
        if (unit(rng) * bound <= total) {
            double pick = unit(rng) * total;
            std::size_t type = 0;
            while (type + 1 < n && pick >= rates[type]) pick -= rates[type++];
            records.push_back({g.nodes()[type], t});
            for (std::size_t v = 0; v < n; ++v) {
                excitation[v] += params.alpha(type, v) * beta;
                total += params.alpha(type, v) * beta;
            }
        }
        bound = total;
    }
    return ContinuousSequence(std::move(records), horizon);
}

BinnedCounts simulate_discrete(const ShpParams& params, const CausalGraph& g, std::size_t n_bins,
                               std::uint64_t seed) {
    check_support(params, g);
    const auto order = topological_order(g);
    const double radius = spectral_radius(params, KernelKind::Discrete);
    if (radius >= 1.0)
        throw ValidationError("unstable parameters: spectral radius " + std::to_string(radius));

    const std::size_t n = params.nodes();
    const double r = decay_factor(params.beta, params.delta);
    Matrix<Count> x(n_bins, n, 0);
    std::vector<double> lag(n, 0.0);
    std::vector<std::vector<NodeIndex>> sources(n);
    for (NodeIndex v = 0; v < n; ++v)
        for (NodeIndex s = 0; s < n; ++s)
            if (params.alpha(s, v) != 0.0) sources[v].push_back(s);

    Rng rng(seed);
    for (std::size_t k = 0; k < n_bins; ++k) {
        for (NodeIndex v : order) {
            double lambda = params.mu[v];
            for (NodeIndex s : sources[v])
                lambda += params.alpha(s, v) * (lag[s] + (s != v ? static_cast<double>(x(k, s)) : 0.0));
            x(k, v) = draw_poisson(rng, lambda * params.delta);
        }
        for (NodeIndex s = 0; s < n; ++s) lag[s] = r * (lag[s] + static_cast<double>(x(k, s)));
    }
    return BinnedCounts(std::move(x), params.delta, g.nodes());
}

BinnedCounts simulate_instantaneous_pair(double alpha, double mu_x, double mu_y, std::size_t n,
                                         std::uint64_t seed) {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!(mu_x > 0.0)) throw ValidationError("mu_x must be positive");
    if (!(mu_y >= 0.0)) throw ValidationError("mu_y must be non-negative");
    if (n == 0) throw ValidationError("n must be at least 1");
    Rng rng(seed);
    Matrix<Count> x(n, 2, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const Count cause = draw_poisson(rng, mu_x);
        Count effect = draw_poisson(rng, mu_y);
        for (Count i = 0; i < cause; ++i) effect += draw_poisson(rng, alpha);
        x(k, 0) = cause;
        x(k, 1) = effect;
    }
    return BinnedCounts(std::move(x), 1.0, {"X", "Y"});
}

SimulatedDataset simulate_dataset(const SimConfig& cfg) {
    validate(cfg);
    CausalGraph truth = random_dag(cfg.n_nodes, cfg.avg_indegree, derive_seed(cfg.seed, kDagStream));
    ShpParams params = sample_params(truth, cfg, derive_seed(cfg.seed, kParamStream));
    const std::uint64_t event_seed = derive_seed(cfg.seed, kEventStream);
    BinnedCounts counts =
        cfg.generator == Generator::Continuous
            ? bin_events(simulate_continuous(params, truth, static_cast<double>(cfg.n_bins) * cfg.delta, event_seed),
                         cfg.delta, truth.nodes())
            : simulate_discrete(params, truth, cfg.n_bins, event_seed);
    return {std::move(truth), std::move(params), std::move(counts)};
}

}  // namespace shp
