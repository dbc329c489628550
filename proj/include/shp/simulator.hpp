#pragma once

// Ground-truth generation: random DAGs, parameters, continuous Hawkes streams
// (Ogata thinning), direct discrete structural Hawkes samples and the
// bivariate instantaneous pair.

#include <cstdint>
#include <string>
#include <vector>

#include "shp/model.hpp"

namespace shp {

// Closed interval; construction normalizes the bound order.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(a < b ? a : b), hi(a < b ? b : a) {}
    bool operator==(const Interval&) const = default;
};

enum class Generator { Continuous, Discrete };

struct SimConfig {
    std::size_t n_nodes = 20;
    double avg_indegree = 1.5;
    Interval alpha_range{0.3, 0.5};
    Interval mu_range{0.0001, 0.0005};  // per unit time
    double delta = 5.0;
    std::size_t n_bins = 20000;
    double beta = 1.0;
    bool self_excitation = false;
    Interval self_alpha_range{0.1, 0.3};
    Generator generator = Generator::Continuous;
    std::uint64_t seed = 0;
};

// Throws ValidationError on out-of-domain fields.
void validate(const SimConfig& cfg);

// Node identifiers v1..vn.
std::vector<std::string> default_node_names(std::size_t n);

// Uniform random node permutation, then each forward pair independently with
// probability 2*avg_indegree/(n-1).
CausalGraph random_dag(std::size_t n, double avg_indegree, std::uint64_t seed);

enum class KernelKind {
    Continuous,  // phi(t) = alpha * beta * exp(-beta t): branching ratio alpha
    Discrete,    // phi(k delta) = alpha * exp(-beta k delta), Poisson(lambda * delta) per bin
};

// Mean offspring matrix B(src, dst) of one event under the given kernel.
Matrix<double> branching_matrix(const ShpParams& params, KernelKind kind);

// Largest eigenvalue modulus of the branching matrix.
double spectral_radius(const ShpParams& params, KernelKind kind);

// Strengths uniform on the edges (and on the diagonal when self_excitation is on),
// immigration uniform in mu_range. Parameters that violate stability under either
// kernel are redrawn, at most 100 times.
ShpParams sample_params(const CausalGraph& g, const SimConfig& cfg, std::uint64_t seed);

// Multivariate exponential-kernel Hawkes process on (0, horizon] by Ogata thinning.
ContinuousSequence simulate_continuous(const ShpParams& params, const CausalGraph& g, double horizon,
                                       std::uint64_t seed);

// Direct draw of K bins of the discrete structural Hawkes process. Within a bin,
// nodes are drawn in topological order so children see their parents' same-bin
// counts; a node's own same-bin count never feeds its intensity.
BinnedCounts simulate_discrete(const ShpParams& params, const CausalGraph& g, std::size_t n_bins,
                               std::uint64_t seed);

// i.i.d. rows of X ~ Pois(mu_x), Y = sum_{i<=X} Pois(alpha) + Pois(mu_y); unit bin width.
BinnedCounts simulate_instantaneous_pair(double alpha, double mu_x, double mu_y, std::size_t n,
                                         std::uint64_t seed);

// One full ground-truth draw from a config: DAG, parameters and binned data.
struct SimulatedDataset {
    CausalGraph truth;
    ShpParams params;
    BinnedCounts counts;
};

SimulatedDataset simulate_dataset(const SimConfig& cfg);

}  // namespace shp
