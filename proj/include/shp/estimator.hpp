#pragma once

// Minorization-maximization fitting of a structural Hawkes process on a fixed graph.

#include <span>
#include <vector>

#include "shp/fit_config.hpp"
#include "shp/likelihood.hpp"
#include "shp/model.hpp"

namespace shp {

// Parameter-free quantities of one dataset at a fixed beta, shared by every fit
// on that dataset. Immutable after construction.
class FitData {
public:
    FitData(const BinnedCounts& counts, double beta);

    const BinnedCounts& counts() const noexcept { return *counts_; }
    double beta() const noexcept { return beta_; }
    const Matrix<double>& lag() const noexcept { return lag_; }

    // delta * sum_k (L(k, s) + [!self] X(k, s)): the MM denominator of a strength
    // from s. The self case excludes the same-bin count.
    double exposure_total(NodeIndex s, bool self) const {
        return self ? lag_total_[s] : cross_total_[s];
    }
    // Bins (0-based) where node v has at least one event.
    const std::vector<std::size_t>& active_bins(NodeIndex v) const { return active_[v]; }
    // sum_k (X log delta - log X!) of column v.
    double log_constant(NodeIndex v) const { return log_const_[v]; }

private:
    const BinnedCounts* counts_;
    double beta_;
    Matrix<double> lag_;
    std::vector<double> lag_total_;
    std::vector<double> cross_total_;
    std::vector<std::vector<std::size_t>> active_;
    std::vector<double> log_const_;
};

// MM fit of a single column: mu_v and the strengths into v from `sources`.
struct ColumnFit {
    NodeIndex node = 0;
    std::vector<NodeIndex> sources;  // parents ascending, then v itself when self-excitation is fitted
    std::vector<double> alpha;       // aligned with sources
    double mu = 0.0;
    double loglik = 0.0;
    std::vector<double> trace;  // column log-likelihood at the start and after every step
    int iterations = 0;
    bool converged = false;
};

ColumnFit fit_column(const FitData& data, NodeIndex v, std::span<const NodeIndex> parents, const FitConfig& cfg);

struct FitResult {
    ShpParams params;
    std::vector<double> loglik_trace;  // entry 0 is the initial value
    bool converged = false;
    int iterations = 0;
    double log_likelihood() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
};

// Per-cell share of the intensity: q_mu(k, v) = mu_v / lambda_v(k) and
// q_alpha[s](k, v) = sum_i phi_{s,v}((k-i) delta) X(i, s) / lambda_v(k).
// The per-lag terms are summed through the kernel recursion, never stored.
struct Responsibilities {
    Matrix<double> q_mu;
    std::vector<Matrix<double>> q_alpha;  // indexed by source node
};

Responsibilities responsibilities(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g);

// One closed-form MM update of every column. Zero strengths stay zero; a strength
// whose source never fires is set to 0; mu is clamped at mu_floor.
ShpParams mm_step(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g,
                  double mu_floor = FitConfig{}.mu_floor);

// Iterates MM on every column until the relative log-likelihood change drops
// below cfg.rel_tol or cfg.max_iters is hit. Columns are independent; a column
// that has converged is frozen while the others continue.
FitResult fit(const CausalGraph& g, const BinnedCounts& counts, const FitConfig& cfg);
FitResult fit(const CausalGraph& g, const FitData& data, const FitConfig& cfg);

}  // namespace shp
