#pragma once

// Conditional intensity, Poisson log-likelihood and the l0-penalized score of a
// structural Hawkes process on binned counts.

#include <span>

#include "shp/fit_config.hpp"
#include "shp/model.hpp"

namespace shp {

struct IntensityMatrix {
    Matrix<double> values;  // lambda_v(k delta), rows are bins
    double delta = 1.0;
};

// Exponentially decayed history L(k, s) = sum_{i<k} e^{-beta (k-i) delta} X(i, s),
// computed by L(k, s) = r (L(k-1, s) + X(k-1, s)) with r = e^{-beta delta}.
Matrix<double> lag_state(const BinnedCounts& counts, double beta);

// lambda_v(k) = mu_v + sum_s alpha(s, v) (L(k, s) + [s != v] X(k, s)).
IntensityMatrix intensity(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g);

// log Pois(x; mean), with log Pois(0; 0) = 0.
double poisson_log_pmf(Count x, double mean);

// Full log-probability sum_{v,k} log Pois(X(k, v); lambda_v(k) delta), including
// the -log X! + X log delta terms. Throws NumericError when a positive count
// meets a zero intensity.
double log_likelihood(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g);

// Contribution of column v alone; log_likelihood is the sum over columns.
double column_log_likelihood(const ShpParams& params, const BinnedCounts& counts, NodeIndex v);

// log_likelihood - alpha_s * |E(g)|. Only off-diagonal graph edges are penalized.
double penalized_score(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g,
                       double alpha_s);

// Maximized contribution of node v with the given parents: the MM fit of column v
// (mu_v, alpha(parents, v) and, when enabled, alpha(v, v)) minus alpha_s * |parents|.
// Summed over nodes this equals penalized_score of the jointly fitted model.
double local_score(NodeIndex v, std::span<const NodeIndex> parents, const BinnedCounts& counts, double alpha_s,
                   const FitConfig& cfg);

}  // namespace shp
