#include "shp/likelihood.hpp"

#include <cmath>
#include <limits>

#include "shp/error.hpp"

namespace shp {

Matrix<double> lag_state(const BinnedCounts& counts, double beta) {
    const std::size_t k_max = counts.bins();
    const std::size_t n = counts.nodes();
    const double r = decay_factor(beta, counts.delta());
    Matrix<double> lag(k_max, n, 0.0);
    for (std::size_t k = 1; k < k_max; ++k)
        for (std::size_t s = 0; s < n; ++s)
            lag(k, s) = r * (lag(k - 1, s) + static_cast<double>(counts(k - 1, s)));
    return lag;
}

namespace {

void check_dimensions(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g) {
    if (counts.nodes() != params.nodes() || g.size() != params.nodes())
        throw ValidationError("dimension mismatch: counts have " + std::to_string(counts.nodes()) +
                              " columns, parameters " + std::to_string(params.nodes()) + " nodes, graph " +
                              std::to_string(g.size()) + " nodes");
    if (params.delta != counts.delta()) throw ValidationError("parameter bin width differs from the counts");
    check_support(params, g);
}

double column_loglik_unchecked(const ShpParams& params, const BinnedCounts& counts, const Matrix<double>& lag,
                               NodeIndex v) {
    const std::size_t n = params.nodes();
    double total = 0.0;
    for (std::size_t k = 0; k < counts.bins(); ++k) {
        double lambda = params.mu[v];
        for (std::size_t s = 0; s < n; ++s) {
            const double a = params.alpha(s, v);
            if (a != 0.0) lambda += a * (lag(k, s) + (s != v ? static_cast<double>(counts(k, s)) : 0.0));
        }
        const Count x = counts(k, v);
        if (x > 0 && !(lambda > 0.0))
            throw NumericError("zero intensity with positive count at node " + std::to_string(v) + ", bin " +
                               std::to_string(k + 1));
        total += poisson_log_pmf(x, lambda * counts.delta());
    }
    return total;
}

}  // namespace

IntensityMatrix intensity(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g) {
    check_dimensions(params, counts, g);
    const auto lag = lag_state(counts, params.beta);
    const std::size_t n = params.nodes();
    IntensityMatrix out{Matrix<double>(counts.bins(), n, 0.0), counts.delta()};
    for (std::size_t k = 0; k < counts.bins(); ++k)
        for (std::size_t v = 0; v < n; ++v) {
            double lambda = params.mu[v];
            for (std::size_t s = 0; s < n; ++s) {
                const double a = params.alpha(s, v);
                if (a != 0.0) lambda += a * (lag(k, s) + (s != v ? static_cast<double>(counts(k, s)) : 0.0));
            }
            out.values(k, v) = lambda;
        }
    return out;
}

double poisson_log_pmf(Count x, double mean) {
    if (x == 0) return -mean;
    if (!(mean > 0.0)) return -std::numeric_limits<double>::infinity();
    const auto xd = static_cast<double>(x);
    return xd * std::log(mean) - mean - std::lgamma(xd + 1.0);
}

double log_likelihood(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g) {
    check_dimensions(params, counts, g);
    const auto lag = lag_state(counts, params.beta);
    double total = 0.0;
    for (NodeIndex v = 0; v < params.nodes(); ++v) total += column_loglik_unchecked(params, counts, lag, v);
    return total;
}

double column_log_likelihood(const ShpParams& params, const BinnedCounts& counts, NodeIndex v) {
    if (counts.nodes() != params.nodes() || v >= params.nodes())
        throw ValidationError("dimension mismatch in column_log_likelihood");
    return column_loglik_unchecked(params, counts, lag_state(counts, params.beta), v);
}

double penalized_score(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g,
                       double alpha_s) {
    if (!(alpha_s >= 0.0)) throw ValidationError("alpha_s must be >= 0");
    return log_likelihood(params, counts, g) - alpha_s * static_cast<double>(g.edge_count());
}

}  // namespace shp
