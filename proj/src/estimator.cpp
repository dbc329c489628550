#include "shp/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "shp/error.hpp"

namespace shp {

void validate(const FitConfig& cfg) {
    if (cfg.max_iters < 1) throw ValidationError("max_iters must be positive");
    if (!(cfg.rel_tol > 0.0)) throw ValidationError("rel_tol must be positive");
    if (!(cfg.mu_floor > 0.0)) throw ValidationError("mu_floor must be positive");
    if (!(cfg.alpha_init > 0.0) || !std::isfinite(cfg.alpha_init))
        throw ValidationError("alpha_init must be positive");
    if (cfg.mu_init == MuInit::Fixed && !(cfg.mu_init_value > 0.0))
        throw ValidationError("mu_init_value must be positive");
    if (!(cfg.beta > 0.0)) throw ValidationError("beta must be positive");
}

FitData::FitData(const BinnedCounts& counts, double beta)
    : counts_(&counts), beta_(beta), lag_(lag_state(counts, beta)) {
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    const std::size_t n = counts.nodes();
    const double delta = counts.delta();
    const double log_delta = std::log(delta);
    lag_total_.assign(n, 0.0);
    cross_total_.assign(n, 0.0);
    active_.resize(n);
    log_const_.assign(n, 0.0);
    for (std::size_t k = 0; k < counts.bins(); ++k)
        for (NodeIndex s = 0; s < n; ++s) {
            const Count x = counts(k, s);
            lag_total_[s] += lag_(k, s);
            cross_total_[s] += lag_(k, s) + static_cast<double>(x);
            if (x > 0) {
                active_[s].push_back(k);
                const auto xd = static_cast<double>(x);
                log_const_[s] += xd * log_delta - std::lgamma(xd + 1.0);
            }
        }
    for (NodeIndex s = 0; s < n; ++s) {
        lag_total_[s] *= delta;
        cross_total_[s] *= delta;
    }
}

namespace {

// Column v restricted to its active bins: counts x, and per source the exposure
// L(k, s) + [s != v] X(k, s) stored row-major (bin, source).
struct ColumnProblem {
    std::vector<double> x;
    std::vector<double> exposure;
    std::vector<double> denom;  // exposure totals, times delta
    std::size_t n_src = 0;
    double rate_scale = 0.0;  // K * delta
    double log_const = 0.0;

    double loglik(double mu, std::span<const double> alpha, std::vector<double>& lambda) const {
        double ll = log_const - rate_scale * mu;
        for (std::size_t j = 0; j < n_src; ++j) ll -= alpha[j] * denom[j];
        for (std::size_t r = 0; r < x.size(); ++r) {
            double l = mu;
            const double* e = exposure.data() + r * n_src;
            for (std::size_t j = 0; j < n_src; ++j) l += alpha[j] * e[j];
            lambda[r] = l;
            ll += x[r] * std::log(l);
        }
        return ll;
    }
};

ColumnProblem make_problem(const FitData& data, NodeIndex v, std::span<const NodeIndex> sources) {
    const auto& counts = data.counts();
    const auto& active = data.active_bins(v);
    ColumnProblem p;
    p.n_src = sources.size();
    p.rate_scale = static_cast<double>(counts.bins()) * counts.delta();
    p.log_const = data.log_constant(v);
    p.x.reserve(active.size());
    p.exposure.reserve(active.size() * p.n_src);
    for (std::size_t k : active) {
        p.x.push_back(static_cast<double>(counts(k, v)));
        for (NodeIndex s : sources)
            p.exposure.push_back(data.lag()(k, s) + (s != v ? static_cast<double>(counts(k, s)) : 0.0));
    }
    for (NodeIndex s : sources) p.denom.push_back(data.exposure_total(s, s == v));
    return p;
}

bool has_converged(double previous, double current, double rel_tol) {
    const double change = std::abs(current - previous);
    return change == 0.0 || change <= rel_tol * std::abs(previous);
}

}  // namespace

ColumnFit fit_column(const FitData& data, NodeIndex v, std::span<const NodeIndex> parents, const FitConfig& cfg) {
    const auto& counts = data.counts();
    if (v >= counts.nodes()) throw ValidationError("node index out of range");
    ColumnFit out;
    out.node = v;
    for (NodeIndex s : parents) {
        if (s == v) throw ValidationError("a node cannot be its own parent");
        if (s >= counts.nodes()) throw ValidationError("parent index out of range");
        out.sources.push_back(s);
    }
    std::sort(out.sources.begin(), out.sources.end());
    if (cfg.self_excitation) out.sources.push_back(v);

    const ColumnProblem p = make_problem(data, v, out.sources);
    const std::size_t n_bins = counts.bins();
    const double mean_rate =
        n_bins == 0 ? 0.0 : static_cast<double>(counts.column_total(v)) / (static_cast<double>(n_bins) * counts.delta());
    double mu = std::max(cfg.mu_init == MuInit::Fixed ? cfg.mu_init_value : mean_rate, cfg.mu_floor);
    std::vector<double> alpha(p.n_src);
    for (std::size_t j = 0; j < p.n_src; ++j) alpha[j] = p.denom[j] > 0.0 ? cfg.alpha_init : 0.0;

    std::vector<double> lambda(p.x.size());
    std::vector<double> next_alpha(p.n_src);
    double ll = p.loglik(mu, alpha, lambda);
    out.trace.push_back(ll);
    while (out.iterations < cfg.max_iters) {
        // lambda holds the intensities at the current iterate.
        double mu_num = 0.0;
        std::fill(next_alpha.begin(), next_alpha.end(), 0.0);
        for (std::size_t r = 0; r < p.x.size(); ++r) {
            const double w = p.x[r] / lambda[r];
            mu_num += w;
            const double* e = p.exposure.data() + r * p.n_src;
            for (std::size_t j = 0; j < p.n_src; ++j) next_alpha[j] += w * e[j];
        }
        mu = p.rate_scale > 0.0 ? std::max(mu * mu_num / p.rate_scale, cfg.mu_floor) : cfg.mu_floor;
        for (std::size_t j = 0; j < p.n_src; ++j)
            alpha[j] = p.denom[j] > 0.0 ? alpha[j] * next_alpha[j] / p.denom[j] : 0.0;
        const double next_ll = p.loglik(mu, alpha, lambda);
        ++out.iterations;
        out.trace.push_back(next_ll);
        const bool done = has_converged(ll, next_ll, cfg.rel_tol);
        ll = next_ll;
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.mu = mu;
    out.alpha = std::move(alpha);
    out.loglik = ll;
    return out;
}

double local_score(NodeIndex v, std::span<const NodeIndex> parents, const BinnedCounts& counts, double alpha_s,
                   const FitConfig& cfg) {
    validate(cfg);
    if (!(alpha_s >= 0.0)) throw ValidationError("alpha_s must be >= 0");
    const FitData data(counts, cfg.beta);
    return fit_column(data, v, parents, cfg).loglik - alpha_s * static_cast<double>(parents.size());
}

FitResult fit(const CausalGraph& g, const FitData& data, const FitConfig& cfg) {
    validate(cfg);
    const auto& counts = data.counts();
    if (g.size() != counts.nodes()) throw ValidationError("graph and counts have different node counts");
    if (!is_acyclic(g)) throw ValidationError("fit needs an acyclic graph");
    const std::size_t n = g.size();
    FitResult out;
    out.params = ShpParams::zeros(n, data.beta(), counts.delta());
    out.converged = true;
    std::vector<ColumnFit> columns;
    columns.reserve(n);
    std::size_t longest = 0;
    for (NodeIndex v = 0; v < n; ++v) {
        columns.push_back(fit_column(data, v, g.parents(v), cfg));
        const auto& c = columns.back();
        out.params.mu[v] = c.mu;
        for (std::size_t j = 0; j < c.sources.size(); ++j) out.params.alpha(c.sources[j], v) = c.alpha[j];
        out.converged = out.converged && c.converged;
        out.iterations = std::max(out.iterations, c.iterations);
        longest = std::max(longest, c.trace.size());
    }
    out.loglik_trace.assign(longest, 0.0);
    for (const auto& c : columns)
        for (std::size_t j = 0; j < longest; ++j) out.loglik_trace[j] += c.trace[std::min(j, c.trace.size() - 1)];
    return out;
}

FitResult fit(const CausalGraph& g, const BinnedCounts& counts, const FitConfig& cfg) {
    validate(cfg);
    const FitData data(counts, cfg.beta);
    return fit(g, data, cfg);
}

Responsibilities responsibilities(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g) {
    const auto lambda = intensity(params, counts, g);
    const auto lag = lag_state(counts, params.beta);
    const std::size_t n = params.nodes();
    Responsibilities out{Matrix<double>(counts.bins(), n, 0.0), {}};
    out.q_alpha.assign(n, Matrix<double>(counts.bins(), n, 0.0));
    for (std::size_t k = 0; k < counts.bins(); ++k)
        for (NodeIndex v = 0; v < n; ++v) {
            const double l = lambda.values(k, v);
            if (!(l > 0.0))
                throw NumericError("zero intensity at node " + g.nodes()[v] + ", bin " + std::to_string(k + 1));
            out.q_mu(k, v) = params.mu[v] / l;
            for (NodeIndex s = 0; s < n; ++s) {
                const double a = params.alpha(s, v);
                if (a != 0.0)
                    out.q_alpha[s](k, v) = a * (lag(k, s) + (s != v ? static_cast<double>(counts(k, s)) : 0.0)) / l;
            }
        }
    return out;
}

ShpParams mm_step(const ShpParams& params, const BinnedCounts& counts, const CausalGraph& g, double mu_floor) {
    check_support(params, g);
    if (counts.nodes() != params.nodes()) throw ValidationError("dimension mismatch in mm_step");
    const auto q = responsibilities(params, counts, g);
    const FitData data(counts, params.beta);
    const std::size_t n = params.nodes();
    const double rate_scale = static_cast<double>(counts.bins()) * counts.delta();
    ShpParams next = params;
    for (NodeIndex v = 0; v < n; ++v) {
        double mu_num = 0.0;
        for (std::size_t k = 0; k < counts.bins(); ++k)
            mu_num += static_cast<double>(counts(k, v)) * q.q_mu(k, v);
        next.mu[v] = rate_scale > 0.0 ? std::max(mu_num / rate_scale, mu_floor) : mu_floor;
        for (NodeIndex s = 0; s < n; ++s) {
            if (params.alpha(s, v) == 0.0) continue;
            const double denom = data.exposure_total(s, s == v);
            double num = 0.0;
            for (std::size_t k = 0; k < counts.bins(); ++k)
                num += q.q_alpha[s](k, v) * static_cast<double>(counts(k, v));
            next.alpha(s, v) = denom > 0.0 ? num / denom : 0.0;
        }
    }
    return next;
}

}  // namespace shp
