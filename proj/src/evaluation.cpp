#include "shp/evaluation.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "shp/error.hpp"
#include "shp/parallel.hpp"
#include "shp/rng.hpp"

namespace shp {

namespace {

constexpr std::uint64_t kGapStream = 0x9a9;
constexpr std::uint64_t kCellStream = 0xce11;

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

MetricReport compare_graphs(const CausalGraph& truth, const CausalGraph& estimated) {
    if (truth.nodes() != estimated.nodes()) throw ValidationError("graphs are over different node sets");
    const std::size_t n = truth.size();
    std::size_t tp = 0;
    for (const auto& e : estimated.edges())
        if (truth.has_edge(e.from, e.to)) ++tp;
    MetricReport m;
    const auto t_edges = static_cast<double>(truth.edge_count());
    const auto e_edges = static_cast<double>(estimated.edge_count());
    if (t_edges == 0.0 && e_edges == 0.0) {
        m.precision = m.recall = m.f1 = 1.0;
    } else {
        m.precision = ratio_or_zero(static_cast<double>(tp), e_edges);
        m.recall = ratio_or_zero(static_cast<double>(tp), t_edges);
        m.f1 = ratio_or_zero(2.0 * m.precision * m.recall, m.precision + m.recall);
    }
    // Per unordered pair: a lone edge pointing the wrong way is one reversal,
    // anything else costs one per mismatched direction.
    for (NodeIndex a = 0; a < n; ++a)
        for (NodeIndex b = a + 1; b < n; ++b) {
            const bool t_ab = truth.has_edge(a, b), t_ba = truth.has_edge(b, a);
            const bool e_ab = estimated.has_edge(a, b), e_ba = estimated.has_edge(b, a);
            const bool flipped = (t_ab != t_ba) && (e_ab != e_ba) && (t_ab == e_ba);
            m.shd += flipped ? 1 : static_cast<std::size_t>(t_ab != e_ab) + static_cast<std::size_t>(t_ba != e_ba);
        }
    return m;
}

FitConfig instantaneous_fit_config() {
    FitConfig cfg;
    cfg.beta = std::numeric_limits<double>::infinity();
    cfg.self_excitation = false;
    return cfg;
}

GapSummary bivariate_gap(double alpha, double mu_x, double mu_y, std::size_t n, std::size_t trials,
                         std::uint64_t seed, const FitConfig& cfg) {
    if (!(alpha > 0.0)) throw ValidationError("bivariate_gap needs alpha > 0");
    if (!(mu_x > 0.0)) throw ValidationError("bivariate_gap needs mu_x > 0");
    if (trials == 0) throw ValidationError("bivariate_gap needs at least one trial");
    GapSummary out;
    const std::vector<std::string> names{"X", "Y"};
    const CausalGraph forward(names, {{0, 1}});
    const CausalGraph backward(names, {{1, 0}});
    std::size_t positive = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto data = simulate_instantaneous_pair(alpha, mu_x, mu_y, n, derive_seed(seed, kGapStream, t));
        const FitData fit_data(data, cfg.beta);
        const double gap = fit(forward, fit_data, cfg).log_likelihood() - fit(backward, fit_data, cfg).log_likelihood();
        out.gaps.push_back(gap / static_cast<double>(n));
        if (gap > 0.0) ++positive;
    }
    out.mean_gap = std::accumulate(out.gaps.begin(), out.gaps.end(), 0.0) / static_cast<double>(trials);
    out.positive_fraction = static_cast<double>(positive) / static_cast<double>(trials);
    return out;
}

double dispersion_index(std::span<const Count> values) {
    if (values.size() < 2) throw ValidationError("dispersion index needs at least two values");
    double mean = 0.0;
    for (Count c : values) mean += static_cast<double>(c);
    mean /= static_cast<double>(values.size());
    if (!(mean > 0.0)) throw NumericError("dispersion index of an all-zero sample");
    double ss = 0.0;
    for (Count c : values) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
    return ss / static_cast<double>(values.size() - 1) / mean;
}

DispersionResult dispersion_check(double alpha, double mu_x, double mu_y, std::size_t n, std::uint64_t seed) {
    const auto data = simulate_instantaneous_pair(alpha, mu_x, mu_y, n, seed);
    const auto x = data.counts().column(0);
    const auto y = data.counts().column(1);
    DispersionResult out;
    out.empirical_index = dispersion_index(y);
    out.cause_index = dispersion_index(x);
    out.theoretical_index = 1.0 + mu_x * alpha * alpha / (mu_x * alpha + mu_y);
    return out;
}

std::string to_string(SweptParameter p) {
    switch (p) {
        case SweptParameter::Delta: return "delta";
        case SweptParameter::AlphaRange: return "alpha_range";
        case SweptParameter::MuRange: return "mu_range";
        case SweptParameter::NBins: return "n_bins";
        case SweptParameter::NNodes: return "n_nodes";
        case SweptParameter::AvgIndegree: return "avg_indegree";
    }
    return "?";
}

SweptParameter parse_swept_parameter(const std::string& name) {
    for (auto p : {SweptParameter::Delta, SweptParameter::AlphaRange, SweptParameter::MuRange, SweptParameter::NBins,
                   SweptParameter::NNodes, SweptParameter::AvgIndegree})
        if (to_string(p) == name) return p;
    throw ValidationError("unknown swept parameter '" + name + "'");
}

void validate(const SweepSpec& spec) {
    if (spec.values.empty()) throw ValidationError("sweep needs at least one value");
    if (spec.n_repeats == 0) throw ValidationError("n_repeats must be positive");
    validate(spec.search);
    const bool wants_range = spec.parameter == SweptParameter::AlphaRange || spec.parameter == SweptParameter::MuRange;
    for (const auto& v : spec.values)
        if (std::holds_alternative<Interval>(v) != wants_range)
            throw ValidationError("sweep values of '" + to_string(spec.parameter) + "' must be " +
                                  (wants_range ? "intervals" : "scalars"));
    if (!(spec.tau >= 0.0)) throw ValidationError("tau must be >= 0");
}

SimConfig apply_sweep_value(const SimConfig& base, SweptParameter parameter, const SweepValue& value) {
    SimConfig cfg = base;
    auto scalar = [&] { return std::get<double>(value); };
    auto count = [&] {
        const double x = scalar();
        if (!(x >= 1.0) || x != std::floor(x)) throw ValidationError("sweep value must be a positive integer");
        return static_cast<std::size_t>(x);
    };
    switch (parameter) {
        case SweptParameter::Delta: cfg.delta = scalar(); break;
        case SweptParameter::AlphaRange: cfg.alpha_range = std::get<Interval>(value); break;
        case SweptParameter::MuRange: cfg.mu_range = std::get<Interval>(value); break;
        case SweptParameter::NBins: cfg.n_bins = count(); break;
        case SweptParameter::NNodes: cfg.n_nodes = count(); break;
        case SweptParameter::AvgIndegree: cfg.avg_indegree = scalar(); break;
    }
    return cfg;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t index) { return derive_seed(base_seed, kCellStream, index); }

CellRecord run_cell(const SweepSpec& spec, std::size_t value_index, std::size_t repeat) {
    CellRecord cell;
    cell.value_index = value_index;
    cell.repeat = repeat;
    cell.seed = cell_seed(spec.base.seed, value_index * spec.n_repeats + repeat);
    try {
        SimConfig cfg = apply_sweep_value(spec.base, spec.parameter, spec.values.at(value_index));
        cfg.seed = cell.seed;
        const auto data = simulate_dataset(cfg);
        SearchConfig search = spec.search;
        search.parallel = false;
        const auto result = hill_climb(data.counts, search);
        cell.metrics = compare_graphs(data.truth, result.graph);
        cell.true_edges = data.truth.edge_count();
        cell.estimated_edges = result.graph.edge_count();
        cell.score = result.score;
        if (spec.threshold_ablation)
            cell.threshold_metrics = compare_graphs(data.truth, threshold_graph(data.counts, spec.tau, spec.search.fit));
    } catch (const std::exception& e) {
        cell.metrics.reset();
        cell.threshold_metrics.reset();
        cell.error = e.what();
    }
    return cell;
}

namespace {

Stat stat_of(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

}  // namespace

std::vector<ValueSummary> summarize(const SweepSpec& spec, const std::vector<CellRecord>& cells) {
    std::vector<ValueSummary> out;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        std::vector<double> f1, p, r, shd, nh;
        for (const auto& c : cells) {
            if (c.value_index != i || !c.metrics) continue;
            f1.push_back(c.metrics->f1);
            p.push_back(c.metrics->precision);
            r.push_back(c.metrics->recall);
            shd.push_back(static_cast<double>(c.metrics->shd));
            if (c.threshold_metrics) nh.push_back(c.threshold_metrics->f1);
        }
        ValueSummary s{spec.values[i], f1.size(), stat_of(f1), stat_of(p), stat_of(r), stat_of(shd), std::nullopt};
        if (spec.threshold_ablation) s.threshold_f1 = stat_of(nh);
        out.push_back(std::move(s));
    }
    return out;
}

ExperimentReport run_sweep(const SweepSpec& spec, unsigned threads) {
    validate(spec);
    ExperimentReport report{spec, {}, {}};
    const std::size_t n_cells = spec.values.size() * spec.n_repeats;
    report.cells.resize(n_cells);
    parallel_for(n_cells, resolve_threads(threads), [&](std::size_t i) {
        report.cells[i] = run_cell(spec, i / spec.n_repeats, i % spec.n_repeats);
    });
    report.summaries = summarize(spec, report.cells);
    return report;
}

}  // namespace shp
