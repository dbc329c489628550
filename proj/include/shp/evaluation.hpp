#pragma once

// Structure-recovery metrics and the experiment drivers: bivariate likelihood
// gap, overdispersion check and parameter sweeps.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shp/model.hpp"
#include "shp/search.hpp"
#include "shp/simulator.hpp"

namespace shp {

struct MetricReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t shd = 0;
    bool operator==(const MetricReport&) const = default;
};

// Directed-edge precision/recall/F1 and structural Hamming distance (additions,
// deletions and reversals, a reversal counting once). When both graphs are empty
// every ratio is 1; otherwise an undefined ratio is 0.
MetricReport compare_graphs(const CausalGraph& truth, const CausalGraph& estimated);

// Fit settings for i.i.d. instantaneous data: no lagged terms.
FitConfig instantaneous_fit_config();

struct GapSummary {
    double mean_gap = 0.0;           // mean of (L_forward - L_backward) / n
    double positive_fraction = 0.0;  // share of trials with a positive gap
    std::vector<double> gaps;        // per trial, normalized by n
};

// Simulates `trials` instantaneous pairs X -> Y, fits {X -> Y} and {Y -> X} and
// records the per-sample log-likelihood difference.
GapSummary bivariate_gap(double alpha, double mu_x, double mu_y, std::size_t n, std::size_t trials,
                         std::uint64_t seed, const FitConfig& cfg = instantaneous_fit_config());

struct DispersionResult {
    double empirical_index = 0.0;    // Var(Y) / E(Y) of the effect
    double theoretical_index = 0.0;  // 1 + mu_x alpha^2 / (mu_x alpha + mu_y)
    double cause_index = 0.0;        // Var(X) / E(X); X is Poisson
};

double dispersion_index(std::span<const Count> values);

DispersionResult dispersion_check(double alpha, double mu_x, double mu_y, std::size_t n, std::uint64_t seed);

enum class SweptParameter { Delta, AlphaRange, MuRange, NBins, NNodes, AvgIndegree };

using SweepValue = std::variant<double, Interval>;

struct SweepSpec {
    SweptParameter parameter = SweptParameter::NBins;
    std::vector<SweepValue> values;
    SimConfig base;
    std::size_t n_repeats = 10;
    SearchConfig search;
    bool threshold_ablation = false;  // also score the threshold graph per cell
    double tau = 0.1;
};

void validate(const SweepSpec& spec);

// Base config with the swept field replaced.
SimConfig apply_sweep_value(const SimConfig& base, SweptParameter parameter, const SweepValue& value);

// Seed of cell `index` (value-major, repeat-minor) under a base seed.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t index);

struct CellRecord {
    std::size_t value_index = 0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::optional<MetricReport> metrics;
    std::optional<MetricReport> threshold_metrics;
    std::size_t true_edges = 0;
    std::size_t estimated_edges = 0;
    double score = 0.0;
    std::string error;  // non-empty when the cell failed
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 with fewer than two cells
};

struct ValueSummary {
    SweepValue value;
    std::size_t completed = 0;
    Stat f1, precision, recall, shd;
    std::optional<Stat> threshold_f1;
};

struct ExperimentReport {
    SweepSpec spec;
    std::vector<CellRecord> cells;
    std::vector<ValueSummary> summaries;
};

// Runs one cell: simulate, search, score.
CellRecord run_cell(const SweepSpec& spec, std::size_t value_index, std::size_t repeat);

// Runs every value x repeat cell (cells in parallel up to `threads`) and folds
// the per-value statistics in cell order. Cell failures are recorded, not thrown.
ExperimentReport run_sweep(const SweepSpec& spec, unsigned threads = 1);

// Per-value statistics recomputed from cell records.
std::vector<ValueSummary> summarize(const SweepSpec& spec, const std::vector<CellRecord>& cells);

std::string to_string(SweptParameter p);
SweptParameter parse_swept_parameter(const std::string& name);

}  // namespace shp
