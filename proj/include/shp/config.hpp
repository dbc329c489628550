#pragma once

// JSON configuration schemas. Every block is a flat object; unknown keys are
// rejected so that typos surface. Units: delta is in timestamp units, mu is a
// rate per unit time (per-bin mean mu * delta), beta is per unit time.
//
//   SimConfig:    n_nodes, avg_indegree, alpha_range [lo, hi], mu_range [lo, hi],
//                 delta, n_bins, beta, self_excitation, self_alpha_range,
//                 generator ("continuous" | "discrete"), seed
//   FitConfig:    max_iters, rel_tol, mu_floor, alpha_init,
//                 mu_init ("empirical_mean" | number), self_excitation,
//                 beta (number | "inf")
//   SearchConfig: FitConfig keys plus alpha_s (number | null), max_sweeps,
//                 parallel, use_cache
//   SweepSpec:    swept_parameter, values, n_repeats, threshold_ablation, tau,
//                 base {SimConfig}, search {SearchConfig}

#include "shp/evaluation.hpp"
#include "shp/io.hpp"
#include "shp/search.hpp"
#include "shp/simulator.hpp"

namespace shp::config {

using io::Json;

SimConfig sim_config_from_json(const Json& j, SimConfig base = {});
FitConfig fit_config_from_json(const Json& j, FitConfig base = {});
SearchConfig search_config_from_json(const Json& j, SearchConfig base = {});
SweepSpec sweep_spec_from_json(const Json& j);

Json to_json(const SimConfig& c);
Json to_json(const FitConfig& c);
Json to_json(const SearchConfig& c);
Json to_json(const SweepSpec& s);

// Parses a file; an empty path yields an empty object.
Json load(const std::string& path);

}  // namespace shp::config
