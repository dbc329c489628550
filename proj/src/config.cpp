#include "shp/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shp/error.hpp"

namespace shp::config {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& block) {
    if (!j.is_object()) throw ValidationError(block + " configuration must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + block + " configuration");
}

template <class T>
T get(const Json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ValidationError("configuration key '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const Json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ValidationError("configuration key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

Interval get_interval(const Json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ValidationError("configuration key '" + key + "' must be a [lo, hi] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

Json interval_json(const Interval& r) { return Json::array({r.lo, r.hi}); }

const std::set<std::string> kSimKeys{"n_nodes",         "avg_indegree",     "alpha_range", "mu_range",
                                     "delta",           "n_bins",           "beta",        "self_excitation",
                                     "self_alpha_range", "generator",       "seed"};
const std::set<std::string> kFitKeys{"max_iters", "rel_tol", "mu_floor", "alpha_init", "mu_init", "self_excitation",
                                     "beta"};
const std::set<std::string> kSearchOnlyKeys{"alpha_s", "max_sweeps", "parallel", "use_cache"};
const std::set<std::string> kSweepKeys{"swept_parameter", "values", "n_repeats", "threshold_ablation", "tau",
                                       "base", "search"};

}  // namespace

SimConfig sim_config_from_json(const Json& j, SimConfig c) {
    reject_unknown(j, kSimKeys, "simulation");
    if (j.contains("n_nodes")) c.n_nodes = get_count(j, "n_nodes");
    if (j.contains("avg_indegree")) c.avg_indegree = get<double>(j, "avg_indegree");
    if (j.contains("alpha_range")) c.alpha_range = get_interval(j, "alpha_range");
    if (j.contains("mu_range")) c.mu_range = get_interval(j, "mu_range");
    if (j.contains("delta")) c.delta = get<double>(j, "delta");
    if (j.contains("n_bins")) c.n_bins = get_count(j, "n_bins");
    if (j.contains("beta")) c.beta = io::real_or_inf(j.at("beta"), "beta");
    if (j.contains("self_excitation")) c.self_excitation = get<bool>(j, "self_excitation");
    if (j.contains("self_alpha_range")) c.self_alpha_range = get_interval(j, "self_alpha_range");
    if (j.contains("generator")) {
        const auto g = get<std::string>(j, "generator");
        if (g == "continuous") c.generator = Generator::Continuous;
        else if (g == "discrete") c.generator = Generator::Discrete;
        else throw ValidationError("generator must be \"continuous\" or \"discrete\"");
    }
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    validate(c);
    return c;
}

namespace {

FitConfig fit_fields(const Json& j, FitConfig c) {
    if (j.contains("max_iters")) c.max_iters = static_cast<int>(get_count(j, "max_iters"));
    if (j.contains("rel_tol")) c.rel_tol = get<double>(j, "rel_tol");
    if (j.contains("mu_floor")) c.mu_floor = get<double>(j, "mu_floor");
    if (j.contains("alpha_init")) c.alpha_init = get<double>(j, "alpha_init");
    if (j.contains("mu_init")) {
        const auto& m = j.at("mu_init");
        if (m.is_string() && m.get<std::string>() == "empirical_mean") {
            c.mu_init = MuInit::EmpiricalMean;
        } else if (m.is_number()) {
            c.mu_init = MuInit::Fixed;
            c.mu_init_value = m.get<double>();
        } else {
            throw ValidationError("mu_init must be \"empirical_mean\" or a number");
        }
    }
    if (j.contains("self_excitation")) c.self_excitation = get<bool>(j, "self_excitation");
    if (j.contains("beta")) c.beta = io::real_or_inf(j.at("beta"), "beta");
    validate(c);
    return c;
}

}  // namespace

FitConfig fit_config_from_json(const Json& j, FitConfig c) {
    reject_unknown(j, kFitKeys, "fit");
    return fit_fields(j, c);
}

SearchConfig search_config_from_json(const Json& j, SearchConfig c) {
    std::set<std::string> allowed = kFitKeys;
    allowed.insert(kSearchOnlyKeys.begin(), kSearchOnlyKeys.end());
    reject_unknown(j, allowed, "search");
    c.fit = fit_fields(j, c.fit);
    if (j.contains("alpha_s")) {
        if (j.at("alpha_s").is_null()) c.alpha_s.reset();
        else c.alpha_s = get<double>(j, "alpha_s");
    }
    if (j.contains("max_sweeps")) c.max_sweeps = static_cast<int>(get_count(j, "max_sweeps"));
    if (j.contains("parallel")) c.parallel = get<bool>(j, "parallel");
    if (j.contains("use_cache")) c.use_cache = get<bool>(j, "use_cache");
    validate(c);
    return c;
}

SweepSpec sweep_spec_from_json(const Json& j) {
    reject_unknown(j, kSweepKeys, "sweep");
    SweepSpec s;
    if (!j.contains("swept_parameter") || !j.contains("values"))
        throw ValidationError("sweep configuration needs 'swept_parameter' and 'values'");
    s.parameter = parse_swept_parameter(get<std::string>(j, "swept_parameter"));
    if (!j.at("values").is_array()) throw ValidationError("'values' must be an array");
    for (const auto& v : j.at("values")) {
        if (v.is_number()) s.values.emplace_back(v.get<double>());
        else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            s.values.emplace_back(Interval{v[0].get<double>(), v[1].get<double>()});
        else throw ValidationError("sweep values must be numbers or [lo, hi] pairs");
    }
    if (j.contains("n_repeats")) s.n_repeats = get_count(j, "n_repeats");
    if (j.contains("threshold_ablation")) s.threshold_ablation = get<bool>(j, "threshold_ablation");
    if (j.contains("tau")) s.tau = get<double>(j, "tau");
    if (j.contains("base")) s.base = sim_config_from_json(j.at("base"));
    if (j.contains("search")) s.search = search_config_from_json(j.at("search"));
    validate(s);
    return s;
}

Json to_json(const SimConfig& c) {
    return Json{{"n_nodes", c.n_nodes},
                {"avg_indegree", c.avg_indegree},
                {"alpha_range", interval_json(c.alpha_range)},
                {"mu_range", interval_json(c.mu_range)},
                {"delta", c.delta},
                {"n_bins", c.n_bins},
                {"beta", io::real_or_inf(c.beta)},
                {"self_excitation", c.self_excitation},
                {"self_alpha_range", interval_json(c.self_alpha_range)},
                {"generator", c.generator == Generator::Continuous ? "continuous" : "discrete"},
                {"seed", c.seed}};
}

Json to_json(const FitConfig& c) {
    Json mu_init = c.mu_init == MuInit::EmpiricalMean ? Json("empirical_mean") : Json(c.mu_init_value);
    return Json{{"max_iters", c.max_iters},
                {"rel_tol", c.rel_tol},
                {"mu_floor", c.mu_floor},
                {"alpha_init", c.alpha_init},
                {"mu_init", std::move(mu_init)},
                {"self_excitation", c.self_excitation},
                {"beta", io::real_or_inf(c.beta)}};
}

Json to_json(const SearchConfig& c) {
    Json j = to_json(c.fit);
    j["alpha_s"] = c.alpha_s ? Json(*c.alpha_s) : Json(nullptr);
    j["max_sweeps"] = c.max_sweeps;
    j["parallel"] = c.parallel;
    j["use_cache"] = c.use_cache;
    return j;
}

Json to_json(const SweepSpec& s) {
    Json values = Json::array();
    for (const auto& v : s.values) values.push_back(io::to_json(v));
    return Json{{"swept_parameter", to_string(s.parameter)},
                {"values", std::move(values)},
                {"n_repeats", s.n_repeats},
                {"threshold_ablation", s.threshold_ablation},
                {"tau", s.tau},
                {"base", to_json(s.base)},
                {"search", to_json(s.search)}};
}

Json load(const std::string& path) {
    if (path.empty()) return Json::object();
    const auto text = io::read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(path, 0, e.what());
    }
}

}  // namespace shp::config
