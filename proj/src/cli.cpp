#include "shp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <set>

#include "shp/config.hpp"
#include "shp/evaluation.hpp"
#include "shp/io.hpp"
#include "shp/search.hpp"
#include "shp/simulator.hpp"

namespace shp::cli {

using io::Json;

namespace {

Json header(const std::string& command) { return Json{{"schema_version", io::kSchemaVersion}, {"command", command}}; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool wants(const CommonOptions& opt, Format f) { return !opt.format || *opt.format == f; }

void require_positive_delta(double delta) {
    if (!(delta > 0.0)) throw ValidationError("--delta must be positive");
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return kExitValidation;
        case ErrorKind::Io: return kExitIo;
        case ErrorKind::Numeric: return kExitNumeric;
    }
    return kExitUnexpected;
}

void cmd_simulate(const CommonOptions& opt) {
    SimConfig cfg = config::sim_config_from_json(config::load(opt.config));
    if (opt.seed) cfg.seed = *opt.seed;
    validate(cfg);
    const auto data = simulate_dataset(cfg);
    io::write_text(opt.out / "counts.csv", io::format_counts(data.counts));
    io::write_text(opt.out / "truth_graph.csv", io::format_edge_list(data.truth));
    Json doc = header("simulate");
    doc["config"] = config::to_json(cfg);
    doc["params"] = io::to_json(data.params, data.truth.nodes());
    doc["graph"] = io::to_json(data.truth);
    io::write_text(opt.out / "params.json", dump(doc));
}

void cmd_bin(const CommonOptions& opt, const std::string& events_path, double delta, std::optional<double> horizon) {
    require_positive_delta(delta);
    const auto log = io::parse_event_log(io::read_text(events_path), events_path);
    double t_max = 0.0;
    for (const auto& r : log.records) t_max = std::max(t_max, r.timestamp);
    const ContinuousSequence seq(log.records, horizon.value_or(t_max));
    io::write_text(opt.out / "counts.csv", io::format_counts(bin_events(seq, delta, log.types)));
}

void cmd_fit(const CommonOptions& opt, const std::string& counts_path, const std::string& graph_path, double delta) {
    require_positive_delta(delta);
    const FitConfig cfg = config::fit_config_from_json(config::load(opt.config));
    const auto counts = io::parse_counts(io::read_text(counts_path), delta, counts_path);
    const auto g = io::graph_from_edges(counts.node_names(), io::parse_edge_list(io::read_text(graph_path), graph_path));
    const auto result = fit(g, counts, cfg);
    Json doc = header("fit");
    doc["config"] = config::to_json(cfg);
    doc["config"]["delta"] = delta;
    doc["config"]["counts"] = counts_path;
    doc["config"]["graph"] = graph_path;
    doc["seed"] = opt.seed.value_or(0);
    doc["graph"] = io::to_json(g);
    doc["result"] = io::to_json(result, counts.node_names());
    io::write_text(opt.out / "fit_result.json", dump(doc));
}

void cmd_search(const CommonOptions& opt, const std::string& counts_path, double delta) {
    require_positive_delta(delta);
    SearchConfig cfg = config::search_config_from_json(config::load(opt.config));
    if (opt.threads > 1) {
        cfg.parallel = true;
        cfg.threads = opt.threads;
    } else {
        cfg.parallel = false;
    }
    const auto counts = io::parse_counts(io::read_text(counts_path), delta, counts_path);
    const auto result = hill_climb(counts, cfg);
    if (wants(opt, Format::Json)) {
        Json doc = header("search");
        doc["config"] = config::to_json(cfg);
        // Thread count never changes the result; keep it out of the artifact.
        doc["config"].erase("parallel");
        doc["config"]["alpha_s_resolved"] = result.alpha_s;
        doc["config"]["delta"] = delta;
        doc["config"]["counts"] = counts_path;
        doc["seed"] = opt.seed.value_or(0);
        doc["result"] = io::to_json(result);
        io::write_text(opt.out / "search_result.json", dump(doc));
    }
    if (wants(opt, Format::Csv)) io::write_text(opt.out / "graph.csv", io::format_edge_list(result.graph));
}

void cmd_evaluate(const CommonOptions& opt, const std::string& truth_path, const std::string& estimated_path) {
    const auto truth_edges = io::parse_edge_list(io::read_text(truth_path), truth_path);
    const auto est_edges = io::parse_edge_list(io::read_text(estimated_path), estimated_path);
    // Edge lists carry no isolated nodes; both graphs share the union of endpoints.
    std::vector<std::string> nodes;
    std::set<std::string> seen;
    for (const auto* list : {&truth_edges, &est_edges})
        for (const auto& [a, b] : *list)
            for (const auto& name : {a, b})
                if (seen.insert(name).second) nodes.push_back(name);
    const auto m = compare_graphs(io::graph_from_edges(nodes, truth_edges), io::graph_from_edges(nodes, est_edges));
    if (wants(opt, Format::Json)) {
        Json doc = header("evaluate");
        doc["config"] = {{"truth", truth_path}, {"estimated", estimated_path}};
        doc["seed"] = opt.seed.value_or(0);
        doc["metrics"] = io::to_json(m);
        io::write_text(opt.out / "metrics.json", dump(doc));
    }
    if (wants(opt, Format::Csv))
        io::write_text(opt.out / "metrics.csv", "precision,recall,f1,shd\n" + io::format_real(m.precision) + "," +
                                                    io::format_real(m.recall) + "," + io::format_real(m.f1) + "," +
                                                    std::to_string(m.shd) + "\n");
}

void cmd_experiment(const CommonOptions& opt) {
    if (opt.config.empty()) throw ValidationError("experiment needs --config with a sweep specification");
    SweepSpec spec = config::sweep_spec_from_json(config::load(opt.config));
    if (opt.seed) spec.base.seed = *opt.seed;
    const auto report = run_sweep(spec, opt.threads);
    if (wants(opt, Format::Json)) {
        Json doc = header("experiment");
        doc["config"] = config::to_json(spec);
        doc["report"] = io::to_json(report);
        io::write_text(opt.out / "experiment.json", dump(doc));
    }
    if (wants(opt, Format::Csv)) io::write_text(opt.out / "experiment.csv", io::format_experiment_csv(report));
}

void cmd_identifiability(const CommonOptions& opt, const IdentifiabilityOptions& id) {
    const Json j = config::load(opt.config);
    static const std::set<std::string> allowed{"alpha", "mu_x", "mu_y", "n", "trials",
                                               "alpha_reference", "dispersion_n", "seed"};
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in identifiability configuration");
    auto real = [&](const std::optional<double>& flag, const char* key, double fallback) {
        return flag ? *flag : j.contains(key) ? j.at(key).get<double>() : fallback;
    };
    auto count = [&](const std::optional<std::size_t>& flag, const char* key, std::size_t fallback) {
        return flag ? *flag : j.contains(key) ? j.at(key).get<std::size_t>() : fallback;
    };
    const double alpha = real(id.alpha, "alpha", 0.5);
    const double mu_x = real(id.mu_x, "mu_x", 1.0);
    const double mu_y = real(id.mu_y, "mu_y", 0.1);
    const double alpha_ref = real(id.alpha_reference, "alpha_reference", 0.05);
    const std::size_t n = count(id.n, "n", 20000);
    const std::size_t trials = count(id.trials, "trials", 100);
    const std::size_t dispersion_n = count(id.dispersion_n, "dispersion_n", 100000);
    const std::uint64_t seed = opt.seed ? *opt.seed : j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;

    const auto gap = bivariate_gap(alpha, mu_x, mu_y, n, trials, seed);
    const auto reference = bivariate_gap(alpha_ref, mu_x, mu_y, n, trials, seed);
    const auto dispersion = dispersion_check(alpha, mu_x, mu_y, dispersion_n, seed);
    Json doc = header("identifiability");
    doc["config"] = {{"alpha", alpha},         {"mu_x", mu_x},
                     {"mu_y", mu_y},           {"n", n},
                     {"trials", trials},       {"alpha_reference", alpha_ref},
                     {"dispersion_n", dispersion_n}, {"seed", seed}};
    doc["gap"] = io::to_json(gap);
    doc["reference_gap"] = io::to_json(reference);
    doc["dispersion"] = io::to_json(dispersion);
    io::write_text(opt.out / "identifiability.json", dump(doc));
}

int run(int argc, char** argv) {
    CLI::App app{"Causal structure learning with structural Hawkes processes"};
    app.require_subcommand(1);
    CommonOptions opt;
    std::string format;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file");
        sub->add_option("--seed", seed, "Root random seed (overrides the config)");
        sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", opt.threads, "Worker thread cap")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--format", format, "Artifact format")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate a ground-truth DAG, parameters and binned counts");
    add_common(simulate);

    std::string events_path, counts_path, graph_path, truth_path, estimated_path;
    double delta = 0.0;
    std::optional<double> horizon;
    auto* bin = app.add_subcommand("bin", "Bin an event-log CSV into a counts CSV");
    add_common(bin);
    bin->add_option("--events", events_path, "Event log CSV")->required();
    bin->add_option("--delta", delta, "Bin width")->required();
    bin->add_option("--horizon", horizon, "Observation horizon (default: last timestamp)");

    auto* fit_cmd = app.add_subcommand("fit", "Fit parameters for a fixed graph");
    add_common(fit_cmd);
    fit_cmd->add_option("--counts", counts_path, "Counts CSV")->required();
    fit_cmd->add_option("--graph", graph_path, "Edge-list CSV")->required();
    fit_cmd->add_option("--delta", delta, "Bin width of the counts")->required();

    auto* search = app.add_subcommand("search", "Learn a DAG by penalized hill climbing");
    add_common(search);
    search->add_option("--counts", counts_path, "Counts CSV")->required();
    search->add_option("--delta", delta, "Bin width of the counts")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Compare an estimated graph with the truth");
    add_common(evaluate);
    evaluate->add_option("--truth", truth_path, "Ground-truth edge list")->required();
    evaluate->add_option("--estimated", estimated_path, "Estimated edge list")->required();

    auto* experiment = app.add_subcommand("experiment", "Run a parameter sweep");
    add_common(experiment);

    IdentifiabilityOptions id;
    auto* ident = app.add_subcommand("identifiability", "Bivariate likelihood gap and overdispersion");
    add_common(ident);
    ident->add_option("--alpha", id.alpha, "Causal strength");
    ident->add_option("--mu-x", id.mu_x, "Cause rate per bin");
    ident->add_option("--mu-y", id.mu_y, "Effect immigration rate per bin");
    ident->add_option("--n", id.n, "Samples per trial");
    ident->add_option("--trials", id.trials, "Number of trials");
    ident->add_option("--alpha-reference", id.alpha_reference, "Weaker strength for the trend comparison");
    ident->add_option("--dispersion-n", id.dispersion_n, "Samples for the dispersion check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    auto* active = app.get_subcommands().front();
    if (active->count("--seed")) opt.seed = seed;
    if (!format.empty()) opt.format = format == "csv" ? Format::Csv : Format::Json;

    try {
        if (active == simulate) cmd_simulate(opt);
        else if (active == bin) cmd_bin(opt, events_path, delta, horizon);
        else if (active == fit_cmd) cmd_fit(opt, counts_path, graph_path, delta);
        else if (active == search) cmd_search(opt, counts_path, delta);
        else if (active == evaluate) cmd_evaluate(opt, truth_path, estimated_path);
        else if (active == experiment) cmd_experiment(opt);
        else cmd_identifiability(opt, id);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const Json::exception& e) {
        std::cerr << "error: malformed configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnexpected;
    }
    return kExitOk;
}

}  // namespace shp::cli
