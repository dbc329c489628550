// Python bindings. Configurations cross the boundary as JSON text (the Python
// wrapper serializes dicts) so they go through the same schema checks as the CLI.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <set>

#include "shp/config.hpp"
#include "shp/error.hpp"
#include "shp/evaluation.hpp"
#include "shp/io.hpp"
#include "shp/search.hpp"
#include "shp/simulator.hpp"

namespace py = pybind11;
using namespace shp;

namespace {

using EdgeList = std::vector<std::pair<std::string, std::string>>;
using CountArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

io::Json parse_config(const std::string& text) { return text.empty() ? io::Json::object() : io::Json::parse(text); }

std::vector<std::string> names_or_default(std::optional<std::vector<std::string>> names, std::size_t n) {
    if (!names) return default_node_names(n);
    if (names->size() != n) throw ValidationError("node_names has the wrong length");
    return *names;
}

BinnedCounts counts_from_array(const CountArray& a, double delta, std::optional<std::vector<std::string>> names) {
    if (a.ndim() != 2) throw ValidationError("counts must be a 2-D array (bins x nodes)");
    const auto k = static_cast<std::size_t>(a.shape(0)), n = static_cast<std::size_t>(a.shape(1));
    Matrix<Count> m(k, n, 0);
    const auto* src = a.data();
    for (std::size_t i = 0; i < k * n; ++i) {
        if (src[i] < 0) throw ValidationError("counts must be non-negative");
        m.data()[i] = static_cast<Count>(src[i]);
    }
    return BinnedCounts(std::move(m), delta, names_or_default(std::move(names), n));
}

CountArray counts_to_array(const BinnedCounts& c) {
    CountArray out({c.bins(), c.nodes()});
    auto* dst = out.mutable_data();
    for (std::size_t i = 0; i < c.counts().data().size(); ++i) dst[i] = static_cast<std::int64_t>(c.counts().data()[i]);
    return out;
}

RealArray matrix_to_array(const Matrix<double>& m) {
    RealArray out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

EdgeList named_edges(const CausalGraph& g) {
    EdgeList out;
    for (const auto& e : g.edges()) out.emplace_back(g.nodes()[e.from], g.nodes()[e.to]);
    return out;
}

py::dict params_dict(const ShpParams& p) {
    py::dict d;
    d["alpha"] = matrix_to_array(p.alpha);
    d["mu"] = p.mu;
    d["beta"] = p.beta;
    d["delta"] = p.delta;
    return d;
}

py::dict simulate(const std::string& config_json, std::optional<std::uint64_t> seed) {
    SimConfig cfg = config::sim_config_from_json(parse_config(config_json));
    if (seed) cfg.seed = *seed;
    SimulatedDataset data;
    {
        py::gil_scoped_release release;
        data = simulate_dataset(cfg);
    }
    py::dict d = params_dict(data.params);
    d["counts"] = counts_to_array(data.counts);
    d["node_names"] = data.truth.nodes();
    d["edges"] = named_edges(data.truth);
    return d;
}

double log_likelihood_py(const CountArray& counts, double delta, const RealArray& alpha, std::vector<double> mu,
                         double beta, const EdgeList& edges, std::optional<std::vector<std::string>> names) {
    const auto x = counts_from_array(counts, delta, std::move(names));
    const std::size_t n = x.nodes();
    if (alpha.ndim() != 2 || static_cast<std::size_t>(alpha.shape(0)) != n ||
        static_cast<std::size_t>(alpha.shape(1)) != n)
        throw ValidationError("alpha must be a nodes x nodes array");
    ShpParams p = ShpParams::zeros(n, beta, delta);
    std::copy(alpha.data(), alpha.data() + n * n, p.alpha.data().begin());
    if (mu.size() != n) throw ValidationError("mu has the wrong length");
    p.mu = std::move(mu);
    return log_likelihood(p, x, io::graph_from_edges(x.node_names(), edges));
}

py::dict fit_py(const CountArray& counts, double delta, const EdgeList& edges, const std::string& config_json,
                std::optional<std::vector<std::string>> names) {
    const auto x = counts_from_array(counts, delta, std::move(names));
    const auto cfg = config::fit_config_from_json(parse_config(config_json));
    const auto g = io::graph_from_edges(x.node_names(), edges);
    FitResult r;
    {
        py::gil_scoped_release release;
        r = fit(g, x, cfg);
    }
    py::dict d = params_dict(r.params);
    d["loglik_trace"] = r.loglik_trace;
    d["log_likelihood"] = r.log_likelihood();
    d["converged"] = r.converged;
    d["iterations"] = r.iterations;
    return d;
}

py::dict search_py(const CountArray& counts, double delta, const std::string& config_json, unsigned threads,
                   std::optional<std::vector<std::string>> names) {
    const auto x = counts_from_array(counts, delta, std::move(names));
    SearchConfig cfg = config::search_config_from_json(parse_config(config_json));
    cfg.parallel = threads > 1;
    cfg.threads = threads;
    SearchResult r;
    {
        py::gil_scoped_release release;
        r = hill_climb(x, cfg);
    }
    py::dict d = params_dict(r.params);
    d["edges"] = named_edges(r.graph);
    d["node_names"] = r.graph.nodes();
    d["score"] = r.score;
    d["score_trace"] = r.score_trace;
    d["alpha_s"] = r.alpha_s;
    d["visited"] = r.visited;
    return d;
}

EdgeList threshold_py(const CountArray& counts, double delta, double tau, const std::string& config_json,
                      std::optional<std::vector<std::string>> names) {
    const auto x = counts_from_array(counts, delta, std::move(names));
    return named_edges(threshold_graph(x, tau, config::fit_config_from_json(parse_config(config_json))));
}

py::dict compare_py(const EdgeList& truth, const EdgeList& estimated, std::optional<std::vector<std::string>> nodes) {
    std::vector<std::string> all;
    if (nodes) {
        all = *nodes;
    } else {
        std::set<std::string> seen;
        for (const auto* list : {&truth, &estimated})
            for (const auto& [a, b] : *list)
                for (const auto& name : {a, b})
                    if (seen.insert(name).second) all.push_back(name);
    }
    const auto m = compare_graphs(io::graph_from_edges(all, truth), io::graph_from_edges(all, estimated));
    py::dict d;
    d["precision"] = m.precision;
    d["recall"] = m.recall;
    d["f1"] = m.f1;
    d["shd"] = m.shd;
    return d;
}

// Sweeps and the identifiability study return their JSON documents as text;
// the wrapper parses them.
std::string experiment_py(const std::string& config_json, unsigned threads) {
    const auto spec = config::sweep_spec_from_json(parse_config(config_json));
    ExperimentReport r;
    {
        py::gil_scoped_release release;
        r = run_sweep(spec, threads);
    }
    return io::to_json(r).dump();
}

std::string bivariate_gap_py(double alpha, double mu_x, double mu_y, std::size_t n, std::size_t trials,
                             std::uint64_t seed) {
    GapSummary g;
    {
        py::gil_scoped_release release;
        g = bivariate_gap(alpha, mu_x, mu_y, n, trials, seed);
    }
    return io::to_json(g).dump();
}

py::dict dispersion_py(double alpha, double mu_x, double mu_y, std::size_t n, std::uint64_t seed) {
    const auto d = dispersion_check(alpha, mu_x, mu_y, n, seed);
    py::dict out;
    out["empirical_index"] = d.empirical_index;
    out["theoretical_index"] = d.theoretical_index;
    out["cause_index"] = d.cause_index;
    return out;
}

}  // namespace

PYBIND11_MODULE(_shp, m) {
    m.doc() = "Structural Hawkes process causal discovery (C++ core)";

    static py::exception<Error> base_error(m, "ShpError", PyExc_RuntimeError);
    static py::exception<ValidationError> validation_error(m, "ValidationError", base_error.ptr());
    static py::exception<IoError> io_error(m, "ShpIoError", base_error.ptr());
    static py::exception<NumericError> numeric_error(m, "NumericError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const IoError& e) {
            py::set_error(io_error, e.what());
        } catch (const NumericError& e) {
            py::set_error(numeric_error, e.what());
        } catch (const io::Json::exception& e) {
            py::set_error(validation_error, e.what());
        }
    });

    using py::arg;
    m.def("_simulate", &simulate, arg("config_json"), arg("seed") = py::none());
    m.def("_log_likelihood", &log_likelihood_py, arg("counts"), arg("delta"), arg("alpha"), arg("mu"), arg("beta"),
          arg("edges"), arg("node_names") = py::none());
    m.def("_fit", &fit_py, arg("counts"), arg("delta"), arg("edges"), arg("config_json"),
          arg("node_names") = py::none());
    m.def("_search", &search_py, arg("counts"), arg("delta"), arg("config_json"), arg("threads") = 1,
          arg("node_names") = py::none());
    m.def("_threshold_graph", &threshold_py, arg("counts"), arg("delta"), arg("tau"), arg("config_json"),
          arg("node_names") = py::none());
    m.def("compare_graphs", &compare_py, arg("truth"), arg("estimated"), arg("nodes") = py::none(),
          "Precision, recall, F1 and structural Hamming distance of two edge lists.");
    m.def("_experiment", &experiment_py, arg("config_json"), arg("threads") = 1);
    m.def("_bivariate_gap", &bivariate_gap_py, arg("alpha"), arg("mu_x"), arg("mu_y"), arg("n"), arg("trials"),
          arg("seed"));
    m.def("dispersion_check", &dispersion_py, arg("alpha"), arg("mu_x"), arg("mu_y"), arg("n"), arg("seed") = 0,
          "Dispersion index of the effect (and cause) in an instantaneous pair.");
}
