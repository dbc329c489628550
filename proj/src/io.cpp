#include "shp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "shp/error.hpp"

namespace shp::io {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line, const std::string& path, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (c == '"') {
            if (!cur.empty() || was_quoted) throw ParseError(path, line_no, "stray quote inside a field");
            quoted = was_quoted = true;
        } else {
            if (was_quoted) throw ParseError(path, line_no, "text after a closing quote");
            cur += c;
        }
    }
    if (quoted) throw ParseError(path, line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string format_real(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

// Splits text into lines, dropping a trailing '\r' and blank lines; keeps line numbers.
std::vector<std::pair<std::size_t, std::string>> lines_of(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.emplace_back(line_no, std::move(line));
        pos = end + 1;
    }
    return out;
}

double parse_real(const std::string& s, const std::string& path, std::size_t line_no) {
    double x = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || !std::isfinite(x))
        throw ParseError(path, line_no, "'" + s + "' is not a finite number");
    return x;
}

Count parse_count(const std::string& s, const std::string& path, std::size_t line_no) {
    Count x = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || x < 0)
        throw ParseError(path, line_no, "'" + s + "' is not a non-negative integer");
    return x;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string>>& lines,
                   const std::vector<std::string>& expected, const std::string& path) {
    if (lines.empty()) throw ParseError(path, 1, "missing header");
    const auto fields = csv_split(lines[0].second, path, lines[0].first);
    if (fields != expected) {
        std::string want;
        for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
        throw ParseError(path, lines[0].first, "expected header '" + want + "'");
    }
}

}  // namespace

EventLog parse_event_log(const std::string& text, const std::string& source) {
    const auto lines = lines_of(text);
    expect_header(lines, {"event_type", "timestamp"}, source);
    EventLog log;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, line] = lines[i];
        const auto f = csv_split(line, source, line_no);
        if (f.size() != 2) throw ParseError(source, line_no, "expected 2 fields, found " + std::to_string(f.size()));
        if (f[0].empty()) throw ParseError(source, line_no, "empty event type");
        const double t = parse_real(f[1], source, line_no);
        if (!(t > 0.0)) throw ParseError(source, line_no, "timestamp must be positive");
        if (seen.insert(f[0]).second) log.types.push_back(f[0]);
        log.records.push_back({f[0], t});
    }
    return log;
}

std::string format_event_log(const ContinuousSequence& seq) {
    std::string out = "event_type,timestamp\n";
    for (const auto& r : seq.records()) out += csv_escape(r.event_type) + "," + format_real(r.timestamp) + "\n";
    return out;
}

BinnedCounts parse_counts(const std::string& text, double delta, const std::string& source) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("bin width must be positive");
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError(source, 1, "missing header");
    const auto header = csv_split(lines[0].second, source, lines[0].first);
    if (header.empty() || header[0] != "bin") throw ParseError(source, lines[0].first, "first column must be 'bin'");
    std::vector<std::string> names(header.begin() + 1, header.end());
    if (names.empty()) throw ParseError(source, lines[0].first, "no node columns");
    for (const auto& n : names)
        if (n.empty()) throw ParseError(source, lines[0].first, "empty node name");
    const std::size_t n_bins = lines.size() - 1;
    Matrix<Count> counts(n_bins, names.size(), 0);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, line] = lines[i];
        const auto f = csv_split(line, source, line_no);
        if (f.size() != header.size())
            throw ParseError(source, line_no,
                             "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
        if (parse_count(f[0], source, line_no) != static_cast<Count>(i))
            throw ParseError(source, line_no, "bins must be numbered 1..K in order");
        for (std::size_t v = 0; v < names.size(); ++v) counts(i - 1, v) = parse_count(f[v + 1], source, line_no);
    }
    try {
        return BinnedCounts(std::move(counts), delta, std::move(names));
    } catch (const ValidationError& e) {
        throw ParseError(source, lines[0].first, e.what());
    }
}

std::string format_counts(const BinnedCounts& counts) {
    std::string out = "bin";
    for (const auto& n : counts.node_names()) out += "," + csv_escape(n);
    out += "\n";
    for (std::size_t k = 0; k < counts.bins(); ++k) {
        out += std::to_string(k + 1);
        for (std::size_t v = 0; v < counts.nodes(); ++v) {
            out += ',';
            out += std::to_string(counts(k, v));
        }
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_edge_list(const std::string& text, const std::string& source) {
    const auto lines = lines_of(text);
    expect_header(lines, {"src", "dst"}, source);
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, line] = lines[i];
        auto f = csv_split(line, source, line_no);
        if (f.size() != 2) throw ParseError(source, line_no, "expected 2 fields, found " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty()) throw ParseError(source, line_no, "empty node name");
        if (f[0] == f[1]) throw ParseError(source, line_no, "self-loop on '" + f[0] + "'");
        edges.emplace_back(std::move(f[0]), std::move(f[1]));
    }
    return edges;
}

std::string format_edge_list(const CausalGraph& g) {
    std::string out = "src,dst\n";
    for (const auto& e : g.edges()) out += csv_escape(g.nodes()[e.from]) + "," + csv_escape(g.nodes()[e.to]) + "\n";
    return out;
}

CausalGraph graph_from_edges(const std::vector<std::string>& nodes,
                             const std::vector<std::pair<std::string, std::string>>& edges) {
    CausalGraph g(nodes);
    for (const auto& [a, b] : edges) g.add_edge(g.index_of(a), g.index_of(b));
    return g;
}

Json real_or_inf(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double real_or_inf(const Json& j, const std::string& key) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        throw ValidationError("'" + key + "' must be a number or \"inf\"");
    }
    if (!j.is_number()) throw ValidationError("'" + key + "' must be a number or \"inf\"");
    return j.get<double>();
}

Json to_json(const ShpParams& params, const std::vector<std::string>& nodes) {
    Json alpha = Json::array();
    for (std::size_t s = 0; s < params.nodes(); ++s) {
        Json row = Json::array();
        for (std::size_t v = 0; v < params.nodes(); ++v) row.push_back(params.alpha(s, v));
        alpha.push_back(std::move(row));
    }
    return Json{{"nodes", nodes},
                {"alpha", std::move(alpha)},
                {"mu", params.mu},
                {"beta", real_or_inf(params.beta)},
                {"delta", params.delta}};
}

ShpParams params_from_json(const Json& j) {
    try {
        const auto nodes = j.at("nodes").get<std::vector<std::string>>();
        const std::size_t n = nodes.size();
        ShpParams p = ShpParams::zeros(n, real_or_inf(j.at("beta"), "beta"), j.at("delta").get<double>());
        p.mu = j.at("mu").get<std::vector<double>>();
        const auto& alpha = j.at("alpha");
        if (p.mu.size() != n || alpha.size() != n) throw ValidationError("parameter arrays do not match node count");
        for (std::size_t s = 0; s < n; ++s) {
            if (alpha[s].size() != n) throw ValidationError("alpha must be square");
            for (std::size_t v = 0; v < n; ++v) p.alpha(s, v) = alpha[s][v].get<double>();
        }
        return p;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed parameter document: ") + e.what());
    }
}

Json to_json(const CausalGraph& g) {
    Json edges = Json::array();
    for (const auto& e : g.edges()) edges.push_back({g.nodes()[e.from], g.nodes()[e.to]});
    return Json{{"nodes", g.nodes()}, {"edges", std::move(edges)}};
}

Json to_json(const FitResult& r, const std::vector<std::string>& nodes) {
    return Json{{"params", to_json(r.params, nodes)},
                {"log_likelihood", r.log_likelihood()},
                {"loglik_trace", r.loglik_trace},
                {"converged", r.converged},
                {"iterations", r.iterations}};
}

Json to_json(const SearchResult& r) {
    return Json{{"graph", to_json(r.graph)},
                {"params", to_json(r.params, r.graph.nodes())},
                {"score", r.score},
                {"alpha_s", r.alpha_s},
                {"score_trace", r.score_trace},
                {"visited", r.visited},
                {"fresh_fits", r.fresh_fits}};
}

Json to_json(const MetricReport& m) {
    return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"shd", m.shd}};
}

Json to_json(const GapSummary& g) {
    return Json{{"mean_gap", g.mean_gap}, {"positive_fraction", g.positive_fraction}, {"gaps", g.gaps}};
}

Json to_json(const DispersionResult& d) {
    return Json{{"empirical_index", d.empirical_index},
                {"theoretical_index", d.theoretical_index},
                {"cause_index", d.cause_index}};
}

Json to_json(const SweepValue& v) {
    if (const auto* x = std::get_if<double>(&v)) return *x;
    const auto& r = std::get<Interval>(v);
    return Json::array({r.lo, r.hi});
}

namespace {

Json stat_json(const Stat& s) { return Json{{"mean", s.mean}, {"std", s.std}}; }

std::string value_label(const SweepValue& v) {
    if (const auto* x = std::get_if<double>(&v)) return format_real(*x);
    const auto& r = std::get<Interval>(v);
    return format_real(r.lo) + ";" + format_real(r.hi);
}

}  // namespace

Json to_json(const ExperimentReport& r) {
    Json cells = Json::array();
    for (const auto& c : r.cells) {
        Json cell{{"value_index", c.value_index},
                  {"value", to_json(r.spec.values.at(c.value_index))},
                  {"repeat", c.repeat},
                  {"seed", c.seed}};
        if (c.metrics) {
            cell["metrics"] = to_json(*c.metrics);
            cell["true_edges"] = c.true_edges;
            cell["estimated_edges"] = c.estimated_edges;
            cell["score"] = c.score;
        }
        if (c.threshold_metrics) cell["threshold_metrics"] = to_json(*c.threshold_metrics);
        if (!c.error.empty()) cell["error"] = c.error;
        cells.push_back(std::move(cell));
    }
    Json summaries = Json::array();
    for (const auto& s : r.summaries) {
        Json j{{"value", to_json(s.value)},
               {"completed", s.completed},
               {"f1", stat_json(s.f1)},
               {"precision", stat_json(s.precision)},
               {"recall", stat_json(s.recall)},
               {"shd", stat_json(s.shd)}};
        if (s.threshold_f1) j["threshold_f1"] = stat_json(*s.threshold_f1);
        summaries.push_back(std::move(j));
    }
    return Json{{"summaries", std::move(summaries)}, {"cells", std::move(cells)}};
}

std::string format_experiment_csv(const ExperimentReport& r) {
    std::string out =
        "parameter,value,repeat,seed,precision,recall,f1,shd,true_edges,estimated_edges,threshold_f1,error\n";
    const std::string param = to_string(r.spec.parameter);
    for (const auto& c : r.cells) {
        out += param + "," + csv_escape(value_label(r.spec.values.at(c.value_index))) + "," +
               std::to_string(c.repeat) + "," + std::to_string(c.seed) + ",";
        if (c.metrics) {
            out += format_real(c.metrics->precision) + "," + format_real(c.metrics->recall) + "," +
                   format_real(c.metrics->f1) + "," + std::to_string(c.metrics->shd) + "," +
                   std::to_string(c.true_edges) + "," + std::to_string(c.estimated_edges) + ",";
        } else {
            out += ",,,,,,";
        }
        out += (c.threshold_metrics ? format_real(c.threshold_metrics->f1) : std::string()) + ",";
        out += csv_escape(c.error) + "\n";
    }
    return out;
}

}  // namespace shp::io
