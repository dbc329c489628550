#pragma once

// File formats.
//
// Event log CSV:  header `event_type,timestamp`, one record per line.
// Counts CSV:     header `bin,<node>,...`, bins numbered 1..K, integer cells.
// Graph CSV:      header `src,dst`, one directed edge per line.
//
// Fields containing a comma, double quote, CR or LF are wrapped in double quotes
// with embedded quotes doubled; all other fields are written bare. Lines end in
// "\n". Reals are printed with 17 significant digits so they read back exactly.
// Quoted fields may not span lines.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shp/estimator.hpp"
#include "shp/evaluation.hpp"
#include "shp/model.hpp"
#include "shp/search.hpp"

namespace shp::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// CSV primitives.
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line, const std::string& path, std::size_t line_no);
std::string format_real(double x);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

struct EventLog {
    std::vector<EventRecord> records;
    std::vector<std::string> types;  // in order of first appearance
};

EventLog parse_event_log(const std::string& text, const std::string& source = "<events>");
std::string format_event_log(const ContinuousSequence& seq);

BinnedCounts parse_counts(const std::string& text, double delta, const std::string& source = "<counts>");
std::string format_counts(const BinnedCounts& counts);

// Edges by node name.
std::vector<std::pair<std::string, std::string>> parse_edge_list(const std::string& text,
                                                                 const std::string& source = "<graph>");
std::string format_edge_list(const CausalGraph& g);
// Builds a graph over `nodes` from named edges; unknown names are rejected.
CausalGraph graph_from_edges(const std::vector<std::string>& nodes,
                             const std::vector<std::pair<std::string, std::string>>& edges);

// beta may be +infinity, which JSON cannot hold; it is written as "inf".
Json real_or_inf(double x);
double real_or_inf(const Json& j, const std::string& key);

Json to_json(const ShpParams& params, const std::vector<std::string>& nodes);
ShpParams params_from_json(const Json& j);
Json to_json(const CausalGraph& g);
Json to_json(const FitResult& r, const std::vector<std::string>& nodes);
Json to_json(const SearchResult& r);
Json to_json(const MetricReport& m);
Json to_json(const GapSummary& g);
Json to_json(const DispersionResult& d);
Json to_json(const SweepValue& v);
Json to_json(const ExperimentReport& r);
// One row per cell.
std::string format_experiment_csv(const ExperimentReport& r);

}  // namespace shp::io
