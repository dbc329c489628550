#pragma once

// Acyclicity-constrained hill climbing over DAGs scored by the l0-penalized
// likelihood, plus the threshold ablation that skips the search.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "shp/estimator.hpp"
#include "shp/model.hpp"

namespace shp {

struct SearchConfig {
    std::optional<double> alpha_s;  // l0 weight; unset means 0.5 * log(K)
    FitConfig fit;
    int max_sweeps = 200;
    bool parallel = false;
    unsigned threads = 0;  // worker cap when parallel; 0 means hardware concurrency
    bool use_cache = true;
};

void validate(const SearchConfig& cfg);

// The l0 weight actually used for K bins.
double resolved_alpha_s(const SearchConfig& cfg, std::size_t n_bins);

struct SearchResult {
    CausalGraph graph;
    ShpParams params;
    double score = 0.0;
    std::vector<double> score_trace;  // accepted scores, starting with the empty graph
    std::size_t visited = 0;          // scored candidate graphs
    std::size_t fresh_fits = 0;       // column fits actually computed
    double alpha_s = 0.0;
};

enum class MoveKind { Add, Delete, Reverse };

struct Move {
    MoveKind kind;
    Edge edge;  // for Reverse, the existing edge that gets flipped
    bool operator==(const Move&) const = default;
};

CausalGraph apply_move(const CausalGraph& g, const Move& m);

// Every acyclic one-edge modification of g: additions, then deletions, then
// reversals, each in lexicographic edge order.
std::vector<Move> enumerate_moves(const CausalGraph& g);
std::vector<CausalGraph> neighborhood(const CausalGraph& g);

// Thread-safe memo of column fits keyed by (node, sorted parent set).
class ScoreCache {
public:
    std::optional<double> lookup(NodeIndex v, std::vector<NodeIndex> parents) const;
    std::optional<ColumnFit> lookup_fit(NodeIndex v, std::vector<NodeIndex> parents) const;
    void insert(NodeIndex v, std::vector<NodeIndex> parents, ColumnFit fit, double score);
    std::size_t size() const;

private:
    struct Entry {
        ColumnFit fit;
        double score;
    };
    using Key = std::pair<NodeIndex, std::vector<NodeIndex>>;
    mutable std::mutex mutex_;
    std::map<Key, Entry> entries_;
};

SearchResult hill_climb(const BinnedCounts& counts, const SearchConfig& cfg);

// Fits every off-diagonal strength at once and keeps v' -> v iff its fitted
// strength exceeds tau. The result may be cyclic.
CausalGraph threshold_graph(const BinnedCounts& counts, double tau, const FitConfig& cfg);

}  // namespace shp
