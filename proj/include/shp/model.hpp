#pragma once

// Domain types shared by every module: event records, binned counts,
// causal graphs and the structural Hawkes parameter set.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shp/matrix.hpp"

namespace shp {

using NodeIndex = std::size_t;
using Count = std::int64_t;

struct EventRecord {
    std::string event_type;
    double timestamp = 0.0;  // seconds, strictly positive
};

// Event stream on (0, horizon]. Records are kept sorted by timestamp.
class ContinuousSequence {
public:
    ContinuousSequence() = default;
    // Sorts the records (stable) and validates 0 < timestamp <= horizon.
    ContinuousSequence(std::vector<EventRecord> records, double horizon);

    const std::vector<EventRecord>& records() const noexcept { return records_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return records_.size(); }

private:
    std::vector<EventRecord> records_;
    double horizon_ = 0.0;
};

// Per-bin event counts X[k][v] for bins ((k-1)delta, k*delta].
class BinnedCounts {
public:
    BinnedCounts() = default;
    BinnedCounts(Matrix<Count> counts, double delta, std::vector<std::string> node_names);

    const Matrix<Count>& counts() const noexcept { return counts_; }
    Count operator()(std::size_t bin, NodeIndex v) const { return counts_(bin, v); }
    double delta() const noexcept { return delta_; }
    const std::vector<std::string>& node_names() const noexcept { return node_names_; }

    std::size_t bins() const noexcept { return counts_.rows(); }
    std::size_t nodes() const noexcept { return node_names_.size(); }
    double horizon() const noexcept { return static_cast<double>(bins()) * delta_; }

    Count column_total(NodeIndex v) const;
    Count total() const;

    bool operator==(const BinnedCounts&) const = default;

private:
    Matrix<Count> counts_;
    double delta_ = 1.0;
    std::vector<std::string> node_names_;
};

struct Edge {
    NodeIndex from;
    NodeIndex to;
    auto operator<=>(const Edge&) const = default;
};

// Directed graph over an ordered node list. Self-loops are not representable;
// lagged self-excitation lives on the diagonal of the strength matrix instead.
// Cycles are representable (threshold graphs may contain them); search states
// are always acyclic.
class CausalGraph {
public:
    CausalGraph() = default;
    explicit CausalGraph(std::vector<std::string> nodes);
    CausalGraph(std::vector<std::string> nodes, const std::vector<Edge>& edges);

    // Graph with every off-diagonal edge present.
    static CausalGraph complete(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    NodeIndex index_of(const std::string& name) const;

    bool has_edge(NodeIndex from, NodeIndex to) const { return adj_(from, to) != 0; }
    void add_edge(NodeIndex from, NodeIndex to);
    void remove_edge(NodeIndex from, NodeIndex to);

    std::size_t edge_count() const noexcept { return n_edges_; }
    // Sorted lexicographically by (from, to).
    std::vector<Edge> edges() const;
    // Parent indices of v in ascending order.
    std::vector<NodeIndex> parents(NodeIndex v) const;

    bool operator==(const CausalGraph&) const = default;

private:
    std::vector<std::string> nodes_;
    Matrix<std::uint8_t> adj_;
    std::size_t n_edges_ = 0;
};

bool is_acyclic(const CausalGraph& g);

// Kahn's algorithm, ready nodes released smallest-index first. Throws
// ValidationError naming one cycle when g is cyclic.
std::vector<NodeIndex> topological_order(const CausalGraph& g);

// Parameters of a structural Hawkes process. alpha(src, dst) is the causal
// strength of src -> dst; alpha(v, v) is lagged self-excitation.
// beta = +infinity switches every lagged term off (instantaneous-only model).
struct ShpParams {
    Matrix<double> alpha;
    std::vector<double> mu;
    double beta = 1.0;
    double delta = 1.0;

    std::size_t nodes() const noexcept { return mu.size(); }

    static ShpParams zeros(std::size_t n, double beta, double delta) {
        return {Matrix<double>(n, n, 0.0), std::vector<double>(n, 0.0), beta, delta};
    }
};

// Per-bin decay e^{-beta*delta} of the exponential kernel; 0 when beta is infinite.
double decay_factor(double beta, double delta);

// Throws ValidationError unless every off-diagonal nonzero alpha is a graph edge
// and all entries are finite and non-negative.
void check_support(const ShpParams& params, const CausalGraph& g);

// Assigns event records to half-open bins ((k-1)delta, k*delta], K = ceil(horizon/delta).
BinnedCounts bin_events(const ContinuousSequence& seq, double delta, const std::vector<std::string>& nodes);

}  // namespace shp
