#include "shp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "shp/error.hpp"

namespace shp {

ContinuousSequence::ContinuousSequence(std::vector<EventRecord> records, double horizon)
    : records_(std::move(records)), horizon_(horizon) {
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ValidationError("horizon must be finite and non-negative");
    std::stable_sort(records_.begin(), records_.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
    for (const auto& r : records_) {
        if (!(r.timestamp > 0.0))
            throw ValidationError("event '" + r.event_type + "' has non-positive timestamp");
        if (r.timestamp > horizon)
            throw ValidationError("event '" + r.event_type + "' lies beyond the horizon");
    }
}

BinnedCounts::BinnedCounts(Matrix<Count> counts, double delta, std::vector<std::string> node_names)
    : counts_(std::move(counts)), delta_(delta), node_names_(std::move(node_names)) {
    if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw ValidationError("bin width must be positive");
    if (counts_.cols() != node_names_.size() && counts_.rows() != 0)
        throw ValidationError("count matrix has " + std::to_string(counts_.cols()) + " columns but " +
                              std::to_string(node_names_.size()) + " node names");
    if (counts_.rows() == 0) counts_ = Matrix<Count>(0, node_names_.size());
    for (Count c : counts_.data())
        if (c < 0) throw ValidationError("counts must be non-negative");
}

Count BinnedCounts::column_total(NodeIndex v) const {
    Count total = 0;
    for (std::size_t k = 0; k < bins(); ++k) total += counts_(k, v);
    return total;
}

Count BinnedCounts::total() const {
    const auto d = counts_.data();
    return std::accumulate(d.begin(), d.end(), Count{0});
}

CausalGraph::CausalGraph(std::vector<std::string> nodes)
    : nodes_(std::move(nodes)), adj_(nodes_.size(), nodes_.size(), 0) {
    std::vector<std::string> sorted = nodes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValidationError("duplicate node identifier");
}

CausalGraph::CausalGraph(std::vector<std::string> nodes, const std::vector<Edge>& edges)
    : CausalGraph(std::move(nodes)) {
    for (const auto& e : edges) add_edge(e.from, e.to);
}

CausalGraph CausalGraph::complete(std::vector<std::string> nodes) {
    CausalGraph g(std::move(nodes));
    for (NodeIndex a = 0; a < g.size(); ++a)
        for (NodeIndex b = 0; b < g.size(); ++b)
            if (a != b) g.add_edge(a, b);
    return g;
}

NodeIndex CausalGraph::index_of(const std::string& name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) throw ValidationError("unknown node '" + name + "'");
    return static_cast<NodeIndex>(it - nodes_.begin());
}

void CausalGraph::add_edge(NodeIndex from, NodeIndex to) {
    if (from >= size() || to >= size()) throw ValidationError("edge endpoint out of range");
    if (from == to) throw ValidationError("self-loop on '" + nodes_[from] + "' is not a graph edge");
    if (!adj_(from, to)) {
        adj_(from, to) = 1;
        ++n_edges_;
    }
}

void CausalGraph::remove_edge(NodeIndex from, NodeIndex to) {
    if (from >= size() || to >= size()) throw ValidationError("edge endpoint out of range");
    if (adj_(from, to)) {
        adj_(from, to) = 0;
        --n_edges_;
    }
}

std::vector<Edge> CausalGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(n_edges_);
    for (NodeIndex a = 0; a < size(); ++a)
        for (NodeIndex b = 0; b < size(); ++b)
            if (adj_(a, b)) out.push_back({a, b});
    return out;
}

std::vector<NodeIndex> CausalGraph::parents(NodeIndex v) const {
    std::vector<NodeIndex> out;
    for (NodeIndex a = 0; a < size(); ++a)
        if (adj_(a, v)) out.push_back(a);
    return out;
}

namespace {

// Returns the nodes of one directed cycle, or empty when acyclic.
std::vector<NodeIndex> find_cycle(const CausalGraph& g) {
    const std::size_t n = g.size();
    enum : std::uint8_t { White, Grey, Black };
    std::vector<std::uint8_t> colour(n, White);
    std::vector<NodeIndex> stack_parent(n, n);
    for (NodeIndex root = 0; root < n; ++root) {
        if (colour[root] != White) continue;
        // Iterative DFS: (node, next child to try).
        std::vector<std::pair<NodeIndex, NodeIndex>> stack{{root, 0}};
        colour[root] = Grey;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            while (next < n && !g.has_edge(u, next)) ++next;
            if (next == n) {
                colour[u] = Black;
                stack.pop_back();
                continue;
            }
            const NodeIndex w = next++;
            if (colour[w] == Grey) {
                std::vector<NodeIndex> cycle{w};
                for (NodeIndex x = u; x != w; x = stack_parent[x]) cycle.push_back(x);
                std::reverse(cycle.begin() + 1, cycle.end());
                return cycle;
            }
            if (colour[w] == White) {
                colour[w] = Grey;
                stack_parent[w] = u;
                stack.emplace_back(w, 0);
            }
        }
    }
    return {};
}

}  // namespace

bool is_acyclic(const CausalGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& e : g.edges()) ++indeg[e.to];
    std::vector<NodeIndex> ready;
    for (NodeIndex v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    std::size_t seen = 0;
    while (!ready.empty()) {
        const NodeIndex u = ready.back();
        ready.pop_back();
        ++seen;
        for (NodeIndex w = 0; w < n; ++w)
            if (g.has_edge(u, w) && --indeg[w] == 0) ready.push_back(w);
    }
    return seen == n;
}

std::vector<NodeIndex> topological_order(const CausalGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& e : g.edges()) ++indeg[e.to];
    std::priority_queue<NodeIndex, std::vector<NodeIndex>, std::greater<>> ready;
    for (NodeIndex v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push(v);
    std::vector<NodeIndex> order;
    order.reserve(n);
    while (!ready.empty()) {
        const NodeIndex u = ready.top();
        ready.pop();
        order.push_back(u);
        for (NodeIndex w = 0; w < n; ++w)
            if (g.has_edge(u, w) && --indeg[w] == 0) ready.push(w);
    }
    if (order.size() != n) {
        std::ostringstream msg;
        msg << "graph is cyclic: ";
        const auto cycle = find_cycle(g);
        for (NodeIndex v : cycle) msg << g.nodes()[v] << " -> ";
        if (!cycle.empty()) msg << g.nodes()[cycle.front()];
        throw ValidationError(msg.str());
    }
    return order;
}

double decay_factor(double beta, double delta) {
    if (std::isinf(beta)) return 0.0;
    return std::exp(-beta * delta);
}

void check_support(const ShpParams& params, const CausalGraph& g) {
    const std::size_t n = params.nodes();
    if (g.size() != n || params.alpha.rows() != n || params.alpha.cols() != n)
        throw ValidationError("parameter dimensions do not match the graph");
    if (!(params.delta > 0.0)) throw ValidationError("bin width must be positive");
    if (!(params.beta > 0.0)) throw ValidationError("decay rate beta must be positive");
    for (NodeIndex v = 0; v < n; ++v) {
        if (!std::isfinite(params.mu[v]) || params.mu[v] < 0.0)
            throw ValidationError("immigration rate of '" + g.nodes()[v] + "' must be finite and >= 0");
        for (NodeIndex s = 0; s < n; ++s) {
            const double a = params.alpha(s, v);
            if (!std::isfinite(a) || a < 0.0)
                throw ValidationError("causal strength must be finite and >= 0");
            if (s != v && a != 0.0 && !g.has_edge(s, v))
                throw ValidationError("nonzero strength " + g.nodes()[s] + " -> " + g.nodes()[v] +
                                      " outside the graph support");
        }
    }
}

BinnedCounts bin_events(const ContinuousSequence& seq, double delta, const std::vector<std::string>& nodes) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("bin width must be positive");
    std::unordered_map<std::string, NodeIndex> index;
    for (NodeIndex v = 0; v < nodes.size(); ++v) index.emplace(nodes[v], v);
    const auto n_bins = static_cast<std::size_t>(std::ceil(seq.horizon() / delta));
    Matrix<Count> counts(n_bins, nodes.size(), 0);
    for (const auto& r : seq.records()) {
        auto it = index.find(r.event_type);
        if (it == index.end()) throw ValidationError("unknown event type '" + r.event_type + "'");
        auto k = static_cast<std::size_t>(std::ceil(r.timestamp / delta));
        k = std::clamp<std::size_t>(k, 1, n_bins);
        ++counts(k - 1, it->second);
    }
    return BinnedCounts(std::move(counts), delta, nodes);
}

}  // namespace shp
