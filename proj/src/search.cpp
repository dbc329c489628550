#include "shp/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "shp/error.hpp"
#include "shp/parallel.hpp"

namespace shp {

void validate(const SearchConfig& cfg) {
    validate(cfg.fit);
    if (cfg.alpha_s && !(*cfg.alpha_s >= 0.0)) throw ValidationError("alpha_s must be >= 0");
    if (cfg.max_sweeps < 1) throw ValidationError("max_sweeps must be positive");
}

double resolved_alpha_s(const SearchConfig& cfg, std::size_t n_bins) {
    if (cfg.alpha_s) return *cfg.alpha_s;
    return n_bins > 0 ? 0.5 * std::log(static_cast<double>(n_bins)) : 0.0;
}

CausalGraph apply_move(const CausalGraph& g, const Move& m) {
    CausalGraph out = g;
    switch (m.kind) {
        case MoveKind::Add: out.add_edge(m.edge.from, m.edge.to); break;
        case MoveKind::Delete: out.remove_edge(m.edge.from, m.edge.to); break;
        case MoveKind::Reverse:
            out.remove_edge(m.edge.from, m.edge.to);
            out.add_edge(m.edge.to, m.edge.from);
            break;
    }
    return out;
}

namespace {

// True when `to` is reachable from `from` along edges, ignoring `skip` if given.
bool reachable(const CausalGraph& g, NodeIndex from, NodeIndex to, std::optional<Edge> skip = std::nullopt) {
    std::vector<std::uint8_t> seen(g.size(), 0);
    std::vector<NodeIndex> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const NodeIndex u = stack.back();
        stack.pop_back();
        if (u == to) return true;
        for (NodeIndex w = 0; w < g.size(); ++w) {
            if (seen[w] || !g.has_edge(u, w)) continue;
            if (skip && skip->from == u && skip->to == w) continue;
            seen[w] = 1;
            stack.push_back(w);
        }
    }
    return false;
}

}  // namespace

std::vector<Move> enumerate_moves(const CausalGraph& g) {
    std::vector<Move> moves;
    const std::size_t n = g.size();
    // a -> b is addable iff absent both ways and b does not already reach a.
    for (NodeIndex a = 0; a < n; ++a)
        for (NodeIndex b = 0; b < n; ++b)
            if (a != b && !g.has_edge(a, b) && !g.has_edge(b, a) && !reachable(g, b, a))
                moves.push_back({MoveKind::Add, {a, b}});
    const auto edges = g.edges();
    for (const auto& e : edges) moves.push_back({MoveKind::Delete, e});
    // Reversing a -> b closes a cycle iff a reaches b by some other path.
    for (const auto& e : edges)
        if (!reachable(g, e.from, e.to, e)) moves.push_back({MoveKind::Reverse, e});
    return moves;
}

std::vector<CausalGraph> neighborhood(const CausalGraph& g) {
    std::vector<CausalGraph> out;
    for (const auto& m : enumerate_moves(g)) out.push_back(apply_move(g, m));
    return out;
}

std::optional<double> ScoreCache::lookup(NodeIndex v, std::vector<NodeIndex> parents) const {
    std::sort(parents.begin(), parents.end());
    std::lock_guard lock(mutex_);
    auto it = entries_.find({v, parents});
    if (it == entries_.end()) return std::nullopt;
    return it->second.score;
}

std::optional<ColumnFit> ScoreCache::lookup_fit(NodeIndex v, std::vector<NodeIndex> parents) const {
    std::sort(parents.begin(), parents.end());
    std::lock_guard lock(mutex_);
    auto it = entries_.find({v, parents});
    if (it == entries_.end()) return std::nullopt;
    return it->second.fit;
}

void ScoreCache::insert(NodeIndex v, std::vector<NodeIndex> parents, ColumnFit fit, double score) {
    std::sort(parents.begin(), parents.end());
    std::lock_guard lock(mutex_);
    entries_.try_emplace({v, std::move(parents)}, Entry{std::move(fit), score});
}

std::size_t ScoreCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

namespace {

struct Family {
    NodeIndex node;
    std::vector<NodeIndex> parents;  // sorted
    bool operator<(const Family& o) const { return std::tie(node, parents) < std::tie(o.node, o.parents); }
    bool operator==(const Family&) const = default;
};

struct FamilyFit {
    ColumnFit fit;
    double score = 0.0;
};

std::vector<NodeIndex> with(std::vector<NodeIndex> ps, NodeIndex x) {
    ps.insert(std::lower_bound(ps.begin(), ps.end(), x), x);
    return ps;
}

std::vector<NodeIndex> without(std::vector<NodeIndex> ps, NodeIndex x) {
    ps.erase(std::remove(ps.begin(), ps.end(), x), ps.end());
    return ps;
}

// Families whose local score changes under m.
std::vector<Family> touched_families(const CausalGraph& g, const Move& m) {
    const auto [a, b] = m.edge;
    switch (m.kind) {
        case MoveKind::Add: return {{b, with(g.parents(b), a)}};
        case MoveKind::Delete: return {{b, without(g.parents(b), a)}};
        case MoveKind::Reverse: return {{b, without(g.parents(b), a)}, {a, with(g.parents(a), b)}};
    }
    return {};
}

class FamilyScorer {
public:
    FamilyScorer(const FitData& data, const SearchConfig& cfg, double alpha_s)
        : data_(data), cfg_(cfg), alpha_s_(alpha_s), threads_(cfg.parallel ? resolve_threads(cfg.threads) : 1) {}

    FamilyFit compute(const Family& f) {
        FamilyFit out{fit_column(data_, f.node, f.parents, cfg_.fit), 0.0};
        out.score = out.fit.loglik - alpha_s_ * static_cast<double>(f.parents.size());
        return out;
    }

    // Fits for every request, in request order. Cached families are fitted once
    // and reused; with the cache off every request is fitted afresh.
    std::vector<FamilyFit> resolve(const std::vector<Family>& requests) {
        std::vector<FamilyFit> out(requests.size());
        if (!cfg_.use_cache) {
            parallel_for(requests.size(), threads_, [&](std::size_t i) { out[i] = compute(requests[i]); });
            fresh_fits_ += requests.size();
            return out;
        }
        std::vector<Family> missing;
        for (const auto& f : requests)
            if (!cache_.lookup(f.node, f.parents)) missing.push_back(f);
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        parallel_for(missing.size(), threads_, [&](std::size_t i) {
            auto r = compute(missing[i]);
            cache_.insert(missing[i].node, missing[i].parents, std::move(r.fit), r.score);
        });
        fresh_fits_ += missing.size();
        for (std::size_t i = 0; i < requests.size(); ++i) {
            const auto& f = requests[i];
            out[i] = {*cache_.lookup_fit(f.node, f.parents), *cache_.lookup(f.node, f.parents)};
        }
        return out;
    }

    std::size_t fresh_fits() const { return fresh_fits_; }

private:
    const FitData& data_;
    const SearchConfig& cfg_;
    double alpha_s_;
    unsigned threads_;
    ScoreCache cache_;
    std::size_t fresh_fits_ = 0;
};

}  // namespace

SearchResult hill_climb(const BinnedCounts& counts, const SearchConfig& cfg) {
    validate(cfg);
    if (counts.bins() == 0 || counts.nodes() == 0) throw ValidationError("hill_climb needs at least one bin and node");
    const double alpha_s = resolved_alpha_s(cfg, counts.bins());
    const FitData data(counts, cfg.fit.beta);
    FamilyScorer scorer(data, cfg, alpha_s);
    const std::size_t n = counts.nodes();

    SearchResult out;
    out.alpha_s = alpha_s;
    CausalGraph g(counts.node_names());
    std::vector<Family> roots;
    for (NodeIndex v = 0; v < n; ++v) roots.push_back({v, {}});
    std::vector<FamilyFit> current = scorer.resolve(roots);
    double score = 0.0;
    for (const auto& f : current) score += f.score;
    out.score_trace.push_back(score);

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        const auto moves = enumerate_moves(g);
        std::vector<Family> requests;
        std::vector<std::size_t> first_request(moves.size() + 1, 0);
        for (std::size_t i = 0; i < moves.size(); ++i) {
            first_request[i] = requests.size();
            for (auto& f : touched_families(g, moves[i])) requests.push_back(std::move(f));
        }
        first_request[moves.size()] = requests.size();
        const auto fits = scorer.resolve(requests);

        std::optional<std::size_t> best;
        double best_score = score;
        for (std::size_t i = 0; i < moves.size(); ++i) {
            double candidate = score;
            for (std::size_t r = first_request[i]; r < first_request[i + 1]; ++r)
                candidate += fits[r].score - current[requests[r].node].score;
            ++out.visited;
            if (candidate > best_score) {
                best_score = candidate;
                best = i;
            }
        }
        if (!best) break;
        g = apply_move(g, moves[*best]);
        for (std::size_t r = first_request[*best]; r < first_request[*best + 1]; ++r)
            current[requests[r].node] = fits[r];
        score = 0.0;
        for (const auto& f : current) score += f.score;
        out.score_trace.push_back(score);
    }

    out.params = ShpParams::zeros(n, cfg.fit.beta, counts.delta());
    for (NodeIndex v = 0; v < n; ++v) {
        const auto& c = current[v].fit;
        out.params.mu[v] = c.mu;
        for (std::size_t j = 0; j < c.sources.size(); ++j) out.params.alpha(c.sources[j], v) = c.alpha[j];
    }
    out.graph = std::move(g);
    out.score = score;
    out.fresh_fits = scorer.fresh_fits();
    return out;
}

CausalGraph threshold_graph(const BinnedCounts& counts, double tau, const FitConfig& cfg) {
    validate(cfg);
    if (!(tau >= 0.0)) throw ValidationError("tau must be >= 0");
    const FitData data(counts, cfg.beta);
    CausalGraph g(counts.node_names());
    for (NodeIndex v = 0; v < counts.nodes(); ++v) {
        std::vector<NodeIndex> others;
        for (NodeIndex s = 0; s < counts.nodes(); ++s)
            if (s != v) others.push_back(s);
        const auto c = fit_column(data, v, others, cfg);
        for (std::size_t j = 0; j < c.sources.size(); ++j)
            if (c.sources[j] != v && c.alpha[j] > tau) g.add_edge(c.sources[j], v);
    }
    return g;
}

}  // namespace shp
