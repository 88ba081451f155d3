#ifndef RATEQ_MATCH_HPP
#define RATEQ_MATCH_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "graph.hpp"

namespace rateq {

namespace detail {

/// Backtracking enumeration of monomorphisms pattern -> target.
/// Nodes are assigned in order of decreasing degree (ties by id) with label,
/// degree and adjacency-count pruning; edges are matched once both endpoints
/// are placed. Pre-assigned node/edge pairs constrain the search.
class MonoSearch {
public:
    MonoSearch(const Graph& pat, const Graph& tgt) : pat_(pat), tgt_(tgt) {}

    bool preassign_node(Id p, Id t) { pre_nodes_.push_back({p, t}); return true; }
    bool preassign_edge(Id p, Id t) { pre_edges_.push_back({p, t}); return true; }

    /// Calls sink for every mono; stops early when sink returns false.
    void run(const std::function<bool(const IdMap&, const IdMap&)>& sink) {
        if (pat_.node_count() > tgt_.node_count() || pat_.edge_count() > tgt_.edge_count()) return;
        sink_ = &sink;
        stopped_ = false;

        node_order_.clear();
        for (const Node& n : pat_.nodes()) node_order_.push_back(n.id);
        std::stable_sort(node_order_.begin(), node_order_.end(), [&](Id a, Id b) {
            return pat_.degree(a) > pat_.degree(b);
        });

        nmap_.clear();
        used_nodes_.clear();
        for (auto& [p, t] : pre_nodes_) {
            const Node* pn = pat_.find_node(p);
            const Node* tn = tgt_.find_node(t);
            if (!pn || !tn || pn->label != tn->label) return;
            auto it = nmap_.find(p);
            if (it != nmap_.end()) {
                if (it->second != t) return;
                continue;
            }
            if (used_nodes_.count(t)) return;
            nmap_[p] = t;
            used_nodes_.insert(t);
        }
        for (auto& [p, t] : pre_edges_) {
            if (!pat_.find_edge(p) || !tgt_.find_edge(t)) return;
        }
        assign_nodes(0);
    }

private:
    void assign_nodes(std::size_t idx) {
        if (stopped_) return;
        while (idx < node_order_.size() && nmap_.count(node_order_[idx])) ++idx;
        if (idx == node_order_.size()) {
            assign_edges();
            return;
        }
        Id p = node_order_[idx];
        const Node& pn = *pat_.find_node(p);
        for (const Node& tn : tgt_.nodes()) {
            if (stopped_) return;
            if (tn.label != pn.label || used_nodes_.count(tn.id)) continue;
            if (tgt_.degree(tn.id) < pat_.degree(p)) continue;
            if (!adjacency_consistent(p, tn.id)) continue;
            nmap_[p] = tn.id;
            used_nodes_.insert(tn.id);
            assign_nodes(idx + 1);
            nmap_.erase(p);
            used_nodes_.erase(tn.id);
        }
    }

    /// For every assigned pattern node w, the multiset of pattern edges
    /// between p and w must fit into the target edges between t and f(w).
    bool adjacency_consistent(Id p, Id t) const {
        for (auto& [w, fw] : nmap_) {
            if (count_between(pat_, p, w) > count_between(tgt_, t, fw)) return false;
            if (count_between(pat_, w, p) > count_between(tgt_, fw, t)) return false;
        }
        if (count_between(pat_, p, p) > count_between(tgt_, t, t)) return false;
        return true;
    }

    static std::size_t count_between(const Graph& g, Id s, Id t) {
        std::size_t c = 0;
        for (const Edge& e : g.edges()) c += (e.src == s && e.tgt == t);
        return c;
    }

    void assign_edges() {
        emap_.clear();
        used_edges_.clear();
        for (auto& [p, t] : pre_edges_) {
            const Edge& pe = *pat_.find_edge(p);
            const Edge& te = *tgt_.find_edge(t);
            if (pe.label != te.label || nmap_.at(pe.src) != te.src || nmap_.at(pe.tgt) != te.tgt) return;
            auto it = emap_.find(p);
            if (it != emap_.end()) {
                if (it->second != t) return;
                continue;
            }
            if (used_edges_.count(t)) return;
            emap_[p] = t;
            used_edges_.insert(t);
        }
        edge_order_.clear();
        for (const Edge& e : pat_.edges())
            if (!emap_.count(e.id)) edge_order_.push_back(e.id);
        assign_edge(0);
    }

    void assign_edge(std::size_t idx) {
        if (stopped_) return;
        if (idx == edge_order_.size()) {
            emit();
            return;
        }
        const Edge& pe = *pat_.find_edge(edge_order_[idx]);
        Id s = nmap_.at(pe.src), t = nmap_.at(pe.tgt);
        for (const Edge& te : tgt_.edges()) {
            if (stopped_) return;
            if (te.src != s || te.tgt != t || te.label != pe.label || used_edges_.count(te.id)) continue;
            emap_[pe.id] = te.id;
            used_edges_.insert(te.id);
            assign_edge(idx + 1);
            emap_.erase(pe.id);
            used_edges_.erase(te.id);
        }
    }

    void emit() {
        std::vector<std::pair<Id, Id>> nm(nmap_.begin(), nmap_.end());
        std::vector<std::pair<Id, Id>> em(emap_.begin(), emap_.end());
        if (!(*sink_)(IdMap(std::move(nm)), IdMap(std::move(em)))) stopped_ = true;
    }

    const Graph& pat_;
    const Graph& tgt_;
    std::vector<std::pair<Id, Id>> pre_nodes_, pre_edges_;
    std::vector<Id> node_order_, edge_order_;
    std::map<Id, Id> nmap_, emap_;
    std::set<Id> used_nodes_, used_edges_;
    const std::function<bool(const IdMap&, const IdMap&)>* sink_ = nullptr;
    bool stopped_ = false;
};

} // namespace detail

/// All label- and structure-preserving injective morphisms pattern -> target,
/// ordered lexicographically by the images of the pattern's sorted node ids,
/// then by the images of its sorted edge ids.
inline std::vector<Morphism> enumerate_matches(const Graph& pattern, const Graph& target) {
    detail::MonoSearch search(pattern, target);
    std::vector<std::pair<IdMap, IdMap>> found;
    search.run([&](const IdMap& nm, const IdMap& em) {
        found.push_back({nm, em});
        return true;
    });
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.first.pairs() != b.first.pairs()) return a.first.pairs() < b.first.pairs();
        return a.second.pairs() < b.second.pairs();
    });
    std::vector<Morphism> out;
    out.reserve(found.size());
    for (auto& [nm, em] : found) out.emplace_back(pattern, target, nm, em);
    return out;
}

/// Match count <F>(G) without materializing the morphisms.
inline std::uint64_t evaluate_observable(const Graph& pattern, const Graph& target) {
    detail::MonoSearch search(pattern, target);
    std::uint64_t count = 0;
    search.run([&](const IdMap&, const IdMap&) {
        ++count;
        return true;
    });
    return count;
}

/// Monos pattern -> target extending the given partial node/edge assignment.
inline std::vector<Morphism> enumerate_monos_extending(
    const Graph& pattern, const Graph& target,
    const std::vector<std::pair<Id, Id>>& fixed_nodes,
    const std::vector<std::pair<Id, Id>>& fixed_edges,
    std::size_t limit = SIZE_MAX) {
    detail::MonoSearch search(pattern, target);
    for (auto& [p, t] : fixed_nodes) search.preassign_node(p, t);
    for (auto& [p, t] : fixed_edges) search.preassign_edge(p, t);
    std::vector<Morphism> out;
    search.run([&](const IdMap& nm, const IdMap& em) {
        out.emplace_back(pattern, target, nm, em);
        return out.size() < limit;
    });
    return out;
}

/// Isomorphism a -> b extending the partial assignment, when one exists.
/// A mono between graphs of equal node and edge count is an isomorphism.
inline std::optional<Morphism> find_iso_extending(
    const Graph& a, const Graph& b,
    const std::vector<std::pair<Id, Id>>& fixed_nodes = {},
    const std::vector<std::pair<Id, Id>>& fixed_edges = {}) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return std::nullopt;
    auto found = enumerate_monos_extending(a, b, fixed_nodes, fixed_edges, 1);
    if (found.empty()) return std::nullopt;
    return found.front();
}

/// Brute-force isomorphism test (used by canonical-form checks and tests).
inline bool isomorphic_search(const Graph& a, const Graph& b) {
    return find_iso_extending(a, b).has_value();
}

} // namespace rateq

#endif
