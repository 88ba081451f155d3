#ifndef RATEQ_GRAPH_HPP
#define RATEQ_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rateq {

using Id = std::uint64_t;
using Label = std::string;

struct Node {
    Id id;
    Label label;
    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    Id id;
    Id src;
    Id tgt;
    Label label;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite directed labeled multigraph. Nodes and edges are kept sorted by id;
/// ids are opaque and pairwise distinct within each sort. Values are immutable
/// after construction (all operations below are pure).
class Graph {
public:
    Graph() = default;
    Graph(std::vector<Node> nodes, std::vector<Edge> edges)
        : nodes_(std::move(nodes)), edges_(std::move(edges)) {
        normalize();
        validate();
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return nodes_.empty() && edges_.empty(); }

    bool has_node(Id id) const { return find_node(id) != nullptr; }
    bool has_edge(Id id) const { return find_edge(id) != nullptr; }

    const Node* find_node(Id id) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                   [](const Node& n, Id v) { return n.id < v; });
        return (it != nodes_.end() && it->id == id) ? &*it : nullptr;
    }
    const Node* find_node_checked(Id id) const {
        const Node* n = find_node(id);
        if (!n) throw std::invalid_argument("graph: unknown node id " + std::to_string(id));
        return n;
    }
    const Edge* find_edge(Id id) const {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                                   [](const Edge& e, Id v) { return e.id < v; });
        return (it != edges_.end() && it->id == id) ? &*it : nullptr;
    }
    const Edge* find_edge_checked(Id id) const {
        const Edge* e = find_edge(id);
        if (!e) throw std::invalid_argument("graph: unknown edge id " + std::to_string(id));
        return e;
    }

    /// Edges incident to a node (as source or target).
    std::vector<Id> incident_edges(Id node) const {
        std::vector<Id> out;
        for (const Edge& e : edges_)
            if (e.src == node || e.tgt == node) out.push_back(e.id);
        return out;
    }

    std::size_t degree(Id node) const {
        std::size_t d = 0;
        for (const Edge& e : edges_) d += (e.src == node) + (e.tgt == node);
        return d;
    }

    /// Induced subgraph on the given node and edge id sets. Edge endpoints
    /// must be contained in the node set.
    Graph restrict_to(const std::vector<Id>& node_ids, const std::vector<Id>& edge_ids) const {
        std::vector<Node> ns;
        std::vector<Edge> es;
        for (Id id : node_ids) ns.push_back(*find_node_checked(id));
        for (Id id : edge_ids) es.push_back(*find_edge_checked(id));
        return Graph(std::move(ns), std::move(es));
    }

    /// True when every node/edge of `sub` occurs in this graph with the same
    /// label and endpoints (id-subset closed under src/tgt).
    bool contains_subgraph(const Graph& sub) const {
        for (const Node& n : sub.nodes()) {
            const Node* m = find_node(n.id);
            if (!m || m->label != n.label) return false;
        }
        for (const Edge& e : sub.edges()) {
            const Edge* f = find_edge(e.id);
            if (!f || f->src != e.src || f->tgt != e.tgt || f->label != e.label) return false;
        }
        return true;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    void normalize() {
        std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    }
    void validate() const {
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (nodes_[i - 1].id == nodes_[i].id)
                throw std::invalid_argument("graph: duplicate node id " + std::to_string(nodes_[i].id));
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i - 1].id == edges_[i].id)
                throw std::invalid_argument("graph: duplicate edge id " + std::to_string(edges_[i].id));
        for (const Edge& e : edges_) {
            if (!has_node(e.src) || !has_node(e.tgt))
                throw std::invalid_argument("graph: edge " + std::to_string(e.id) +
                                            " has endpoint outside the node set");
        }
    }

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
};

/// Total map on ids, stored sorted for deterministic iteration.
class IdMap {
public:
    IdMap() = default;
    explicit IdMap(std::vector<std::pair<Id, Id>> pairs) : pairs_(std::move(pairs)) {
        std::sort(pairs_.begin(), pairs_.end());
        for (std::size_t i = 1; i < pairs_.size(); ++i)
            if (pairs_[i - 1].first == pairs_[i].first)
                throw std::invalid_argument("id map: duplicate key");
    }

    void insert(Id k, Id v) {
        auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::make_pair(k, Id(0)),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        if (it != pairs_.end() && it->first == k) throw std::invalid_argument("id map: duplicate key");
        pairs_.insert(it, {k, v});
    }

    std::optional<Id> get(Id k) const {
        auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::make_pair(k, Id(0)),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        if (it != pairs_.end() && it->first == k) return it->second;
        return std::nullopt;
    }

    Id at(Id k) const {
        auto v = get(k);
        if (!v) throw std::invalid_argument("id map: missing key " + std::to_string(k));
        return *v;
    }

    bool injective() const {
        std::vector<Id> vals;
        vals.reserve(pairs_.size());
        for (auto& [k, v] : pairs_) vals.push_back(v);
        std::sort(vals.begin(), vals.end());
        return std::adjacent_find(vals.begin(), vals.end()) == vals.end();
    }

    std::size_t size() const { return pairs_.size(); }
    const std::vector<std::pair<Id, Id>>& pairs() const { return pairs_; }

    friend bool operator==(const IdMap&, const IdMap&) = default;

private:
    std::vector<std::pair<Id, Id>> pairs_;
};

/// Total structure- and label-preserving graph morphism. `mono` records the
/// injectivity flag checked at construction; matches are morphisms with
/// mono = true.
class Morphism {
public:
    Morphism() = default;
    Morphism(Graph dom, Graph cod, IdMap node_map, IdMap edge_map)
        : dom_(std::move(dom)), cod_(std::move(cod)),
          node_map_(std::move(node_map)), edge_map_(std::move(edge_map)) {
        validate();
        mono_ = node_map_.injective() && edge_map_.injective();
    }

    const Graph& dom() const { return dom_; }
    const Graph& cod() const { return cod_; }
    const IdMap& node_map() const { return node_map_; }
    const IdMap& edge_map() const { return edge_map_; }
    bool mono() const { return mono_; }

    Id on_node(Id n) const { return node_map_.at(n); }
    Id on_edge(Id e) const { return edge_map_.at(e); }

    static Morphism identity(const Graph& g) {
        std::vector<std::pair<Id, Id>> nm, em;
        for (const Node& n : g.nodes()) nm.push_back({n.id, n.id});
        for (const Edge& e : g.edges()) em.push_back({e.id, e.id});
        return Morphism(g, g, IdMap(std::move(nm)), IdMap(std::move(em)));
    }

    /// Inclusion of a subgraph into its host.
    static Morphism inclusion(const Graph& sub, const Graph& host) {
        if (!host.contains_subgraph(sub))
            throw std::invalid_argument("inclusion: not a subgraph of the host");
        std::vector<std::pair<Id, Id>> nm, em;
        for (const Node& n : sub.nodes()) nm.push_back({n.id, n.id});
        for (const Edge& e : sub.edges()) em.push_back({e.id, e.id});
        return Morphism(sub, host, IdMap(std::move(nm)), IdMap(std::move(em)));
    }

    /// g after f (dom(g) must equal cod(f) structurally).
    friend Morphism compose(const Morphism& g, const Morphism& f) {
        if (!(f.cod() == g.dom()))
            throw std::invalid_argument("compose: codomain/domain mismatch");
        std::vector<std::pair<Id, Id>> nm, em;
        for (auto& [a, b] : f.node_map().pairs()) nm.push_back({a, g.on_node(b)});
        for (auto& [a, b] : f.edge_map().pairs()) em.push_back({a, g.on_edge(b)});
        return Morphism(f.dom(), g.cod(), IdMap(std::move(nm)), IdMap(std::move(em)));
    }

    /// Structural equality of the maps; domains/codomains compared by value.
    friend bool operator==(const Morphism& a, const Morphism& b) {
        return a.dom_ == b.dom_ && a.cod_ == b.cod_ &&
               a.node_map_ == b.node_map_ && a.edge_map_ == b.edge_map_;
    }

    /// Same node/edge assignments, ignoring dom/cod identity.
    bool same_maps(const Morphism& o) const {
        return node_map_ == o.node_map_ && edge_map_ == o.edge_map_;
    }

private:
    void validate() const {
        if (node_map_.size() != dom_.node_count() || edge_map_.size() != dom_.edge_count())
            throw std::invalid_argument("morphism: maps must be total on the domain");
        for (const Node& n : dom_.nodes()) {
            const Node* img = cod_.find_node_checked(node_map_.at(n.id));
            if (img->label != n.label)
                throw std::invalid_argument("morphism: node label not preserved");
        }
        for (const Edge& e : dom_.edges()) {
            const Edge* img = cod_.find_edge_checked(edge_map_.at(e.id));
            if (img->label != e.label)
                throw std::invalid_argument("morphism: edge label not preserved");
            if (img->src != node_map_.at(e.src) || img->tgt != node_map_.at(e.tgt))
                throw std::invalid_argument("morphism: structure not preserved");
        }
    }

    Graph dom_;
    Graph cod_;
    IdMap node_map_;
    IdMap edge_map_;
    bool mono_ = false;
};

/// The subgraph f(G) of cod(f): V = f_V(V_G), E = f_E(E_G).
inline Graph direct_image(const Morphism& f) {
    std::vector<Id> ns, es;
    for (auto& [a, b] : f.node_map().pairs()) ns.push_back(b);
    for (auto& [a, b] : f.edge_map().pairs()) es.push_back(b);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    return f.cod().restrict_to(ns, es);
}

namespace detail {
inline void require_subgraphs(const Graph& a, const Graph& b, const Graph& host) {
    if (!host.contains_subgraph(a) || !host.contains_subgraph(b))
        throw std::invalid_argument("lattice op: arguments must be subgraphs of the common host");
}
} // namespace detail

/// Union of two subgraphs of a common host, as a subgraph of that host.
inline Graph subgraph_union(const Graph& a, const Graph& b, const Graph& host) {
    detail::require_subgraphs(a, b, host);
    std::vector<Id> ns, es;
    for (const Node& n : a.nodes()) ns.push_back(n.id);
    for (const Node& n : b.nodes()) ns.push_back(n.id);
    for (const Edge& e : a.edges()) es.push_back(e.id);
    for (const Edge& e : b.edges()) es.push_back(e.id);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    return host.restrict_to(ns, es);
}

/// Intersection of two subgraphs of a common host.
inline Graph subgraph_intersection(const Graph& a, const Graph& b, const Graph& host) {
    detail::require_subgraphs(a, b, host);
    std::vector<Id> ns, es;
    for (const Node& n : a.nodes())
        if (b.has_node(n.id)) ns.push_back(n.id);
    for (const Edge& e : a.edges())
        if (b.has_edge(e.id)) es.push_back(e.id);
    return host.restrict_to(ns, es);
}

/// All subgraphs of g (edge subsets plus node supersets of their endpoints),
/// in a deterministic order. Exponential; intended for pattern-scale graphs.
inline std::vector<Graph> all_subgraphs(const Graph& g) {
    const auto& edges = g.edges();
    const auto& nodes = g.nodes();
    if (edges.size() > 20 || nodes.size() > 20)
        throw std::invalid_argument("all_subgraphs: graph too large");
    std::vector<Graph> out;
    for (std::uint64_t emask = 0; emask < (std::uint64_t(1) << edges.size()); ++emask) {
        std::vector<Id> required;
        std::vector<Id> eids;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (emask >> i & 1) {
                eids.push_back(edges[i].id);
                required.push_back(edges[i].src);
                required.push_back(edges[i].tgt);
            }
        }
        std::sort(required.begin(), required.end());
        required.erase(std::unique(required.begin(), required.end()), required.end());
        std::vector<Id> optional_nodes;
        for (const Node& n : nodes)
            if (!std::binary_search(required.begin(), required.end(), n.id))
                optional_nodes.push_back(n.id);
        for (std::uint64_t nmask = 0; nmask < (std::uint64_t(1) << optional_nodes.size()); ++nmask) {
            std::vector<Id> nids = required;
            for (std::size_t i = 0; i < optional_nodes.size(); ++i)
                if (nmask >> i & 1) nids.push_back(optional_nodes[i]);
            std::sort(nids.begin(), nids.end());
            out.push_back(g.restrict_to(nids, eids));
        }
    }
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const Graph& g) {
    os << "{";
    bool first = true;
    for (const Node& n : g.nodes()) {
        os << (first ? "" : ", ") << n.id << ":" << n.label;
        first = false;
    }
    os << " |";
    for (const Edge& e : g.edges())
        os << " " << e.id << ":" << e.src << "-" << e.label << "->" << e.tgt;
    os << "}";
    return os;
}

} // namespace rateq

#endif
