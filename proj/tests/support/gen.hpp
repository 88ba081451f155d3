#ifndef RATEQ_TESTS_GEN_HPP
#define RATEQ_TESTS_GEN_HPP

#include <random>
#include <vector>

#include "rateq/graph.hpp"
#include "rateq/rewrite.hpp"

namespace rateq::testgen {

struct Rng {
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::uint64_t below(std::uint64_t bound) { return bound ? eng() % bound : 0; }
    bool coin(double p = 0.5) { return unit() < p; }
    double unit() { return double(eng() >> 11) * 0x1.0p-53; }
    std::mt19937_64 eng;
};

inline Label pick(Rng& rng, const std::vector<Label>& labels) {
    if (labels.empty()) return "";
    return labels[rng.below(labels.size())];
}

/// Random directed labeled multigraph with fresh sequential ids.
inline Graph random_graph(Rng& rng, std::size_t max_nodes, std::size_t max_edges,
                          const std::vector<Label>& node_labels = {},
                          const std::vector<Label>& edge_labels = {}) {
    std::size_t n = rng.below(max_nodes + 1);
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back({Id(i), pick(rng, node_labels)});
    std::vector<Edge> edges;
    if (n > 0) {
        std::size_t m = rng.below(max_edges + 1);
        for (std::size_t i = 0; i < m; ++i)
            edges.push_back({Id(i), Id(rng.below(n)), Id(rng.below(n)), pick(rng, edge_labels)});
    }
    return Graph(std::move(nodes), std::move(edges));
}

inline Graph random_subgraph(Rng& rng, const Graph& g, double keep = 0.6) {
    std::vector<Id> eids;
    std::vector<Id> required;
    for (const Edge& e : g.edges()) {
        if (rng.coin(keep)) {
            eids.push_back(e.id);
            required.push_back(e.src);
            required.push_back(e.tgt);
        }
    }
    std::sort(required.begin(), required.end());
    required.erase(std::unique(required.begin(), required.end()), required.end());
    std::vector<Id> nids = required;
    for (const Node& n : g.nodes())
        if (!std::binary_search(required.begin(), required.end(), n.id) && rng.coin(keep))
            nids.push_back(n.id);
    std::sort(nids.begin(), nids.end());
    return g.restrict_to(nids, eids);
}

/// Host extension: a graph containing `a` as a subgraph plus random context,
/// with the inclusion match a -> host.
inline std::pair<Graph, Morphism> random_embedding(Rng& rng, const Graph& a,
                                                   std::size_t extra_nodes, std::size_t extra_edges,
                                                   const std::vector<Label>& node_labels = {},
                                                   const std::vector<Label>& edge_labels = {}) {
    std::vector<Node> nodes(a.nodes());
    std::vector<Edge> edges(a.edges());
    Id next_n = 1000, next_e = 1000;
    for (const Node& n : nodes) next_n = std::max(next_n, n.id + 1);
    for (const Edge& e : edges) next_e = std::max(next_e, e.id + 1);
    std::size_t en = rng.below(extra_nodes + 1);
    for (std::size_t i = 0; i < en; ++i) nodes.push_back({next_n++, pick(rng, node_labels)});
    std::size_t em = nodes.empty() ? 0 : rng.below(extra_edges + 1);
    for (std::size_t i = 0; i < em; ++i) {
        Id s = nodes[rng.below(nodes.size())].id;
        Id t = nodes[rng.below(nodes.size())].id;
        edges.push_back({next_e++, s, t, pick(rng, edge_labels)});
    }
    Graph host(std::move(nodes), std::move(edges));
    return {host, Morphism::inclusion(a, host)};
}

/// Random rule as a span of inclusions: K is a random subgraph of L and R
/// extends a copy of K.
inline Rule random_rule(Rng& rng, std::size_t max_nodes, std::size_t max_edges,
                        const std::vector<Label>& node_labels = {},
                        const std::vector<Label>& edge_labels = {},
                        std::uint32_t uid = 0) {
    Graph lhs = random_graph(rng, max_nodes, max_edges, node_labels, edge_labels);
    Graph ker = random_subgraph(rng, lhs);
    auto [rhs, right_leg] = random_embedding(rng, ker, 2, 2, node_labels, edge_labels);
    return Rule(lhs, rhs, ker, Morphism::inclusion(ker, lhs), right_leg, uid, "rnd");
}

} // namespace rateq::testgen

#endif
