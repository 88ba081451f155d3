#ifndef RATEQ_TESTS_MODELS_HPP
#define RATEQ_TESTS_MODELS_HPP

#include "rateq/model.hpp"
#include "rateq/rewrite.hpp"

namespace rateq::testgen {

inline NamedGraph named(std::string name, Graph g, std::vector<std::string> nn = {},
                        std::vector<std::string> en = {}) {
    if (nn.empty())
        for (std::size_t i = 0; i < g.node_count(); ++i) nn.push_back("n" + std::to_string(i));
    if (en.empty())
        for (std::size_t i = 0; i < g.edge_count(); ++i) en.push_back("e" + std::to_string(i));
    return NamedGraph{std::move(name), std::move(g), std::move(nn), std::move(en)};
}

/// Birth-death: an empty-lhs rule creating a node at rate b, a single-node
/// deletion at rate d, observable N counting nodes.
inline Model birth_death_model(Rational b, Rational d) {
    Model m;
    Graph empty;
    Graph one({{0, ""}}, {});
    m.graphs.push_back(named("none", empty));
    m.graphs.push_back(named("unit", one, {"u"}));
    m.rules.push_back({"birth", make_rule(empty, one, {}, {}, 0, "birth"), b});
    m.rules.push_back({"death", make_rule(one, empty, {}, {}, 1, "death"), d});
    m.observables.push_back({"N", "unit"});
    m.inits.push_back({"N", Rational(0)});
    m.validate();
    return m;
}

/// Two-legged walker on directed DNA. Node labels W (walker) and D (segment);
/// edge labels a/b for the two legs and d for the backbone. The four rules
/// move one leg at a time between the compressed and extended configurations.
inline Model walker_model(Rational k_fe, Rational k_be, Rational k_fc, Rational k_bc) {
    Model m;
    m.node_alphabet = {"W", "D"};
    m.edge_alphabet = {"a", "b", "d"};

    Graph o_graph({{0, "W"}, {1, "D"}}, {{0, 0, 1, "a"}, {1, 0, 1, "b"}});
    Graph e_motif({{0, "W"}, {1, "D"}, {2, "D"}}, {{0, 0, 1, "b"}, {1, 0, 2, "a"}, {2, 1, 2, "d"}});
    Graph fe_lhs({{0, "W"}, {1, "D"}, {2, "D"}}, {{0, 0, 1, "a"}, {1, 0, 1, "b"}, {2, 1, 2, "d"}});
    Graph be_lhs({{0, "W"}, {1, "D"}, {2, "D"}}, {{0, 0, 2, "a"}, {1, 0, 2, "b"}, {2, 1, 2, "d"}});

    m.graphs.push_back(named("O", o_graph, {"w", "c"}, {"la", "lb"}));
    m.graphs.push_back(named("E_motif", e_motif, {"w", "c1", "c2"}, {"lb", "la", "dna"}));
    m.graphs.push_back(named("FE_lhs", fe_lhs, {"w", "c1", "c2"}, {"la", "lb", "dna"}));
    m.graphs.push_back(named("BE_lhs", be_lhs, {"w", "c1", "c2"}, {"la", "lb", "dna"}));

    // Invariant patterns: a walker never carries two same-kind legs, the
    // backbone is simple and non-branching, and there is a single walker.
    m.graphs.push_back(named("aa_pair", Graph({{0, "W"}, {1, "D"}}, {{0, 0, 1, "a"}, {1, 0, 1, "a"}}),
                              {"w", "c"}));
    m.graphs.push_back(named("aa_split",
                             Graph({{0, "W"}, {1, "D"}, {2, "D"}}, {{0, 0, 1, "a"}, {1, 0, 2, "a"}}),
                             {"w", "c1", "c2"}));
    m.graphs.push_back(named("bb_pair", Graph({{0, "W"}, {1, "D"}}, {{0, 0, 1, "b"}, {1, 0, 1, "b"}}),
                              {"w", "c"}));
    m.graphs.push_back(named("bb_split",
                             Graph({{0, "W"}, {1, "D"}, {2, "D"}}, {{0, 0, 1, "b"}, {1, 0, 2, "b"}}),
                             {"w", "c1", "c2"}));
    m.graphs.push_back(named("dna_fork",
                             Graph({{0, "D"}, {1, "D"}, {2, "D"}}, {{0, 0, 1, "d"}, {1, 0, 2, "d"}}),
                             {"c0", "c1", "c2"}));
    m.graphs.push_back(named("dna_join",
                             Graph({{0, "D"}, {1, "D"}, {2, "D"}}, {{0, 0, 2, "d"}, {1, 1, 2, "d"}}),
                             {"c0", "c1", "c2"}));
    m.graphs.push_back(named("dna_pair", Graph({{0, "D"}, {1, "D"}}, {{0, 0, 1, "d"}, {1, 0, 1, "d"}}),
                              {"c0", "c1"}));
    m.graphs.push_back(named("two_walkers", Graph({{0, "W"}, {1, "W"}}, {}), {"w1", "w2"}));

    // Start state: extended walker on a directed 3-ring.
    Graph ring3({{0, "W"}, {1, "D"}, {2, "D"}, {3, "D"}},
                {{0, 0, 1, "b"}, {1, 0, 2, "a"}, {2, 1, 2, "d"}, {3, 2, 3, "d"}, {4, 3, 1, "d"}});
    m.graphs.push_back(named("ring3", ring3, {"w", "c1", "c2", "c3"}, {"lb", "la", "d1", "d2", "d3"}));

    m.rules.push_back({"FE", make_rule(fe_lhs, e_motif,
                                       {{0, 0}, {1, 1}, {2, 2}}, {{1, 0}, {2, 2}}, 0, "FE"),
                       k_fe});
    m.rules.push_back({"BC", make_rule(e_motif, fe_lhs,
                                       {{0, 0}, {1, 1}, {2, 2}}, {{0, 1}, {2, 2}}, 1, "BC"),
                       k_bc});
    m.rules.push_back({"FC", make_rule(e_motif, be_lhs,
                                       {{0, 0}, {1, 1}, {2, 2}}, {{1, 0}, {2, 2}}, 2, "FC"),
                       k_fc});
    m.rules.push_back({"BE", make_rule(be_lhs, e_motif,
                                       {{0, 0}, {1, 1}, {2, 2}}, {{0, 1}, {2, 2}}, 3, "BE"),
                       k_be});

    m.observables.push_back({"C", "E_motif"});
    m.observables.push_back({"O", "O"});
    for (auto& f : {"aa_pair", "aa_split", "bb_pair", "bb_split", "dna_fork", "dna_join",
                    "dna_pair", "two_walkers"})
        m.forbids.push_back(f);
    m.equivalences.push_back({"FE_lhs", "O"});
    m.equivalences.push_back({"BE_lhs", "O"});

    Rational half(1, 2);
    m.outputs.push_back(Output{"V", {{half * (k_fe - k_be), "O"}, {half * (k_fc - k_bc), "C"}}});
    m.inits.push_back({"C", Rational(1)});
    m.inits.push_back({"O", Rational(0)});
    m.start = "ring3";
    m.validate();
    return m;
}

/// N-ring start graph for the walker model (walker extended across segments
/// 1 and 2).
inline Graph walker_ring(std::size_t n) {
    std::vector<Node> nodes{{0, "W"}};
    for (std::size_t i = 1; i <= n; ++i) nodes.push_back({Id(i), "D"});
    std::vector<Edge> edges{{0, 0, 1, "b"}, {1, 0, 2, "a"}};
    Id eid = 2;
    for (std::size_t i = 1; i <= n; ++i)
        edges.push_back({eid++, Id(i), Id(i % n + 1), "d"});
    return Graph(std::move(nodes), std::move(edges));
}

} // namespace rateq::testgen

#endif
