#ifndef RATEQ_MODEL_HPP
#define RATEQ_MODEL_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "graph.hpp"
#include "rational.hpp"
#include "rewrite.hpp"

namespace rateq {

/// A declared graph plus the user-facing names of its nodes and edges,
/// indexed by position in id order.
struct NamedGraph {
    std::string name;
    Graph graph;
    std::vector<std::string> node_names;
    std::vector<std::string> edge_names;
    friend bool operator==(const NamedGraph&, const NamedGraph&) = default;
};

struct ModelRule {
    std::string name;
    Rule rule;
    Rational rate;
    friend bool operator==(const ModelRule&, const ModelRule&) = default;
};

struct OutputTerm {
    Rational coeff;
    std::string observable;
    friend bool operator==(const OutputTerm&, const OutputTerm&) = default;
};

struct Output {
    std::string name;
    std::vector<OutputTerm> terms;
    friend bool operator==(const Output&, const Output&) = default;
};

struct ObservableDef {
    std::string name;
    Graph graph;
};

/// A stochastic graph-rewriting model: rules with positive rates, plus the
/// declarations driving equation generation (forbidden patterns, observable
/// equivalences, named outputs, initial expectations, start graph).
struct Model {
    std::vector<Label> node_alphabet; // empty: nodes are unlabeled
    std::vector<Label> edge_alphabet;
    std::vector<NamedGraph> graphs;
    std::vector<ModelRule> rules;
    std::vector<std::pair<std::string, std::string>> observables; // obs name -> graph name
    std::vector<std::string> forbids;                             // graph names
    std::vector<std::pair<std::string, std::string>> equivalences; // pattern name -> replacement name
    std::vector<Output> outputs;
    std::vector<std::pair<std::string, Rational>> inits; // obs name -> initial expectation
    std::optional<std::string> start;                    // graph name

    friend bool operator==(const Model&, const Model&) = default;

    const NamedGraph* find_graph(const std::string& name) const {
        for (auto& g : graphs)
            if (g.name == name) return &g;
        return nullptr;
    }
    const Graph& graph_checked(const std::string& name) const {
        const NamedGraph* g = find_graph(name);
        if (!g) throw std::invalid_argument("model: unknown graph '" + name + "'");
        return g->graph;
    }

    std::vector<ObservableDef> observable_defs() const {
        std::vector<ObservableDef> out;
        for (auto& [name, gname] : observables) out.push_back({name, graph_checked(gname)});
        return out;
    }
    const Graph* observable_graph(const std::string& name) const {
        for (auto& [o, gname] : observables)
            if (o == name) return &graph_checked(gname);
        return nullptr;
    }

    std::vector<Graph> forbidden_graphs() const {
        std::vector<Graph> out;
        for (auto& name : forbids) out.push_back(graph_checked(name));
        return out;
    }

    std::vector<std::pair<Graph, Graph>> equivalence_pairs() const {
        std::vector<std::pair<Graph, Graph>> out;
        for (auto& [a, b] : equivalences) out.push_back({graph_checked(a), graph_checked(b)});
        return out;
    }

    std::optional<Graph> start_graph() const {
        if (!start) return std::nullopt;
        return graph_checked(*start);
    }

    Rational init_for(const std::string& obs_name) const {
        for (auto& [n, v] : inits)
            if (n == obs_name) return v;
        return Rational(0);
    }

    /// Cross-reference and soundness checks beyond per-item syntax. Throws
    /// std::invalid_argument with a message naming the offending item.
    void validate() const {
        std::set<std::string> gnames;
        for (auto& g : graphs)
            if (!gnames.insert(g.name).second)
                throw std::invalid_argument("model: duplicate graph '" + g.name + "'");
        for (auto& r : rules)
            if (!(Rational(0) < r.rate))
                throw std::invalid_argument("model: rule '" + r.name + "' must have a positive rate");
        std::set<std::string> onames;
        for (auto& [o, gname] : observables) {
            graph_checked(gname);
            if (!onames.insert(o).second)
                throw std::invalid_argument("model: duplicate observable '" + o + "'");
        }
        for (auto& f : forbids) graph_checked(f);
        for (auto& [a, b] : equivalences) {
            graph_checked(a);
            graph_checked(b);
        }
        for (auto& out : outputs)
            for (auto& t : out.terms)
                if (!onames.count(t.observable))
                    throw std::invalid_argument("model: output '" + out.name +
                                                "' references unknown observable '" + t.observable + "'");
        for (auto& [o, v] : inits)
            if (!onames.count(o))
                throw std::invalid_argument("model: init references unknown observable '" + o + "'");
        if (start) graph_checked(*start);

        // Equivalence substitutions must not form a cycle over iso classes.
        std::map<CanonicalKey, CanonicalKey> subst;
        for (auto& [a, b] : equivalence_pairs()) {
            CanonicalKey ka = canonical_key(a), kb = canonical_key(b);
            if (ka == kb)
                throw std::invalid_argument("model: equivalence replaces an observable by itself");
            if (subst.count(ka))
                throw std::invalid_argument("model: conflicting equivalences for one observable class");
            subst[ka] = kb;
        }
        for (auto& [from, to] : subst) {
            CanonicalKey cur = to;
            std::size_t hops = 0;
            while (true) {
                auto it = subst.find(cur);
                if (it == subst.end()) break;
                cur = it->second;
                if (cur == from || ++hops > subst.size())
                    throw std::invalid_argument("model: equivalence substitutions form a cycle");
            }
        }
    }
};

} // namespace rateq

#endif
