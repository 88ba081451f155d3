#ifndef RATEQ_JSON_IO_HPP
#define RATEQ_JSON_IO_HPP

#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctmc.hpp"
#include "equations.hpp"
#include "model.hpp"
#include "ode_build.hpp"

namespace rateq {

using json = nlohmann::json;

inline json graph_to_json(const Graph& g) {
    json nodes = json::array();
    for (const Node& n : g.nodes()) nodes.push_back({n.id, n.label});
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.id, e.src, e.tgt, e.label});
    return json{{"nodes", nodes}, {"edges", edges}};
}

inline Graph graph_from_json(const json& j) {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    for (auto& n : j.at("nodes")) nodes.push_back({n.at(0).get<Id>(), n.at(1).get<Label>()});
    for (auto& e : j.at("edges"))
        edges.push_back({e.at(0).get<Id>(), e.at(1).get<Id>(), e.at(2).get<Id>(), e.at(3).get<Label>()});
    return Graph(std::move(nodes), std::move(edges));
}

inline json rational_to_json(const Rational& r) {
    return json{{"num", r.num()}, {"den", r.den()}};
}

/// Everything downstream commands need from an expansion, independent of the
/// model file: equations with exact coefficients, resolved initial
/// expectations, and output definitions keyed by observable.
struct SystemFile {
    OdeSystem system;
    std::map<CanonicalKey, Rational> inits;
    std::vector<std::pair<std::string, std::vector<std::pair<Rational, CanonicalKey>>>> outputs;

    OdeProblem to_problem(double t_end, double dt) const {
        if (!system.closed())
            throw std::invalid_argument("system has an open frontier; re-run expansion with closures");
        OdeProblem p;
        p.t_end = t_end;
        p.dt = dt;
        for (auto& eq : system.equations) p.vars.push_back(eq.lhs.key);
        p.rows.resize(p.vars.size());
        p.constants.assign(p.vars.size(), 0.0);
        p.y0.assign(p.vars.size(), 0.0);
        for (std::size_t i = 0; i < system.equations.size(); ++i) {
            auto init = inits.find(system.equations[i].lhs.key);
            p.y0[i] = init == inits.end() ? 0.0 : init->second.to_double();
            for (auto& [key, term] : system.equations[i].rhs.terms()) {
                if (key == empty_observable_key()) {
                    p.constants[i] += term.coeff.to_double();
                    continue;
                }
                auto it = system.index.find(key);
                if (it == system.index.end())
                    throw std::logic_error("system file references an unexpanded observable");
                p.rows[i].push_back({it->second, term.coeff.to_double()});
            }
        }
        p.check();
        return p;
    }

    std::map<std::string, double> outputs_at(const std::vector<double>& values) const {
        std::map<std::string, double> out;
        for (auto& [name, terms] : outputs) {
            double v = 0;
            for (auto& [coeff, key] : terms) {
                auto it = system.index.find(key);
                if (it == system.index.end())
                    throw std::invalid_argument("output '" + name + "' references a missing equation");
                v += coeff.to_double() * values[it->second];
            }
            out[name] = v;
        }
        return out;
    }
};

/// Builds the persistent form of an expansion: initial expectations are
/// resolved here, against the declaring model.
inline SystemFile make_system_file(const OdeSystem& sys, const Model& model) {
    SystemFile f;
    f.system = sys;
    for (auto& eq : sys.equations) {
        auto named = sys.names.find(eq.lhs.key);
        Rational init(0);
        bool declared = false;
        if (named != sys.names.end()) {
            for (auto& [n, v] : model.inits)
                if (n == named->second) {
                    init = v;
                    declared = true;
                }
        }
        if (!declared) {
            if (auto start = model.start_graph())
                init = Rational(std::int64_t(evaluate_observable(eq.lhs.graph, *start)));
        }
        f.inits[eq.lhs.key] = init;
    }
    for (const Output& o : model.outputs) {
        std::vector<std::pair<Rational, CanonicalKey>> terms;
        for (const OutputTerm& t : o.terms) {
            const Graph* g = model.observable_graph(t.observable);
            if (!g) throw std::invalid_argument("output references unknown observable");
            terms.push_back({t.coeff, canonical_key(*g)});
        }
        f.outputs.push_back({o.name, std::move(terms)});
    }
    return f;
}

inline json system_to_json(const SystemFile& f) {
    json j;
    j["format_version"] = 1;
    j["status"] = f.system.closed() ? "closed" : "capped";
    json policy;
    policy["use_equivalences"] = f.system.policy.use_equivalences;
    policy["max_observables"] = f.system.policy.max_observables;
    if (f.system.policy.max_size != SIZE_MAX) policy["max_size"] = f.system.policy.max_size;
    j["policy"] = policy;

    json observables = json::array();
    for (auto& eq : f.system.equations) {
        json o;
        o["key"] = eq.lhs.key;
        o["name"] = f.system.display_name(eq.lhs.key);
        o["graph"] = graph_to_json(eq.lhs.graph);
        auto init = f.inits.find(eq.lhs.key);
        o["init"] = rational_to_json(init == f.inits.end() ? Rational(0) : init->second);
        observables.push_back(std::move(o));
    }
    j["observables"] = observables;

    json equations = json::array();
    json provenance = json::array();
    for (auto& eq : f.system.equations) {
        json terms = json::array();
        json prov_terms = json::array();
        for (auto& [key, term] : eq.rhs.terms()) {
            terms.push_back({{"coeff_num", term.coeff.num()},
                             {"coeff_den", term.coeff.den()},
                             {"key", key}});
            json entries = json::array();
            for (auto& p : term.provenance)
                entries.push_back({{"rule", p.rule},
                                   {"side", std::string(1, p.side)},
                                   {"gluing", p.gluing_index},
                                   {"num", p.amount.num()},
                                   {"den", p.amount.den()}});
            prov_terms.push_back({{"key", key}, {"graph", graph_to_json(term.graph)}, {"entries", entries}});
        }
        equations.push_back({{"lhs_key", eq.lhs.key}, {"terms", terms}});
        provenance.push_back({{"lhs_key", eq.lhs.key}, {"terms", prov_terms}});
    }
    j["equations"] = equations;
    j["provenance"] = provenance;

    json frontier = json::array();
    for (auto& o : f.system.frontier)
        frontier.push_back({{"key", o.key}, {"graph", graph_to_json(o.graph)}});
    j["frontier"] = frontier;

    json outputs = json::array();
    for (auto& [name, terms] : f.outputs) {
        json ts = json::array();
        for (auto& [coeff, key] : terms)
            ts.push_back({{"coeff_num", coeff.num()}, {"coeff_den", coeff.den()}, {"key", key}});
        outputs.push_back({{"name", name}, {"terms", ts}});
    }
    j["outputs"] = outputs;
    return j;
}

inline SystemFile system_from_json(const json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw std::invalid_argument("unsupported system file format version");
    SystemFile f;
    f.system.capped = j.at("status").get<std::string>() == "capped";
    const json& policy = j.at("policy");
    f.system.policy.use_equivalences = policy.at("use_equivalences").get<bool>();
    f.system.policy.max_observables = policy.at("max_observables").get<std::size_t>();
    f.system.policy.max_size =
        policy.contains("max_size") ? policy.at("max_size").get<std::size_t>() : SIZE_MAX;

    std::map<CanonicalKey, Graph> graphs;
    for (auto& o : j.at("observables")) {
        Graph g = graph_from_json(o.at("graph"));
        CanonicalKey key = canonical_key(g);
        if (key != o.at("key").get<std::string>())
            throw std::invalid_argument("system file key does not match its graph");
        f.system.names[key] = o.at("name").get<std::string>();
        f.inits[key] = Rational(o.at("init").at("num").get<std::int64_t>(),
                                o.at("init").at("den").get<std::int64_t>());
        graphs.emplace(key, std::move(g));
    }
    // Term graphs live in the provenance section; collect them for rebuilding.
    if (j.contains("provenance"))
        for (auto& pe : j.at("provenance"))
            for (auto& t : pe.at("terms"))
                graphs.emplace(t.at("key").get<std::string>(), graph_from_json(t.at("graph")));

    for (auto& e : j.at("equations")) {
        CanonicalKey lhs_key = e.at("lhs_key").get<std::string>();
        auto git = graphs.find(lhs_key);
        if (git == graphs.end()) throw std::invalid_argument("system file equation without its graph");
        OdeEquation eq{Observable{git->second, lhs_key}, {}};
        for (auto& t : e.at("terms")) {
            CanonicalKey key = t.at("key").get<std::string>();
            Rational coeff(t.at("coeff_num").get<std::int64_t>(), t.at("coeff_den").get<std::int64_t>());
            auto tg = graphs.find(key);
            Graph graph = tg == graphs.end() ? Graph{} : tg->second;
            if (key != empty_observable_key() && tg == graphs.end())
                throw std::invalid_argument("system file term without its graph");
            eq.rhs.merge(key, Term{coeff, std::move(graph), {}});
        }
        f.system.index[lhs_key] = f.system.equations.size();
        f.system.equations.push_back(std::move(eq));
    }
    if (j.contains("frontier"))
        for (auto& o : j.at("frontier"))
            f.system.frontier.push_back(make_observable(graph_from_json(o.at("graph"))));
    for (auto& o : j.at("outputs")) {
        std::vector<std::pair<Rational, CanonicalKey>> terms;
        for (auto& t : o.at("terms"))
            terms.push_back({Rational(t.at("coeff_num").get<std::int64_t>(),
                                      t.at("coeff_den").get<std::int64_t>()),
                             t.at("key").get<std::string>()});
        f.outputs.push_back({o.at("name").get<std::string>(), std::move(terms)});
    }
    return f;
}

inline SystemFile load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    json j = json::parse(in);
    return system_from_json(j);
}

// ---------------------------------------------------------------------------
// Simulation exports.
// ---------------------------------------------------------------------------

inline void trajectory_csv(std::ostream& os, const std::vector<std::string>& names,
                           const Trajectory& tr) {
    os << "t";
    for (auto& n : names) os << "," << n;
    os << "\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << tr.times[i];
        for (auto v : tr.counts[i]) os << "," << v;
        os << "\n";
    }
}

inline json ensemble_to_json(const EnsembleStats& st, const std::vector<std::string>& names,
                             std::uint64_t seed) {
    json j;
    j["format_version"] = 1;
    j["rng"] = Trajectory::rng_id;
    j["seed"] = seed;
    j["runs"] = st.runs;
    j["times"] = st.times;
    json obs = json::array();
    for (std::size_t k = 0; k < names.size(); ++k) {
        std::vector<double> mean, se;
        for (std::size_t i = 0; i < st.times.size(); ++i) {
            mean.push_back(st.mean[i][k]);
            se.push_back(st.stderr_[i][k]);
        }
        obs.push_back({{"name", names[k]}, {"mean", mean}, {"stderr", se}});
    }
    j["observables"] = obs;
    return j;
}

inline json gluings_to_json(const std::vector<MinimalGluing>& mgs,
                            const std::vector<std::pair<std::string, const Graph*>>& invariants) {
    json arr = json::array();
    for (std::size_t i = 0; i < mgs.size(); ++i) {
        json g;
        g["index"] = i;
        g["overlap_nodes"] = mgs[i].overlap.node_count();
        g["overlap_edges"] = mgs[i].overlap.edge_count();
        g["tip"] = graph_to_json(mgs[i].tip);
        g["tip_key"] = mgs[i].tip_key;
        json excluded = json::array();
        for (auto& [name, pat] : invariants)
            if (evaluate_observable(*pat, mgs[i].tip) > 0) excluded.push_back(name);
        g["excluded_by"] = excluded;
        arr.push_back(std::move(g));
    }
    return json{{"format_version", 1}, {"count", mgs.size()}, {"gluings", arr}};
}

} // namespace rateq

#endif
