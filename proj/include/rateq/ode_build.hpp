#ifndef RATEQ_ODE_BUILD_HPP
#define RATEQ_ODE_BUILD_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "equations.hpp"
#include "model.hpp"
#include "odeint.hpp"

namespace rateq {

/// Initial expectation of an observable: the declared init when present,
/// otherwise its match count in the start graph, otherwise zero.
inline double initial_expectation(const Model& model, const OdeSystem& sys, const Observable& obs) {
    auto named = sys.names.find(obs.key);
    if (named != sys.names.end()) {
        for (auto& [n, v] : model.inits)
            if (n == named->second) return v.to_double();
    }
    if (auto start = model.start_graph()) return double(evaluate_observable(obs.graph, *start));
    return 0.0;
}

/// Lowers a closed system to the linear ODE dy/dt = A y + c. Terms on the
/// empty observable become constants. Refuses systems with an open frontier.
inline OdeProblem make_ode_problem(const OdeSystem& sys, const Model& model,
                                   double t_end, double dt) {
    if (!sys.closed())
        throw std::invalid_argument("ode build: system has an open frontier; expand it further first");
    OdeProblem p;
    p.t_end = t_end;
    p.dt = dt;
    for (auto& eq : sys.equations) p.vars.push_back(eq.lhs.key);
    p.rows.resize(p.vars.size());
    p.constants.assign(p.vars.size(), 0.0);
    p.y0.assign(p.vars.size(), 0.0);
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        p.y0[i] = initial_expectation(model, sys, sys.equations[i].lhs);
        for (auto& [key, term] : sys.equations[i].rhs.terms()) {
            if (key == empty_observable_key()) {
                p.constants[i] += term.coeff.to_double();
                continue;
            }
            auto it = sys.index.find(key);
            if (it == sys.index.end())
                throw std::logic_error("ode build: right-hand side references an unexpanded observable");
            p.rows[i].push_back({it->second, term.coeff.to_double()});
        }
    }
    p.check();
    return p;
}

/// Evaluates the model's declared outputs at a variable assignment.
inline std::map<std::string, double> evaluate_outputs(const Model& model, const OdeSystem& sys,
                                                      const std::vector<double>& values) {
    std::map<std::string, double> out;
    for (const Output& o : model.outputs) {
        double v = 0;
        for (const OutputTerm& t : o.terms) {
            const Graph* g = model.observable_graph(t.observable);
            if (!g) throw std::invalid_argument("output '" + o.name + "': unknown observable");
            CanonicalKey key = canonical_key(*g);
            auto it = sys.index.find(key);
            if (it == sys.index.end())
                throw std::invalid_argument("output '" + o.name + "': observable '" + t.observable +
                                            "' has no equation in the expanded system");
            v += t.coeff.to_double() * values[it->second];
        }
        out[o.name] = v;
    }
    return out;
}

} // namespace rateq

#endif
