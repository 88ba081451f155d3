#ifndef RATEQ_EQUATIONS_HPP
#define RATEQ_EQUATIONS_HPP

#include <climits>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "gluing.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "rational.hpp"
#include "rewrite.hpp"

namespace rateq {

/// A graph observable <F>: the function counting matches of F in a state.
struct Observable {
    Graph graph;
    CanonicalKey key;
};

inline Observable make_observable(Graph g) {
    CanonicalKey k = canonical_key(g);
    return Observable{std::move(g), std::move(k)};
}

inline const CanonicalKey& empty_observable_key() {
    static const CanonicalKey k = canonical_key(Graph{});
    return k;
}

/// Where a term came from: which rule, which side of the jump, and which
/// gluing produced it. 'S' marks an equivalence substitution.
struct TermProvenance {
    std::string rule;
    char side = 'L'; // 'L' consumption, 'R' production, 'S' substitution
    std::size_t gluing_index = 0;
    Rational amount;
};

struct Term {
    Rational coeff;
    Graph graph;
    std::vector<TermProvenance> provenance;
};

/// Finite linear combination of graph observables, keyed by canonical key.
/// Terms whose coefficients cancel to zero are removed, which is what makes
/// matching production/consumption pairs disappear.
class LinearCombination {
public:
    void add(const Rational& coeff, const Graph& graph, TermProvenance prov) {
        Term t{coeff, graph, {}};
        t.provenance.push_back(std::move(prov));
        merge(canonical_key(graph), std::move(t));
    }

    void merge(const CanonicalKey& key, Term&& t) {
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            if (!t.coeff.is_zero()) terms_.emplace(key, std::move(t));
            return;
        }
        it->second.coeff += t.coeff;
        for (auto& p : t.provenance) it->second.provenance.push_back(std::move(p));
        if (it->second.coeff.is_zero()) terms_.erase(it);
    }

    void add_scaled(const LinearCombination& other, const Rational& k) {
        if (k.is_zero()) return;
        for (auto& [key, term] : other.terms_) {
            Term t{term.coeff * k, term.graph, term.provenance};
            for (auto& p : t.provenance) p.amount = p.amount * k;
            merge(key, std::move(t));
        }
    }

    const std::map<CanonicalKey, Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    const Term* find(const CanonicalKey& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? nullptr : &it->second;
    }

    friend LinearCombination operator-(const LinearCombination& a, const LinearCombination& b) {
        LinearCombination out = a;
        out.add_scaled(b, Rational(-1));
        return out;
    }

    /// Evaluates the combination at a concrete state by match counting.
    Rational evaluate(const Graph& state) const {
        Rational sum(0);
        for (auto& [key, term] : terms_)
            sum += term.coeff * Rational(std::int64_t(evaluate_observable(term.graph, state)));
        return sum;
    }

private:
    std::map<CanonicalKey, Term> terms_;
};

/// Consumption side of the jump: one tip observable per minimal gluing of the
/// rule's lhs with F.
inline LinearCombination consumption_terms(const Rule& rule, const Observable& f) {
    LinearCombination out;
    auto mgs = minimal_gluings(rule.lhs(), f.graph);
    for (std::size_t i = 0; i < mgs.size(); ++i)
        out.add(Rational(1), mgs[i].tip, TermProvenance{rule.name(), 'L', i, Rational(1)});
    return out;
}

/// Production side: right-hand gluings whose first injection is derivable,
/// pulled back through the reversed rule.
inline LinearCombination production_terms(const Rule& rule, const Observable& f) {
    LinearCombination out;
    auto mgs = minimal_gluings(rule.rhs(), f.graph);
    for (std::size_t i = 0; i < mgs.size(); ++i) {
        DerivabilityResult res = is_derivable(mgs[i].left_inj, rule);
        if (!res.derivable) continue;
        out.add(Rational(1), res.witness->cod(), TermProvenance{rule.name(), 'R', i, Rational(1)});
    }
    return out;
}

/// The jump of <F> relative to the rule: production minus consumption.
inline LinearCombination jump(const Rule& rule, const Observable& f) {
    return production_terms(rule, f) - consumption_terms(rule, f);
}

/// d<F>/dt before closure: the rate-weighted sum of per-rule jumps.
inline LinearCombination rate_equation(const Model& model, const Observable& f) {
    LinearCombination out;
    for (auto& mr : model.rules) out.add_scaled(jump(mr.rule, f), mr.rate);
    return out;
}

struct ClosurePolicy {
    bool use_equivalences = true;
    std::size_t max_observables = 256; // expansion cap; exceeding it is an error state
    // Zero-closure bound on observable size, counted as nodes plus edges so
    // any bound admits only finitely many observable classes. SIZE_MAX
    // disables truncation.
    std::size_t max_size = SIZE_MAX;
};

/// Term filters, in order: forbidden-pattern pruning (an observable containing
/// a declared invariant pattern is identically zero on reachable states),
/// declared equivalence substitution (one pass, no fixpoint), and zero-closure
/// truncation by observable size.
inline LinearCombination apply_closures(const LinearCombination& lc, const Model& model,
                                        const ClosurePolicy& policy) {
    auto forbidden = model.forbidden_graphs();
    auto equivs = model.equivalence_pairs();
    std::vector<std::pair<CanonicalKey, const Graph*>> equiv_keys;
    for (auto& [pat, rep] : equivs) equiv_keys.push_back({canonical_key(pat), &rep});

    LinearCombination out;
    for (auto& [key, term] : lc.terms()) {
        bool dropped = false;
        for (const Graph& f : forbidden)
            if (evaluate_observable(f, term.graph) > 0) { dropped = true; break; }
        if (dropped) continue;

        Term t{term.coeff, term.graph, term.provenance};
        CanonicalKey k = key;
        if (policy.use_equivalences) {
            for (auto& [pkey, rep] : equiv_keys) {
                if (pkey != k) continue;
                t.graph = *rep;
                k = canonical_key(*rep);
                t.provenance.push_back(TermProvenance{"equiv", 'S', 0, t.coeff});
                break;
            }
        }
        if (policy.max_size != SIZE_MAX &&
            t.graph.node_count() + t.graph.edge_count() > policy.max_size) continue;
        out.merge(k, std::move(t));
    }
    return out;
}

struct OdeEquation {
    Observable lhs;
    LinearCombination rhs;
};

/// The expanded system: one equation per observable reached from the seeds,
/// in expansion order. `frontier` holds observables that are referenced but
/// unexpanded; it is nonempty only when the cap was hit.
struct OdeSystem {
    std::vector<OdeEquation> equations;
    std::map<CanonicalKey, std::size_t> index;
    std::vector<Observable> frontier;
    ClosurePolicy policy;
    bool capped = false;
    std::map<CanonicalKey, std::string> names; // declared names where known

    bool closed() const { return !capped && frontier.empty(); }
    const OdeEquation* find(const CanonicalKey& key) const {
        auto it = index.find(key);
        return it == index.end() ? nullptr : &equations[it->second];
    }
    std::string display_name(const CanonicalKey& key) const {
        auto it = names.find(key);
        if (it != names.end()) return it->second;
        auto eq = index.find(key);
        if (eq != index.end()) return "obs" + std::to_string(eq->second);
        return "ext";
    }
};

/// Worklist fixpoint over rate_equation + apply_closures. Stops when the
/// frontier drains (closed system) or the observable cap is reached (capped,
/// with the open frontier reported).
inline OdeSystem expand_system(const Model& model, const std::vector<Observable>& seeds,
                               const ClosurePolicy& policy) {
    if (seeds.empty()) throw std::invalid_argument("expand_system: seeds must be nonempty");
    OdeSystem sys;
    sys.policy = policy;
    for (auto& def : model.observable_defs()) sys.names[canonical_key(def.graph)] = def.name;

    std::deque<Observable> queue;
    std::set<CanonicalKey> queued;
    for (const Observable& s : seeds)
        if (queued.insert(s.key).second) queue.push_back(s);

    while (!queue.empty()) {
        if (sys.equations.size() >= policy.max_observables) {
            sys.capped = true;
            for (auto& o : queue) sys.frontier.push_back(o);
            break;
        }
        Observable obs = queue.front();
        queue.pop_front();
        if (sys.index.count(obs.key)) continue;

        LinearCombination rhs = apply_closures(rate_equation(model, obs), model, policy);
        sys.index[obs.key] = sys.equations.size();
        sys.equations.push_back(OdeEquation{obs, rhs});
        for (auto& [key, term] : sys.equations.back().rhs.terms()) {
            if (key == empty_observable_key()) continue; // <empty> is the constant 1
            if (!sys.index.count(key) && queued.insert(key).second)
                queue.push_back(make_observable(term.graph));
        }
    }
    return sys;
}

} // namespace rateq

#endif
