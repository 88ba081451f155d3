#ifndef RATEQ_CTMC_HPP
#define RATEQ_CTMC_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "graph.hpp"
#include "equations.hpp"
#include "match.hpp"
#include "model.hpp"
#include "odeint.hpp"
#include "rational.hpp"
#include "rewrite.hpp"

namespace rateq {

/// One enabled rewrite at a state: which rule, which match (by position in
/// the deterministic match order), and the resulting graph.
struct TransitionStep {
    std::size_t rule_index;
    std::size_t match_index;
    Graph target;
    CanonicalKey target_key;
};

/// All transitions out of a state. Off-diagonal rates are aggregated by the
/// target's canonical key; targets isomorphic to the source are self-loops
/// and excluded from the aggregation, mirroring the G != H indexing of the
/// rate matrix.
struct TransitionRow {
    Graph source;
    CanonicalKey source_key;
    std::vector<TransitionStep> steps;

    std::map<CanonicalKey, Rational> class_rates(const Model& model) const {
        std::map<CanonicalKey, Rational> out;
        for (const TransitionStep& s : steps) {
            if (s.target_key == source_key) continue;
            auto [it, fresh] = out.try_emplace(s.target_key, Rational(0));
            it->second += model.rules[s.rule_index].rate;
        }
        return out;
    }

    Rational exit_rate(const Model& model) const {
        Rational sum(0);
        for (auto& [k, r] : class_rates(model)) sum += r;
        return sum;
    }

    Rational diagonal(const Model& model) const { return -exit_rate(model); }
};

inline TransitionRow transition_row(const Model& model, const Graph& g, RewriteContext& ctx) {
    TransitionRow row{g, canonical_key(g), {}};
    for (std::size_t r = 0; r < model.rules.size(); ++r) {
        auto matches = enumerate_matches(model.rules[r].rule.lhs(), g);
        for (std::size_t m = 0; m < matches.size(); ++m) {
            Derivation d = apply_rule(model.rules[r].rule, matches[m], ctx);
            Graph target = d.comatch.cod();
            CanonicalKey key = canonical_key(target);
            row.steps.push_back(TransitionStep{r, m, std::move(target), std::move(key)});
        }
    }
    return row;
}

inline TransitionRow transition_row(const Model& model, const Graph& g) {
    RewriteContext ctx;
    return transition_row(model, g, ctx);
}

/// Action of the generator on an observable at a state, by exhaustive
/// transition enumeration: sum over steps of rate * (<F>(H) - <F>(G)).
/// Steps landing on a state isomorphic to G contribute zero, so the sum
/// equals the off-diagonal form over the rate matrix. Exact.
inline Rational generator_action(const Model& model, const Graph& f, const Graph& g) {
    Rational sum(0);
    std::int64_t at_g = std::int64_t(evaluate_observable(f, g));
    TransitionRow row = transition_row(model, g);
    for (const TransitionStep& s : row.steps) {
        std::int64_t at_h = std::int64_t(evaluate_observable(f, s.target));
        sum += model.rules[s.rule_index].rate * Rational(at_h - at_g);
    }
    return sum;
}

/// Jump-process sample path. Observable counts are recorded at time 0 and at
/// every jump; times are strictly increasing. The generator is mt19937_64
/// with inverse-transform exponential sampling, so runs are reproducible
/// from the seed alone.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<std::uint64_t>> counts; // per time, per observable
    bool absorbed = false;
    double absorbed_at = 0;
    std::uint64_t seed = 0;
    static constexpr const char* rng_id = "mt19937_64";

    /// Value of observable `k` at time t (step function, last jump wins).
    std::uint64_t value_at(double t, std::size_t k) const {
        std::uint64_t v = counts.front()[k];
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] > t) break;
            v = counts[i][k];
        }
        return v;
    }
};

namespace detail {

inline double unit_open(std::mt19937_64& rng) {
    return (double(rng() >> 11) + 0.5) * 0x1.0p-53; // in (0,1)
}

} // namespace detail

inline Trajectory gillespie(const Model& model, const Graph& g0, double t_end,
                            std::uint64_t seed, const std::vector<Graph>& observables) {
    if (!(t_end > 0)) throw std::invalid_argument("gillespie: t_end must be positive");
    std::mt19937_64 rng(seed);
    RewriteContext ctx;
    Trajectory traj;
    traj.seed = seed;

    Graph state = g0;
    double t = 0;
    auto record = [&]() {
        std::vector<std::uint64_t> row;
        for (const Graph& f : observables) row.push_back(evaluate_observable(f, state));
        traj.times.push_back(t);
        traj.counts.push_back(std::move(row));
    };
    record();

    for (;;) {
        // Enabled events: every match of every rule fires at the rule's rate.
        std::vector<std::pair<std::size_t, Morphism>> events;
        double total = 0;
        for (std::size_t r = 0; r < model.rules.size(); ++r) {
            auto matches = enumerate_matches(model.rules[r].rule.lhs(), state);
            double k = model.rules[r].rate.to_double();
            total += k * double(matches.size());
            for (auto& m : matches) events.push_back({r, std::move(m)});
        }
        if (events.empty() || total <= 0) {
            traj.absorbed = true;
            traj.absorbed_at = t;
            break;
        }
        double wait = -std::log(detail::unit_open(rng)) / total;
        if (t + wait > t_end) break;
        t += wait;

        double pick = detail::unit_open(rng) * total;
        std::size_t chosen = events.size() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            acc += model.rules[events[i].first].rate.to_double();
            if (pick < acc) { chosen = i; break; }
        }
        Derivation d = apply_rule(model.rules[events[chosen].first].rule, events[chosen].second, ctx);
        state = d.comatch.cod();
        record();
    }
    return traj;
}

/// Mean and standard error of each observable at the given sample times,
/// over `runs` trajectories seeded seed, seed+1, ...
struct EnsembleStats {
    std::vector<double> times;
    std::vector<std::vector<double>> mean;   // [time][observable]
    std::vector<std::vector<double>> stderr_; // [time][observable]
    std::size_t runs = 0;
};

inline EnsembleStats ensemble_stats(const Model& model, const Graph& g0, double t_end,
                                    std::size_t runs, std::uint64_t seed,
                                    const std::vector<Graph>& observables,
                                    const std::vector<double>& sample_times) {
    if (runs == 0) throw std::invalid_argument("ensemble: runs must be positive");
    EnsembleStats st;
    st.times = sample_times;
    st.runs = runs;
    const std::size_t nt = sample_times.size(), no = observables.size();
    std::vector<std::vector<double>> sum(nt, std::vector<double>(no, 0));
    std::vector<std::vector<double>> sumsq(nt, std::vector<double>(no, 0));
    for (std::size_t run = 0; run < runs; ++run) {
        Trajectory tr = gillespie(model, g0, t_end, seed + run, observables);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t k = 0; k < no; ++k) {
                double v = double(tr.value_at(sample_times[i], k));
                sum[i][k] += v;
                sumsq[i][k] += v * v;
            }
    }
    st.mean.assign(nt, std::vector<double>(no, 0));
    st.stderr_.assign(nt, std::vector<double>(no, 0));
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t k = 0; k < no; ++k) {
            double m = sum[i][k] / double(runs);
            st.mean[i][k] = m;
            double var = runs > 1 ? (sumsq[i][k] - double(runs) * m * m) / double(runs - 1) : 0.0;
            st.stderr_[i][k] = std::sqrt(std::max(0.0, var) / double(runs));
        }
    return st;
}

/// Raised when the reachable state enumeration outgrows its cap; distinct
/// from any other failure so callers can tell "not finite at this bound"
/// apart from real errors.
class CapExceededError : public std::runtime_error {
public:
    explicit CapExceededError(std::size_t cap)
        : std::runtime_error("reachable state space exceeds cap " + std::to_string(cap)) {}
};

/// Breadth-first closure of the representative transition system, with the
/// generator restricted to it. States are identified by node-id-preserving
/// fingerprints (edge ids canonicalized away): rule applications keep the
/// ids of everything they preserve, so revisits merge while distinct
/// placements of the same shape stay distinct states.
struct StateSpace {
    std::vector<Graph> states;
    std::vector<std::string> fingerprints;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::pair<std::size_t, double>>> rates; // off-diagonal q[i] -> (j, rate)

    double diagonal(std::size_t i) const {
        double d = 0;
        for (auto& [j, r] : rates[i]) d -= r;
        return d;
    }
};

inline StateSpace reachable_space(const Model& model, const Graph& g0, std::size_t cap) {
    if (cap == 0) throw std::invalid_argument("reachable_space: cap must be positive");
    StateSpace sp;
    std::deque<std::size_t> queue;
    auto intern = [&](const Graph& g) -> std::size_t {
        std::string fp = state_fingerprint(g);
        auto it = sp.index.find(fp);
        if (it != sp.index.end()) return it->second;
        if (sp.states.size() >= cap) throw CapExceededError(cap);
        std::size_t id = sp.states.size();
        sp.states.push_back(g);
        sp.fingerprints.push_back(fp);
        sp.index.emplace(std::move(fp), id);
        queue.push_back(id);
        return id;
    };
    intern(g0);
    sp.rates.resize(1);
    RewriteContext ctx; // shared so created ids never collide across steps
    while (!queue.empty()) {
        std::size_t i = queue.front();
        queue.pop_front();
        TransitionRow row = transition_row(model, sp.states[i], ctx);
        if (sp.rates.size() < sp.states.size()) sp.rates.resize(sp.states.size());
        std::map<std::size_t, double> acc;
        for (const TransitionStep& s : row.steps) {
            std::size_t j = intern(s.target);
            if (sp.rates.size() < sp.states.size()) sp.rates.resize(sp.states.size());
            if (j == i) continue; // same state: no off-diagonal contribution
            acc[j] += model.rules[s.rule_index].rate.to_double();
        }
        sp.rates[i].assign(acc.begin(), acc.end());
    }
    sp.rates.resize(sp.states.size());
    return sp;
}

/// Expected observable values under the master equation dp/dt = Q^T p,
/// integrated with fixed-step RK4; one sample per step.
struct MasterSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> probability_sums; // total mass at each output time
    std::vector<double> final_distribution;
};

inline MasterSeries master_expectations(const StateSpace& space, const std::vector<double>& p0,
                                        const Graph& f, double t_end, double dt) {
    if (p0.size() != space.states.size())
        throw std::invalid_argument("master_expectations: distribution size mismatch");
    std::vector<double> weight;
    weight.reserve(space.states.size());
    for (const Graph& s : space.states) weight.push_back(double(evaluate_observable(f, s)));

    auto deriv = [&](const std::vector<double>& p, std::vector<double>& dp) {
        std::fill(dp.begin(), dp.end(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (auto& [j, r] : space.rates[i]) {
                dp[j] += p[i] * r;
                dp[i] -= p[i] * r;
            }
        }
    };

    MasterSeries out;
    std::vector<double> p = p0, k1(p.size()), k2(p.size()), k3(p.size()), k4(p.size()), tmp(p.size());
    auto record = [&](double at) {
        double e = 0, mass = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            e += p[i] * weight[i];
            mass += p[i];
        }
        out.times.push_back(at);
        out.values.push_back(e);
        out.probability_sums.push_back(mass);
    };
    double t = 0;
    record(t);
    if (t_end > 0) {
        if (!(dt > 0)) throw std::invalid_argument("master_expectations: dt must be positive");
        std::size_t steps = std::size_t(std::ceil(t_end / dt - 1e-12));
        for (std::size_t s = 0; s < steps; ++s) {
            double step = std::min(dt, t_end - t);
            detail::rk4_step(deriv, p, step, k1, k2, k3, k4, tmp);
            t += step;
            for (double v : p)
                if (!std::isfinite(v))
                    throw std::runtime_error("master equation diverged at t = " + std::to_string(t));
            record(t);
        }
    }
    out.final_distribution = std::move(p);
    return out;
}

} // namespace rateq

#endif
