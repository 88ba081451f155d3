#ifndef RATEQ_TESTS_LEMMA_SUITES_HPP
#define RATEQ_TESTS_LEMMA_SUITES_HPP

#include <string>
#include <vector>

#include "rateq/match.hpp"
#include "rateq/rewrite.hpp"

#include "gen.hpp"

namespace rateq::testgen {

struct SuiteResult {
    std::size_t instances = 0;
    std::size_t counterexamples = 0;
    std::string first_failure;

    void fail(const std::string& what) {
        ++counterexamples;
        if (first_failure.empty()) first_failure = what;
    }
};

/// Does the square  S -f2-> G / top: S => T / bottom: G => H / right: T -> H
/// commute in the category of partial morphisms? Requires equality of the
/// two composites as partial maps, domains included.
inline bool partial_square_commutes(const Morphism& left, const Rule& top, const Rule& bottom,
                                    const Morphism& right) {
    auto tn = top.node_pmap();
    auto te = top.edge_pmap();
    auto bn = bottom.node_pmap();
    auto be = bottom.edge_pmap();
    for (const Node& x : top.lhs().nodes()) {
        auto t = tn.find(x.id);
        auto b = bn.find(left.on_node(x.id));
        if (t == tn.end()) {
            if (b != bn.end()) return false;
        } else {
            if (b == bn.end() || right.on_node(t->second) != b->second) return false;
        }
    }
    for (const Edge& x : top.lhs().edges()) {
        auto t = te.find(x.id);
        auto b = be.find(left.on_edge(x.id));
        if (t == te.end()) {
            if (b != be.end()) return false;
        } else {
            if (b == be.end() || right.on_edge(t->second) != b->second) return false;
        }
    }
    return true;
}

/// Monos right: T -> H with right . g1 = g, as a preassigned extension search.
inline std::vector<Morphism> monos_factoring(const Morphism& g1, const Morphism& g) {
    std::vector<std::pair<Id, Id>> fn, fe;
    for (const Node& n : g1.dom().nodes()) fn.push_back({g1.on_node(n.id), g.on_node(n.id)});
    for (const Edge& e : g1.dom().edges()) fe.push_back({g1.on_edge(e.id), g.on_edge(e.id)});
    return enumerate_monos_extending(g1.cod(), g.cod(), fn, fe);
}

/// Two stacked rewrite steps sharing the rule alpha on top.
struct Stack {
    Rule alpha;
    Morphism f1; // L -> S
    Derivation top;    // f1 by alpha, corule gamma : S => T
    Morphism f2; // S -> G
    Derivation bottom; // f2 by gamma, corule beta : G => H
    Morphism f;  // f2 . f1
    Morphism g;  // g2 . g1
};

inline Stack make_stack(Rng& rng) {
    Stack st;
    st.alpha = random_rule(rng, 3, 2, {"", "u"}, {""});
    auto [s_host, f1] = random_embedding(rng, st.alpha.lhs(), 2, 2, {"", "u"}, {""});
    st.f1 = f1;
    RewriteContext ctx;
    st.top = apply_rule(st.alpha, st.f1, ctx);
    auto [g_host, f2] = random_embedding(rng, s_host, 2, 2, {"", "u"}, {""});
    st.f2 = f2;
    st.bottom = apply_rule(st.top.corule, st.f2, ctx);
    st.f = compose(st.f2, st.f1);
    st.g = compose(st.bottom.comatch, st.top.comatch);
    return st;
}

/// Stack whose upper square is also a reverse derivation, as the backward
/// and correspondence statements require: normalizing the upper match by a
/// reverse-then-forward round trip strips any context the deletion side
/// effects would otherwise leave next to the matched part.
inline Stack make_reversible_stack(Rng& rng) {
    Stack st;
    st.alpha = random_rule(rng, 3, 2, {"", "u"}, {""});
    RewriteContext ctx;
    auto [s0, f1_seed] = random_embedding(rng, st.alpha.lhs(), 2, 2, {"", "u"}, {""});
    Morphism g1_seed = apply_rule(st.alpha, f1_seed, ctx).comatch;
    st.f1 = apply_rule(reverse_rule(st.alpha), g1_seed, ctx).comatch;
    st.top = apply_rule(st.alpha, st.f1, ctx);
    auto [g_host, f2] = random_embedding(rng, st.f1.cod(), 2, 2, {"", "u"}, {""});
    st.f2 = f2;
    st.bottom = apply_rule(st.top.corule, st.f2, ctx);
    st.f = compose(st.f2, st.f1);
    st.g = compose(st.bottom.comatch, st.top.comatch);
    return st;
}

/// Forward decomposition: given the outer derivation and the upper one, the
/// lower comatch is the unique mono closing the diagram.
inline SuiteResult forward_decomposition_suite(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    SuiteResult res;
    while (res.instances < instances) {
        Stack st = make_stack(rng);
        ++res.instances;
        std::size_t hits = 0;
        bool found_constructed = false;
        for (const Morphism& cand : monos_factoring(st.top.comatch, st.g)) {
            if (!partial_square_commutes(st.f2, st.top.corule, st.bottom.corule, cand)) continue;
            ++hits;
            if (cand.same_maps(st.bottom.comatch)) found_constructed = true;
        }
        if (hits != 1 || !found_constructed) res.fail("expected exactly the constructed lower comatch");
    }
    return res;
}

/// Backward decomposition: with the lower comatch fixed instead, the lower
/// match is unique.
inline SuiteResult backward_decomposition_suite(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    SuiteResult res;
    while (res.instances < instances) {
        Stack st = make_reversible_stack(rng);
        ++res.instances;
        if (!is_derivable(st.top.comatch, st.alpha).derivable) {
            res.fail("upper comatch of a derivation reported non-derivable");
            continue;
        }
        std::size_t hits = 0;
        bool found_constructed = false;
        for (const Morphism& cand : monos_factoring(st.f1, st.f)) {
            if (!partial_square_commutes(cand, st.top.corule, st.bottom.corule, st.bottom.comatch))
                continue;
            ++hits;
            if (cand.same_maps(st.f2)) found_constructed = true;
        }
        if (hits != 1 || !found_constructed) res.fail("expected exactly the constructed lower match");
    }
    return res;
}

/// Derivability against a brute-force oracle: search every match of the lhs
/// into every inverse-rewrite of the comatch's codomain.
inline SuiteResult derivability_suite(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    SuiteResult res;
    while (res.instances < instances) {
        Rule alpha = random_rule(rng, 3, 2, {"", "u"}, {""});
        auto [host, incl] = random_embedding(rng, alpha.rhs(), 2, 2, {"", "u"}, {""});
        auto comatches = enumerate_matches(alpha.rhs(), host);
        if (comatches.empty()) continue;
        const Morphism& g = comatches[rng.below(comatches.size())];
        ++res.instances;

        bool oracle = false;
        Rule rev = reverse_rule(alpha);
        RewriteContext octx;
        for (const Morphism& gprime : enumerate_matches(alpha.rhs(), host)) {
            Derivation back = apply_rule(rev, gprime, octx);
            const Graph& candidate_g = back.comatch.cod();
            for (const Morphism& fcand : enumerate_matches(alpha.lhs(), candidate_g)) {
                Derivation fwd = apply_rule(alpha, fcand, octx);
                std::vector<std::pair<Id, Id>> fn, fe;
                for (const Node& n : alpha.rhs().nodes())
                    fn.push_back({fwd.comatch.on_node(n.id), g.on_node(n.id)});
                for (const Edge& e : alpha.rhs().edges())
                    fe.push_back({fwd.comatch.on_edge(e.id), g.on_edge(e.id)});
                if (find_iso_extending(fwd.comatch.cod(), host, fn, fe)) {
                    oracle = true;
                    break;
                }
            }
            if (oracle) break;
        }
        if (is_derivable(g, alpha).derivable != oracle)
            res.fail("derivability check disagrees with the exhaustive oracle");
    }
    return res;
}

/// Non-derivable comatch factorizations: a factor that is not derivable
/// admits no completion to the comatch of a real step.
inline SuiteResult restriction_suite(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    SuiteResult res;
    std::size_t attempts = 0;
    while (res.instances < instances && attempts < instances * 200) {
        ++attempts;
        Rule alpha = random_rule(rng, 3, 2, {"", "u"}, {""});
        auto [g_host, f] = random_embedding(rng, alpha.lhs(), 2, 2, {"", "u"}, {""});
        RewriteContext ctx;
        Derivation d = apply_rule(alpha, f, ctx);

        auto [t_host, g1_incl] = random_embedding(rng, alpha.rhs(), 2, 2, {"", "u"}, {""});
        if (is_derivable(g1_incl, alpha).derivable) continue; // need a non-derivable factor
        ++res.instances;
        if (!monos_factoring(g1_incl, d.comatch).empty())
            res.fail("non-derivable factor completed to a comatch");
    }
    return res;
}

/// Correspondence of factorizations: matches of S into G over f correspond
/// one-to-one with matches of T into H over g.
inline SuiteResult correspondence_suite(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    SuiteResult res;
    while (res.instances < instances) {
        Stack st = make_reversible_stack(rng);
        ++res.instances;
        std::size_t left = monos_factoring(st.f1, st.f).size();
        std::size_t right = monos_factoring(st.top.comatch, st.g).size();
        if (left != right) res.fail("factorization counts differ");
    }
    return res;
}

} // namespace rateq::testgen

#endif
