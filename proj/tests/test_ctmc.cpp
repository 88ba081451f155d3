#include "doctest.h"

#include "rateq/ctmc.hpp"

#include "support/build.hpp"
#include "support/gen.hpp"
#include "support/models.hpp"

using namespace rateq;
using testgen::build;
using testgen::nodes_only;

TEST_CASE("transition rows aggregate by target class") {
    Model bd = testgen::birth_death_model(Rational(2), Rational(1));

    TransitionRow r1 = transition_row(bd, nodes_only(1));
    // birth to the 2-node state, death to the empty state
    auto rates1 = r1.class_rates(bd);
    CHECK(rates1.size() == 2);
    CHECK(rates1.at(canonical_key(nodes_only(2))) == Rational(2));
    CHECK(rates1.at(canonical_key(Graph{})) == Rational(1));
    CHECK(r1.diagonal(bd) == Rational(-3));

    // Three isolated nodes: rate 3d to the single 2-node class.
    Model death_only;
    death_only.rules.push_back(bd.rules[1]);
    TransitionRow r3 = transition_row(death_only, nodes_only(3));
    auto rates3 = r3.class_rates(death_only);
    CHECK(rates3.size() == 1);
    CHECK(rates3.at(canonical_key(nodes_only(2))) == Rational(3));
}

TEST_CASE("transition rows are isomorphism invariant") {
    Model bd = testgen::birth_death_model(Rational(2), Rational(1));
    Graph g = nodes_only(3);
    Graph h({{7, ""}, {9, ""}, {12, ""}}, {});
    auto ra = transition_row(bd, g).class_rates(bd);
    auto rb = transition_row(bd, h).class_rates(bd);
    CHECK(ra == rb);
}

TEST_CASE("compressed walker states enable exactly the two extension moves") {
    Model w = testgen::walker_model(Rational(2), Rational(1), Rational(3), Rational(1));
    // Compressed on segment 1 of a 3-ring.
    Graph compressed({{0, "W"}, {1, "D"}, {2, "D"}, {3, "D"}},
                     {{0, 0, 1, "a"}, {1, 0, 1, "b"}, {2, 1, 2, "d"}, {3, 2, 3, "d"}, {4, 3, 1, "d"}});
    TransitionRow row = transition_row(w, compressed);
    REQUIRE(row.steps.size() == 2);
    std::set<std::string> fired;
    for (auto& s : row.steps) fired.insert(w.rules[s.rule_index].name);
    CHECK(fired == std::set<std::string>{"FE", "BE"});
    // Both targets are extended states, a single iso class.
    auto rates = row.class_rates(w);
    REQUIRE(rates.size() == 1);
    CHECK(rates.begin()->second == Rational(3)); // k_FE + k_BE
}

TEST_CASE("gillespie with no rules stays at the start state") {
    Model empty_model;
    Graph g0 = nodes_only(2);
    Trajectory t = gillespie(empty_model, g0, 5.0, 42, {nodes_only(1)});
    CHECK(t.absorbed);
    CHECK(t.times.size() == 1);
    CHECK(t.counts[0][0] == 2);
}

TEST_CASE("gillespie is deterministic in the seed") {
    Model bd = testgen::birth_death_model(Rational(2), Rational(1));
    Trajectory a = gillespie(bd, nodes_only(1), 3.0, 1234, {nodes_only(1)});
    Trajectory b = gillespie(bd, nodes_only(1), 3.0, 1234, {nodes_only(1)});
    CHECK(a.times == b.times);
    CHECK(a.counts == b.counts);
    Trajectory c = gillespie(bd, nodes_only(1), 3.0, 1235, {nodes_only(1)});
    CHECK(a.times != c.times);
}

TEST_CASE("pure-death extinction time matches the analytic mean") {
    // From 5 nodes at unit rate: E[T] = sum_{k=1..5} 1/k.
    Model death;
    death.rules.push_back({"death", make_rule(nodes_only(1), Graph{}, {}, {}, 0, "death"), Rational(1)});
    const std::size_t runs = 400;
    double sum = 0, sumsq = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        Trajectory t = gillespie(death, nodes_only(5), 1e6, 5000 + r, {});
        REQUIRE(t.absorbed);
        sum += t.absorbed_at;
        sumsq += t.absorbed_at * t.absorbed_at;
    }
    double mean = sum / runs;
    double var = (sumsq - runs * mean * mean) / (runs - 1);
    double se = std::sqrt(var / runs);
    double expected = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5;
    CHECK(std::abs(mean - expected) < 3 * se);
}

TEST_CASE("reachable space of the walker ring has two states per segment") {
    Model w = testgen::walker_model(Rational(2), Rational(1), Rational(3), Rational(1));
    for (std::size_t n : {3u, 4u, 5u}) {
        StateSpace sp = reachable_space(w, testgen::walker_ring(n), 100);
        CHECK(sp.states.size() == 2 * n);
    }
}

TEST_CASE("reachable space: death chain and cap behaviour") {
    Model death;
    death.rules.push_back({"death", make_rule(nodes_only(1), Graph{}, {}, {}, 0, "death"), Rational(1)});
    StateSpace sp = reachable_space(death, nodes_only(1), 10);
    CHECK(sp.states.size() == 2);

    Model bd = testgen::birth_death_model(Rational(2), Rational(1));
    CHECK_THROWS_AS(reachable_space(bd, Graph{}, 10), CapExceededError);
}

TEST_CASE("master equation basics on the walker ring") {
    Model w = testgen::walker_model(Rational(2), Rational(1), Rational(3), Rational(1));
    StateSpace sp = reachable_space(w, testgen::walker_ring(3), 100);
    REQUIRE(sp.states.size() == 6);

    std::vector<double> p0(sp.states.size(), 0.0);
    p0[0] = 1.0;
    const Graph& c_motif = w.graph_checked("E_motif");

    // t_end = 0 returns the initial expectation.
    MasterSeries at0 = master_expectations(sp, p0, c_motif, 0.0, 1e-3);
    CHECK(at0.values.back() == 1.0);

    MasterSeries ms = master_expectations(sp, p0, c_motif, 40.0, 1e-3);
    for (double mass : ms.probability_sums) CHECK(std::abs(mass - 1.0) < 1e-9);
    CHECK(ms.values.back() == doctest::Approx(3.0 / 7.0).epsilon(1e-8));
}

TEST_CASE("gillespie agrees with the master equation on the walker ring") {
    Model w = testgen::walker_model(Rational(2), Rational(1), Rational(3), Rational(1));
    Graph ring = testgen::walker_ring(3);
    StateSpace sp = reachable_space(w, ring, 100);
    std::vector<double> p0(sp.states.size(), 0.0);
    p0[sp.index.at(state_fingerprint(ring))] = 1.0;
    const Graph& c_motif = w.graph_checked("E_motif");

    MasterSeries ms = master_expectations(sp, p0, c_motif, 5.0, 1e-3);
    auto master_at = [&](double t) {
        std::size_t i = std::size_t(t / 1e-3 + 0.5);
        return ms.values[i];
    };

    EnsembleStats st = ensemble_stats(w, ring, 5.0, 600, 99, {c_motif}, {1.0, 5.0});
    for (std::size_t i = 0; i < st.times.size(); ++i) {
        double ref = master_at(st.times[i]);
        double se = std::max(st.stderr_[i][0], 1e-12);
        CHECK(std::abs(st.mean[i][0] - ref) < 3 * se + 1e-9);
    }
}
