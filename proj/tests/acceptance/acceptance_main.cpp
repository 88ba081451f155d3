// Acceptance suite: one check per release criterion, each printed as a
// single PASS/FAIL line. Numeric tolerances are fixed here, not configurable.
//
// Usage: acceptance <models-dir> <rateq-cli-path>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "rateq/ctmc.hpp"
#include "rateq/equations.hpp"
#include "rateq/json_io.hpp"
#include "rateq/ode_build.hpp"
#include "rateq/parser.hpp"

#include "../support/gen.hpp"
#include "../support/lemma_suites.hpp"

using namespace rateq;
namespace fs = std::filesystem;

namespace {

std::string g_models_dir;
std::string g_cli;
fs::path g_tmp;

std::string model_path(const char* name) { return g_models_dir + "/" + name; }

int run_cli(const std::string& args) {
    std::string cmd = g_cli + " " + args;
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

struct Failure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

template <class F>
bool criterion(int number, const std::string& label, double time_limit_s, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const Failure& f) {
        ok = false;
        detail = f.what;
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && time_limit_s > 0 && secs > time_limit_s) {
        ok = false;
        detail += " [exceeded time limit]";
    }
    std::printf("%s criterion %d: %s (%s; %.2fs)\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    return ok;
}

// ---------------------------------------------------------------------------

std::string walker_velocity_pipeline() {
    fs::path sys = g_tmp / "walker_sys.json";
    fs::path steady = g_tmp / "walker_steady.json";
    require(run_cli("expand " + model_path("walker.gts") + " --out " + sys.string() +
                    " 2>/dev/null") == 0,
            "expand failed");
    require(run_cli("steady " + sys.string() + " --tol 1e-11 --out " + steady.string() +
                    " 2>/dev/null") == 0,
            "steady failed");
    std::ifstream in(steady);
    nlohmann::json j = nlohmann::json::parse(in);
    require(j.at("converged").get<bool>(), "steady state did not converge");
    double v = j.at("outputs").at("V").get<double>();
    double expected = 5.0 / 7.0;
    require(std::abs(v - expected) / expected < 1e-6, "V = " + std::to_string(v));
    std::ostringstream os;
    os << "V = " << v << ", expected 5/7";
    return os.str();
}

std::string walker_gluing_counts() {
    fs::path out = g_tmp / "gluings.json";
    require(run_cli("gluings " + model_path("walker.gts") + " E_motif FE_lhs --json --out " +
                    out.string() + " 2>/dev/null") == 0,
            "gluings command failed");
    std::ifstream in(out);
    nlohmann::json j = nlohmann::json::parse(in);
    std::size_t total = j.at("count").get<std::size_t>();
    require(total == 21, "expected 21 gluing classes, got " + std::to_string(total));

    auto excluded_by_any = [](const nlohmann::json& g, const std::vector<std::string>& names) {
        for (auto& e : g.at("excluded_by"))
            for (auto& n : names)
                if (e.get<std::string>() == n) return true;
        return false;
    };
    const std::vector<std::string> two_legs = {"aa_pair", "aa_split", "bb_pair", "bb_split"};
    const std::vector<std::string> backbone = {"dna_fork", "dna_join", "dna_pair"};
    std::size_t after_legs = 0, after_backbone = 0;
    for (auto& g : j.at("gluings")) {
        if (excluded_by_any(g, two_legs)) continue;
        ++after_legs;
        if (excluded_by_any(g, backbone)) continue;
        ++after_backbone;
    }
    require(after_legs == 8,
            "expected 8 classes after the two-leg filter, got " + std::to_string(after_legs));
    require(after_backbone == 5, "expected 5 classes after the backbone filter, got " +
                                     std::to_string(after_backbone));
    return "21 classes; 13 excluded by the two-leg invariant, 3 more by the backbone";
}

std::string generator_oracle_equivalence() {
    testgen::Rng rng(20200813);
    std::size_t done = 0, attempts = 0;
    while (done < 200 && attempts < 4000) {
        ++attempts;
        Rule r = testgen::random_rule(rng, 3, 2, {"", "y"}, {"", "q"});
        Graph f = testgen::random_graph(rng, 3, 2, {"", "y"}, {"", "q"});
        Graph g = testgen::random_graph(rng, 6, 6, {"", "y"}, {"", "q"});
        Model m;
        m.rules.push_back({"r", r, Rational(1)});
        Rational direct = generator_action(m, f, g);
        Rational symbolic = jump(r, make_observable(f)).evaluate(g);
        require(direct == symbolic, "mismatch at instance " + std::to_string(done));
        ++done;
    }
    require(done >= 200, "generated too few instances");
    return std::to_string(done) + " random triples, exact equality";
}

std::string birth_death_reduction() {
    Model bd = parse_model_file(model_path("birth_death.gts"));
    Graph unit = bd.graph_checked("unit");
    OdeSystem sys = expand_system(bd, {make_observable(unit)}, ClosurePolicy{});
    require(sys.closed(), "expansion not closed");
    require(sys.equations.size() == 1, "expected a single equation");
    const LinearCombination& rhs = sys.equations[0].rhs;
    require(rhs.size() == 2, "expected two terms");
    const Term* c = rhs.find(empty_observable_key());
    const Term* n = rhs.find(canonical_key(unit));
    require(c && c->coeff == Rational(2), "constant term must be b = 2");
    require(n && n->coeff == Rational(-1), "linear term must be -d = -1");

    OdeProblem p = make_ode_problem(sys, bd, 2.0, 1e-3);
    Series s = integrate(p);
    for (double t : {0.5, 1.0, 2.0}) {
        std::size_t i = std::size_t(t / 1e-3 + 0.5);
        double expected = 2.0 * (1.0 - std::exp(-t));
        require(std::abs(s.values[i][0] - expected) < 1e-5,
                "mismatch at t = " + std::to_string(t));
    }
    return "d<N>/dt = 2 - <N>; matches 2(1-e^-t) at t in {0.5, 1, 2}";
}

std::string walker_exact_oracle() {
    Model w = parse_model_file(model_path("walker.gts"));
    Graph ring = w.graph_checked("ring3");
    const Graph& c_motif = w.graph_checked("E_motif");

    StateSpace sp = reachable_space(w, ring, 100);
    require(sp.states.size() == 6, "expected 6 reachable states, got " +
                                       std::to_string(sp.states.size()));
    std::vector<double> p0(sp.states.size(), 0.0);
    p0[sp.index.at(state_fingerprint(ring))] = 1.0;

    MasterSeries ms = master_expectations(sp, p0, c_motif, 50.0, 1e-3);
    double master_c = ms.values.back();
    double expected = 3.0 / 7.0; // (kFE + kBE) / (kFE + kBE + kFC + kBC)
    require(std::abs(master_c - expected) < 1e-8,
            "master <C> = " + std::to_string(master_c));
    for (double mass : ms.probability_sums)
        require(std::abs(mass - 1.0) < 1e-9, "probability not conserved");

    std::vector<Observable> seeds{make_observable(c_motif), make_observable(w.graph_checked("O"))};
    OdeSystem sys = expand_system(w, seeds, ClosurePolicy{});
    OdeProblem p = make_ode_problem(sys, w, 1.0, 1e-3);
    SteadyResult st = steady_state(p, 1e-12);
    require(st.converged, "symbolic system did not converge");
    double symbolic_c = st.values[sys.index.at(canonical_key(c_motif))];
    require(std::abs(symbolic_c - master_c) < 1e-6,
            "generated-equation steady state drifts from the master equation");

    MasterSeries fine = master_expectations(sp, p0, c_motif, 20.0, 1e-3);
    auto master_at = [&](double t) { return fine.values[std::size_t(t / 1e-3 + 0.5)]; };
    EnsembleStats est =
        ensemble_stats(w, ring, 20.0, 10000, 424242, {c_motif}, {1.0, 5.0, 20.0});
    for (std::size_t i = 0; i < est.times.size(); ++i) {
        double se = std::max(est.stderr_[i][0], 1e-12);
        double diff = std::abs(est.mean[i][0] - master_at(est.times[i]));
        require(diff < 3 * se, "ensemble mean off by " + std::to_string(diff / se) +
                                   " standard errors at t = " + std::to_string(est.times[i]));
    }
    std::ostringstream os;
    os << "6 states; master <C> = " << master_c << " = (kFE+kBE)/sum; 10^4-run ensemble within 3 SE";
    return os.str();
}

std::string lemma_property_suites() {
    struct Entry {
        const char* name;
        testgen::SuiteResult r;
    };
    std::vector<Entry> suites = {
        {"forward", testgen::forward_decomposition_suite(71001, 1000)},
        {"backward", testgen::backward_decomposition_suite(71002, 1000)},
        {"derivability", testgen::derivability_suite(71003, 1000)},
        {"restriction", testgen::restriction_suite(71004, 1000)},
        {"correspondence", testgen::correspondence_suite(71005, 1000)},
    };
    std::ostringstream os;
    for (auto& s : suites) {
        require(s.r.instances >= 1000,
                std::string(s.name) + ": only " + std::to_string(s.r.instances) + " instances");
        require(s.r.counterexamples == 0,
                std::string(s.name) + ": " + s.r.first_failure);
        os << s.name << "=" << s.r.instances << " ";
    }
    return os.str() + "instances, zero counterexamples";
}

std::string gluing_counting_identity() {
    testgen::Rng rng(5216);
    std::vector<Graph> corpus;
    corpus.push_back(Graph{});
    corpus.push_back(Graph({{0, ""}}, {}));
    while (corpus.size() < 14)
        corpus.push_back(testgen::random_graph(rng, 4, 4, {"", "m"}, {""}));
    std::size_t checked = 0;
    for (const Graph& l : corpus)
        for (const Graph& f : corpus) {
            auto mgs = minimal_gluings(l, f);
            for (const Graph& g : corpus) {
                std::uint64_t lhs = evaluate_observable(l, g) * evaluate_observable(f, g);
                std::uint64_t rhs = 0;
                for (auto& mg : mgs) rhs += evaluate_observable(mg.tip, g);
                require(lhs == rhs, "identity failed on triple " + std::to_string(checked));
                ++checked;
            }
        }
    return std::to_string(checked) + " triples, zero failures";
}

std::string infinite_expansion_detection() {
    fs::path closed_sys = g_tmp / "walker_closed.json";
    int rc_open = run_cli("expand " + model_path("walker.gts") + " --no-equiv --max-obs 40 --out " +
                          (g_tmp / "walker_open.json").string() + " 2>/dev/null");
    require(rc_open == 2, "expansion without the equivalence should hit the cap (exit 2)");
    std::ifstream in_open(g_tmp / "walker_open.json");
    nlohmann::json open_j = nlohmann::json::parse(in_open);
    require(open_j.at("status") == "capped", "status should be capped");
    require(!open_j.at("frontier").empty(), "frontier should be reported open");

    require(run_cli("expand " + model_path("walker.gts") + " --out " + closed_sys.string() +
                    " 2>/dev/null") == 0,
            "expansion with the equivalence failed");
    std::ifstream in_closed(closed_sys);
    nlohmann::json closed_j = nlohmann::json::parse(in_closed);
    require(closed_j.at("status") == "closed", "status should be closed");
    require(closed_j.at("equations").size() == 2,
            "expected exactly 2 equations, got " + std::to_string(closed_j.at("equations").size()));
    return "capped with open frontier without the equivalence; closed at 2 equations with it";
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <models-dir> <rateq-cli>\n";
        return 2;
    }
    g_models_dir = argv[1];
    g_cli = argv[2];
    g_tmp = fs::temp_directory_path() / "rateq_acceptance";
    fs::create_directories(g_tmp);

    int failures = 0;
    failures += !criterion(1, "walker closed-form velocity via expand | steady", 5.0,
                           walker_velocity_pipeline);
    failures += !criterion(2, "minimal-gluing count and invariant reductions", 1.0,
                           walker_gluing_counts);
    failures += !criterion(3, "generator action equals the symbolic jump", 60.0,
                           generator_oracle_equivalence);
    failures += !criterion(4, "birth-death reduces to one linear equation", 0.0,
                           birth_death_reduction);
    failures += !criterion(5, "exact oracle agreement on the walker ring", 120.0,
                           walker_exact_oracle);
    failures += !criterion(6, "derivation lemma property suites", 0.0, lemma_property_suites);
    failures += !criterion(7, "gluing counting identity", 0.0, gluing_counting_identity);
    failures += !criterion(8, "infinite expansion detected; equivalence closes it", 0.0,
                           infinite_expansion_detection);

    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all 8 criteria passed\n");
    return 0;
}
