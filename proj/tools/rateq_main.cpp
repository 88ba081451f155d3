// rateq: derive, inspect, and numerically exercise the rate equations of a
// stochastic graph-rewriting model.
//
// Exit codes: 0 success, 1 usage/validation errors, 2 cap or convergence
// failures, 3 internal errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rateq/ctmc.hpp"
#include "rateq/equations.hpp"
#include "rateq/json_io.hpp"
#include "rateq/latex.hpp"
#include "rateq/model.hpp"
#include "rateq/ode_build.hpp"
#include "rateq/odeint.hpp"
#include "rateq/parser.hpp"

using namespace rateq;

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kCapOrConvergence = 2;
constexpr int kInternalError = 3;

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
    return file;
}

Model load_model(const std::string& path) {
    try {
        return parse_model_file(path);
    } catch (const ParseError& e) {
        throw std::invalid_argument(e.format(path));
    }
}

std::vector<Observable> seed_observables(const Model& model) {
    std::vector<Observable> seeds;
    for (auto& def : model.observable_defs()) seeds.push_back(make_observable(def.graph));
    return seeds;
}

Graph resolve_start(const Model& model, const std::string& init_name) {
    if (!init_name.empty()) return model.graph_checked(init_name);
    if (auto g = model.start_graph()) return *g;
    throw std::invalid_argument("no start graph: pass --init or declare 'start' in the model");
}

std::vector<std::string> observable_names(const Model& model) {
    std::vector<std::string> names;
    for (auto& [name, g] : model.observables) names.push_back(name);
    return names;
}

std::vector<Graph> observable_graphs(const Model& model) {
    std::vector<Graph> graphs;
    for (auto& def : model.observable_defs()) graphs.push_back(def.graph);
    return graphs;
}

int cmd_expand(const std::string& model_path, std::size_t max_obs, std::size_t max_size,
               bool no_equiv, const std::string& out_path) {
    Model model = load_model(model_path);
    if (model.rules.empty())
        throw std::invalid_argument("model has no rules; nothing to expand");
    if (model.observables.empty())
        throw std::invalid_argument("model declares no observables to seed the expansion");
    ClosurePolicy policy;
    policy.use_equivalences = !no_equiv;
    policy.max_observables = max_obs;
    policy.max_size = max_size == 0 ? SIZE_MAX : max_size;
    OdeSystem sys = expand_system(model, seed_observables(model), policy);
    SystemFile file = make_system_file(sys, model);

    std::ofstream fout;
    open_output(fout, out_path) << system_to_json(file).dump(2) << "\n";
    if (sys.capped) {
        std::cerr << "expansion hit the cap of " << policy.max_observables
                  << " observables; frontier still open (" << sys.frontier.size()
                  << " pending observables)\n";
        return kCapOrConvergence;
    }
    std::cerr << "closed system with " << sys.equations.size() << " equation(s)\n";
    return kOk;
}

int cmd_integrate(const std::string& sys_path, double t_end, double dt, std::size_t every,
                  const std::string& out_path) {
    SystemFile file = load_system_file(sys_path);
    OdeProblem p = file.to_problem(t_end, dt);
    std::vector<std::string> names;
    for (auto& eq : file.system.equations) names.push_back(file.system.display_name(eq.lhs.key));
    std::vector<std::string> out_names;
    for (auto& [n, t] : file.outputs) out_names.push_back(n);

    std::ofstream fout;
    std::ostream& os = open_output(fout, out_path);
    os << "t";
    for (auto& n : names) os << "," << n;
    for (auto& n : out_names) os << "," << n;
    os << "\n";
    std::size_t step = 0;
    integrate(p, [&](double t, const std::vector<double>& y) {
        if (step++ % every != 0 && t < t_end) return;
        os << t;
        for (double v : y) os << "," << v;
        auto outs = file.outputs_at(y);
        for (auto& n : out_names) os << "," << outs.at(n);
        os << "\n";
    });
    return kOk;
}

int cmd_steady(const std::string& sys_path, double dt, double tol, std::size_t window,
               double t_max, const std::string& out_path) {
    SystemFile file = load_system_file(sys_path);
    OdeProblem p = file.to_problem(t_max, dt);
    SteadyResult res = steady_state(p, tol, window, t_max);

    json j;
    j["format_version"] = 1;
    j["converged"] = res.converged;
    j["t_converged"] = res.t_converged;
    json values;
    for (std::size_t i = 0; i < res.values.size(); ++i)
        values[file.system.display_name(p.vars[i])] = res.values[i];
    j["values"] = values;
    json outs;
    for (auto& [name, v] : file.outputs_at(res.values)) outs[name] = v;
    j["outputs"] = outs;

    std::ofstream fout;
    open_output(fout, out_path) << j.dump(2) << "\n";
    if (!res.converged) {
        std::cerr << "no steady state before t = " << t_max << "\n";
        return kCapOrConvergence;
    }
    return kOk;
}

int cmd_simulate(const std::string& model_path, const std::string& init_name, double t_end,
                 std::size_t runs, std::uint64_t seed, std::size_t samples,
                 const std::string& out_path) {
    Model model = load_model(model_path);
    Graph g0 = resolve_start(model, init_name);
    auto names = observable_names(model);
    auto graphs = observable_graphs(model);
    std::ofstream fout;
    std::ostream& os = open_output(fout, out_path);
    if (runs == 1) {
        Trajectory tr = gillespie(model, g0, t_end, seed, graphs);
        trajectory_csv(os, names, tr);
        if (tr.absorbed)
            std::cerr << "trajectory absorbed at t = " << tr.absorbed_at << "\n";
        return kOk;
    }
    std::vector<double> times;
    for (std::size_t i = 1; i <= samples; ++i) times.push_back(t_end * double(i) / double(samples));
    EnsembleStats st = ensemble_stats(model, g0, t_end, runs, seed, graphs, times);
    os << ensemble_to_json(st, names, seed).dump(2) << "\n";
    return kOk;
}

int cmd_master(const std::string& model_path, const std::string& init_name, std::size_t cap,
               double t_end, double dt, const std::string& out_path) {
    Model model = load_model(model_path);
    Graph g0 = resolve_start(model, init_name);
    auto names = observable_names(model);
    auto graphs = observable_graphs(model);

    StateSpace space = reachable_space(model, g0, cap);
    std::cerr << "reachable states: " << space.states.size() << "\n";
    std::vector<double> p0(space.states.size(), 0.0);
    p0[space.index.at(state_fingerprint(g0))] = 1.0;

    std::vector<MasterSeries> series;
    for (auto& g : graphs) series.push_back(master_expectations(space, p0, g, t_end, dt));

    std::ofstream fout;
    std::ostream& os = open_output(fout, out_path);
    os << "t";
    for (auto& n : names) os << "," << n;
    os << "\n";
    if (!series.empty()) {
        for (std::size_t i = 0; i < series[0].times.size(); ++i) {
            os << series[0].times[i];
            for (auto& s : series) os << "," << s.values[i];
            os << "\n";
        }
    }
    return kOk;
}

int cmd_gluings(const std::string& model_path, const std::string& g1_name,
                const std::string& g2_name, bool as_json, const std::string& out_path) {
    Model model = load_model(model_path);
    const Graph& g1 = model.graph_checked(g1_name);
    const Graph& g2 = model.graph_checked(g2_name);
    auto mgs = minimal_gluings(g1, g2);

    std::vector<Graph> forbidden = model.forbidden_graphs();
    std::vector<std::pair<std::string, const Graph*>> invariants;
    for (std::size_t i = 0; i < model.forbids.size(); ++i)
        invariants.push_back({model.forbids[i], &forbidden[i]});

    std::ofstream fout;
    std::ostream& os = open_output(fout, out_path);
    if (as_json) {
        os << gluings_to_json(mgs, invariants).dump(2) << "\n";
        return kOk;
    }
    os << mgs.size() << " minimal gluing(s) of " << g1_name << " and " << g2_name << "\n";
    for (std::size_t i = 0; i < mgs.size(); ++i) {
        os << "[" << i << "] overlap " << mgs[i].overlap.node_count() << "+"
           << mgs[i].overlap.edge_count() << "  tip " << mgs[i].tip;
        std::string excluded;
        for (auto& [name, pat] : invariants)
            if (evaluate_observable(*pat, mgs[i].tip) > 0)
                excluded += (excluded.empty() ? "" : ",") + name;
        if (!excluded.empty()) os << "  excluded-by " << excluded;
        os << "\n";
    }
    return kOk;
}

int cmd_latex(const std::string& sys_path, const std::string& out_path) {
    SystemFile file = load_system_file(sys_path);
    std::ofstream fout;
    open_output(fout, out_path) << system_to_latex(file);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate equations for stochastic graph-rewriting models"};
    app.require_subcommand(1);

    std::string model_path, sys_path, out_path, init_name, g1_name, g2_name;
    std::size_t max_obs = 256, max_size = 0, every = 1, runs = 1, samples = 20, window = 100;
    std::size_t cap = 1000;
    bool no_equiv = false, as_json = false;
    double t_end = 10.0, dt = 1e-3, tol = 1e-9, t_max = 1e4;
    std::uint64_t seed = 1;

    auto* expand = app.add_subcommand("expand", "derive the closed ODE system for the observables");
    expand->add_option("model", model_path, "model file")->required();
    expand->add_option("--max-obs", max_obs, "observable cap for the expansion");
    expand->add_option("--max-size", max_size,
                       "zero-closure truncation bound on observable size, nodes plus edges (0 = off)");
    expand->add_flag("--no-equiv", no_equiv, "ignore declared observable equivalences");
    expand->add_option("--out", out_path, "output JSON path (default stdout)");

    auto* integrate_cmd = app.add_subcommand("integrate", "integrate an expanded system (CSV)");
    integrate_cmd->add_option("system", sys_path, "system JSON from 'expand'")->required();
    integrate_cmd->add_option("--t-end", t_end, "integration end time")->required();
    integrate_cmd->add_option("--dt", dt, "fixed RK4 step");
    integrate_cmd->add_option("--every", every, "emit every k-th step")->check(CLI::PositiveNumber);
    integrate_cmd->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* steady = app.add_subcommand("steady", "integrate an expanded system to steady state");
    steady->add_option("system", sys_path, "system JSON from 'expand'")->required();
    steady->add_option("--dt", dt, "fixed RK4 step");
    steady->add_option("--tol", tol, "relative per-step change tolerance");
    steady->add_option("--window", window, "steps that must stay below tol");
    steady->add_option("--t-max", t_max, "give up after this time");
    steady->add_option("--out", out_path, "output JSON path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "jump-process simulation (CSV or ensemble JSON)");
    simulate->add_option("model", model_path, "model file")->required();
    simulate->add_option("--init", init_name, "start graph name (default: the model's start)");
    simulate->add_option("--t-end", t_end, "simulation end time")->required();
    simulate->add_option("--runs", runs, "number of trajectories")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed, "base seed; run i uses seed+i");
    simulate->add_option("--samples", samples, "sample points for ensemble statistics")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", out_path, "output path (default stdout)");

    auto* master = app.add_subcommand("master",
                                      "exact expectations on the enumerated state space (CSV)");
    master->add_option("model", model_path, "model file")->required();
    master->add_option("--init", init_name, "start graph name (default: the model's start)");
    master->add_option("--cap", cap, "state-space cap");
    master->add_option("--t-end", t_end, "integration end time");
    master->add_option("--dt", dt, "fixed RK4 step");
    master->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* gluings = app.add_subcommand("gluings", "enumerate minimal gluings of two named graphs");
    gluings->add_option("model", model_path, "model file")->required();
    gluings->add_option("g1", g1_name, "first graph name")->required();
    gluings->add_option("g2", g2_name, "second graph name")->required();
    gluings->add_flag("--json", as_json, "emit JSON instead of text");
    gluings->add_option("--out", out_path, "output path (default stdout)");

    auto* latex = app.add_subcommand("latex", "render an expanded system as LaTeX");
    latex->add_option("system", sys_path, "system JSON from 'expand'")->required();
    latex->add_option("--out", out_path, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*expand) return cmd_expand(model_path, max_obs, max_size, no_equiv, out_path);
        if (*integrate_cmd) return cmd_integrate(sys_path, t_end, dt, every, out_path);
        if (*steady) return cmd_steady(sys_path, dt, tol, window, t_max, out_path);
        if (*simulate) return cmd_simulate(model_path, init_name, t_end, runs, seed, samples, out_path);
        if (*master) return cmd_master(model_path, init_name, cap, t_end, dt, out_path);
        if (*gluings) return cmd_gluings(model_path, g1_name, g2_name, as_json, out_path);
        if (*latex) return cmd_latex(sys_path, out_path);
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCapOrConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kUsageError;
}
