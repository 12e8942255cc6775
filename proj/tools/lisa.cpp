// Command-line surface: parse agent sources, simulate, check reachability
// queries on chains from either source language, enumerate probable paths,
// rank plans, export chains, and cross-check by Monte Carlo.
//
// Exit codes: 0 success, 1 input diagnostics, 2 runtime failure. Errors go
// to stderr as one JSON object per line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lisa/builder.hpp"
#include "lisa/dsl.hpp"
#include "lisa/dtmc.hpp"
#include "lisa/env.hpp"
#include "lisa/paths.hpp"
#include "lisa/plan_select.hpp"
#include "lisa/prism.hpp"
#include "lisa/query.hpp"
#include "lisa/scenario.hpp"
#include "lisa/sim.hpp"
#include "lisa/solve.hpp"
#include "lisa/trace.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lisa::Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit_diagnostics(const std::vector<lisa::Diagnostic>& diags) {
    for (const auto& d : diags) {
        nlohmann::ordered_json j;
        j["severity"] = d.severity == lisa::Diagnostic::Severity::error ? "error" : "warning";
        j["line"] = d.line;
        j["column"] = d.column;
        j["message"] = d.message;
        std::cerr << j.dump() << "\n";
    }
}

[[noreturn]] void fail(const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = message;
    std::cerr << j.dump() << "\n";
    std::exit(code);
}

lisa::AgentProgram load_agent(const std::string& path) {
    lisa::SourceProgram src = lisa::parse_program(read_file(path));
    emit_diagnostics(src.diagnostics);
    if (!src.ok()) std::exit(1);
    return src.program;
}

lisa::DtmcModel load_chain(const std::string& path, const std::string& env_path,
                           bool uniform_nondet) {
    if (path.ends_with(".lisa")) {
        if (env_path.empty()) fail("a .lisa model needs --env", 1);
        lisa::AgentProgram prog = load_agent(path);
        lisa::EnvModel env = lisa::load_env(env_path);
        return lisa::build_dtmc_from_agent(prog, env, prog.predicates);
    }
    lisa::PrismSource src = lisa::parse_prism_subset(read_file(path));
    emit_diagnostics(src.diagnostics);
    if (!src.ok()) std::exit(1);
    return lisa::elaborate(src.ast, uniform_nondet);
}

std::string fmt_prob(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agent reasoning and chain analysis toolkit"};
    app.require_subcommand(1);

    std::string file, env_path, query_text, out_path, trace_path;
    std::vector<std::string> goal_preds;
    std::uint64_t seed = 0, horizon = 60;
    long long episodes = 10000;
    int count = 5, tree_horizon = 4;
    std::string backend_name = "linear";
    bool uniform_nondet = false;

    auto* cmd_parse = app.add_subcommand("parse", "check an agent source file");
    cmd_parse->add_option("file", file)->required();

    auto* cmd_run = app.add_subcommand("run", "simulate an agent against an environment");
    cmd_run->add_option("file", file)->required();
    cmd_run->add_option("--env", env_path)->required();
    cmd_run->add_option("--seed", seed);
    cmd_run->add_option("--horizon", horizon);
    cmd_run->add_option("--trace", trace_path);

    auto* cmd_check = app.add_subcommand("check", "reachability probability of a query");
    cmd_check->add_option("file", file)->required();
    cmd_check->add_option("--env", env_path);
    cmd_check->add_option("--query", query_text)->required();
    cmd_check->add_option("--backend", backend_name)->check(CLI::IsMember({"linear", "vi"}));
    cmd_check->add_flag("--uniform-nondet", uniform_nondet);

    auto* cmd_paths = app.add_subcommand("paths", "most probable target-hitting paths");
    cmd_paths->add_option("file", file)->required();
    cmd_paths->add_option("--query", query_text)->required();
    cmd_paths->add_option("--count", count);
    cmd_paths->add_flag("--uniform-nondet", uniform_nondet);

    auto* cmd_select = app.add_subcommand("select", "rank plans by goal reachability");
    cmd_select->add_option("file", file)->required();
    cmd_select->add_option("--goal", goal_preds)->required();
    cmd_select->add_option("--horizon", tree_horizon);
    cmd_select->add_option("--backend", backend_name)->check(CLI::IsMember({"linear", "vi"}));

    auto* cmd_export = app.add_subcommand("export-prism", "emit a loaded chain as a model file");
    cmd_export->add_option("file", file)->required();
    cmd_export->add_option("--env", env_path);
    cmd_export->add_option("-o,--out", out_path);

    auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo estimate of a query");
    cmd_mc->add_option("file", file)->required();
    cmd_mc->add_option("--env", env_path);
    cmd_mc->add_option("--query", query_text)->required();
    cmd_mc->add_option("-n,--episodes", episodes);
    cmd_mc->add_option("--seed", seed);
    cmd_mc->add_flag("--uniform-nondet", uniform_nondet);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_parse->parsed()) {
            lisa::SourceProgram src = lisa::parse_program(read_file(file));
            emit_diagnostics(src.diagnostics);
            return src.ok() ? 0 : 1;
        }

        if (cmd_run->parsed()) {
            lisa::AgentProgram prog = load_agent(file);
            lisa::EnvModel env = lisa::load_env(env_path);
            lisa::Trace trace = lisa::run_sim(prog, env, seed, horizon);
            if (trace_path.empty()) {
                lisa::write_trace(std::cout, trace);
            } else {
                std::ofstream out(trace_path, std::ios::binary);
                if (!out) throw lisa::Error("cannot write " + trace_path);
                lisa::write_trace(out, trace);
            }
            return 0;
        }

        if (cmd_check->parsed()) {
            lisa::DtmcModel m = load_chain(file, env_path, uniform_nondet);
            lisa::ReachQuery q = lisa::parse_query(query_text);
            lisa::Backend backend = backend_name == "vi" ? lisa::Backend::value_iteration
                                                         : lisa::Backend::linear;
            std::cout << fmt_prob(lisa::check_query(m, q, backend).value) << "\n";
            return 0;
        }

        if (cmd_paths->parsed()) {
            lisa::DtmcModel m = load_chain(file, env_path, uniform_nondet);
            lisa::ReachQuery q = lisa::parse_query(query_text);
            auto paths = lisa::most_probable_paths(m, *q.target, count);
            for (const auto& p : paths) {
                std::cout << fmt_prob(p.prob) << " :";
                for (int s : p.states) std::cout << " " << s;
                std::cout << "\n";
            }
            return 0;
        }

        if (cmd_select->parsed()) {
            lisa::AgentProgram prog = load_agent(file);
            lisa::PredicateSet goal;
            for (const auto& g : goal_preds) goal.insert(lisa::predicate_from_string(g));
            lisa::CoursePlanTree tree =
                lisa::build_tree(prog.plans, prog.implications, prog.initial_beliefs,
                                 prog.initial_beliefs, tree_horizon);
            std::vector<lisa::Plan> desires;
            for (int pid : tree.events[static_cast<std::size_t>(tree.root)].plans)
                desires.push_back(tree.plans[static_cast<std::size_t>(pid)].plan);
            lisa::Backend backend = backend_name == "vi" ? lisa::Backend::value_iteration
                                                         : lisa::Backend::linear;
            lisa::RewardTable rewards = lisa::compute_rewards(desires, goal, tree, backend);
            for (const auto& [name, value] : rewards.values)
                std::cout << name << " " << fmt_prob(value) << "\n";
            auto chosen = lisa::select_plan(desires, rewards);
            std::cout << "selected: " << (chosen ? chosen->name : "(none)") << "\n";
            return 0;
        }

        if (cmd_export->parsed()) {
            lisa::DtmcModel m = load_chain(file, env_path, uniform_nondet);
            std::string text = lisa::export_prism(m);
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw lisa::Error("cannot write " + out_path);
                out << text;
            }
            return 0;
        }

        if (cmd_mc->parsed()) {
            lisa::DtmcModel m = load_chain(file, env_path, uniform_nondet);
            lisa::ReachQuery q = lisa::parse_query(query_text);
            lisa::McResult res = lisa::monte_carlo(m, q, episodes, seed);
            std::cout << fmt_prob(res.estimate) << " +- " << fmt_prob(res.half_width) << "\n";
            return 0;
        }
    } catch (const lisa::Error& e) {
        fail(e.what(), 2);
    } catch (const std::exception& e) {
        fail(e.what(), 2);
    }
    return 0;
}
