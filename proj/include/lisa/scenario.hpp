#pragma once

// Bundled two-area exploration scenario. A vehicle leaves base, explores
// Na blocks in area A and Nb in area B on a fuel budget of No units, with
// per-area bad-weather draws every decision round. The decision rules:
//
//   own weather good            explore one block, cost 1
//   own area done, other not    switch areas, cost 1
//   both areas bad              explore anyway, cost 2
//   own bad, other good         with probability ps explore at cost 2,
//                               otherwise head for the other area at cost 1
//   fuel exhausted away from base   abort
//   own bad and (other done or fuel = 1)   freeze in place
//
// Completing both areas notes mission_done and triggers a free return to
// base. The environment machine is an eight-node ring; node 7 emits the
// weather tick, so decisions land every eighth cycle, leaving the slower
// note/forget bookkeeping chains (at most six cycles) room to settle.

#include <string>
#include <vector>

#include "env.hpp"
#include "errors.hpp"
#include "program.hpp"

namespace lisa {

struct ScenarioConfig {
    int na = 5;       // blocks in area A
    int nb = 5;       // blocks in area B
    int no = 15;      // fuel units
    double p = 0.1;   // bad-weather probability, each area independently
    double q = 0.1;   // passage-failure probability (variant environment)
    double ps = 0.6;  // explore-anyway probability when only own area is bad
    double pi = 0.5;  // initial choice: probability of starting in area A
    std::vector<std::string> goal_priority{"mission_done", "at_base"};
};

struct ScenarioQuery {
    std::string name;
    std::string text;
};

struct Scenario {
    AgentProgram program;
    EnvModel env;          // weather-tick environment, appendix-faithful costs
    EnvModel env_passage;  // variant: area changes fail with probability q
    std::vector<ScenarioQuery> queries;
    PredicateSet tracked;  // predicates exposed as chain labels
    PredicateSet goal;     // mission completion event set
};

namespace scenario_detail {

inline Predicate pred(const std::string& name) { return Predicate{name}; }

inline Literal pos(const std::string& name) { return Literal{pred(name), true}; }
inline Literal neg(const std::string& name) { return Literal{pred(name), false}; }

inline ActionRef note(const std::string& name) {
    ActionRef r;
    r.op = BodyOp::add_note;
    r.target = pred(name);
    return r;
}

inline ActionRef forget(const std::string& name) {
    ActionRef r;
    r.op = BodyOp::del_note;
    r.target = pred(name);
    return r;
}

inline ActionRef invoke(const std::string& action) {
    ActionRef r;
    r.op = BodyOp::invoke;
    r.action = action;
    return r;
}

inline WeightedOutcome alt(double prob, std::vector<std::string> preds) {
    WeightedOutcome w;
    w.prob = prob;
    for (const auto& s : preds) w.preds.insert(pred(s));
    return w;
}

// Zero-probability alternatives are dropped so degenerate configs stay
// within the strictly-positive distribution invariant.
inline Distribution dist(std::vector<WeightedOutcome> alts) {
    Distribution d;
    for (auto& a : alts)
        if (a.prob > 0.0) d.push_back(std::move(a));
    return d;
}

} // namespace scenario_detail

inline Scenario asv_scenario(const ScenarioConfig& cfg = {}) {
    using namespace scenario_detail;
    if (cfg.na < 1 || cfg.nb < 1 || cfg.no < 1)
        throw Error("scenario needs na, nb, no >= 1");
    for (double v : {cfg.p, cfg.q, cfg.ps, cfg.pi})
        if (v < 0.0 || v > 1.0) throw Error("scenario probabilities must lie in [0, 1]");

    Scenario sc;
    AgentProgram& prog = sc.program;

    const std::string adone_full = "adone" + std::to_string(cfg.na);
    const std::string bdone_full = "bdone" + std::to_string(cfg.nb);

    // Declarations.
    for (const char* s : {"wtick", "bad_a", "bad_b"}) prog.percept_declarations.insert(pred(s));
    for (const char* s : {"at_base", "in_a", "in_b", "aborted", "stuck", "mission_done"})
        prog.operational_states.insert(pred(s));

    prog.initial_beliefs.insert(pred("at_base"));
    prog.initial_beliefs.insert(pred("fuel" + std::to_string(cfg.no)));
    prog.initial_beliefs.insert(pred("adone0"));
    prog.initial_beliefs.insert(pred("bdone0"));

    auto action = [&](const std::string& name, Distribution feedback) {
        ActionDef def;
        def.name = name;
        def.kind = ActionKind::run_once;
        def.feedback = std::move(feedback);
        prog.actions.push_back(std::move(def));
    };
    action("choose_area", dist({alt(cfg.pi, {"fb_chose_a"}), alt(1.0 - cfg.pi, {"fb_chose_b"})}));
    action("explore_a", dist({alt(1.0, {"fb_expl_a"})}));
    action("explore_b", dist({alt(1.0, {"fb_expl_b"})}));
    action("explore_a_hard", dist({alt(1.0, {"fb_hard_a"})}));
    action("explore_b_hard", dist({alt(1.0, {"fb_hard_b"})}));
    action("force_a", dist({alt(cfg.ps, {"fb_hard_a"}), alt(1.0 - cfg.ps, {"fb_div_b"})}));
    action("force_b", dist({alt(cfg.ps, {"fb_hard_b"}), alt(1.0 - cfg.ps, {"fb_stay"})}));
    action("goto_a", dist({alt(1.0, {"fb_at_a"})}));
    action("goto_b", dist({alt(1.0, {"fb_at_b"})}));
    action("goto_base", dist({alt(1.0, {"fb_at_base"})}));

    prog.initial_actions.push_back(invoke("choose_area"));

    auto plan = [&](const std::string& name, const std::string& trigger,
                    std::vector<Literal> context, std::vector<ActionRef> body) {
        Plan p;
        p.id = static_cast<int>(prog.plans.size());
        p.name = name;
        p.trigger = pred(trigger);
        p.context = std::move(context);
        p.body = std::move(body);
        prog.plans.push_back(std::move(p));
    };

    // Feedback handlers: position changes and cost notes.
    plan("on_chose_a", "fb_chose_a", {}, {forget("at_base"), note("in_a"), note("spend1")});
    plan("on_chose_b", "fb_chose_b", {}, {forget("at_base"), note("in_b"), note("spend1")});
    plan("on_expl_a", "fb_expl_a", {}, {note("inc_a"), note("spend1")});
    plan("on_expl_b", "fb_expl_b", {}, {note("inc_b"), note("spend1")});
    plan("on_hard_a", "fb_hard_a", {}, {note("inc_a"), note("spend2")});
    plan("on_hard_b", "fb_hard_b", {}, {note("inc_b"), note("spend2")});
    plan("on_div_b", "fb_div_b", {}, {forget("in_a"), note("in_b"), note("spend1")});
    plan("on_stay", "fb_stay", {}, {note("spend1")});
    plan("on_at_a", "fb_at_a", {}, {forget("in_b"), note("in_a"), note("spend1")});
    plan("on_at_b", "fb_at_b", {}, {forget("in_a"), note("in_b"), note("spend1")});
    plan("on_at_base", "fb_at_base", {}, {forget("in_a"), forget("in_b"), note("at_base")});

    // Progress counters. Exactly one adoneK / bdoneK / fuelK note exists at
    // any settled state; each counter plan shifts it and clears the pulse.
    auto tag = [](const std::string& stem, int k) { return stem + std::to_string(k); };
    for (int k = 0; k < cfg.na; ++k)
        plan("count_a" + std::to_string(k), "inc_a", {pos(tag("adone", k))},
             {forget(tag("adone", k)), note(tag("adone", k + 1)), forget("inc_a")});
    for (int k = 0; k < cfg.nb; ++k)
        plan("count_b" + std::to_string(k), "inc_b", {pos(tag("bdone", k))},
             {forget(tag("bdone", k)), note(tag("bdone", k + 1)), forget("inc_b")});
    for (int k = 1; k <= cfg.no; ++k)
        plan("burn1_" + std::to_string(k), "spend1", {pos(tag("fuel", k))},
             {forget(tag("fuel", k)), note(tag("fuel", k - 1)), forget("spend1")});
    for (int k = 2; k <= cfg.no; ++k)
        plan("burn2_" + std::to_string(k), "spend2", {pos(tag("fuel", k))},
             {forget(tag("fuel", k)), note(tag("fuel", k - 2)), forget("spend2")});

    // Decision plans, one per weather tick. Their contexts partition every
    // reachable in-area situation, so exactly one fires.
    std::vector<Literal> active{neg("stuck"), neg("aborted")};
    auto ctx = [&](std::vector<Literal> extra) {
        std::vector<Literal> all = active;
        all.insert(all.end(), extra.begin(), extra.end());
        return all;
    };
    plan("move_explore_a", "wtick",
         ctx({pos("in_a"), neg("bad_a"), neg(adone_full), neg("fuel0")}), {invoke("explore_a")});
    plan("move_next_a", "wtick",
         ctx({pos("in_a"), pos(adone_full), neg(bdone_full), neg("fuel0")}), {invoke("goto_b")});
    plan("move_hard_a", "wtick",
         ctx({pos("in_a"), pos("bad_a"), pos("bad_b"), neg(adone_full), neg(bdone_full),
              neg("fuel0"), neg("fuel1")}),
         {invoke("explore_a_hard")});
    plan("move_force_a", "wtick",
         ctx({pos("in_a"), pos("bad_a"), neg("bad_b"), neg(adone_full), neg(bdone_full),
              neg("fuel0"), neg("fuel1")}),
         {invoke("force_a")});
    plan("stuck_a_done", "wtick",
         ctx({pos("in_a"), pos("bad_a"), neg(adone_full), pos(bdone_full), neg("fuel0")}),
         {note("stuck")});
    plan("stuck_a_fuel", "wtick",
         ctx({pos("in_a"), pos("bad_a"), neg(adone_full), neg(bdone_full), pos("fuel1")}),
         {note("stuck")});

    plan("move_explore_b", "wtick",
         ctx({pos("in_b"), neg("bad_b"), neg(bdone_full), neg("fuel0")}), {invoke("explore_b")});
    plan("move_next_b", "wtick",
         ctx({pos("in_b"), pos(bdone_full), neg(adone_full), neg("fuel0")}), {invoke("goto_a")});
    plan("move_hard_b", "wtick",
         ctx({pos("in_b"), pos("bad_b"), pos("bad_a"), neg(bdone_full), neg(adone_full),
              neg("fuel0"), neg("fuel1")}),
         {invoke("explore_b_hard")});
    plan("move_force_b", "wtick",
         ctx({pos("in_b"), pos("bad_b"), neg("bad_a"), neg(bdone_full), neg(adone_full),
              neg("fuel0"), neg("fuel1")}),
         {invoke("force_b")});
    plan("stuck_b_done", "wtick",
         ctx({pos("in_b"), pos("bad_b"), neg(bdone_full), pos(adone_full), neg("fuel0")}),
         {note("stuck")});
    plan("stuck_b_fuel", "wtick",
         ctx({pos("in_b"), pos("bad_b"), neg(bdone_full), neg(adone_full), pos("fuel1")}),
         {note("stuck")});

    plan("abort_dry", "wtick", {neg("at_base"), neg("aborted"), pos("fuel0")},
         {note("aborted")});

    // Mission completion and the free trip home.
    plan("done_a", adone_full, {pos(bdone_full), neg("aborted")}, {note("mission_done")});
    plan("done_b", bdone_full, {pos(adone_full), neg("aborted")}, {note("mission_done")});
    plan("return_a", "mission_done", {pos("in_a"), neg("fuel0")}, {invoke("goto_base")});
    plan("return_b", "mission_done", {pos("in_b"), neg("fuel0")}, {invoke("goto_base")});

    // Alphabet: every predicate the program mentions anywhere.
    auto mention = [&](const Predicate& p) { prog.predicates.insert(p); };
    for (const auto& p : prog.percept_declarations) mention(p);
    for (const auto& p : prog.initial_beliefs) mention(p);
    for (const auto& p : prog.operational_states) mention(p);
    for (const auto& a : prog.actions)
        for (const auto& w : a.feedback)
            for (const auto& p : w.preds) mention(p);
    for (const auto& pl : prog.plans) {
        mention(pl.trigger);
        for (const auto& l : pl.context) mention(l.pred);
        for (const auto& ref : pl.body)
            if (ref.target) mention(*ref.target);
    }

    // Environment: seven quiet nodes, then the weather tick.
    const int period = 8;
    for (int k = 0; k < period; ++k) {
        EnvNode node;
        if (k == period - 1) {
            double pa = cfg.p, pb = cfg.p;
            node.emission = dist({alt(pa * pb, {"wtick", "bad_a", "bad_b"}),
                                  alt(pa * (1.0 - pb), {"wtick", "bad_a"}),
                                  alt((1.0 - pa) * pb, {"wtick", "bad_b"}),
                                  alt((1.0 - pa) * (1.0 - pb), {"wtick"})});
        } else {
            node.emission = dist({alt(1.0, {})});
        }
        node.next.emplace_back(1.0, (k + 1) % period);
        sc.env.nodes.push_back(std::move(node));
    }

    // Variant: passages can fail, burning the fuel without the move.
    sc.env_passage = sc.env;
    sc.env_passage.action_outcomes["goto_a"] =
        dist({alt(1.0 - cfg.q, {"fb_at_a"}), alt(cfg.q, {"fb_stay"})});
    sc.env_passage.action_outcomes["goto_b"] =
        dist({alt(1.0 - cfg.q, {"fb_at_b"}), alt(cfg.q, {"fb_stay"})});
    sc.env_passage.action_outcomes["goto_base"] =
        dist({alt(1.0 - cfg.q, {"fb_at_base"}), alt(cfg.q, {"fb_stay"})});

    sc.queries.push_back({"mission", "P=? [ F " + adone_full + " & " + bdone_full + " ]"});
    sc.queries.push_back({"abort", "P=? [ F aborted ]"});

    for (const char* s : {"wtick", "bad_a", "bad_b", "fb_chose_a", "fb_chose_b", "fb_hard_a",
                          "fb_hard_b", "fb_div_b", "fb_stay", "fb_at_a", "fb_at_b", "fb_at_base",
                          "at_base", "in_a", "in_b", "aborted", "stuck", "mission_done"})
        sc.tracked.insert(pred(s));
    sc.tracked.insert(pred(adone_full));
    sc.tracked.insert(pred(bdone_full));

    sc.goal.insert(pred(adone_full));
    sc.goal.insert(pred(bdone_full));
    return sc;
}

} // namespace lisa
