#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "predicate.hpp"

namespace lisa {

enum class ActionKind {
    internal_add,     // adds its predicate argument as a mental note
    internal_remove,  // removes its predicate argument
    run_once,         // external, one feedback sample on the following cycle
    run_repeated      // external, feedback every cycle until stopped
};

inline bool is_external(ActionKind k) {
    return k == ActionKind::run_once || k == ActionKind::run_repeated;
}

inline const char* action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::internal_add: return "add";
        case ActionKind::internal_remove: return "remove";
        case ActionKind::run_once: return "runOnce";
        case ActionKind::run_repeated: return "runRepeated";
    }
    return "?";
}

struct ActionDef {
    std::string name;
    ActionKind kind = ActionKind::run_once;
    Distribution feedback;  // external kinds only; must sum to 1

    bool operator==(const ActionDef& o) const {
        return name == o.name && kind == o.kind && feedback == o.feedback;
    }
};

// One step of a plan body. `note(p)` and `forget(p)` are builtins that do not
// appear in the declared action list; `stop(a)` halts a running runRepeated
// action; everything else invokes a declared action by name, with a predicate
// argument when the action is an internal add/remove.
enum class BodyOp { add_note, del_note, stop_action, invoke };

struct ActionRef {
    BodyOp op = BodyOp::invoke;
    std::string action;                 // invoked/stopped action name; empty for note/forget
    std::optional<Predicate> target;    // predicate argument of internal ops

    std::string str() const {
        switch (op) {
            case BodyOp::add_note: return "note(" + target->str() + ")";
            case BodyOp::del_note: return "forget(" + target->str() + ")";
            case BodyOp::stop_action: return "stop(" + action + ")";
            case BodyOp::invoke:
                return target ? action + "(" + target->str() + ")" : action;
        }
        return "?";
    }

    bool operator==(const ActionRef& o) const {
        return op == o.op && action == o.action && target == o.target;
    }
};

// Logic implication rule: head holds whenever every body literal does.
// Negative literals are negation-as-absence against the pass snapshot.
struct LogicRule {
    Predicate head;
    std::vector<Literal> body;  // nonempty

    bool operator==(const LogicRule& o) const { return head == o.head && body == o.body; }
};

struct Plan {
    int id = 0;                     // declaration index
    std::string name;
    Predicate trigger;              // fires on the addition event of this predicate
    std::vector<Literal> context;   // conjunction; empty means "true"
    std::vector<ActionRef> body;    // nonempty

    bool operator==(const Plan& o) const {
        return id == o.id && name == o.name && trigger == o.trigger && context == o.context &&
               body == o.body;
    }
};

// Plan name -> outcome distribution, authored in the DSL via per-plan
// `outcomes { ... }` blocks. Drives the course-of-plans construction.
struct ImplicationTable {
    std::map<std::string, Distribution> by_plan;

    bool has(const std::string& plan) const { return by_plan.count(plan) != 0; }
    const Distribution& at(const std::string& plan) const { return by_plan.at(plan); }

    bool operator==(const ImplicationTable& o) const { return by_plan == o.by_plan; }
};

enum class IntentionStatus { ready, waiting_feedback, done, failed };

inline const char* intention_status_name(IntentionStatus s) {
    switch (s) {
        case IntentionStatus::ready: return "ready";
        case IntentionStatus::waiting_feedback: return "waiting_feedback";
        case IntentionStatus::done: return "done";
        case IntentionStatus::failed: return "failed";
    }
    return "?";
}

struct Intention {
    int plan_index = 0;          // index into AgentProgram::plans
    std::size_t pc = 0;          // completed body steps
    IntentionStatus status = IntentionStatus::ready;
};

// Complete agent definition. `predicates` is the declared alphabet: every
// predicate mentioned anywhere in the source (beliefs, percept declarations,
// rules, plan triggers/contexts, feedback and outcome sets, note/forget
// arguments, opstate declarations).
struct AgentProgram {
    PredicateSet predicates;                 // F
    PredicateSet initial_beliefs;            // B0, loaded as mental notes
    std::vector<ActionRef> initial_actions;  // A0, fired once on cycle 0
    std::vector<LogicRule> rules;            // L
    std::vector<Plan> plans;                 // Pi, declaration order
    std::vector<ActionDef> actions;          // A, declared actions only
    PredicateSet operational_states;         // X, subset of F
    PredicateSet percept_declarations;       // predicates the environment may emit
    ImplicationTable implications;

    const ActionDef* find_action(const std::string& name) const {
        for (const auto& a : actions)
            if (a.name == name) return &a;
        return nullptr;
    }

    const Plan* find_plan(const std::string& name) const {
        for (const auto& p : plans)
            if (p.name == name) return &p;
        return nullptr;
    }

    bool declared(const Predicate& p) const { return predicates.count(p) != 0; }

    bool operator==(const AgentProgram& o) const {
        return predicates == o.predicates && initial_beliefs == o.initial_beliefs &&
               initial_actions == o.initial_actions && rules == o.rules && plans == o.plans &&
               actions == o.actions && operational_states == o.operational_states &&
               percept_declarations == o.percept_declarations && implications == o.implications;
    }
};

} // namespace lisa
