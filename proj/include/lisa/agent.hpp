#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "program.hpp"
#include "rng.hpp"

namespace lisa {

enum class BeliefSource { percept, mental_note, action_feedback };

inline const char* belief_source_name(BeliefSource s) {
    switch (s) {
        case BeliefSource::percept: return "percept";
        case BeliefSource::mental_note: return "mental_note";
        case BeliefSource::action_feedback: return "action_feedback";
    }
    return "?";
}

// Current belief base. A predicate appears at most once; the source tag only
// matters for persistence across BUF (percepts and feedbacks are transient,
// mental notes stay until forgotten).
struct BeliefBase {
    std::map<Predicate, BeliefSource> entries;

    bool contains(const Predicate& p) const { return entries.count(p) != 0; }

    PredicateSet predicates() const {
        PredicateSet s;
        for (const auto& [p, src] : entries) s.insert(p);
        return s;
    }
};

struct EventSet {
    PredicateSet added;  // B_t \ B_{t-1}; deletions never raise events
};

// Belief update function. Percept entries become exactly `percepts`,
// feedback entries become exactly `feedbacks`, mental notes persist.
// On collision the mental note wins (that is what a note is for), then the
// percept; the tag never affects truth, only next-cycle persistence.
inline BeliefBase buf_update(const BeliefBase& base, const PredicateSet& percepts,
                             const PredicateSet& feedbacks, const PredicateSet& declared) {
    BeliefBase next;
    for (const auto& [p, src] : base.entries)
        if (src == BeliefSource::mental_note) next.entries.emplace(p, src);
    for (const auto& p : percepts) {
        if (!declared.count(p))
            throw DeclarationError("undeclared percept predicate: " + p.str());
        next.entries.emplace(p, BeliefSource::percept);
    }
    for (const auto& p : feedbacks) {
        if (!declared.count(p))
            throw DeclarationError("undeclared feedback predicate: " + p.str());
        next.entries.emplace(p, BeliefSource::action_feedback);
    }
    return next;
}

// Belief revision: only additions become events, source tags are ignored.
inline EventSet brf_events(const BeliefBase& prev, const BeliefBase& cur) {
    EventSet ev;
    for (const auto& [p, src] : cur.entries)
        if (!prev.contains(p)) ev.added.insert(p);
    return ev;
}

inline EventSet brf_events(const PredicateSet& prev, const BeliefBase& cur) {
    EventSet ev;
    for (const auto& [p, src] : cur.entries)
        if (!prev.count(p)) ev.added.insert(p);
    return ev;
}

inline bool literal_holds(const Literal& lit, const BeliefBase& base) {
    return base.contains(lit.pred) == lit.positive;
}

inline bool context_holds(const std::vector<Literal>& ctx, const BeliefBase& base) {
    for (const auto& lit : ctx)
        if (!literal_holds(lit, base)) return false;
    return true;
}

// Forward chaining to the least fixpoint. Both polarities are evaluated
// against the snapshot taken at the start of each pass, so rule order within
// a pass is irrelevant. Derived predicates enter as mental notes and are
// never retracted by the rule engine.
inline BeliefBase apply_rules(const BeliefBase& base, const std::vector<LogicRule>& rules) {
    BeliefBase out = base;
    std::size_t guard = rules.size() * 64 + out.entries.size() + 16;
    for (std::size_t pass = 0; pass <= guard; ++pass) {
        PredicateSet snapshot = out.predicates();
        bool changed = false;
        for (const auto& rule : rules) {
            bool fires = true;
            for (const auto& lit : rule.body) {
                if (snapshot.count(lit.pred) != static_cast<std::size_t>(lit.positive)) {
                    fires = false;
                    break;
                }
            }
            if (fires && !out.contains(rule.head)) {
                out.entries.emplace(rule.head, BeliefSource::mental_note);
                changed = true;
            }
        }
        if (!changed) return out;
    }
    throw Error("rule fixpoint failed to stabilise");  // unreachable: additions are monotone
}

// Plans whose trigger is among this cycle's events and whose context holds,
// in declaration order. Every one of them becomes an intention (no applicable
// plan selection function in this architecture).
inline std::vector<int> applicable_plans(const EventSet& events, const BeliefBase& base,
                                         const std::vector<Plan>& plans) {
    std::vector<int> out;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (events.added.count(plans[i].trigger) && context_holds(plans[i].context, base))
            out.push_back(static_cast<int>(i));
    }
    return out;
}

// A launched external action waiting for its feedback sample. `owner` indexes
// the intention that launched it, -1 for fire-and-forget initial actions.
struct FeedbackSlot {
    std::string action;
    int owner = -1;

    bool operator==(const FeedbackSlot& o) const { return action == o.action && owner == o.owner; }
};

struct AgentState {
    BeliefBase base;
    PredicateSet prev_buf;                      // post-BUF snapshot of the previous cycle
    std::vector<Intention> intentions;          // active intentions in creation order
    std::vector<FeedbackSlot> pending_once;     // runOnce launches, sampled next cycle
    std::vector<FeedbackSlot> running_repeated; // runRepeated launches, sampled every cycle
    std::uint64_t cycle = 0;                    // completed cycles
    std::vector<std::string> diagnostics;
};

struct CycleRecord {
    std::uint64_t cycle = 0;
    PredicateSet beliefs;   // post-BUF snapshot: E_t == beliefs_t \ beliefs_{t-1} for t >= 2
    PredicateSet events;
    std::vector<std::string> desires;        // applicable plan names, declaration order
    std::vector<std::string> actions_fired;
    PredicateSet operational_states;
};

using Trace = std::vector<CycleRecord>;

// Feedback slots in canonical order: pending runOnce first, then running
// repeated, each in launch order. Choice vectors align with this order.
inline std::vector<FeedbackSlot> feedback_slots(const AgentState& st) {
    std::vector<FeedbackSlot> slots = st.pending_once;
    slots.insert(slots.end(), st.running_repeated.begin(), st.running_repeated.end());
    return slots;
}

inline const Distribution& slot_distribution(const AgentProgram& prog,
                                             const std::map<std::string, Distribution>* overrides,
                                             const std::string& action) {
    if (overrides) {
        auto it = overrides->find(action);
        if (it != overrides->end()) return it->second;
    }
    const ActionDef* def = prog.find_action(action);
    if (!def || !is_external(def->kind))
        throw DeclarationError("no feedback distribution for action: " + action);
    return def->feedback;
}

inline std::size_t pick_alternative(const Distribution& dist, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i].prob;
        if (u < acc) return i;
    }
    return dist.size() - 1;
}

namespace detail {

struct PendingOps {
    struct InternalOp {
        bool add = true;
        Predicate pred;
    };
    std::vector<InternalOp> internals;   // ascending intention order
    std::vector<std::string> stops;
    std::vector<FeedbackSlot> launched_once;
    std::vector<FeedbackSlot> launched_rep;
};

// Runs one body step. Advances the program counter for internal steps;
// external steps park the intention until the feedback sample arrives.
inline void execute_ref(const ActionRef& ref, int owner, const AgentProgram& prog,
                        std::vector<Intention>& intentions, PendingOps& ops) {
    auto advance = [&](int idx) {
        if (idx < 0) return;
        Intention& it = intentions[static_cast<std::size_t>(idx)];
        it.pc += 1;
        if (it.pc == prog.plans[static_cast<std::size_t>(it.plan_index)].body.size())
            it.status = IntentionStatus::done;
        else
            it.status = IntentionStatus::ready;
    };
    switch (ref.op) {
        case BodyOp::add_note:
            ops.internals.push_back({true, *ref.target});
            advance(owner);
            return;
        case BodyOp::del_note:
            ops.internals.push_back({false, *ref.target});
            advance(owner);
            return;
        case BodyOp::stop_action:
            ops.stops.push_back(ref.action);
            advance(owner);
            return;
        case BodyOp::invoke: {
            const ActionDef* def = prog.find_action(ref.action);
            if (!def) throw DeclarationError("undeclared action: " + ref.action);
            switch (def->kind) {
                case ActionKind::internal_add:
                    if (!ref.target) throw DeclarationError(ref.action + " needs a predicate argument");
                    ops.internals.push_back({true, *ref.target});
                    advance(owner);
                    return;
                case ActionKind::internal_remove:
                    if (!ref.target) throw DeclarationError(ref.action + " needs a predicate argument");
                    ops.internals.push_back({false, *ref.target});
                    advance(owner);
                    return;
                case ActionKind::run_once:
                    ops.launched_once.push_back({ref.action, owner});
                    if (owner >= 0)
                        intentions[static_cast<std::size_t>(owner)].status =
                            IntentionStatus::waiting_feedback;
                    return;
                case ActionKind::run_repeated:
                    ops.launched_rep.push_back({ref.action, owner});
                    if (owner >= 0)
                        intentions[static_cast<std::size_t>(owner)].status =
                            IntentionStatus::waiting_feedback;
                    return;
            }
        }
    }
}

} // namespace detail

// One reasoning cycle with all randomness pre-resolved: `percepts` is the
// sampled emission and `choices[i]` picks the alternative of the i-th
// feedback slot (canonical order). The simulator and the model builder both
// drive this function, so sampled runs and the exact transition structure
// cannot drift apart.
inline CycleRecord step_cycle_resolved(AgentState& st, const AgentProgram& prog,
                                       const PredicateSet& percepts,
                                       const std::vector<std::size_t>& choices,
                                       const std::map<std::string, Distribution>* overrides) {
    const std::uint64_t now = st.cycle + 1;

    // Feedback resolution. runOnce owners complete their parked step here and
    // skip execution this cycle: one program-counter step per cycle.
    auto slots = feedback_slots(st);
    if (choices.size() != slots.size())
        throw Error("feedback choice vector does not match slot count");
    PredicateSet feedbacks;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const Distribution& dist = slot_distribution(prog, overrides, slots[i].action);
        if (choices[i] >= dist.size())
            throw Error("feedback choice out of range for action " + slots[i].action);
        const auto& alt = dist[choices[i]];
        feedbacks.insert(alt.preds.begin(), alt.preds.end());
    }
    std::vector<char> resumed(st.intentions.size(), 0);
    for (const auto& slot : st.pending_once) {
        if (slot.owner < 0) continue;
        Intention& it = st.intentions[static_cast<std::size_t>(slot.owner)];
        it.pc += 1;
        it.status = it.pc == prog.plans[static_cast<std::size_t>(it.plan_index)].body.size()
                        ? IntentionStatus::done
                        : IntentionStatus::ready;
        resumed[static_cast<std::size_t>(slot.owner)] = 1;
    }
    st.pending_once.clear();

    st.base = buf_update(st.base, percepts, feedbacks, prog.predicates);
    CycleRecord rec;
    rec.cycle = now;
    rec.beliefs = st.base.predicates();

    EventSet events = brf_events(st.prev_buf, st.base);
    st.prev_buf = rec.beliefs;
    rec.events = events.added;

    st.base = apply_rules(st.base, prog.rules);

    // Desires. Every applicable plan is recorded; a plan with an identical
    // intention still active is not re-instantiated.
    std::vector<int> desires = applicable_plans(events, st.base, prog.plans);
    for (int idx : desires) {
        rec.desires.push_back(prog.plans[static_cast<std::size_t>(idx)].name);
        bool active = false;
        for (const auto& it : st.intentions)
            if (it.plan_index == idx && (it.status == IntentionStatus::ready ||
                                         it.status == IntentionStatus::waiting_feedback)) {
                active = true;
                break;
            }
        if (!active) {
            st.intentions.push_back({idx, 0, IntentionStatus::ready});
            resumed.push_back(0);
        }
    }

    // Lockstep execution: every ready intention takes exactly one step.
    detail::PendingOps ops;
    for (std::size_t i = 0; i < st.intentions.size(); ++i) {
        if (st.intentions[i].status != IntentionStatus::ready || resumed[i]) continue;
        const Plan& plan = prog.plans[static_cast<std::size_t>(st.intentions[i].plan_index)];
        const ActionRef& step = plan.body[st.intentions[i].pc];
        rec.actions_fired.push_back(step.str());
        detail::execute_ref(step, static_cast<int>(i), prog, st.intentions, ops);
    }

    // Internal actions land at cycle end, ascending intention order, last
    // write wins. An add/remove collision on one predicate gets a diagnostic.
    std::map<Predicate, int> touched;  // +1 add, -1 remove of the last writer
    for (const auto& op : ops.internals) {
        auto it = touched.find(op.pred);
        if (it != touched.end() && it->second != (op.add ? 1 : -1))
            st.diagnostics.push_back("cycle " + std::to_string(now) +
                                     ": conflicting internal actions on " + op.pred.str() +
                                     ", last write wins");
        touched[op.pred] = op.add ? 1 : -1;
        if (op.add)
            st.base.entries[op.pred] = BeliefSource::mental_note;
        else
            st.base.entries.erase(op.pred);
    }

    st.pending_once.insert(st.pending_once.end(), ops.launched_once.begin(),
                           ops.launched_once.end());
    st.running_repeated.insert(st.running_repeated.end(), ops.launched_rep.begin(),
                               ops.launched_rep.end());

    for (const auto& stop_name : ops.stops) {
        auto it = st.running_repeated.begin();
        while (it != st.running_repeated.end()) {
            if (it->action == stop_name) {
                if (it->owner >= 0) {
                    Intention& owner = st.intentions[static_cast<std::size_t>(it->owner)];
                    owner.pc += 1;
                    owner.status =
                        owner.pc ==
                                prog.plans[static_cast<std::size_t>(owner.plan_index)].body.size()
                            ? IntentionStatus::done
                            : IntentionStatus::ready;
                }
                it = st.running_repeated.erase(it);
            } else {
                ++it;
            }
        }
    }

    // Drop completed intentions, remapping slot owners. A live slot can never
    // point at a completed intention, but belt and braces.
    std::vector<int> remap(st.intentions.size(), -1);
    std::vector<Intention> kept;
    for (std::size_t i = 0; i < st.intentions.size(); ++i) {
        if (st.intentions[i].status == IntentionStatus::ready ||
            st.intentions[i].status == IntentionStatus::waiting_feedback) {
            remap[i] = static_cast<int>(kept.size());
            kept.push_back(st.intentions[i]);
        }
    }
    st.intentions = std::move(kept);
    auto fix_owner = [&](FeedbackSlot& slot) {
        if (slot.owner >= 0) slot.owner = remap[static_cast<std::size_t>(slot.owner)];
    };
    for (auto& s : st.pending_once) fix_owner(s);
    for (auto& s : st.running_repeated) fix_owner(s);

    for (const auto& p : prog.operational_states)
        if (rec.beliefs.count(p)) rec.operational_states.insert(p);

    st.cycle = now;
    return rec;
}

// Cycle 0: B_0 is copied into the belief base as mental notes and A_0 fires.
// The previous-BUF snapshot stays empty, so everything loaded here raises its
// event on cycle 1.
inline CycleRecord init_agent(AgentState& st, const AgentProgram& prog) {
    st = AgentState{};
    for (const auto& p : prog.initial_beliefs) {
        if (!prog.declared(p))
            throw DeclarationError("undeclared initial belief: " + p.str());
        st.base.entries.emplace(p, BeliefSource::mental_note);
    }
    CycleRecord rec;
    rec.cycle = 0;
    rec.beliefs = st.base.predicates();
    for (const auto& p : prog.operational_states)
        if (rec.beliefs.count(p)) rec.operational_states.insert(p);

    detail::PendingOps ops;
    for (const auto& ref : prog.initial_actions) {
        rec.actions_fired.push_back(ref.str());
        detail::execute_ref(ref, -1, prog, st.intentions, ops);
    }
    for (const auto& op : ops.internals) {
        if (op.add)
            st.base.entries[op.pred] = BeliefSource::mental_note;
        else
            st.base.entries.erase(op.pred);
    }
    st.pending_once = ops.launched_once;
    st.running_repeated = ops.launched_rep;
    for (const auto& stop_name : ops.stops)
        st.running_repeated.erase(
            std::remove_if(st.running_repeated.begin(), st.running_repeated.end(),
                           [&](const FeedbackSlot& s) { return s.action == stop_name; }),
            st.running_repeated.end());
    st.cycle = 0;
    return rec;
}

// Stable per-slot sampling key: identical regardless of the order slots are
// visited in, so sampling order cannot influence a trace.
inline std::string slot_sample_key(const FeedbackSlot& slot, int occurrence) {
    return "fb:" + slot.action + ":" + std::to_string(slot.owner) + ":" +
           std::to_string(occurrence);
}

// Samples feedback alternative choices for the current slots.
inline std::vector<std::size_t> sample_choices(const AgentState& st, const AgentProgram& prog,
                                               const std::map<std::string, Distribution>* overrides,
                                               const CounterSampler& sampler,
                                               std::uint64_t cycle) {
    auto slots = feedback_slots(st);
    std::map<std::pair<std::string, int>, int> seen;
    std::vector<std::size_t> choices(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        int occ = seen[{slots[i].action, slots[i].owner}]++;
        const Distribution& dist = slot_distribution(prog, overrides, slots[i].action);
        choices[i] = pick_alternative(dist, sampler.uniform(cycle, slot_sample_key(slots[i], occ)));
    }
    return choices;
}

// Sampling flavour of the reasoning cycle.
inline CycleRecord step_cycle(AgentState& st, const AgentProgram& prog, const PredicateSet& percepts,
                              const std::map<std::string, Distribution>* overrides,
                              const CounterSampler& sampler) {
    auto choices = sample_choices(st, prog, overrides, sampler, st.cycle + 1);
    return step_cycle_resolved(st, prog, percepts, choices, overrides);
}

// Runs the agent against an environment for `horizon` cycles after the
// initialisation cycle. Env provides:
//   PredicateSet percepts(std::uint64_t cycle, const CounterSampler&)
//   const std::map<std::string, Distribution>* feedback_overrides() const
template <typename Env>
Trace run_agent(const AgentProgram& prog, Env& env, std::uint64_t horizon, std::uint64_t seed) {
    CounterSampler sampler{seed};
    AgentState st;
    Trace trace;
    trace.push_back(init_agent(st, prog));
    for (std::uint64_t c = 1; c <= horizon; ++c) {
        PredicateSet percepts = env.percepts(c, sampler);
        trace.push_back(step_cycle(st, prog, percepts, env.feedback_overrides(), sampler));
    }
    return trace;
}

} // namespace lisa
