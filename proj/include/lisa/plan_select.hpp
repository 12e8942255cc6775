#pragma once

// Plan valuation and selection. A course-of-plans tree alternates event
// nodes (a belief state plus the events that just arrived) and plan nodes
// (one applicable plan with its outcome distribution). Fixing one plan
// choice per event node collapses the tree into a chain; a plan's reward is
// the goal-reachability probability under the best such collapse.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dtmc.hpp"
#include "errors.hpp"
#include "paths.hpp"
#include "predicate.hpp"
#include "program.hpp"
#include "query.hpp"
#include "solve.hpp"

namespace lisa {

struct EventNode {
    PredicateSet beliefs;      // accumulated along the branch
    PredicateSet events;       // predicates that arrived on the inbound edge
    std::vector<int> plans;    // plan-node children, declaration order
    int depth = 0;             // plan layers above this node
};

struct PlanNode {
    Plan plan;
    std::vector<std::pair<double, int>> outcomes;  // probability, event-node child
};

struct CoursePlanTree {
    std::vector<EventNode> events;
    std::vector<PlanNode> plans;
    int root = 0;
};

// Event-node index -> plan-node index chosen there. Leaves need no entry.
using Policy = std::map<int, int>;

struct RewardTable {
    std::map<std::string, double> values;
    std::uint64_t cycle = 0;
};

namespace select_detail {

inline bool literal_holds(const Literal& lit, const PredicateSet& beliefs) {
    return (beliefs.count(lit.pred) != 0) == lit.positive;
}

inline bool context_holds(const std::vector<Literal>& ctx, const PredicateSet& beliefs) {
    for (const auto& lit : ctx)
        if (!literal_holds(lit, beliefs)) return false;
    return true;
}

inline bool covers(const PredicateSet& beliefs, const PredicateSet& goal) {
    for (const auto& p : goal)
        if (!beliefs.count(p)) return false;
    return true;
}

} // namespace select_detail

// First invoked action of the plan body, or the plan's name when the body
// only rewrites beliefs. Used to annotate chain states for recommendations.
inline std::string plan_entry_action(const Plan& plan) {
    for (const auto& step : plan.body)
        if (step.op == BodyOp::invoke) return step.action;
    return plan.name;
}

inline CoursePlanTree build_tree(const std::vector<Plan>& plans, const ImplicationTable& table,
                                 const PredicateSet& beliefs, const PredicateSet& root_events,
                                 int horizon) {
    if (horizon < 1) throw Error("tree horizon must be at least 1");
    CoursePlanTree tree;

    EventNode root;
    root.beliefs = beliefs;
    root.beliefs.insert(root_events.begin(), root_events.end());
    root.events = root_events;
    root.depth = 0;
    tree.events.push_back(std::move(root));

    std::vector<int> open{0};
    while (!open.empty()) {
        int e = open.back();
        open.pop_back();
        if (tree.events[e].depth >= horizon) continue;
        for (const auto& plan : plans) {
            if (!tree.events[e].events.count(plan.trigger)) continue;
            if (!select_detail::context_holds(plan.context, tree.events[e].beliefs)) continue;
            auto it = table.by_plan.find(plan.name);
            if (it == table.by_plan.end())
                throw CompletenessError("plan " + plan.name + " has no implication entry");
            PlanNode pn;
            pn.plan = plan;
            for (const auto& outcome : it->second) {
                EventNode child;
                child.beliefs = tree.events[e].beliefs;
                child.beliefs.insert(outcome.preds.begin(), outcome.preds.end());
                for (const auto& p : outcome.preds)
                    if (!tree.events[e].beliefs.count(p)) child.events.insert(p);
                child.depth = tree.events[e].depth + 1;
                int child_id = static_cast<int>(tree.events.size());
                tree.events.push_back(std::move(child));
                pn.outcomes.emplace_back(outcome.prob, child_id);
                open.push_back(child_id);
            }
            int plan_id = static_cast<int>(tree.plans.size());
            tree.plans.push_back(std::move(pn));
            tree.events[e].plans.push_back(plan_id);
        }
    }
    return tree;
}

namespace select_detail {

// Shared collapse. `choose` maps a reachable non-leaf event node to either
// one plan child (policy) or all of them with uniform mixing.
inline DtmcModel collapse_tree(const CoursePlanTree& tree, const Policy* policy) {
    DtmcModel m;
    for (const auto& en : tree.events)
        for (const auto& p : en.beliefs) m.label_alphabet.insert(label_name(p));

    std::map<int, int> state_of;  // event-node index -> model state
    std::vector<int> open;
    auto intern = [&](int node, const std::string& entry) {
        auto it = state_of.find(node);
        if (it != state_of.end()) return it->second;
        int id = m.size();
        state_of.emplace(node, id);
        DtmcState st;
        st.vars["node"] = node;
        for (const auto& p : tree.events[static_cast<std::size_t>(node)].beliefs)
            st.labels.insert(label_name(p));
        m.states.push_back(std::move(st));
        m.entry_actions.push_back(entry);
        open.push_back(node);
        return id;
    };
    m.initial = intern(tree.root, "");

    while (!open.empty()) {
        int node = open.back();
        open.pop_back();
        int sid = state_of.at(node);
        const EventNode& en = tree.events[static_cast<std::size_t>(node)];
        std::vector<int> chosen;
        if (en.plans.empty()) {
            // leaf: absorbing
        } else if (policy) {
            auto it = policy->find(node);
            if (it == policy->end())
                throw PolicyError("policy has no choice for event node " + std::to_string(node));
            if (std::find(en.plans.begin(), en.plans.end(), it->second) == en.plans.end())
                throw PolicyError("policy picks plan node " + std::to_string(it->second) +
                                  " which is not applicable at event node " + std::to_string(node));
            chosen.push_back(it->second);
        } else {
            chosen = en.plans;
        }

        if (chosen.empty()) {
            m.states[static_cast<std::size_t>(sid)].out.push_back({sid, 1.0});
            continue;
        }
        double mix = 1.0 / static_cast<double>(chosen.size());
        std::map<int, double> merged;  // successor state -> probability
        for (int pid : chosen) {
            const PlanNode& pn = tree.plans[static_cast<std::size_t>(pid)];
            std::string entry = plan_entry_action(pn.plan);
            for (const auto& [prob, child] : pn.outcomes) {
                if (prob <= 0.0) continue;
                merged[intern(child, entry)] += mix * prob;
            }
        }
        // intern above may grow m.states, so the row is fetched only now.
        auto& row = m.states[static_cast<std::size_t>(sid)].out;
        for (const auto& [tgt, prob] : merged) row.push_back({tgt, prob});
    }
    validate_model(m);
    return m;
}

} // namespace select_detail

inline DtmcModel tree_to_dtmc(const CoursePlanTree& tree, const Policy& policy) {
    return select_detail::collapse_tree(tree, &policy);
}

// No fixed choices: event nodes mix uniformly over their applicable plans.
inline DtmcModel tree_to_dtmc_uniform(const CoursePlanTree& tree) {
    return select_detail::collapse_tree(tree, nullptr);
}

namespace select_detail {

struct TreeValue {
    std::vector<double> value;  // per event node, optimal goal reachability
    Policy policy;              // argmax choice at every non-leaf event node
};

// Bottom-up valuation: expectation over outcome edges, max over plan
// choices, 1 as soon as the accumulated beliefs cover the goal. Children
// always carry larger indices than their parent, so one reverse sweep is a
// full evaluation. Ties pick the lowest plan-node index, which is
// declaration order at that event node.
inline TreeValue optimal_values(const CoursePlanTree& tree, const PredicateSet& goal) {
    TreeValue tv;
    tv.value.assign(tree.events.size(), 0.0);
    for (int e = static_cast<int>(tree.events.size()) - 1; e >= 0; --e) {
        const EventNode& en = tree.events[static_cast<std::size_t>(e)];
        double best = 0.0;
        int best_plan = -1;
        for (int pid : en.plans) {
            const PlanNode& pn = tree.plans[static_cast<std::size_t>(pid)];
            double v = 0.0;
            for (const auto& [prob, child] : pn.outcomes)
                v += prob * tv.value[static_cast<std::size_t>(child)];
            if (best_plan < 0 || v > best) {
                best = v;
                best_plan = pid;
            }
        }
        if (best_plan >= 0) tv.policy[e] = best_plan;
        if (covers(en.beliefs, goal)) tv.value[static_cast<std::size_t>(e)] = 1.0;
        else if (best_plan >= 0) tv.value[static_cast<std::size_t>(e)] = best;
    }
    return tv;
}

inline ExprPtr goal_expression(const PredicateSet& goal) {
    if (goal.empty()) throw Error("goal event set is empty");
    ExprPtr acc;
    for (const auto& p : goal) {
        auto atom = std::make_shared<Expr>();
        atom->kind = Expr::Kind::atom;
        atom->name = label_name(p);
        if (!acc) {
            acc = atom;
        } else {
            auto conj = std::make_shared<Expr>();
            conj->kind = Expr::Kind::and_;
            conj->lhs = acc;
            conj->rhs = atom;
            acc = conj;
        }
    }
    return acc;
}

} // namespace select_detail

// Reward of each desired plan: force that plan at the root, follow the
// optimal policy below, collapse, and ask the solver for goal reachability.
inline RewardTable compute_rewards(const std::vector<Plan>& desires, const PredicateSet& goal,
                                   const CoursePlanTree& tree,
                                   Backend backend = Backend::linear) {
    auto tv = select_detail::optimal_values(tree, goal);
    const auto& root_plans = tree.events[static_cast<std::size_t>(tree.root)].plans;

    ReachQuery q;
    q.target = select_detail::goal_expression(goal);
    q.text = "P=? [ F <goal> ]";

    RewardTable table;
    for (const auto& plan : desires) {
        int forced = -1;
        for (int pid : root_plans)
            if (tree.plans[static_cast<std::size_t>(pid)].plan.name == plan.name) {
                forced = pid;
                break;
            }
        if (forced < 0)
            throw CompletenessError("desired plan " + plan.name + " is not applicable at the root");
        Policy policy = tv.policy;
        policy[tree.root] = forced;
        DtmcModel m = tree_to_dtmc(tree, policy);
        for (const auto& p : goal) m.label_alphabet.insert(label_name(p));
        table.values[plan.name] = check_query(m, q, backend).value;
    }
    return table;
}

// Full recomputation against the current beliefs: plans at the root whose
// context no longer holds drop out, the rest are revalued. The previous
// table only supplies the cycle stamp.
inline RewardTable reward_update(const RewardTable& prev, const PredicateSet& beliefs,
                                 const CoursePlanTree& tree, const PredicateSet& goal,
                                 Backend backend = Backend::linear) {
    std::vector<Plan> desires;
    for (int pid : tree.events[static_cast<std::size_t>(tree.root)].plans) {
        const Plan& plan = tree.plans[static_cast<std::size_t>(pid)].plan;
        if (select_detail::context_holds(plan.context, beliefs)) desires.push_back(plan);
    }
    RewardTable next = compute_rewards(desires, goal, tree, backend);
    next.cycle = prev.cycle + 1;
    return next;
}

// Argmax by reward, declaration order breaking ties. Empty desire set means
// the caller idles this cycle.
inline std::optional<Plan> select_plan(const std::vector<Plan>& desires,
                                       const RewardTable& rewards) {
    std::optional<Plan> best;
    double best_value = 0.0;
    for (const auto& plan : desires) {
        auto it = rewards.values.find(plan.name);
        if (it == rewards.values.end())
            throw CompletenessError("no reward for desired plan " + plan.name);
        if (!best || it->second > best_value ||
            (it->second == best_value && plan.id < best->id)) {
            best = plan;
            best_value = it->second;
        }
    }
    return best;
}

// Forward-chaining sequence search over pre and post conditions. A sequence
// is feasible when each step's context holds in a belief state reachable by
// some chain of outcomes, and the last step has an outcome containing the
// whole goal. Triggers are ignored here; this is the symbolic view.
inline std::vector<std::vector<std::string>> enumerate_symbolic_plans(
    const std::vector<Plan>& plans, const ImplicationTable& table, const PredicateSet& beliefs,
    const PredicateSet& goal, int depth) {
    if (depth < 1) throw Error("search depth must be at least 1");
    std::set<std::vector<std::string>> found;
    std::vector<std::string> seq;

    auto outcomes_of = [&](const Plan& plan) -> const Distribution& {
        auto it = table.by_plan.find(plan.name);
        if (it == table.by_plan.end())
            throw CompletenessError("plan " + plan.name + " has no implication entry");
        return it->second;
    };

    std::function<void(const PredicateSet&)> walk = [&](const PredicateSet& state) {
        if (static_cast<int>(seq.size()) >= depth) return;
        for (const auto& plan : plans) {
            if (!select_detail::context_holds(plan.context, state)) continue;
            seq.push_back(plan.name);
            for (const auto& outcome : outcomes_of(plan)) {
                if (select_detail::covers(outcome.preds, goal)) found.insert(seq);
                PredicateSet next = state;
                next.insert(outcome.preds.begin(), outcome.preds.end());
                walk(next);
            }
            seq.pop_back();
        }
    };
    walk(beliefs);

    std::vector<std::vector<std::string>> out(found.begin(), found.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

// The failure query describes the bad outcome; its complement is the
// success set. The recommendation is the action entering the second state
// of the most probable success path. No path, or starting inside the
// success set, yields no recommendation.
inline std::optional<std::string> counterexample_select(const DtmcModel& m,
                                                        const ReachQuery& failure) {
    std::vector<bool> success(static_cast<std::size_t>(m.size()));
    for (int i = 0; i < m.size(); ++i) success[static_cast<std::size_t>(i)] = !state_satisfies(m, i, *failure.target);
    auto paths = most_probable_paths(m, success, 1);
    if (paths.empty() || paths[0].states.size() < 2) return std::nullopt;
    return m.entry_action(paths[0].states[1]);
}

struct EntryReward {
    std::string plan;
    int state = -1;     // first state satisfying the entry condition on the
                        // most probable path from the initial state
    double value = 0.0; // goal reachability from that state
};

// Valuation of alternatives directly on a chain: each plan is identified
// with the state where its first observable effect lands, and its reward is
// the goal reachability there.
inline std::vector<EntryReward> rewards_at_states(
    const DtmcModel& m, const Expr& goal,
    const std::vector<std::pair<std::string, ExprPtr>>& entries,
    Backend backend = Backend::linear) {
    ReachQuery q;
    auto goal_ptr = std::make_shared<Expr>(goal);
    q.target = goal_ptr;
    q.text = "P=? [ F <goal> ]";
    QueryResult res = check_query(m, q, backend);

    std::vector<EntryReward> out;
    for (const auto& [plan, expr] : entries) {
        auto paths = most_probable_paths(m, *expr, 1);
        if (paths.empty())
            throw QueryError("no reachable state matches the entry condition for " + plan);
        EntryReward er;
        er.plan = plan;
        er.state = paths[0].states.back();
        er.value = res.per_state[static_cast<std::size_t>(er.state)];
        out.push_back(std::move(er));
    }
    return out;
}

} // namespace lisa
