#pragma once

// Exhaustive agent-to-chain construction. One model transition is one full
// reasoning cycle; the probabilistic inputs of a cycle (environment emission,
// environment machine step, one feedback alternative per open slot) are
// independent, so a transition's probability is the product over sources.
//
// A model state is the complete agent configuration at a cycle boundary
// (belief base with sources, previous BUF snapshot, intention list, open
// feedback slots) plus the environment node. Tracked predicates are exposed
// as state labels; a synthetic `_cfg` variable separates configurations that
// agree on every tracked predicate but differ internally.

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agent.hpp"
#include "dtmc.hpp"
#include "env.hpp"
#include "errors.hpp"

namespace lisa {

struct AgentConfig {
    AgentState agent;
    int env_node = 0;
};

// Canonical serialization of everything that influences future behaviour.
// The cycle counter and diagnostics log are deliberately absent.
inline std::string config_key(const AgentConfig& cfg) {
    std::string key = "b:";
    for (const auto& [p, src] : cfg.agent.base.entries) {
        key += p.str();
        key += '=';
        key += static_cast<char>('0' + static_cast<int>(src));
        key += ';';
    }
    key += "|pb:";
    for (const auto& p : cfg.agent.prev_buf) {
        key += p.str();
        key += ';';
    }
    key += "|i:";
    for (const auto& it : cfg.agent.intentions) {
        key += std::to_string(it.plan_index);
        key += ',';
        key += std::to_string(it.pc);
        key += ',';
        key += static_cast<char>('0' + static_cast<int>(it.status));
        key += ';';
    }
    key += "|po:";
    for (const auto& s : cfg.agent.pending_once) {
        key += s.action;
        key += ',';
        key += std::to_string(s.owner);
        key += ';';
    }
    key += "|rr:";
    for (const auto& s : cfg.agent.running_repeated) {
        key += s.action;
        key += ',';
        key += std::to_string(s.owner);
        key += ';';
    }
    key += "|e:" + std::to_string(cfg.env_node);
    return key;
}

struct AgentModelBuild {
    DtmcModel model;
    std::vector<AgentConfig> configs;        // per state, only when requested
    std::map<std::string, int> index_by_key;
};

namespace builder_detail {

// Every predicate a multi-alternative source can deliver must be tracked,
// otherwise the exposed valuation hides a probabilistic branch.
inline void check_source_tracked(const Distribution& dist, const std::set<Predicate>& tracked,
                                 const std::string& source) {
    if (dist.size() < 2) return;
    for (const auto& alt : dist)
        for (const auto& p : alt.preds)
            if (!tracked.count(p))
                throw ModelError("predicate " + p.str() + " receives probabilistic branching from " +
                                 source + " but is not tracked");
}

} // namespace builder_detail

inline AgentModelBuild build_dtmc_from_agent_full(const AgentProgram& prog, const EnvModel& env,
                                                  const PredicateSet& tracked,
                                                  bool keep_configs = true,
                                                  std::size_t state_cap = 1000000) {
    validate_env(env);
    for (const auto& p : tracked)
        if (!prog.declared(p))
            throw ModelError("tracked predicate " + p.str() + " is not in the agent's alphabet");
    for (std::size_t i = 0; i < env.nodes.size(); ++i)
        builder_detail::check_source_tracked(env.nodes[i].emission, tracked,
                                             "environment node " + std::to_string(i));

    AgentModelBuild out;
    DtmcModel& model = out.model;
    for (const auto& p : tracked) model.label_alphabet.insert(label_name(p));

    std::map<std::string, int> cfg_counter;  // tracked-valuation -> next _cfg
    std::set<std::string> checked_actions;
    std::deque<std::pair<int, AgentConfig>> frontier;

    auto intern = [&](AgentConfig cfg, const std::string& entry) {
        cfg.agent.cycle = 0;
        cfg.agent.diagnostics.clear();
        std::string key = config_key(cfg);
        auto it = out.index_by_key.find(key);
        if (it != out.index_by_key.end()) return it->second;
        if (model.states.size() >= state_cap)
            throw StateOverflowError("state-space cap " + std::to_string(state_cap) +
                                     " exceeded, frontier holds " +
                                     std::to_string(frontier.size()) + " states");
        int id = model.size();
        out.index_by_key.emplace(std::move(key), id);
        DtmcState st;
        std::string tracked_sig;
        for (const auto& p : tracked)
            if (cfg.agent.base.contains(p)) {
                st.labels.insert(label_name(p));
                tracked_sig += p.str();
                tracked_sig += ';';
            }
        st.vars["_cfg"] = cfg_counter[tracked_sig]++;
        model.states.push_back(std::move(st));
        model.entry_actions.push_back(entry);
        frontier.emplace_back(id, cfg);
        if (keep_configs) out.configs.push_back(std::move(cfg));
        return id;
    };

    AgentConfig init;
    init.env_node = 0;
    init_agent(init.agent, prog);
    model.initial = intern(std::move(init), "");

    while (!frontier.empty()) {
        auto [id, cfg] = std::move(frontier.front());
        frontier.pop_front();

        auto slots = feedback_slots(cfg.agent);
        std::vector<const Distribution*> slot_dists;
        for (const auto& slot : slots) {
            const Distribution& dist =
                slot_distribution(prog, &env.action_outcomes, slot.action);
            if (checked_actions.insert(slot.action).second)
                builder_detail::check_source_tracked(dist, tracked,
                                                     "action " + slot.action + " feedback");
            slot_dists.push_back(&dist);
        }
        const EnvNode& node = env.nodes[static_cast<std::size_t>(cfg.env_node)];

        std::map<std::string, std::pair<double, int>> successors;  // key -> (prob, state)
        std::vector<std::size_t> choices(slots.size(), 0);
        for (std::size_t e = 0; e < node.emission.size(); ++e) {
            if (node.emission[e].prob <= 0.0) continue;
            for (const auto& [step_p, next_node] : node.next) {
                if (step_p <= 0.0) continue;
                // Odometer over the per-slot alternatives.
                std::fill(choices.begin(), choices.end(), 0);
                for (;;) {
                    double prob = node.emission[e].prob * step_p;
                    for (std::size_t i = 0; i < choices.size(); ++i)
                        prob *= (*slot_dists[i])[choices[i]].prob;
                    if (prob > 0.0) {
                        AgentConfig next;
                        next.agent = cfg.agent;
                        next.env_node = next_node;
                        CycleRecord rec = step_cycle_resolved(next.agent, prog,
                                                              node.emission[e].preds, choices,
                                                              &env.action_outcomes);
                        std::string entry;
                        for (std::size_t a = 0; a < rec.actions_fired.size(); ++a) {
                            if (a) entry += "; ";
                            entry += rec.actions_fired[a];
                        }
                        next.agent.cycle = 0;
                        next.agent.diagnostics.clear();
                        std::string key = config_key(next);
                        auto it = successors.find(key);
                        if (it == successors.end()) {
                            int sid = intern(std::move(next), entry);
                            successors.emplace(std::move(key), std::make_pair(prob, sid));
                        } else {
                            it->second.first += prob;
                        }
                    }
                    // advance the odometer
                    std::size_t k = 0;
                    while (k < choices.size()) {
                        if (++choices[k] < slot_dists[k]->size()) break;
                        choices[k] = 0;
                        ++k;
                    }
                    if (choices.empty() || k == choices.size()) break;
                }
            }
        }

        auto& row = model.states[static_cast<std::size_t>(id)].out;
        for (const auto& [key, pr] : successors)
            if (pr.first > 0.0) row.push_back({pr.second, pr.first});
    }

    validate_model(model);
    return out;
}

inline DtmcModel build_dtmc_from_agent(const AgentProgram& prog, const EnvModel& env,
                                       const PredicateSet& tracked,
                                       std::size_t state_cap = 1000000) {
    return build_dtmc_from_agent_full(prog, env, tracked, false, state_cap).model;
}

} // namespace lisa
