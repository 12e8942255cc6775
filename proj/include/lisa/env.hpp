#pragma once

// Environment model: a small Markov machine whose nodes emit percept-set
// distributions, plus per-action feedback overrides. The same structure
// drives both sampled simulation and exhaustive model construction.

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "agent.hpp"
#include "errors.hpp"
#include "predicate.hpp"

namespace lisa {

struct EnvNode {
    Distribution emission;                      // percept-set alternatives
    std::vector<std::pair<double, int>> next;   // machine step distribution
};

struct EnvModel {
    std::vector<EnvNode> nodes;                           // node 0 is initial
    std::map<std::string, Distribution> action_outcomes;  // feedback overrides
};

// Single silent node; an agent run against it sees no percepts and default
// action feedback.
inline EnvModel trivial_env() {
    EnvModel env;
    EnvNode node;
    node.emission.push_back({1.0, {}});
    node.next.emplace_back(1.0, 0);
    env.nodes.push_back(std::move(node));
    return env;
}

inline void validate_env(const EnvModel& env) {
    if (env.nodes.empty()) throw ModelError("environment has no nodes");
    for (std::size_t i = 0; i < env.nodes.size(); ++i) {
        const auto& node = env.nodes[i];
        check_distribution(node.emission, "env node " + std::to_string(i) + " emission");
        double sum = 0.0;
        for (const auto& [p, tgt] : node.next) {
            if (p < 0.0 || p > 1.0)
                throw ModelError("env node " + std::to_string(i) + " step probability out of [0,1]");
            if (tgt < 0 || tgt >= static_cast<int>(env.nodes.size()))
                throw ModelError("env node " + std::to_string(i) + " steps to unknown node " +
                                 std::to_string(tgt));
            sum += p;
        }
        if (node.next.empty() || sum < 1.0 - kDistributionTolerance ||
            sum > 1.0 + kDistributionTolerance)
            throw ModelError("env node " + std::to_string(i) + " step probabilities sum to " +
                             std::to_string(sum));
    }
    for (const auto& [action, dist] : env.action_outcomes)
        check_distribution(dist, "env outcomes for action " + action);
}

namespace env_detail {

inline nlohmann::ordered_json distribution_to_json(const Distribution& dist) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& alt : dist) {
        nlohmann::ordered_json preds = nlohmann::ordered_json::array();
        for (const auto& p : alt.preds) preds.push_back(p.str());
        arr.push_back({{"p", alt.prob}, {"preds", std::move(preds)}});
    }
    return arr;
}

inline Distribution distribution_from_json(const nlohmann::json& arr, const std::string& what) {
    if (!arr.is_array()) throw ModelError(what + ": expected an array of alternatives");
    Distribution dist;
    for (const auto& item : arr) {
        WeightedOutcome alt;
        alt.prob = item.at("p").get<double>();
        for (const auto& s : item.at("preds"))
            alt.preds.insert(predicate_from_string(s.get<std::string>()));
        dist.push_back(std::move(alt));
    }
    return dist;
}

} // namespace env_detail

inline std::string env_to_json(const EnvModel& env) {
    nlohmann::ordered_json root;
    root["nodes"] = nlohmann::ordered_json::array();
    for (const auto& node : env.nodes) {
        nlohmann::ordered_json n;
        n["emission"] = env_detail::distribution_to_json(node.emission);
        n["next"] = nlohmann::ordered_json::array();
        for (const auto& [p, tgt] : node.next) n["next"].push_back({{"p", p}, {"node", tgt}});
        root["nodes"].push_back(std::move(n));
    }
    root["actions"] = nlohmann::ordered_json::object();
    for (const auto& [action, dist] : env.action_outcomes)
        root["actions"][action] = env_detail::distribution_to_json(dist);
    return root.dump(2) + "\n";
}

inline EnvModel env_from_json(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("bad environment file: ") + e.what());
    }
    EnvModel env;
    try {
        for (const auto& n : root.at("nodes")) {
            EnvNode node;
            node.emission = env_detail::distribution_from_json(n.at("emission"), "emission");
            for (const auto& step : n.at("next"))
                node.next.emplace_back(step.at("p").get<double>(), step.at("node").get<int>());
            env.nodes.push_back(std::move(node));
        }
        if (root.contains("actions"))
            for (const auto& [action, dist] : root.at("actions").items())
                env.action_outcomes[action] =
                    env_detail::distribution_from_json(dist, "outcomes for " + action);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("bad environment file: ") + e.what());
    }
    validate_env(env);
    return env;
}

inline EnvModel load_env(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open environment file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return env_from_json(text);
}

// Sampling adaptor satisfying run_agent's environment interface. Holds the
// current machine node; emission and machine step use separate counter keys
// so sampling order cannot matter.
class EnvRunner {
public:
    explicit EnvRunner(const EnvModel& model) : model_(&model) { validate_env(model); }

    PredicateSet percepts(std::uint64_t cycle, const CounterSampler& sampler) {
        const EnvNode& node = model_->nodes[static_cast<std::size_t>(node_)];
        std::size_t pick = pick_alternative(node.emission, sampler.uniform(cycle, "env:emit"));
        PredicateSet out = node.emission[pick].preds;
        double u = sampler.uniform(cycle, "env:step");
        double acc = 0.0;
        int next = node.next.back().second;
        for (const auto& [p, tgt] : node.next) {
            acc += p;
            if (u < acc) { next = tgt; break; }
        }
        node_ = next;
        return out;
    }

    const std::map<std::string, Distribution>* feedback_overrides() const {
        return &model_->action_outcomes;
    }

    int node() const { return node_; }

private:
    const EnvModel* model_;
    int node_ = 0;
};

} // namespace lisa
