#pragma once

// Explicit-state discrete-time Markov chains. States carry an integer
// valuation plus a label set; transition rows are sparse and must sum to 1.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "predicate.hpp"

namespace lisa {

using Valuation = std::map<std::string, long long>;

struct Transition {
    int target = 0;
    double prob = 0.0;
};

struct DtmcState {
    Valuation vars;
    std::set<std::string> labels;
    std::vector<Transition> out;
};

struct DtmcModel {
    std::vector<DtmcState> states;
    int initial = 0;
    std::map<std::string, long long> constants;
    std::set<std::string> label_alphabet;    // declared labels; absent in a state means false
    std::vector<std::string> entry_actions;  // builder annotation, may be empty
    std::vector<int> deadlock_fixed;         // states that got the automatic self-loop

    int size() const { return static_cast<int>(states.size()); }

    // The action annotation for a state, empty when the builder did not
    // provide one.
    const std::string& entry_action(int state) const {
        static const std::string none;
        if (state < 0 || state >= static_cast<int>(entry_actions.size())) return none;
        return entry_actions[static_cast<std::size_t>(state)];
    }
};

// Checks the structural invariants: a valid initial index, row targets in
// range, probabilities in (0,1] summing to 1 within tolerance, and no two
// states sharing both valuation and labels. Zero-probability edges are not
// stored; builders drop them.
inline void validate_model(const DtmcModel& m) {
    if (m.states.empty()) throw ModelError("model has no states");
    if (m.initial < 0 || m.initial >= m.size())
        throw ModelError("initial state index " + std::to_string(m.initial) + " out of range");
    for (int i = 0; i < m.size(); ++i) {
        const auto& st = m.states[i];
        if (st.out.empty())
            throw ModelError("state " + std::to_string(i) + " has no outgoing transitions");
        double sum = 0.0;
        std::set<int> seen;
        for (const auto& tr : st.out) {
            if (tr.target < 0 || tr.target >= m.size())
                throw ModelError("state " + std::to_string(i) + " targets out-of-range state " +
                                 std::to_string(tr.target));
            if (!seen.insert(tr.target).second)
                throw ModelError("state " + std::to_string(i) + " has duplicate transitions to " +
                                 std::to_string(tr.target));
            if (tr.prob <= 0.0 || tr.prob > 1.0 + kDistributionTolerance)
                throw ModelError("state " + std::to_string(i) + " has probability outside (0,1]");
            sum += tr.prob;
        }
        if (sum < 1.0 - kDistributionTolerance || sum > 1.0 + kDistributionTolerance) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", sum);
            throw ModelError("state " + std::to_string(i) + " transition probabilities sum to " +
                             buf);
        }
    }
    std::map<std::pair<Valuation, std::set<std::string>>, int> keys;
    for (int i = 0; i < m.size(); ++i) {
        auto key = std::make_pair(m.states[i].vars, m.states[i].labels);
        auto [it, fresh] = keys.emplace(std::move(key), i);
        if (!fresh)
            throw ModelError("states " + std::to_string(it->second) + " and " + std::to_string(i) +
                             " share valuation and labels");
    }
}

// Header with size and initial index, then one line per state:
// `idx {var=val, ...} [label, ...] -> tgt:prob, ...`.
// Probabilities use enough digits to round-trip exactly.
inline std::string dump_model(const DtmcModel& m) {
    std::string out = "states=" + std::to_string(m.size()) +
                      " initial=" + std::to_string(m.initial) + "\n";
    char buf[64];
    for (int i = 0; i < m.size(); ++i) {
        const auto& st = m.states[i];
        out += std::to_string(i);
        out += " {";
        std::size_t k = 0;
        for (const auto& [name, val] : st.vars) {
            if (k++) out += ", ";
            out += name + "=" + std::to_string(val);
        }
        out += "} [";
        k = 0;
        for (const auto& lab : st.labels) {
            if (k++) out += ", ";
            out += lab;
        }
        out += "] ->";
        for (std::size_t j = 0; j < st.out.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", st.out[j].prob);
            out += (j ? ", " : " ") + std::to_string(st.out[j].target) + ":" + buf;
        }
        out += "\n";
    }
    return out;
}

// A concrete walk through the chain together with its probability.
struct TracePath {
    std::vector<int> states;
    double prob = 1.0;
};

} // namespace lisa
