#pragma once

// Most probable paths from the initial state into a target set. Best-first
// search over walks weighted by -ln(prob); target states are terminal, so
// every reported path ends at its first target hit.

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "dtmc.hpp"
#include "query.hpp"

namespace lisa {

namespace paths_detail {

struct Walk {
    double weight = 0.0;        // -ln of the path probability
    std::vector<int> states;

    // Ordering for the frontier: lighter first, then shorter, then by the
    // state sequence so results are deterministic under ties.
    bool operator>(const Walk& o) const {
        if (weight != o.weight) return weight > o.weight;
        if (states.size() != o.states.size()) return states.size() > o.states.size();
        return states > o.states;
    }
};

} // namespace paths_detail

// The k most probable target-hitting paths, best first. Paths with
// probability zero never appear. Cycles are allowed; the per-state pop cap
// of k keeps the search finite without losing any of the top k paths.
inline std::vector<TracePath> most_probable_paths(const DtmcModel& m,
                                                  const std::vector<bool>& target, int k) {
    std::vector<TracePath> out;
    if (k <= 0) return out;
    using paths_detail::Walk;
    std::priority_queue<Walk, std::vector<Walk>, std::greater<Walk>> frontier;
    std::vector<int> pops(m.states.size(), 0);

    frontier.push(Walk{0.0, {m.initial}});
    while (!frontier.empty() && static_cast<int>(out.size()) < k) {
        Walk w = frontier.top();
        frontier.pop();
        int last = w.states.back();
        if (pops[last] >= k) continue;
        ++pops[last];
        if (target[last]) {
            TracePath p;
            p.states = w.states;
            p.prob = std::exp(-w.weight);
            out.push_back(std::move(p));
            continue;
        }
        for (const auto& tr : m.states[last].out) {
            if (tr.prob <= 0.0) continue;
            Walk next;
            next.weight = w.weight - std::log(tr.prob);
            next.states = w.states;
            next.states.push_back(tr.target);
            frontier.push(std::move(next));
        }
    }
    return out;
}

inline std::vector<TracePath> most_probable_paths(const DtmcModel& m, const Expr& target, int k) {
    return most_probable_paths(m, target_mask(m, target), k);
}

} // namespace lisa
