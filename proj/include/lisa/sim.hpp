#pragma once

// Seeded simulation and Monte Carlo estimation. Episodes derive their
// generator from (seed, episode index), so estimates reduce the same way
// regardless of evaluation order.

#include <cmath>
#include <cstdint>
#include <string>

#include "agent.hpp"
#include "builder.hpp"
#include "env.hpp"
#include "query.hpp"
#include "rng.hpp"
#include "solve.hpp"

namespace lisa {

inline Trace run_sim(const AgentProgram& prog, const EnvModel& env, std::uint64_t seed,
                     std::uint64_t horizon) {
    EnvRunner runner(env);
    return run_agent(prog, runner, horizon, seed);
}

struct McResult {
    double estimate = 0.0;
    double half_width = 0.0;  // 99% confidence, normal approximation
    long long n = 0;
};

namespace sim_detail {

inline McResult reduce(long long hits, long long n) {
    McResult res;
    res.n = n;
    res.estimate = static_cast<double>(hits) / static_cast<double>(n);
    res.half_width = 2.576 * std::sqrt(res.estimate * (1.0 - res.estimate) /
                                       static_cast<double>(n));
    return res;
}

} // namespace sim_detail

// Random walks on an explicit chain. Unbounded queries stop a walk early
// once it enters a state that can no longer reach the target; bounded
// queries simply run out the step budget.
inline McResult monte_carlo(const DtmcModel& m, const ReachQuery& q, long long n,
                            std::uint64_t seed) {
    if (n < 1) throw Error("episode count must be at least 1");
    auto mask = target_mask(m, *q.target);
    Prob01 p01 = prob01_precompute(m, mask);

    long long hits = 0;
    for (long long ep = 0; ep < n; ++ep) {
        CounterSampler rng{derive_stream(seed, static_cast<std::uint64_t>(ep))};
        int state = m.initial;
        std::uint64_t step = 0;
        for (;;) {
            if (mask[static_cast<std::size_t>(state)]) {
                ++hits;
                break;
            }
            if (p01.prob0[static_cast<std::size_t>(state)]) break;
            if (q.bound && step >= static_cast<std::uint64_t>(*q.bound)) break;
            double u = rng.uniform(step, "mc:step");
            const auto& out = m.states[static_cast<std::size_t>(state)].out;
            double acc = 0.0;
            int next = out.back().target;
            for (const auto& tr : out) {
                acc += tr.prob;
                if (u < acc) { next = tr.target; break; }
            }
            state = next;
            ++step;
        }
    }
    return sim_detail::reduce(hits, n);
}

// Program-level estimation: full agent runs against the environment, the
// query evaluated on the belief sets of the trace. An episode succeeds when
// some cycle at or before the horizon satisfies the target expression.
inline McResult monte_carlo(const AgentProgram& prog, const EnvModel& env, const ReachQuery& q,
                            long long n, std::uint64_t seed, std::uint64_t horizon = 200) {
    if (n < 1) throw Error("episode count must be at least 1");
    std::uint64_t limit = horizon;
    if (q.bound && static_cast<std::uint64_t>(*q.bound) < limit)
        limit = static_cast<std::uint64_t>(*q.bound);

    // The query sees a belief set the same way an agent-built chain exposes
    // one: present predicates as labels, absent ones as false.
    std::set<std::string> alphabet;
    for (const auto& p : prog.predicates) alphabet.insert(label_name(p));

    long long hits = 0;
    for (long long ep = 0; ep < n; ++ep) {
        CounterSampler rng{derive_stream(seed, static_cast<std::uint64_t>(ep))};
        EnvRunner runner(env);
        AgentState st;
        Trace trace;
        trace.push_back(init_agent(st, prog));
        bool hit = false;
        for (std::uint64_t c = 0; c <= limit && !hit; ++c) {
            if (c > 0) {
                PredicateSet percepts = runner.percepts(c, rng);
                trace.push_back(step_cycle(st, prog, percepts, runner.feedback_overrides(), rng));
            }
            DtmcState view;
            for (const auto& p : trace.back().beliefs) view.labels.insert(label_name(p));
            if (query_detail::eval_bool(*q.target, view, {}, alphabet)) hit = true;
        }
        if (hit) ++hits;
    }
    return sim_detail::reduce(hits, n);
}

} // namespace lisa
