#pragma once

// Reachability probabilities on a chain. Qualitative states first (graph
// search), then the quantitative remainder by Gauss-Seidel iteration with a
// dense elimination fallback, or by value iteration on request.

#include <cmath>
#include <cstdlib>
#include <deque>
#include <vector>

#include "dtmc.hpp"
#include "errors.hpp"
#include "query.hpp"

namespace lisa {

enum class Backend { linear, value_iteration };

struct Prob01 {
    std::vector<bool> prob0;   // target unreachable
    std::vector<bool> prob1;   // target reached almost surely
};

namespace solve_detail {

// Predecessor lists with target states made absorbing, which is the graph
// both qualitative passes need.
inline std::vector<std::vector<int>> predecessors(const DtmcModel& m,
                                                  const std::vector<bool>& target) {
    std::vector<std::vector<int>> pred(m.states.size());
    for (int i = 0; i < m.size(); ++i) {
        if (target[i]) continue;
        for (const auto& tr : m.states[i].out)
            if (tr.prob > 0.0) pred[tr.target].push_back(i);
    }
    return pred;
}

} // namespace solve_detail

// prob0: states that cannot reach the target at all. prob1: states from
// which the target is hit with probability one.
inline Prob01 prob01_precompute(const DtmcModel& m, const std::vector<bool>& target) {
    const int n = m.size();
    auto pred = solve_detail::predecessors(m, target);

    // Backward reachability from the target; the complement is prob0.
    std::vector<bool> can_reach(n, false);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i)
        if (target[i]) { can_reach[i] = true; queue.push_back(i); }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : pred[s])
            if (!can_reach[p]) { can_reach[p] = true; queue.push_back(p); }
    }

    Prob01 out;
    out.prob0.assign(n, false);
    for (int i = 0; i < n; ++i) out.prob0[i] = !can_reach[i];

    // prob1 = complement of backward reachability from prob0 in the same
    // graph: any state that can wander into a dead zone misses certainty.
    std::vector<bool> can_fail(n, false);
    for (int i = 0; i < n; ++i)
        if (out.prob0[i]) { can_fail[i] = true; queue.push_back(i); }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : pred[s])
            if (!can_fail[p]) { can_fail[p] = true; queue.push_back(p); }
    }
    out.prob1.assign(n, false);
    for (int i = 0; i < n; ++i) out.prob1[i] = !can_fail[i];
    return out;
}

namespace solve_detail {

constexpr double kResidualTolerance = 1e-10;
constexpr long kMaxSweeps = 1000000;
constexpr int kDenseLimit = 512;

// Direct solve of (I - A) x = b restricted to the undetermined states.
// Partial pivoting; the system is nonsingular once prob0/prob1 states are
// eliminated.
inline std::vector<double> dense_solve(const DtmcModel& m, const Prob01& q,
                                       const std::vector<int>& unknown) {
    const int k = static_cast<int>(unknown.size());
    std::vector<int> index(m.states.size(), -1);
    for (int i = 0; i < k; ++i) index[unknown[i]] = i;

    std::vector<double> a(static_cast<std::size_t>(k) * (k + 1), 0.0);
    auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * (k + 1) + c]; };
    for (int r = 0; r < k; ++r) {
        at(r, r) = 1.0;
        for (const auto& tr : m.states[unknown[r]].out) {
            if (q.prob1[tr.target]) at(r, k) += tr.prob;
            else if (!q.prob0[tr.target] && index[tr.target] >= 0)
                at(r, index[tr.target]) -= tr.prob;
        }
    }
    for (int col = 0; col < k; ++col) {
        int pivot = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        if (std::abs(at(pivot, col)) < 1e-300)
            throw ConvergenceError("singular reachability system");
        if (pivot != col)
            for (int c = col; c <= k; ++c) std::swap(at(pivot, c), at(col, c));
        for (int r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (int c = col; c <= k; ++c) at(r, c) -= f * at(col, c);
        }
    }
    std::vector<double> x(m.states.size(), 0.0);
    for (int r = 0; r < k; ++r) x[unknown[r]] = at(r, k) / at(r, r);
    return x;
}

} // namespace solve_detail

// Unbounded reachability per state by Gauss-Seidel sweeps over the
// undetermined block; falls back to dense elimination when the sweep cap
// is hit and the block is small enough, otherwise reports the failure.
inline std::vector<double> reach_prob_linear(const DtmcModel& m, const std::vector<bool>& target) {
    Prob01 q = prob01_precompute(m, target);
    const int n = m.size();
    std::vector<double> x(n, 0.0);
    std::vector<int> unknown;
    for (int i = 0; i < n; ++i) {
        if (q.prob1[i]) x[i] = 1.0;
        else if (!q.prob0[i]) unknown.push_back(i);
    }
    if (unknown.empty()) return x;

    for (long sweep = 0; sweep < solve_detail::kMaxSweeps; ++sweep) {
        double residual = 0.0;
        for (int s : unknown) {
            double v = 0.0;
            for (const auto& tr : m.states[s].out) v += tr.prob * x[tr.target];
            residual = std::max(residual, std::abs(v - x[s]));
            x[s] = v;
        }
        if (residual < solve_detail::kResidualTolerance) return x;
    }
    if (static_cast<int>(unknown.size()) <= solve_detail::kDenseLimit)
        return solve_detail::dense_solve(m, q, unknown);
    throw ConvergenceError("reachability iteration did not converge in " +
                           std::to_string(solve_detail::kMaxSweeps) + " sweeps (" +
                           std::to_string(unknown.size()) + " undetermined states)");
}

// Unbounded reachability by interval iteration. A lower sequence grows from
// the target indicator while an upper one shrinks from the avoidance
// indicator's complement; every state outside the pinned target and
// avoidance sets leaves that region almost surely, so both sequences meet
// at the unique fixpoint and eps bounds the true error, not just the last
// step. Kept as a cross-check backend for the linear route.
inline std::vector<double> reach_prob_vi(const DtmcModel& m, const std::vector<bool>& target,
                                         double eps = 1e-10) {
    if (eps <= 0.0) throw Error("value iteration needs eps > 0");
    Prob01 q = prob01_precompute(m, target);
    const int n = m.size();
    std::vector<double> lo(n, 0.0), hi(n, 0.0), lo_next(n, 0.0), hi_next(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (target[i]) lo[i] = 1.0;
        if (!q.prob0[i]) hi[i] = 1.0;
    }
    for (long iter = 0; iter < solve_detail::kMaxSweeps; ++iter) {
        double gap = 0.0;
        for (int s = 0; s < n; ++s) {
            if (target[s]) { lo_next[s] = 1.0; hi_next[s] = 1.0; continue; }
            if (q.prob0[s]) { lo_next[s] = 0.0; hi_next[s] = 0.0; continue; }
            double vl = 0.0, vh = 0.0;
            for (const auto& tr : m.states[s].out) {
                vl += tr.prob * lo[tr.target];
                vh += tr.prob * hi[tr.target];
            }
            lo_next[s] = vl;
            hi_next[s] = vh;
            gap = std::max(gap, vh - vl);
        }
        lo.swap(lo_next);
        hi.swap(hi_next);
        if (gap < eps) {
            for (int i = 0; i < n; ++i) {
                if (q.prob1[i]) lo[i] = 1.0;
                else if (!q.prob0[i]) lo[i] = 0.5 * (lo[i] + hi[i]);
            }
            return lo;
        }
    }
    throw ConvergenceError("value iteration did not converge in " +
                           std::to_string(solve_detail::kMaxSweeps) + " iterations");
}

// Probability of hitting the target within k steps, exactly: k backward
// applications of the transition matrix to the target indicator, holding
// target states absorbing.
inline std::vector<double> bounded_reach(const DtmcModel& m, const std::vector<bool>& target,
                                         long long k) {
    const int n = m.size();
    std::vector<double> x(n, 0.0), next(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (target[i]) x[i] = 1.0;
    for (long long step = 0; step < k; ++step) {
        for (int s = 0; s < n; ++s) {
            if (target[s]) { next[s] = 1.0; continue; }
            double v = 0.0;
            for (const auto& tr : m.states[s].out) v += tr.prob * x[tr.target];
            next[s] = v;
        }
        x.swap(next);
    }
    return x;
}

struct QueryResult {
    double value = 0.0;
    std::vector<double> per_state;
};

inline QueryResult check_query(const DtmcModel& m, const ReachQuery& q,
                               Backend backend = Backend::linear) {
    auto mask = target_mask(m, *q.target);
    QueryResult res;
    if (q.bound) res.per_state = bounded_reach(m, mask, *q.bound);
    else if (backend == Backend::value_iteration) res.per_state = reach_prob_vi(m, mask);
    else res.per_state = reach_prob_linear(m, mask);
    res.value = res.per_state[m.initial];
    return res;
}

} // namespace lisa
