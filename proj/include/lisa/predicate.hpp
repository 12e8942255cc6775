#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace lisa {

// Ground predicate: a lowercase name plus constant atom arguments. There are
// no variables anywhere in the system, so equality is plain structural
// equality and the total order below is usable as a container key.
struct Predicate {
    std::string name;
    std::vector<std::string> args;

    Predicate() = default;
    explicit Predicate(std::string n, std::vector<std::string> a = {})
        : name(std::move(n)), args(std::move(a)) {}

    bool operator==(const Predicate& o) const { return name == o.name && args == o.args; }
    bool operator!=(const Predicate& o) const { return !(*this == o); }
    bool operator<(const Predicate& o) const {
        if (name != o.name) return name < o.name;
        return args < o.args;
    }

    std::string str() const {
        if (args.empty()) return name;
        std::string s = name;
        s += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) s += ',';
            s += args[i];
        }
        s += ')';
        return s;
    }
};

using PredicateSet = std::set<Predicate>;

// Flat identifier form usable as a chain state label: `p(a,b)` -> `p_a_b`.
inline std::string label_name(const Predicate& p) {
    std::string s = p.name;
    for (const auto& a : p.args) {
        s += '_';
        s += a;
    }
    return s;
}

// Positive or negated predicate occurrence (rule bodies, plan contexts).
struct Literal {
    Predicate pred;
    bool positive = true;

    bool operator==(const Literal& o) const { return positive == o.positive && pred == o.pred; }
    std::string str() const { return positive ? pred.str() : "not " + pred.str(); }
};

inline bool is_ident_start(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Parses the canonical "name(a,b)" form used in config files and trace
// records. Throws on anything else; config files are not a place for
// recovery.
inline Predicate predicate_from_string(const std::string& text) {
    std::size_t i = 0;
    auto ident = [&]() {
        std::size_t start = i;
        if (i >= text.size() || !is_ident_start(text[i]))
            throw ModelError("bad predicate literal: '" + text + "'");
        while (i < text.size() && is_ident_char(text[i])) ++i;
        return text.substr(start, i - start);
    };
    Predicate p;
    p.name = ident();
    if (i < text.size() && text[i] == '(') {
        ++i;
        for (;;) {
            p.args.push_back(ident());
            if (i < text.size() && text[i] == ',') { ++i; continue; }
            break;
        }
        if (i >= text.size() || text[i] != ')')
            throw ModelError("bad predicate literal: '" + text + "'");
        ++i;
    }
    if (i != text.size()) throw ModelError("bad predicate literal: '" + text + "'");
    return p;
}

// One alternative of a discrete outcome distribution: probability plus the
// predicate set delivered when the alternative fires. Used for action
// feedback, implication-table outcomes and environment percept emission.
struct WeightedOutcome {
    double prob = 1.0;
    PredicateSet preds;

    bool operator==(const WeightedOutcome& o) const {
        return prob == o.prob && preds == o.preds;
    }
};

using Distribution = std::vector<WeightedOutcome>;

inline constexpr double kDistributionTolerance = 1e-9;

// Distributions must sum to one. `what` names the owner for the error text.
inline void check_distribution(const Distribution& d, const std::string& what) {
    double sum = 0.0;
    for (const auto& alt : d) {
        if (alt.prob < 0.0 || alt.prob > 1.0)
            throw ModelError(what + ": probability " + std::to_string(alt.prob) + " out of [0,1]");
        sum += alt.prob;
    }
    if (d.empty() || sum < 1.0 - kDistributionTolerance || sum > 1.0 + kDistributionTolerance)
        throw ModelError(what + ": probabilities sum to " + std::to_string(sum));
}

} // namespace lisa
