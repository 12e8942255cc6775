#pragma once

// Reachability queries over a chain: `P=? [ F expr ]` and `P=? [ F<=k expr ]`.
// Expressions combine integer comparisons and boolean atoms with & | !.
// A bare identifier is true in a state when it appears as a label or as a
// nonzero variable.

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtmc.hpp"
#include "errors.hpp"

namespace lisa {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { num, ident, atom, cmp, and_, or_, not_ };
    Kind kind;
    long long num = 0;
    std::string name;       // ident, atom
    std::string op;         // cmp: = != < <= > >=
    ExprPtr lhs, rhs;
};

struct ReachQuery {
    ExprPtr target;
    std::optional<long long> bound;   // steps for F<=k
    std::string text;
};

namespace query_detail {

struct Lexer {
    const std::string& src;
    std::size_t i = 0;

    explicit Lexer(const std::string& s) : src(s) {}

    void skip_ws() {
        while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
    }
    bool eat(const std::string& s) {
        skip_ws();
        if (src.compare(i, s.size(), s) == 0) { i += s.size(); return true; }
        return false;
    }
    bool peek(const std::string& s) {
        skip_ws();
        return src.compare(i, s.size(), s) == 0;
    }
    std::optional<std::string> ident() {
        skip_ws();
        if (i >= src.size()) return std::nullopt;
        char c = src[i];
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
        std::size_t j = i;
        while (j < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
            ++j;
        std::string s = src.substr(i, j - i);
        i = j;
        return s;
    }
    std::optional<long long> number() {
        skip_ws();
        std::size_t j = i;
        if (j < src.size() && src[j] == '-') ++j;
        std::size_t digits = j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        if (j == digits) return std::nullopt;
        long long v = std::stoll(src.substr(i, j - i));
        i = j;
        return v;
    }
    bool done() {
        skip_ws();
        return i >= src.size();
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw QueryError(msg + " at offset " + std::to_string(i) + " in '" + src + "'");
    }
};

// Grammar:  or := and ('|' and)*   and := not ('&' not)*
//           not := '!' not | primary
//           primary := '(' or ')' | term (cmpop term)?
//           term := number | identifier
inline ExprPtr parse_or(Lexer& lx);

inline ExprPtr parse_term(Lexer& lx) {
    if (auto n = lx.number()) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::num;
        e->num = *n;
        return e;
    }
    if (auto id = lx.ident()) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::ident;
        e->name = *id;
        return e;
    }
    lx.fail("expected identifier or number");
}

inline ExprPtr parse_primary(Lexer& lx) {
    if (lx.eat("(")) {
        ExprPtr e = parse_or(lx);
        if (!lx.eat(")")) lx.fail("expected ')'");
        return e;
    }
    ExprPtr lhs = parse_term(lx);
    for (const char* op : {"!=", "<=", ">=", "=", "<", ">"}) {
        if (lx.eat(op)) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::cmp;
            e->op = op;
            e->lhs = lhs;
            e->rhs = parse_term(lx);
            return e;
        }
    }
    if (lhs->kind == Expr::Kind::num) lx.fail("a number is not a boolean expression");
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::atom;
    e->name = lhs->name;
    return e;
}

inline ExprPtr parse_not(Lexer& lx) {
    if (lx.eat("!")) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::not_;
        e->lhs = parse_not(lx);
        return e;
    }
    return parse_primary(lx);
}

inline ExprPtr parse_and(Lexer& lx) {
    ExprPtr lhs = parse_not(lx);
    while (lx.eat("&")) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::and_;
        e->lhs = lhs;
        e->rhs = parse_not(lx);
        lhs = e;
    }
    return lhs;
}

inline ExprPtr parse_or(Lexer& lx) {
    ExprPtr lhs = parse_and(lx);
    while (lx.eat("|")) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::or_;
        e->lhs = lhs;
        e->rhs = parse_and(lx);
        lhs = e;
    }
    return lhs;
}

inline long long eval_int(const Expr& e, const DtmcState& st,
                          const std::map<std::string, long long>& consts) {
    switch (e.kind) {
        case Expr::Kind::num: return e.num;
        case Expr::Kind::ident: {
            auto it = st.vars.find(e.name);
            if (it != st.vars.end()) return it->second;
            auto ct = consts.find(e.name);
            if (ct != consts.end()) return ct->second;
            throw QueryError("unknown identifier '" + e.name + "'");
        }
        default: throw QueryError("expected an integer term");
    }
}

inline bool eval_bool(const Expr& e, const DtmcState& st,
                      const std::map<std::string, long long>& consts,
                      const std::set<std::string>& label_alphabet) {
    switch (e.kind) {
        case Expr::Kind::atom: {
            if (st.labels.count(e.name)) return true;
            auto it = st.vars.find(e.name);
            if (it != st.vars.end()) return it->second != 0;
            if (label_alphabet.count(e.name)) return false;
            auto ct = consts.find(e.name);
            if (ct != consts.end()) return ct->second != 0;
            throw QueryError("unknown identifier '" + e.name + "'");
        }
        case Expr::Kind::cmp: {
            long long a = eval_int(*e.lhs, st, consts);
            long long b = eval_int(*e.rhs, st, consts);
            if (e.op == "=") return a == b;
            if (e.op == "!=") return a != b;
            if (e.op == "<") return a < b;
            if (e.op == "<=") return a <= b;
            if (e.op == ">") return a > b;
            return a >= b;
        }
        case Expr::Kind::and_:
            return eval_bool(*e.lhs, st, consts, label_alphabet) &&
                   eval_bool(*e.rhs, st, consts, label_alphabet);
        case Expr::Kind::or_:
            return eval_bool(*e.lhs, st, consts, label_alphabet) ||
                   eval_bool(*e.rhs, st, consts, label_alphabet);
        case Expr::Kind::not_: return !eval_bool(*e.lhs, st, consts, label_alphabet);
        default: throw QueryError("not a boolean expression");
    }
}

} // namespace query_detail

inline ExprPtr parse_expression(const std::string& text) {
    query_detail::Lexer lx(text);
    ExprPtr e = query_detail::parse_or(lx);
    if (!lx.done()) lx.fail("trailing input");
    return e;
}

// Accepts `P=? [ F expr ]` and `P=? [ F<=k expr ]`. Other temporal
// operators are out of scope and rejected with a pointed message.
inline ReachQuery parse_query(const std::string& text) {
    query_detail::Lexer lx(text);
    if (!lx.eat("P=?")) lx.fail("query must start with P=?");
    if (!lx.eat("[")) lx.fail("expected '['");
    lx.skip_ws();
    if (lx.i < text.size() && text[lx.i] == 'G' &&
        (lx.i + 1 >= text.size() || !is_ident_char(text[lx.i + 1])))
        lx.fail("only F (eventually) is supported");
    if (!(lx.i < text.size() && text[lx.i] == 'F' &&
          (lx.i + 1 >= text.size() || !is_ident_char(text[lx.i + 1]))))
        lx.fail("expected F");
    ++lx.i;
    ReachQuery q;
    q.text = text;
    if (lx.eat("<=")) {
        auto k = lx.number();
        if (!k) lx.fail("expected step bound after F<=");
        if (*k < 0) lx.fail("step bound must be nonnegative");
        q.bound = *k;
    }
    // Everything up to the matching ']' is the state expression.
    std::size_t close = text.rfind(']');
    if (close == std::string::npos || close < lx.i) lx.fail("expected ']'");
    q.target = parse_expression(text.substr(lx.i, close - lx.i));
    query_detail::Lexer tail(text);
    tail.i = close + 1;
    if (!tail.done()) tail.fail("trailing input after ']'");
    return q;
}

inline bool state_satisfies(const DtmcModel& m, int state, const Expr& e) {
    return query_detail::eval_bool(e, m.states[state], m.constants, m.label_alphabet);
}

// Per-state indicator of the expression.
inline std::vector<bool> target_mask(const DtmcModel& m, const Expr& target) {
    std::vector<bool> mask(m.states.size());
    for (int i = 0; i < m.size(); ++i) mask[i] = state_satisfies(m, i, target);
    return mask;
}

// All states where the expression holds.
inline std::vector<int> satisfying_states(const DtmcModel& m, const Expr& e) {
    std::vector<int> out;
    for (int i = 0; i < m.size(); ++i)
        if (state_satisfies(m, i, e)) out.push_back(i);
    return out;
}

} // namespace lisa
