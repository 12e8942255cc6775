#pragma once

// Agent source language. One statement per declaration, '.' terminated,
// '//' comments. See docs/grammar.md for the EBNF.

#include <charconv>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "program.hpp"

namespace lisa {

struct SourceProgram {
    std::string text;
    AgentProgram program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

namespace dsl_detail {

enum class Tok {
    ident, number, dot, colon, semi, comma, amp, lbrace, rbrace,
    lparen, rparen, plus, rule_arrow, body_arrow, end, bad
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double num = 0.0;
    int line = 1;
    int col = 1;
};

inline std::vector<Token> lex(const std::string& src, std::vector<Diagnostic>& diags) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto bump = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') { ++line; col = 1; } else { ++col; }
        }
        i += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { bump(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') bump(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            t.kind = Tok::ident;
            t.text = src.substr(i, j - i);
            bump(j - i);
            out.push_back(t);
            continue;
        }
        if (c >= '0' && c <= '9') {
            std::size_t j = i;
            while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
            if (j < src.size() && src[j] == '.' && j + 1 < src.size() && src[j + 1] >= '0' &&
                src[j + 1] <= '9') {
                ++j;
                while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
            }
            t.kind = Tok::number;
            t.text = src.substr(i, j - i);
            t.num = std::strtod(t.text.c_str(), nullptr);
            bump(j - i);
            out.push_back(t);
            continue;
        }
        switch (c) {
            case '.': t.kind = Tok::dot; break;
            case ';': t.kind = Tok::semi; break;
            case ',': t.kind = Tok::comma; break;
            case '&': t.kind = Tok::amp; break;
            case '{': t.kind = Tok::lbrace; break;
            case '}': t.kind = Tok::rbrace; break;
            case '(': t.kind = Tok::lparen; break;
            case ')': t.kind = Tok::rparen; break;
            case '+': t.kind = Tok::plus; break;
            case ':':
                if (i + 1 < src.size() && src[i + 1] == '-') { t.kind = Tok::rule_arrow; bump(2); out.push_back(t); continue; }
                t.kind = Tok::colon;
                break;
            case '<':
                if (i + 1 < src.size() && src[i + 1] == '-') { t.kind = Tok::body_arrow; bump(2); out.push_back(t); continue; }
                t.kind = Tok::bad;
                break;
            default: t.kind = Tok::bad; break;
        }
        if (t.kind == Tok::bad) {
            diags.push_back({Diagnostic::Severity::error, t.line, t.col,
                             std::string("unexpected character '") + c + "'"});
            bump(1);
            continue;
        }
        bump(1);
        out.push_back(t);
    }
    Token eof;
    eof.kind = Tok::end;
    eof.line = line;
    eof.col = col;
    out.push_back(eof);
    return out;
}

inline const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words = {
        "percept", "belief", "opstate", "action", "init", "rule", "plan",
        "feedback", "outcomes", "not", "true", "note", "forget", "stop"};
    return words;
}

struct Parser {
    std::vector<Token> toks;
    std::size_t pos = 0;
    std::vector<Diagnostic>& diags;
    AgentProgram& prog;

    PredicateSet mentions;
    std::map<std::string, std::pair<int, int>> plan_pos;    // name -> decl position
    std::vector<std::pair<int, int>> init_pos;

    Parser(std::vector<Token> t, std::vector<Diagnostic>& d, AgentProgram& p)
        : toks(std::move(t)), diags(d), prog(p) {}

    const Token& cur() const { return toks[pos]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return at(Tok::ident) && cur().text == kw; }
    Token take() { return toks[pos == toks.size() - 1 ? pos : pos++]; }

    void error_here(const std::string& msg) {
        diags.push_back({Diagnostic::Severity::error, cur().line, cur().col, msg});
    }

    // Skips to just past the next '.', resynchronising after a bad statement.
    void recover() {
        while (!at(Tok::end) && !at(Tok::dot)) ++pos;
        if (at(Tok::dot)) ++pos;
    }

    bool expect(Tok k, const char* what) {
        if (at(k)) { ++pos; return true; }
        error_here(std::string("expected ") + what);
        return false;
    }

    std::optional<std::string> ident(const char* what, bool allow_reserved = false) {
        if (!at(Tok::ident)) {
            error_here(std::string("expected ") + what);
            return std::nullopt;
        }
        if (!allow_reserved && reserved_words().count(cur().text)) {
            error_here("'" + cur().text + "' is a reserved word");
            return std::nullopt;
        }
        return take().text;
    }

    std::optional<Predicate> predicate() {
        auto name = ident("predicate name");
        if (!name) return std::nullopt;
        Predicate p(*name);
        if (at(Tok::lparen)) {
            ++pos;
            for (;;) {
                auto a = ident("atom");
                if (!a) return std::nullopt;
                p.args.push_back(*a);
                if (at(Tok::comma)) { ++pos; continue; }
                break;
            }
            if (!expect(Tok::rparen, "')'")) return std::nullopt;
        }
        mentions.insert(p);
        return p;
    }

    std::optional<Literal> literal() {
        Literal lit;
        if (at_kw("not")) { ++pos; lit.positive = false; }
        auto p = predicate();
        if (!p) return std::nullopt;
        lit.pred = *p;
        return lit;
    }

    // `<num> : pred, pred` with an optional empty predicate list.
    std::optional<WeightedOutcome> weighted_outcome() {
        if (!at(Tok::number)) {
            error_here("expected probability");
            return std::nullopt;
        }
        WeightedOutcome alt;
        alt.prob = take().num;
        if (!expect(Tok::colon, "':'")) return std::nullopt;
        while (at(Tok::ident)) {
            auto p = predicate();
            if (!p) return std::nullopt;
            alt.preds.insert(*p);
            if (at(Tok::comma)) { ++pos; continue; }
            break;
        }
        return alt;
    }

    std::optional<Distribution> outcome_block(const char* opener) {
        if (!expect(Tok::lbrace, "'{'")) return std::nullopt;
        Distribution dist;
        for (;;) {
            auto alt = weighted_outcome();
            if (!alt) return std::nullopt;
            dist.push_back(std::move(*alt));
            if (at(Tok::semi)) {
                ++pos;
                if (at(Tok::rbrace)) break;  // trailing ';' tolerated
                continue;
            }
            break;
        }
        if (!expect(Tok::rbrace, "'}'")) return std::nullopt;
        double sum = 0.0;
        for (const auto& a : dist) {
            if (a.prob < 0.0 || a.prob > 1.0) {
                error_here(std::string(opener) + " probability out of [0,1]");
                return std::nullopt;
            }
            sum += a.prob;
        }
        if (sum < 1.0 - kDistributionTolerance || sum > 1.0 + kDistributionTolerance) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%g", sum);
            error_here(std::string(opener) + " probabilities sum to " + buf);
            return std::nullopt;
        }
        return dist;
    }

    // note(p) | forget(p) | stop(a) | action | action(p)
    std::optional<ActionRef> body_item() {
        if (!at(Tok::ident)) {
            error_here("expected action");
            return std::nullopt;
        }
        ActionRef ref;
        std::string name = cur().text;
        if (name == "note" || name == "forget" || name == "stop") {
            ++pos;
            ref.op = name == "note" ? BodyOp::add_note
                   : name == "forget" ? BodyOp::del_note
                                      : BodyOp::stop_action;
            if (!expect(Tok::lparen, "'('")) return std::nullopt;
            if (ref.op == BodyOp::stop_action) {
                auto a = ident("action name");
                if (!a) return std::nullopt;
                ref.action = *a;
            } else {
                auto p = predicate();
                if (!p) return std::nullopt;
                ref.target = *p;
            }
            if (!expect(Tok::rparen, "')'")) return std::nullopt;
            return ref;
        }
        auto a = ident("action");
        if (!a) return std::nullopt;
        ref.op = BodyOp::invoke;
        ref.action = *a;
        if (at(Tok::lparen)) {
            ++pos;
            auto p = predicate();
            if (!p) return std::nullopt;
            ref.target = *p;
            if (!expect(Tok::rparen, "')'")) return std::nullopt;
        }
        return ref;
    }

    void statement() {
        if (at_kw("percept") || at_kw("belief") || at_kw("opstate")) {
            std::string kw = take().text;
            auto p = predicate();
            if (!p || !expect(Tok::dot, "'.'")) return recover();
            if (kw == "percept") prog.percept_declarations.insert(*p);
            else if (kw == "belief") prog.initial_beliefs.insert(*p);
            else prog.operational_states.insert(*p);
            return;
        }
        if (at_kw("action")) {
            Token kwTok = take();
            auto name = ident("action name");
            if (!name) return recover();
            ActionDef def;
            def.name = *name;
            if (at_kw("add")) { ++pos; def.kind = ActionKind::internal_add; }
            else if (at_kw("remove")) { ++pos; def.kind = ActionKind::internal_remove; }
            else if (at_kw("runOnce")) { ++pos; def.kind = ActionKind::run_once; }
            else if (at_kw("runRepeated")) { ++pos; def.kind = ActionKind::run_repeated; }
            else { error_here("expected action kind (add, remove, runOnce, runRepeated)"); return recover(); }
            if (at_kw("feedback")) {
                ++pos;
                if (!is_external(def.kind)) {
                    error_here("internal actions take no feedback block");
                    return recover();
                }
                auto dist = outcome_block("feedback");
                if (!dist) return recover();
                def.feedback = std::move(*dist);
            } else if (is_external(def.kind)) {
                error_here("external action '" + def.name + "' needs a feedback block");
                return recover();
            }
            if (!expect(Tok::dot, "'.'")) return recover();
            if (prog.find_action(def.name)) {
                diags.push_back({Diagnostic::Severity::error, kwTok.line, kwTok.col,
                                 "duplicate action '" + def.name + "'"});
                return;
            }
            prog.actions.push_back(std::move(def));
            return;
        }
        if (at_kw("init")) {
            Token kwTok = take();
            auto item = body_item();
            if (!item || !expect(Tok::dot, "'.'")) return recover();
            prog.initial_actions.push_back(std::move(*item));
            init_pos.emplace_back(kwTok.line, kwTok.col);
            return;
        }
        if (at_kw("rule")) {
            ++pos;
            LogicRule rule;
            auto head = predicate();
            if (!head || !expect(Tok::rule_arrow, "':-'")) return recover();
            rule.head = *head;
            for (;;) {
                auto lit = literal();
                if (!lit) return recover();
                rule.body.push_back(*lit);
                if (at(Tok::amp)) { ++pos; continue; }
                break;
            }
            if (!expect(Tok::dot, "'.'")) return recover();
            prog.rules.push_back(std::move(rule));
            return;
        }
        if (at_kw("plan")) {
            Token kwTok = take();
            Plan plan;
            auto name = ident("plan name");
            if (!name || !expect(Tok::colon, "':'") || !expect(Tok::plus, "'+'")) return recover();
            plan.name = *name;
            auto trig = predicate();
            if (!trig || !expect(Tok::colon, "':'")) return recover();
            plan.trigger = *trig;
            if (at_kw("true")) {
                ++pos;
            } else {
                for (;;) {
                    auto lit = literal();
                    if (!lit) return recover();
                    plan.context.push_back(*lit);
                    if (at(Tok::amp)) { ++pos; continue; }
                    break;
                }
            }
            if (!expect(Tok::body_arrow, "'<-'")) return recover();
            for (;;) {
                auto item = body_item();
                if (!item) return recover();
                plan.body.push_back(std::move(*item));
                if (at(Tok::semi)) { ++pos; continue; }
                break;
            }
            std::optional<Distribution> outcomes;
            if (at_kw("outcomes")) {
                ++pos;
                outcomes = outcome_block("outcomes");
                if (!outcomes) return recover();
            }
            if (!expect(Tok::dot, "'.'")) return recover();
            if (prog.find_plan(plan.name)) {
                diags.push_back({Diagnostic::Severity::error, kwTok.line, kwTok.col,
                                 "duplicate plan '" + plan.name + "'"});
                return;
            }
            plan.id = static_cast<int>(prog.plans.size());
            plan_pos[plan.name] = {kwTok.line, kwTok.col};
            if (outcomes) prog.implications.by_plan[plan.name] = std::move(*outcomes);
            prog.plans.push_back(std::move(plan));
            return;
        }
        error_here("expected a statement (percept, belief, opstate, action, init, rule, plan)");
        recover();
    }

    void run() {
        while (!at(Tok::end)) {
            std::size_t before = pos;
            statement();
            if (pos == before) ++pos;  // totality: never stall
        }
    }

    void err_at(std::pair<int, int> where, const std::string& msg) {
        diags.push_back({Diagnostic::Severity::error, where.first, where.second, msg});
    }

    // Whole-file checks that need the complete declaration table.
    void resolve() {
        // The alphabet F is every mentioned predicate.
        prog.predicates = mentions;
        for (const auto& a : prog.actions)
            for (const auto& alt : a.feedback) mentions_into(alt.preds);
        prog.predicates = mentions;

        auto check_ref = [&](const ActionRef& ref, std::pair<int, int> where) {
            if (ref.op == BodyOp::stop_action) {
                const ActionDef* def = prog.find_action(ref.action);
                if (!def || def->kind != ActionKind::run_repeated)
                    err_at(where, "stop target '" + ref.action + "' is not a declared runRepeated action");
                return;
            }
            if (ref.op != BodyOp::invoke) return;
            const ActionDef* def = prog.find_action(ref.action);
            if (!def) {
                err_at(where, "undeclared action '" + ref.action + "'");
                return;
            }
            if (is_external(def->kind) && ref.target)
                err_at(where, "external action '" + ref.action + "' takes no argument");
            if (!is_external(def->kind) && !ref.target)
                err_at(where, "internal action '" + ref.action + "' needs a predicate argument");
        };
        for (const auto& plan : prog.plans)
            for (const auto& step : plan.body) check_ref(step, plan_pos[plan.name]);
        for (std::size_t i = 0; i < prog.initial_actions.size(); ++i)
            check_ref(prog.initial_actions[i], init_pos[i]);

        for (const auto& rule : prog.rules)
            if (prog.find_action(rule.head.name))
                diags.push_back({Diagnostic::Severity::error, 0, 0,
                                 "rule head '" + rule.head.str() + "' names an action"});
        for (const auto& b : prog.initial_beliefs)
            if (prog.find_action(b.name))
                diags.push_back({Diagnostic::Severity::error, 0, 0,
                                 "initial belief '" + b.str() + "' collides with an action name"});
    }

    void mentions_into(const PredicateSet& ps) {
        for (const auto& p : ps) mentions.insert(p);
    }
};

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace dsl_detail

inline SourceProgram parse_program(const std::string& text) {
    SourceProgram sp;
    sp.text = text;
    auto tokens = dsl_detail::lex(text, sp.diagnostics);
    dsl_detail::Parser parser(std::move(tokens), sp.diagnostics, sp.program);
    parser.run();
    parser.resolve();
    return sp;
}

// Static lint pass: warnings only. A program that uses every action, can
// raise every plan trigger and has satisfiable contexts comes back empty.
inline std::vector<Diagnostic> validate(const AgentProgram& prog) {
    std::vector<Diagnostic> out;

    // Event sources: feedback sets, declared percepts, rule heads, internal
    // adds (plan bodies and initial actions), initial beliefs, implication
    // outcomes.
    PredicateSet raisable = prog.initial_beliefs;
    for (const auto& p : prog.percept_declarations) raisable.insert(p);
    for (const auto& a : prog.actions)
        for (const auto& alt : a.feedback) raisable.insert(alt.preds.begin(), alt.preds.end());
    for (const auto& r : prog.rules) raisable.insert(r.head);
    auto scan_ref = [&](const ActionRef& ref) {
        if (ref.op == BodyOp::add_note && ref.target) raisable.insert(*ref.target);
        if (ref.op == BodyOp::invoke && ref.target) {
            const ActionDef* def = prog.find_action(ref.action);
            if (def && def->kind == ActionKind::internal_add) raisable.insert(*ref.target);
        }
    };
    for (const auto& plan : prog.plans)
        for (const auto& step : plan.body) scan_ref(step);
    for (const auto& ref : prog.initial_actions) scan_ref(ref);
    for (const auto& [name, dist] : prog.implications.by_plan)
        for (const auto& alt : dist) raisable.insert(alt.preds.begin(), alt.preds.end());

    for (const auto& plan : prog.plans) {
        if (!raisable.count(plan.trigger))
            out.push_back({Diagnostic::Severity::warning, 0, 0,
                           "plan '" + plan.name + "' can never trigger: nothing raises " +
                               plan.trigger.str()});
        for (const auto& lit : plan.context) {
            if (!lit.positive) continue;
            for (const auto& other : plan.context)
                if (!other.positive && other.pred == lit.pred) {
                    out.push_back({Diagnostic::Severity::warning, 0, 0,
                                   "plan '" + plan.name + "' context is unsatisfiable: " +
                                       lit.pred.str() + " and not " + lit.pred.str()});
                }
        }
    }

    std::set<std::string> used;
    auto use_ref = [&](const ActionRef& ref) {
        if (ref.op == BodyOp::invoke || ref.op == BodyOp::stop_action) used.insert(ref.action);
    };
    for (const auto& plan : prog.plans)
        for (const auto& step : plan.body) use_ref(step);
    for (const auto& ref : prog.initial_actions) use_ref(ref);
    for (const auto& a : prog.actions)
        if (!used.count(a.name))
            out.push_back({Diagnostic::Severity::warning, 0, 0,
                           "action '" + a.name + "' is never used"});
    return out;
}

// Canonical form: fixed section order, one statement per line, one space
// around every separator. print(parse(print(p))) == print(p) byte for byte.
inline std::string print_program(const AgentProgram& prog) {
    using dsl_detail::format_number;
    std::string out;
    auto literals = [&](const std::vector<Literal>& lits) {
        std::string s;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (i) s += " & ";
            s += lits[i].str();
        }
        return s;
    };
    auto block = [&](const Distribution& dist) {
        std::string s = "{ ";
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (i) s += "; ";
            s += format_number(dist[i].prob);
            s += ":";
            std::size_t k = 0;
            for (const auto& p : dist[i].preds) s += (k++ ? ", " : " ") + p.str();
        }
        return s + " }";
    };
    for (const auto& p : prog.percept_declarations) out += "percept " + p.str() + ".\n";
    for (const auto& p : prog.initial_beliefs) out += "belief " + p.str() + ".\n";
    for (const auto& p : prog.operational_states) out += "opstate " + p.str() + ".\n";
    for (const auto& a : prog.actions) {
        out += "action " + a.name + " " + action_kind_name(a.kind);
        if (!a.feedback.empty()) out += " feedback " + block(a.feedback);
        out += ".\n";
    }
    for (const auto& ref : prog.initial_actions) out += "init " + ref.str() + ".\n";
    for (const auto& r : prog.rules)
        out += "rule " + r.head.str() + " :- " + literals(r.body) + ".\n";
    for (const auto& plan : prog.plans) {
        out += "plan " + plan.name + ": +" + plan.trigger.str() + " : ";
        out += plan.context.empty() ? "true" : literals(plan.context);
        out += " <- ";
        for (std::size_t i = 0; i < plan.body.size(); ++i) {
            if (i) out += "; ";
            out += plan.body[i].str();
        }
        auto impl = prog.implications.by_plan.find(plan.name);
        if (impl != prog.implications.by_plan.end()) out += " outcomes " + block(impl->second);
        out += ".\n";
    }
    return out;
}

} // namespace lisa
