#pragma once

// PRISM-language subset: dtmc models built from int/double constants and
// modules holding ranged integer variables and guarded commands. Labeled
// commands synchronize across every module declaring the label; composition
// is elaborated into an explicit DtmcModel. A small exporter writes any
// DtmcModel back out as a single-module explicit-state program.

#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "dtmc.hpp"
#include "errors.hpp"

namespace lisa {

struct PExpr;
using PExprPtr = std::shared_ptr<const PExpr>;

struct PExpr {
    enum class Kind { number, ident, boolean, unary, binary };
    Kind kind = Kind::number;
    double num = 0.0;
    bool bval = false;
    std::string name;   // ident
    std::string op;     // unary: ! -   binary: | & = != < <= > >= + - * /
    PExprPtr lhs, rhs;
};

struct PrismVar {
    std::string name;
    PExprPtr low, high;
    PExprPtr init;      // null: defaults to the range minimum
    int line = 0, col = 0;
};

struct PrismAssign {
    std::string var;
    PExprPtr expr;
};

struct PrismAlt {
    PExprPtr prob;      // null: implicit 1
    std::vector<PrismAssign> assigns;   // empty: `true`, no change
};

struct PrismCommand {
    std::optional<std::string> label;
    PExprPtr guard;
    std::vector<PrismAlt> alts;
    int line = 0, col = 0;
};

struct PrismModule {
    std::string name;
    std::vector<PrismVar> vars;
    std::vector<PrismCommand> commands;
};

struct PrismConst {
    std::string name;
    bool is_int = true;
    PExprPtr expr;
    int line = 0, col = 0;
};

struct PrismAst {
    std::vector<PrismConst> constants;
    std::vector<PrismModule> modules;
};

struct PrismSource {
    std::string text;
    PrismAst ast;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

namespace prism_detail {

enum class Tok {
    ident, number, lbracket, rbracket, lparen, rparen, semi, colon, prime,
    amp, pipe, bang, eq, neq, lt, le, gt, ge, plus, minus, star, slash,
    range, arrow, comma, end
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double num = 0.0;
    int line = 1, col = 1;
};

struct ParseFail {};

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
    auto two = [&](char a, char b) {
        return src[i] == a && i + 1 < src.size() && src[i + 1] == b;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { bump(1); continue; }
        if (two('/', '/')) {
            while (i < src.size() && src[i] != '\n') bump(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (is_ident_char(src[j]) || (src[j] >= 'A' && src[j] <= 'Z')))
                ++j;
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
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && src[k] >= '0' && src[k] <= '9') {
                    while (k < src.size() && src[k] >= '0' && src[k] <= '9') ++k;
                    j = k;
                }
            }
            t.kind = Tok::number;
            t.text = src.substr(i, j - i);
            t.num = std::strtod(t.text.c_str(), nullptr);
            bump(j - i);
            out.push_back(t);
            continue;
        }
        std::size_t len = 1;
        if (two('.', '.')) { t.kind = Tok::range; len = 2; }
        else if (two('-', '>')) { t.kind = Tok::arrow; len = 2; }
        else if (two('!', '=')) { t.kind = Tok::neq; len = 2; }
        else if (two('<', '=')) { t.kind = Tok::le; len = 2; }
        else if (two('>', '=')) { t.kind = Tok::ge; len = 2; }
        else {
            switch (c) {
                case '[': t.kind = Tok::lbracket; break;
                case ']': t.kind = Tok::rbracket; break;
                case '(': t.kind = Tok::lparen; break;
                case ')': t.kind = Tok::rparen; break;
                case ';': t.kind = Tok::semi; break;
                case ':': t.kind = Tok::colon; break;
                case '\'': t.kind = Tok::prime; break;
                case '&': t.kind = Tok::amp; break;
                case '|': t.kind = Tok::pipe; break;
                case '!': t.kind = Tok::bang; break;
                case '=': t.kind = Tok::eq; break;
                case '<': t.kind = Tok::lt; break;
                case '>': t.kind = Tok::gt; break;
                case '+': t.kind = Tok::plus; break;
                case '-': t.kind = Tok::minus; break;
                case '*': t.kind = Tok::star; break;
                case '/': t.kind = Tok::slash; break;
                case ',': t.kind = Tok::comma; break;
                default:
                    diags.push_back({Diagnostic::Severity::error, line, col,
                                     std::string("unexpected character '") + c + "'"});
                    bump(1);
                    continue;
            }
        }
        bump(len);
        out.push_back(t);
    }
    Token eof;
    eof.kind = Tok::end;
    eof.line = line;
    eof.col = col;
    out.push_back(eof);
    return out;
}

inline PExprPtr make_num(double v) {
    auto e = std::make_shared<PExpr>();
    e->kind = PExpr::Kind::number;
    e->num = v;
    return e;
}

struct Parser {
    std::vector<Token> toks;
    std::size_t pos = 0;
    std::vector<Diagnostic>& diags;
    PrismAst& ast;

    Parser(std::vector<Token> t, std::vector<Diagnostic>& d, PrismAst& a)
        : toks(std::move(t)), diags(d), ast(a) {}

    const Token& cur() const { return toks[pos]; }
    const Token& ahead(std::size_t n) const {
        return toks[std::min(pos + n, toks.size() - 1)];
    }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return at(Tok::ident) && cur().text == kw; }
    void advance() { if (pos + 1 < toks.size()) ++pos; }

    [[noreturn]] void fail(const std::string& msg) {
        diags.push_back({Diagnostic::Severity::error, cur().line, cur().col, msg});
        throw ParseFail{};
    }

    void expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what);
        advance();
    }

    std::string ident(const char* what) {
        if (!at(Tok::ident)) fail(std::string("expected ") + what);
        std::string s = cur().text;
        advance();
        return s;
    }

    // Expression grammar, loosest to tightest:
    // or | and | unary(!) | relational | additive | multiplicative | primary
    PExprPtr parse_expr() { return parse_or(); }

    PExprPtr binary(const char* op, PExprPtr a, PExprPtr b) {
        auto e = std::make_shared<PExpr>();
        e->kind = PExpr::Kind::binary;
        e->op = op;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }

    PExprPtr parse_or() {
        PExprPtr lhs = parse_and();
        while (at(Tok::pipe)) { advance(); lhs = binary("|", lhs, parse_and()); }
        return lhs;
    }
    PExprPtr parse_and() {
        PExprPtr lhs = parse_not();
        while (at(Tok::amp)) { advance(); lhs = binary("&", lhs, parse_not()); }
        return lhs;
    }
    PExprPtr parse_not() {
        if (at(Tok::bang)) {
            advance();
            auto e = std::make_shared<PExpr>();
            e->kind = PExpr::Kind::unary;
            e->op = "!";
            e->lhs = parse_not();
            return e;
        }
        return parse_rel();
    }
    PExprPtr parse_rel() {
        PExprPtr lhs = parse_sum();
        const char* op = nullptr;
        switch (cur().kind) {
            case Tok::eq: op = "="; break;
            case Tok::neq: op = "!="; break;
            case Tok::lt: op = "<"; break;
            case Tok::le: op = "<="; break;
            case Tok::gt: op = ">"; break;
            case Tok::ge: op = ">="; break;
            default: return lhs;
        }
        advance();
        return binary(op, lhs, parse_sum());
    }
    PExprPtr parse_sum() {
        PExprPtr lhs = parse_term();
        for (;;) {
            if (at(Tok::plus)) { advance(); lhs = binary("+", lhs, parse_term()); }
            else if (at(Tok::minus)) { advance(); lhs = binary("-", lhs, parse_term()); }
            else return lhs;
        }
    }
    PExprPtr parse_term() {
        PExprPtr lhs = parse_factor();
        for (;;) {
            if (at(Tok::star)) { advance(); lhs = binary("*", lhs, parse_factor()); }
            else if (at(Tok::slash)) { advance(); lhs = binary("/", lhs, parse_factor()); }
            else return lhs;
        }
    }
    PExprPtr parse_factor() {
        if (at(Tok::minus)) {
            advance();
            auto e = std::make_shared<PExpr>();
            e->kind = PExpr::Kind::unary;
            e->op = "-";
            e->lhs = parse_factor();
            return e;
        }
        if (at(Tok::number)) {
            auto e = make_num(cur().num);
            advance();
            return e;
        }
        if (at(Tok::lparen)) {
            advance();
            PExprPtr e = parse_expr();
            expect(Tok::rparen, "')'");
            return e;
        }
        if (at(Tok::ident)) {
            if (cur().text == "true" || cur().text == "false") {
                auto e = std::make_shared<PExpr>();
                e->kind = PExpr::Kind::boolean;
                e->bval = cur().text == "true";
                advance();
                return e;
            }
            auto e = std::make_shared<PExpr>();
            e->kind = PExpr::Kind::ident;
            e->name = cur().text;
            advance();
            return e;
        }
        fail("expected expression");
    }

    // `(` ident `'` heralds an assignment; anything else after an optional
    // leading position is a probability expression.
    bool at_assignment() const {
        return at(Tok::lparen) && ahead(1).kind == Tok::ident && ahead(2).kind == Tok::prime;
    }

    PrismAssign parse_assign() {
        expect(Tok::lparen, "'('");
        PrismAssign a;
        a.var = ident("variable");
        expect(Tok::prime, "'");
        expect(Tok::eq, "'='");
        a.expr = parse_expr();
        expect(Tok::rparen, "')'");
        return a;
    }

    PrismAlt parse_alt() {
        PrismAlt alt;
        if (!at_assignment() && !at_kw("true")) {
            alt.prob = parse_expr();
            expect(Tok::colon, "':'");
        }
        if (at_kw("true")) {
            advance();
            return alt;
        }
        alt.assigns.push_back(parse_assign());
        while (at(Tok::amp)) {
            advance();
            alt.assigns.push_back(parse_assign());
        }
        return alt;
    }

    PrismCommand parse_command() {
        PrismCommand cmd;
        cmd.line = cur().line;
        cmd.col = cur().col;
        expect(Tok::lbracket, "'['");
        if (at(Tok::ident)) {
            cmd.label = cur().text;
            advance();
        }
        expect(Tok::rbracket, "']'");
        cmd.guard = parse_expr();
        expect(Tok::arrow, "'->'");
        cmd.alts.push_back(parse_alt());
        while (at(Tok::plus)) {
            advance();
            cmd.alts.push_back(parse_alt());
        }
        expect(Tok::semi, "';'");
        return cmd;
    }

    PrismVar parse_var_decl() {
        PrismVar v;
        v.line = cur().line;
        v.col = cur().col;
        v.name = ident("variable name");
        expect(Tok::colon, "':'");
        expect(Tok::lbracket, "'['");
        v.low = parse_expr();
        expect(Tok::range, "'..'");
        v.high = parse_expr();
        expect(Tok::rbracket, "']'");
        if (at_kw("init")) {
            advance();
            v.init = parse_expr();
        }
        expect(Tok::semi, "';'");
        return v;
    }

    void parse_module() {
        PrismModule mod;
        advance();  // `module`
        mod.name = ident("module name");
        while (!at_kw("endmodule")) {
            if (at(Tok::end)) fail("missing endmodule");
            if (at(Tok::lbracket)) mod.commands.push_back(parse_command());
            else if (at(Tok::ident)) mod.vars.push_back(parse_var_decl());
            else fail("expected variable declaration or command");
        }
        advance();  // `endmodule`
        ast.modules.push_back(std::move(mod));
    }

    void parse_const() {
        PrismConst c;
        c.line = cur().line;
        c.col = cur().col;
        advance();  // `const`
        if (at_kw("int")) { c.is_int = true; advance(); }
        else if (at_kw("double")) { c.is_int = false; advance(); }
        else fail("expected int or double after const");
        c.name = ident("constant name");
        expect(Tok::eq, "'='");
        c.expr = parse_expr();
        expect(Tok::semi, "';'");
        ast.constants.push_back(std::move(c));
    }

    void run() {
        static const std::set<std::string> unsupported = {
            "formula", "label", "rewards", "global", "system", "init", "invariant",
            "func", "player"};
        static const std::set<std::string> other_kinds = {
            "mdp", "ctmc", "pta", "nondeterministic", "probabilistic", "stochastic"};

        if (at_kw("dtmc")) advance();
        else if (at(Tok::ident) && other_kinds.count(cur().text))
            fail("only dtmc supported, got '" + cur().text + "'");
        else fail("model must start with 'dtmc'");

        while (!at(Tok::end)) {
            if (at_kw("const")) parse_const();
            else if (at_kw("module")) parse_module();
            else if (at(Tok::ident) && unsupported.count(cur().text))
                fail("unsupported construct '" + cur().text + "'");
            else fail("expected const or module declaration");
        }
    }
};

// Constant environment: name -> (value, is_int).
using ConstMap = std::map<std::string, std::pair<double, bool>>;

inline double eval_expr(const PExpr& e, const ConstMap& consts,
                        const std::map<std::string, long long>* vars) {
    switch (e.kind) {
        case PExpr::Kind::number: return e.num;
        case PExpr::Kind::boolean: return e.bval ? 1.0 : 0.0;
        case PExpr::Kind::ident: {
            if (vars) {
                auto it = vars->find(e.name);
                if (it != vars->end()) return static_cast<double>(it->second);
            }
            auto ct = consts.find(e.name);
            if (ct != consts.end()) return ct->second.first;
            throw ModelError("undefined identifier '" + e.name + "'");
        }
        case PExpr::Kind::unary: {
            double v = eval_expr(*e.lhs, consts, vars);
            return e.op == "!" ? (v == 0.0 ? 1.0 : 0.0) : -v;
        }
        case PExpr::Kind::binary: {
            double a = eval_expr(*e.lhs, consts, vars);
            if (e.op == "&") return (a != 0.0 && eval_expr(*e.rhs, consts, vars) != 0.0) ? 1.0 : 0.0;
            if (e.op == "|") return (a != 0.0 || eval_expr(*e.rhs, consts, vars) != 0.0) ? 1.0 : 0.0;
            double b = eval_expr(*e.rhs, consts, vars);
            if (e.op == "=") return a == b ? 1.0 : 0.0;
            if (e.op == "!=") return a != b ? 1.0 : 0.0;
            if (e.op == "<") return a < b ? 1.0 : 0.0;
            if (e.op == "<=") return a <= b ? 1.0 : 0.0;
            if (e.op == ">") return a > b ? 1.0 : 0.0;
            if (e.op == ">=") return a >= b ? 1.0 : 0.0;
            if (e.op == "+") return a + b;
            if (e.op == "-") return a - b;
            if (e.op == "*") return a * b;
            if (e.op == "/") {
                if (b == 0.0) throw ModelError("division by zero");
                return a / b;
            }
            throw ModelError("unknown operator " + e.op);
        }
    }
    throw ModelError("malformed expression");
}

inline long long eval_int(const PExpr& e, const ConstMap& consts,
                          const std::map<std::string, long long>* vars, const char* what) {
    double v = eval_expr(e, consts, vars);
    double r = std::llround(v);
    if (std::abs(v - r) > 1e-9)
        throw ModelError(std::string(what) + " evaluates to non-integer " + std::to_string(v));
    return static_cast<long long>(r);
}

inline ConstMap resolve_constants(const PrismAst& ast) {
    ConstMap consts;
    for (const auto& c : ast.constants) {
        if (consts.count(c.name)) throw ModelError("duplicate constant '" + c.name + "'");
        double v = eval_expr(*c.expr, consts, nullptr);
        if (c.is_int) {
            double r = std::llround(v);
            if (std::abs(v - r) > 1e-9)
                throw ModelError("int constant '" + c.name + "' evaluates to non-integer");
            v = r;
        }
        consts[c.name] = {v, c.is_int};
    }
    return consts;
}

inline std::string valuation_str(const Valuation& v) {
    std::string s = "{";
    std::size_t k = 0;
    for (const auto& [name, val] : v) {
        if (k++) s += ", ";
        s += name + "=" + std::to_string(val);
    }
    return s + "}";
}

} // namespace prism_detail

inline PrismSource parse_prism_subset(const std::string& text) {
    PrismSource sp;
    sp.text = text;
    auto toks = prism_detail::lex(text, sp.diagnostics);
    if (has_errors(sp.diagnostics)) return sp;
    prism_detail::Parser parser(std::move(toks), sp.diagnostics, sp.ast);
    try {
        parser.run();
    } catch (const prism_detail::ParseFail&) {
        // diagnostic already recorded
    }
    return sp;
}

// Synchronized composition to an explicit chain. Per reachable state exactly
// one alternative may exist: a single enabled unlabeled command, or a single
// joint combination of one enabled command per module declaring some label.
// More than one is a modelling error unless uniform_nondet mixes them evenly.
// No alternative at all marks the state deadlocked and self-loops it.
inline DtmcModel elaborate(const PrismAst& ast, bool uniform_nondet = false,
                           std::size_t state_cap = 1000000) {
    using namespace prism_detail;
    ConstMap consts = resolve_constants(ast);

    struct VarInfo {
        long long low = 0, high = 0, init = 0;
        int module = -1;
    };
    std::map<std::string, VarInfo> vars;
    Valuation initial;
    for (std::size_t m = 0; m < ast.modules.size(); ++m) {
        for (const auto& v : ast.modules[m].vars) {
            if (vars.count(v.name))
                throw ModelError("variable '" + v.name + "' declared in more than one module");
            VarInfo info;
            info.low = eval_int(*v.low, consts, nullptr, "range bound");
            info.high = eval_int(*v.high, consts, nullptr, "range bound");
            if (info.low > info.high)
                throw ModelError("variable '" + v.name + "' has empty range");
            info.init = v.init ? eval_int(*v.init, consts, nullptr, "init") : info.low;
            if (info.init < info.low || info.init > info.high)
                throw ModelError("variable '" + v.name + "' init out of range");
            info.module = static_cast<int>(m);
            vars[v.name] = info;
            initial[v.name] = info.init;
        }
    }
    for (std::size_t m = 0; m < ast.modules.size(); ++m)
        for (const auto& cmd : ast.modules[m].commands)
            for (const auto& alt : cmd.alts)
                for (const auto& a : alt.assigns) {
                    auto it = vars.find(a.var);
                    if (it == vars.end())
                        throw ModelError("assignment to undeclared variable '" + a.var + "'");
                    if (it->second.module != static_cast<int>(m))
                        throw ModelError("module '" + ast.modules[m].name +
                                         "' assigns foreign variable '" + a.var + "'");
                }

    // Labels in first-appearance order, with the modules that declare them.
    std::vector<std::string> label_order;
    std::map<std::string, std::vector<int>> label_modules;
    for (std::size_t m = 0; m < ast.modules.size(); ++m) {
        std::set<std::string> seen;
        for (const auto& cmd : ast.modules[m].commands) {
            if (!cmd.label) continue;
            if (!seen.insert(*cmd.label).second) continue;
            auto it = label_modules.find(*cmd.label);
            if (it == label_modules.end()) {
                label_order.push_back(*cmd.label);
                label_modules[*cmd.label] = {static_cast<int>(m)};
            } else {
                it->second.push_back(static_cast<int>(m));
            }
        }
    }

    // One alternative = one command tuple; expanding it multiplies out the
    // per-command update distributions.
    using CommandTuple = std::vector<const PrismCommand*>;

    auto expand_tuple = [&](const CommandTuple& tuple, const Valuation& v)
        -> std::vector<std::pair<double, Valuation>> {
        std::vector<std::pair<double, Valuation>> branches{{1.0, v}};
        for (const PrismCommand* cmd : tuple) {
            double sum = 0.0;
            std::vector<std::pair<double, std::vector<const PrismAssign*>>> local;
            for (const auto& alt : cmd->alts) {
                double p = alt.prob ? eval_expr(*alt.prob, consts, &v) : 1.0;
                if (p < -kDistributionTolerance || p > 1.0 + kDistributionTolerance)
                    throw ModelError("probability " + std::to_string(p) + " out of [0,1] at state " +
                                     valuation_str(v) + " (command at line " +
                                     std::to_string(cmd->line) + ")");
                sum += p;
                std::vector<const PrismAssign*> as;
                for (const auto& a : alt.assigns) as.push_back(&a);
                local.emplace_back(p, std::move(as));
            }
            if (sum < 1.0 - kDistributionTolerance || sum > 1.0 + kDistributionTolerance)
                throw ModelError("probabilities sum to " + std::to_string(sum) + " at state " +
                                 valuation_str(v) + " (command at line " +
                                 std::to_string(cmd->line) + ")");
            std::vector<std::pair<double, Valuation>> next;
            for (const auto& [p0, partial] : branches) {
                for (const auto& [p, assigns] : local) {
                    if (p0 * p <= 0.0) continue;
                    Valuation nv = partial;
                    for (const PrismAssign* a : assigns) {
                        long long val = eval_int(*a->expr, consts, &v, "update");
                        const VarInfo& info = vars[a->var];
                        if (val < info.low || val > info.high)
                            throw RangeError("update " + a->var + "'=" + std::to_string(val) +
                                             " leaves [" + std::to_string(info.low) + ".." +
                                             std::to_string(info.high) + "] at state " +
                                             valuation_str(v));
                        nv[a->var] = val;
                    }
                    next.emplace_back(p0 * p, std::move(nv));
                }
            }
            branches = std::move(next);
        }
        return branches;
    };

    DtmcModel model;
    std::map<Valuation, int> index;
    std::deque<int> frontier;
    auto state_of = [&](const Valuation& v) {
        auto it = index.find(v);
        if (it != index.end()) return it->second;
        if (model.states.size() >= state_cap)
            throw StateOverflowError("state-space cap " + std::to_string(state_cap) +
                                     " exceeded, frontier holds " +
                                     std::to_string(frontier.size()) + " states");
        int id = model.size();
        index.emplace(v, id);
        DtmcState st;
        st.vars = v;
        model.states.push_back(std::move(st));
        frontier.push_back(id);
        return id;
    };
    model.initial = state_of(initial);

    while (!frontier.empty()) {
        int id = frontier.front();
        frontier.pop_front();
        Valuation v = model.states[static_cast<std::size_t>(id)].vars;

        std::vector<CommandTuple> alternatives;
        for (const auto& mod : ast.modules)
            for (const auto& cmd : mod.commands)
                if (!cmd.label && eval_expr(*cmd.guard, consts, &v) != 0.0)
                    alternatives.push_back({&cmd});
        for (const auto& label : label_order) {
            std::vector<std::vector<const PrismCommand*>> per_module;
            bool blocked = false;
            for (int m : label_modules[label]) {
                std::vector<const PrismCommand*> enabled;
                for (const auto& cmd : ast.modules[static_cast<std::size_t>(m)].commands)
                    if (cmd.label && *cmd.label == label &&
                        eval_expr(*cmd.guard, consts, &v) != 0.0)
                        enabled.push_back(&cmd);
                if (enabled.empty()) { blocked = true; break; }
                per_module.push_back(std::move(enabled));
            }
            if (blocked) continue;
            std::vector<CommandTuple> combos{{}};
            for (const auto& enabled : per_module) {
                std::vector<CommandTuple> next;
                for (const auto& combo : combos)
                    for (const PrismCommand* cmd : enabled) {
                        CommandTuple t = combo;
                        t.push_back(cmd);
                        next.push_back(std::move(t));
                    }
                combos = std::move(next);
            }
            for (auto& combo : combos) alternatives.push_back(std::move(combo));
        }

        std::map<Valuation, double> successors;
        if (alternatives.empty()) {
            model.deadlock_fixed.push_back(id);
            successors[v] = 1.0;
        } else if (alternatives.size() > 1 && !uniform_nondet) {
            std::string lines;
            for (const auto& alt : alternatives) {
                for (const auto* cmd : alt)
                    lines += " line " + std::to_string(cmd->line);
                lines += ";";
            }
            throw NondeterminismError(std::to_string(alternatives.size()) +
                                      " simultaneously enabled alternatives at state " +
                                      valuation_str(v) + " (commands at" + lines + ")");
        }
        if (!alternatives.empty()) {
            double weight = 1.0 / static_cast<double>(alternatives.size());
            for (const auto& alt : alternatives)
                for (auto& [p, nv] : expand_tuple(alt, v))
                    if (p > 0.0) successors[nv] += weight * p;
        }
        // state_of may grow model.states, so the row is buffered and written
        // back through a fresh index afterwards.
        std::vector<Transition> row;
        for (const auto& [nv, p] : successors)
            if (p > 0.0) row.push_back({state_of(nv), p});
        model.states[static_cast<std::size_t>(id)].out = std::move(row);
    }

    for (const auto& [name, cv] : consts)
        if (cv.second) model.constants[name] = static_cast<long long>(cv.first);

    validate_model(model);
    return model;
}

// Writes a model as an explicit-state single-module program over one index
// variable. Re-parsing and elaborating the output reproduces the transition
// matrix exactly (modulo printed-probability rounding at 17 digits).
inline std::string export_prism(const DtmcModel& m) {
    std::string out = "dtmc\n\n";
    out += "// states: " + std::to_string(m.size()) + ", initial: " + std::to_string(m.initial) +
           "\n";
    out += "module m\n";
    out += "  st : [0.." + std::to_string(m.size() - 1) + "] init " + std::to_string(m.initial) +
           ";\n\n";
    char buf[64];
    for (int i = 0; i < m.size(); ++i) {
        out += "  [] st=" + std::to_string(i) + " -> ";
        const auto& row = m.states[static_cast<std::size_t>(i)].out;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += " + ";
            std::snprintf(buf, sizeof buf, "%.17g", row[j].prob);
            out += std::string(buf) + ":(st'=" + std::to_string(row[j].target) + ")";
        }
        out += ";\n";
    }
    out += "endmodule\n";
    return out;
}

} // namespace lisa
