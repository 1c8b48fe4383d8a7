#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "factorcalc/iso.hpp"
#include "factorcalc/parser.hpp"
#include "factorcalc/word.hpp"

namespace factorcalc {

/// REPL state: the mode and stability assumptions, plus the certificates the
/// session has produced. Everything else is stateless; a failed command
/// leaves the session untouched.
struct Session {
    AssumptionSet assumptions;
    std::optional<Certificate> last_cert;
    std::vector<Certificate> certs;
    std::vector<ExprPtr> cert_initials; // matching initial expressions
    bool done = false;
};

struct CommandResult {
    std::string output;
    int severity = 0; // 0 ok, 1 diagnostics, 2 engine error
};

namespace detail {

inline void stash(Session &s, const Certificate &cert, const ExprPtr &initial) {
    s.last_cert = cert;
    s.certs.push_back(cert);
    s.cert_initials.push_back(initial);
}

inline std::string verdict_text(const Verdict &v) {
    switch (v.kind) {
    case VerdictKind::Isomorphic: {
        std::vector<std::string> rules;
        for (auto &s : v.cert.steps)
            if (std::find(rules.begin(), rules.end(), s.rule) == rules.end())
                rules.push_back(s.rule);
        std::string out = "isomorphic (" + std::to_string(v.cert.steps.size()) + " step" +
                          (v.cert.steps.size() == 1 ? "" : "s");
        if (!rules.empty()) {
            out += ": ";
            for (std::size_t i = 0; i < rules.size(); ++i)
                out += (i ? ", " : "") + rules[i];
        }
        return out + ")";
    }
    case VerdictKind::ProvablyDistinct: return "provably distinct: " + v.witness;
    case VerdictKind::NotProvable:
        return "not provable: " + v.left_form + "  vs  " + v.right_form;
    }
    return "";
}

inline std::string describe_word(const Word &w) {
    std::string out = print_word(w);
    if (!w.is_pure()) {
        out += "\n  rho " + w.rho().str() + ", budget " + w.tail.str();
        if (w.stable) out += ", stable context";
        if (w.f_anchored) out += ", class-F ambient";
    }
    return out;
}

/// Letter selector: a 1-based index or an opaque name that matches exactly
/// one letter of the word.
inline std::size_t select_letter(const Word &w, const std::string &sel) {
    bool numeric = !sel.empty() && sel.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) {
        std::size_t idx = std::stoul(sel);
        if (idx < 1 || idx > w.letters.size())
            throw EngineError(ErrorKind::PreconditionViolated,
                              "letter index out of range: " + sel);
        return idx - 1;
    }
    std::size_t found = w.letters.size();
    int hits = 0;
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (w.letters[i].body == sel) {
            found = i;
            ++hits;
        }
    }
    if (hits == 0)
        throw EngineError(ErrorKind::PreconditionViolated, "no letter named " + sel);
    if (hits > 1)
        throw EngineError(ErrorKind::PreconditionViolated,
                          "letter name " + sel + " is ambiguous; use an index");
    return found;
}

inline std::string explain(const Certificate &cert) {
    if (cert.steps.empty()) return "(no steps: already canonical)\n  " + cert.final_form;
    std::ostringstream os;
    os << "from " << cert.initial;
    if (!cert.initial_right.empty()) os << "\n and " << cert.initial_right;
    for (std::size_t i = 0; i < cert.steps.size(); ++i) {
        const auto &s = cert.steps[i];
        os << "\n" << (i + 1) << ". [" << s.rule << "] " << s.law;
        os << "\n     " << s.before << "  ->  " << s.after;
    }
    os << "\n= " << cert.final_form;
    return os.str();
}

} // namespace detail

CommandResult eval_command(Session &s, const std::string &line);

/// One command per line; '#' starts a comment. Output lines are ordered;
/// the worst severity wins.
inline CommandResult run_script(Session &s, std::istream &in) {
    CommandResult total;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        auto r = eval_command(s, line.substr(start));
        if (!r.output.empty()) {
            if (r.severity > 0)
                total.output += "line " + std::to_string(lineno) + ": " + r.output + "\n";
            else
                total.output += r.output + "\n";
        }
        total.severity = std::max(total.severity, r.severity);
        if (s.done) break;
    }
    return total;
}

inline CommandResult eval_command(Session &s, const std::string &line) {
    auto fail = [](int sev, const std::string &msg) { return CommandResult{msg, sev}; };
    std::string cmd, rest;
    {
        auto sp = line.find_first_of(" \t");
        cmd = sp == std::string::npos ? line : line.substr(0, sp);
        rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        auto s0 = rest.find_first_not_of(" \t");
        rest = s0 == std::string::npos ? "" : rest.substr(s0);
    }
    if (cmd.empty() || cmd[0] != ':') return fail(1, "commands start with ':'; try :help");

    try {
        if (cmd == ":quit" || cmd == ":q") {
            s.done = true;
            return {"", 0};
        }
        if (cmd == ":help") {
            return {":fdim E | :nf E | :word E | :rescale E SCALE | :trade E LETTER SCALE\n"
                    ":tradeAll E L1=S1,L2=S2,... | :iso E1 E2 | :mode distinct|collapsed\n"
                    ":assume stable NAME | :explain | :load FILE | :quit",
                    0};
        }
        if (cmd == ":mode") {
            if (rest == "distinct")
                s.assumptions.mode = Mode::Distinct;
            else if (rest == "collapsed")
                s.assumptions.mode = Mode::Collapsed;
            else
                return fail(1, "usage: :mode distinct|collapsed");
            return {"mode: " + rest, 0};
        }
        if (cmd == ":assume") {
            std::istringstream is(rest);
            std::string what, name;
            is >> what >> name;
            if (what != "stable" || name.empty()) return fail(1, "usage: :assume stable NAME");
            s.assumptions.stable.insert(name);
            return {"assuming " + name + " is stable", 0};
        }
        if (cmd == ":explain") {
            if (!s.last_cert) return fail(1, "no certificate yet");
            return {detail::explain(*s.last_cert), 0};
        }
        if (cmd == ":load") {
            std::ifstream f(rest);
            if (!f) return fail(1, "cannot open " + rest);
            return run_script(s, f);
        }
        if (cmd == ":fdim") {
            ExprPtr e = parse(rest);
            require_well_formed(e);
            if (is_pure_fclass(e)) return {normalize_fclass(e).fdim().str(), 0};
            return {fdim(e).str(), 0}; // reports why it is undefined
        }
        if (cmd == ":nf") {
            ExprPtr e = parse(rest);
            auto res = to_word(e, s.assumptions);
            if (!res.word.is_pure())
                return fail(2, "error: not a class-F expression; use :word");
            detail::stash(s, res.cert, e);
            return {print_word(res.word), 0};
        }
        if (cmd == ":word") {
            ExprPtr e = parse(rest);
            auto res = to_word(e, s.assumptions);
            detail::stash(s, res.cert, e);
            return {detail::describe_word(res.word), 0};
        }
        if (cmd == ":rescale") {
            Parser p(rest);
            ExprPtr e = p.parse_expr();
            SqScale sc = p.parse_scale();
            auto res = to_word(mk::rescale(e, sc), s.assumptions);
            detail::stash(s, res.cert, mk::rescale(e, sc));
            return {detail::describe_word(res.word), 0};
        }
        if (cmd == ":trade") {
            Parser p(rest);
            ExprPtr e = p.parse_expr();
            std::istringstream is(rest);
            // re-scan: the selector and scale follow the expression
            std::string tailtext = rest;
            // parse expression again to know its length
            // selector and scale are the last two whitespace tokens
            auto last = tailtext.find_last_of(" \t");
            if (last == std::string::npos) return fail(1, "usage: :trade EXPR LETTER SCALE");
            std::string scale_text = tailtext.substr(last + 1);
            std::string head = tailtext.substr(0, last);
            auto prev = head.find_last_of(" \t");
            if (prev == std::string::npos) return fail(1, "usage: :trade EXPR LETTER SCALE");
            std::string selector = head.substr(prev + 1);
            auto res = to_word(e, s.assumptions);
            Word w = text_normal(res.word);
            std::size_t idx = detail::select_letter(w, selector);
            SqScale target = Parser(scale_text).parse_scale();
            auto traded = trade_step(w, idx, target.sq());
            Certificate cert = res.cert;
            cert.steps.push_back(*traded.step);
            cert.final_form = print_word(traded.word);
            detail::stash(s, cert, e);
            return {detail::describe_word(traded.word), 0};
        }
        if (cmd == ":tradeAll") {
            Parser p(rest);
            ExprPtr e = p.parse_expr();
            auto last = rest.find_last_of(" \t");
            if (last == std::string::npos) return fail(1, "usage: :tradeAll EXPR L1=S1,L2=S2");
            std::string spec = rest.substr(last + 1);
            auto res = to_word(e, s.assumptions);
            Word w = text_normal(res.word);
            std::vector<std::pair<std::size_t, Rat>> targets;
            std::istringstream is(spec);
            std::string item;
            while (std::getline(is, item, ',')) {
                auto eq = item.find('=');
                if (eq == std::string::npos) return fail(1, "targets look like NAME=SCALE");
                std::size_t idx = detail::select_letter(w, item.substr(0, eq));
                targets.emplace_back(idx, Parser(item.substr(eq + 1)).parse_scale().sq());
            }
            auto traded = trade_to_target(w, targets);
            Certificate cert = res.cert;
            cert.steps.push_back(*traded.step);
            cert.final_form = print_word(traded.word);
            detail::stash(s, cert, e);
            return {detail::describe_word(traded.word), 0};
        }
        if (cmd == ":iso") {
            Parser p(rest);
            ExprPtr e1 = p.parse_expr();
            ExprPtr e2 = p.parse_expr();
            auto v = iso_verdict(e1, e2, s.assumptions);
            if (v.kind == VerdictKind::Isomorphic) detail::stash(s, v.cert, e1);
            return {detail::verdict_text(v), 0};
        }
        return fail(1, "unknown command " + cmd + "; try :help");
    } catch (const ParseError &pe) {
        return fail(1, "parse error at " + pe.diag.str());
    } catch (const EngineError &ee) {
        return fail(2, std::string("error: ") + ee.what());
    }
}

} // namespace factorcalc
