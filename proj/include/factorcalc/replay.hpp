#pragma once

#include <string>
#include <vector>

#include "factorcalc/iso.hpp"
#include "factorcalc/parser.hpp"
#include "factorcalc/word.hpp"

namespace factorcalc {

namespace detail {

inline std::string binding(const CertStep &s, const std::string &key) {
    for (auto &[k, v] : s.bindings)
        if (k == key) return v;
    return {};
}

inline Rat rat_from_string(const std::string &s) {
    try {
        return Parser(s).parse_rat();
    } catch (const ParseError &) {
        throw EngineError(ErrorKind::MalformedCertificate, "bad rational binding: " + s);
    }
}

/// Re-execute one recorded step against the current state.
inline ExprPtr replay_step(const ExprPtr &state, const CertStep &step, const AssumptionSet &a) {
    if (step.rule == "free-trade") {
        Word w = read_word(state);
        std::size_t idx = std::stoul(binding(step, "index"));
        Rat to = rat_from_string(binding(step, "to_sq"));
        return word_to_expr(trade_step(w, idx, to).word);
    }
    if (step.rule == "free-trade-multi") {
        Word w = read_word(state);
        std::vector<std::pair<std::size_t, Rat>> targets;
        for (auto &[k, v] : step.bindings) {
            auto lb = k.find('[');
            auto rb = k.find(']');
            if (lb == std::string::npos || rb == std::string::npos) continue;
            std::size_t idx = std::stoul(k.substr(lb + 1, rb - lb - 1));
            auto arrow = v.find("-> ");
            if (arrow == std::string::npos)
                throw EngineError(ErrorKind::MalformedCertificate, "bad trade binding: " + v);
            targets.emplace_back(idx, rat_from_string(v.substr(arrow + 3)));
        }
        return word_to_expr(trade_to_target(w, targets).word);
    }
    if (step.rule == "canonical-order") {
        return word_to_expr(read_word(state));
    }
    if (step.rule == "canonical-lift") {
        Word w = read_word(state);
        return word_to_expr(canonicalize_word(w).word);
    }
    if (step.rule == "stable-absorption") {
        Word w = read_word(state);
        if (!absorption_licensed(w, a))
            throw EngineError(ErrorKind::MalformedCertificate,
                              "recorded absorption is not licensed");
        return word_to_expr(detail::lift_stable(w));
    }
    if (step.rule == "collapse") {
        Word w = read_word(state);
        return word_to_expr(collapse_word(w));
    }
    // expression-level rules: the rewrite scan is deterministic, so the next
    // hit must be exactly the recorded one
    auto hit = detail::rewrite_once(state, a);
    if (!hit)
        throw EngineError(ErrorKind::MalformedCertificate,
                          "no rewrite applies where '" + step.rule + "' was recorded");
    if (hit->rule != step.rule)
        throw EngineError(ErrorKind::MalformedCertificate,
                          "recorded rule '" + step.rule + "' but '" + hit->rule + "' applies");
    return hit->replacement;
}

inline Word replay_chain(ExprPtr state, const std::vector<CertStep> &steps,
                         const AssumptionSet &a, std::string *why) {
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const CertStep &s = steps[i];
        if (print(state) != s.before) {
            if (why)
                *why = "step " + std::to_string(i) + ": state is '" + print(state) +
                       "' but the record says '" + s.before + "'";
            throw EngineError(ErrorKind::MalformedCertificate, "state mismatch");
        }
        ExprPtr next = replay_step(state, s, a);
        if (print(next) != s.after) {
            if (why)
                *why = "step " + std::to_string(i) + " (" + s.rule + "): replay gives '" +
                       print(next) + "' but the record says '" + s.after + "'";
            throw EngineError(ErrorKind::MalformedCertificate, "result mismatch");
        }
        state = next;
    }
    return read_word(state);
}

} // namespace detail

/// Replay a linear certificate from its initial expression and check that it
/// reproduces the recorded final word exactly. Never throws; explains any
/// failure through `why`.
inline bool replay_certificate(const Certificate &cert, const ExprPtr &initial,
                               const AssumptionSet &a, std::string *why = nullptr) {
    try {
        if (print(initial) != cert.initial) {
            if (why) *why = "initial expression does not match the record";
            return false;
        }
        // split an isomorphism certificate into its two reduction chains
        std::vector<CertStep> left, right;
        for (auto &s : cert.steps) {
            if (detail::binding(s, "side") == "right")
                right.push_back(s);
            else
                left.push_back(s);
        }
        Word final_left = detail::replay_chain(initial, left, a, why);
        Word recorded = read_word(parse(cert.final_form));
        if (!cert.initial_right.empty()) {
            Word final_right = detail::replay_chain(parse(cert.initial_right), right, a, why);
            if (!canonical_word_eq(final_left, final_right)) {
                if (why) *why = "the two reduction chains do not meet";
                return false;
            }
        }
        if (!canonical_word_eq(final_left, recorded)) {
            if (why) *why = "replayed word differs from the recorded final form";
            return false;
        }
        return true;
    } catch (const EngineError &err) {
        if (why && why->empty()) *why = err.what();
        return false;
    } catch (const ParseError &err) {
        if (why) *why = err.what();
        return false;
    }
}

} // namespace factorcalc
