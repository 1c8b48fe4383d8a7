#pragma once

#include <functional>
#include <string>
#include <vector>

#include "factorcalc/generators.hpp"
#include "factorcalc/iso.hpp"
#include "factorcalc/replay.hpp"

namespace factorcalc {

/// Result of one fuzz suite. Counterexamples are re-parseable script lines.
struct SuiteReport {
    std::string name;
    int total = 0;
    int passed = 0;
    int skipped = 0; // inputs outside the reconstructed rules
    std::vector<std::string> counterexamples;

    bool ok() const { return counterexamples.empty(); }

    std::string summary() const {
        std::string s = name + ": " + std::to_string(passed) + "/" + std::to_string(total) +
                        " passed";
        if (skipped) s += ", " + std::to_string(skipped) + " outside the calculus";
        if (!ok()) s += ", " + std::to_string(counterexamples.size()) + " FAILED";
        return s;
    }
};

using ProductFn = std::function<FNormalForm(const FNormalForm &, const FNormalForm &)>;

namespace detail {

/// Structural shrink candidates: subtrees and shorter products.
inline std::vector<ExprPtr> shrink_candidates(const ExprPtr &e) {
    std::vector<ExprPtr> out;
    if (auto *d = e->get_if<DirectSum>()) {
        for (auto &[w, part] : d->summands) out.push_back(part);
    } else if (auto *p = e->get_if<FreeProd>()) {
        for (auto &part : p->parts) out.push_back(part);
        if (p->parts.size() > 2) {
            for (std::size_t i = 0; i < p->parts.size(); ++i) {
                auto parts = p->parts;
                parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
                out.push_back(mk::fprod(std::move(parts)));
            }
        }
    } else if (auto *r = e->get_if<Rescaled>()) {
        out.push_back(r->body);
    } else if (auto *s = e->get_if<SubProd>()) {
        out.push_back(s->base);
        if (s->letters.size() > 1) {
            for (std::size_t i = 0; i < s->letters.size(); ++i) {
                auto ls = s->letters;
                ls.erase(ls.begin() + static_cast<std::ptrdiff_t>(i));
                out.push_back(mk::sub(s->base, std::move(ls)));
            }
        }
    }
    return out;
}

/// Greedy minimization: replace the expression by any candidate that still
/// fails, until none does.
template <class Fails> ExprPtr shrink_expr(ExprPtr e, Fails &&fails) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto &c : shrink_candidates(e)) {
            bool still = false;
            try {
                still = fails(c);
            } catch (const EngineError &) {
                still = false;
            }
            if (still) {
                e = c;
                changed = true;
                break;
            }
        }
    }
    return e;
}

} // namespace detail

/// Additivity of the free dimension over the free product kernel, checked
/// against an independent evaluation of the dimension on the resulting
/// expression structure, plus the structural atom laws. The kernel under
/// test is injectable so that a deliberately broken rule is caught.
inline SuiteReport check_additivity(const GenConfig &cfg, int n,
                                    const ProductFn &product = free_product_fclass) {
    SuiteReport rep;
    rep.name = "fdim-additivity";
    Gen gen(cfg);
    // failure predicate, re-runnable on shrunken candidates
    auto fails = [&product](const ExprPtr &ea, const ExprPtr &eb,
                            std::string *reason) -> bool {
        FNormalForm a = normalize_fclass(ea);
        FNormalForm b = normalize_fclass(eb);
        FNormalForm p = product(a, b);
        // independent route: structural dimension of the produced expression
        if (fdim(to_expr(p)) != fdim(to_expr(a)) + fdim(to_expr(b))) {
            if (reason) *reason = "dimension not conserved";
            return true;
        }
        if (p.total_weight() != 1) {
            if (reason) *reason = "weights do not sum to 1";
            return true;
        }
        for (auto &c : p.atoms) {
            bool collision = false;
            for (auto &x : a.atoms)
                for (auto &y : b.atoms)
                    if (x + y - 1 == c && c > 0) collision = true;
            if (!collision) {
                if (reason) *reason = "atom " + to_string(c) + " is not a collision";
                return true;
            }
        }
        return false;
    };
    for (int i = 0; i < n; ++i) {
        ExprPtr ea = gen.fclass_expr();
        ExprPtr eb = gen.fclass_expr();
        ++rep.total;
        std::string reason;
        bool bad;
        try {
            bad = fails(ea, eb, &reason);
        } catch (const EngineError &) {
            ++rep.skipped;
            continue;
        }
        if (!bad) {
            ++rep.passed;
            continue;
        }
        // minimize before reporting
        ea = detail::shrink_expr(ea, [&](const ExprPtr &x) { return fails(x, eb, nullptr); });
        eb = detail::shrink_expr(eb, [&](const ExprPtr &y) { return fails(ea, y, nullptr); });
        rep.counterexamples.push_back("# " + reason + "\n:nf " + print(ea) + " * " + print(eb));
    }
    return rep;
}

/// The closed-form budget -n + sum t(i)^2 against the fold of one-letter
/// conversions r -> r - 1 + t^2, on random words with every support at most
/// 1 and budget 0; both must equal the engine's extended view exactly.
inline SuiteReport check_chain_vs_closed_form(const GenConfig &cfg, int n) {
    SuiteReport rep;
    rep.name = "chain-vs-closed-form";
    Gen gen(cfg);
    AssumptionSet plain;
    for (int i = 0; i < n; ++i) {
        ++rep.total;
        int m = 1 + static_cast<int>(gen.pick(6));
        std::vector<LetterSpec> ls;
        ExtRat closed{Rat(-m)};
        ExtRat chain{Rat(0)};
        for (int k = 0; k < m; ++k) {
            Rat tsq = gen.small_fraction();
            ls.push_back(mk::letter(SqScale(tsq), mk::opaque("Q" + std::to_string(k))));
            closed = closed + ExtRat(tsq);
            chain = chain + ExtRat(tsq - 1);
        }
        ExprPtr e = mk::sub(mk::opaque("N"), ls);
        Word w = to_word(e, plain).word;
        if (closed == chain && w.extended_tail() == closed) {
            ++rep.passed;
        } else {
            rep.counterexamples.push_back("# extended budgets disagree\n:word " + print(e));
        }
    }
    return rep;
}

/// Random legal trade sequences preserve rho, every letter key, the base
/// key, and provable isomorphism with the original word.
inline SuiteReport check_trade_invariance(const GenConfig &cfg, int n) {
    SuiteReport rep;
    rep.name = "trade-invariance";
    Gen gen(cfg);
    AssumptionSet plain;
    for (int i = 0; i < n; ++i) {
        ++rep.total;
        ExprPtr e = gen.budgeted_word_expr();
        Word w = to_word(e, plain).word;
        if (w.letters.empty()) {
            ++rep.passed;
            continue;
        }
        auto keys = [](const Word &x) {
            std::multiset<std::string> ks;
            for (auto &l : x.letters) ks.insert(l.body + ":" + to_string(l.key()));
            return ks;
        };
        auto k0 = keys(w);
        ExtRat rho0 = w.rho();
        auto base0 = w.base;
        Word cur = w;
        for (int s = 0; s < 5; ++s) {
            std::size_t idx = gen.pick(cur.letters.size());
            Rat target = gen.small_fraction();
            if (cur.tail + ExtRat(cur.letters[idx].t_sq) - ExtRat(target) < 0) continue;
            cur = trade_step(cur, idx, target).word;
        }
        bool good = cur.rho() == rho0 && keys(cur) == k0 && cur.base == base0 &&
                    canonical_word_eq(cur, w) &&
                    iso_verdict(word_to_expr(cur), e, plain).isomorphic();
        if (good) {
            ++rep.passed;
        } else {
            rep.counterexamples.push_back("# trade invariants broken\n:word " + print(e));
        }
    }
    return rep;
}

/// Rescale composition and identity on random factor expressions and words.
inline SuiteReport check_rescale_laws(const GenConfig &cfg, int n) {
    SuiteReport rep;
    rep.name = "rescale-laws";
    Gen gen(cfg);
    AssumptionSet plain;
    auto fails = [&plain](const ExprPtr &e, const SqScale &s, const SqScale &t) -> bool {
        Word w = to_word(e, plain).word;
        Word once = rescale_word(w, s * t, plain).word;
        Word twice = rescale_word(rescale_word(w, s, plain).word, t, plain).word;
        Word ident = rescale_word(w, SqScale(Rat(1)), plain).word;
        return !(canonical_word_eq(once, twice) && canonical_word_eq(ident, w));
    };
    for (int i = 0; i < n; ++i) {
        ++rep.total;
        ExprPtr e = gen.word_expr();
        SqScale s{gen.small_fraction()};
        SqScale t{gen.positive_scale_sq()};
        try {
            if (!fails(e, s, t)) {
                ++rep.passed;
            } else {
                e = detail::shrink_expr(e, [&](const ExprPtr &x) { return fails(x, s, t); });
                rep.counterexamples.push_back("# rescale laws broken\n:rescale " + print(e) +
                                              " sqrt(" + to_string((s * t).sq()) + ")");
            }
        } catch (const EngineError &) {
            ++rep.skipped;
        }
    }
    return rep;
}

/// Isomorphic under the distinct mode implies isomorphic under the collapsed
/// mode, on random pairs drawn from a pool of related words.
inline SuiteReport check_mode_monotonicity(const GenConfig &cfg, int n) {
    SuiteReport rep;
    rep.name = "mode-monotonicity";
    Gen gen(cfg);
    AssumptionSet plain;
    AssumptionSet collapsed;
    collapsed.mode = Mode::Collapsed;
    for (int i = 0; i < n; ++i) {
        ++rep.total;
        ExprPtr e1 = gen.pick(2) ? gen.word_expr() : gen.fclass_expr();
        // make equal pairs common: rescale back and forth or reuse
        ExprPtr e2;
        switch (gen.pick(3)) {
        case 0: e2 = e1; break;
        case 1: e2 = mk::rescale(mk::rescale(e1, SqScale(Rat(1, 4))), SqScale(Rat(4))); break;
        default: e2 = gen.pick(2) ? gen.word_expr() : gen.fclass_expr(); break;
        }
        try {
            if (e2->is<Rescaled>() && !denotes_factor(e1)) e2 = e1;
            bool dist = iso_verdict(e1, e2, plain).isomorphic();
            if (!dist) {
                ++rep.passed;
                continue;
            }
            if (iso_verdict(e1, e2, collapsed).isomorphic()) {
                ++rep.passed;
            } else {
                rep.counterexamples.push_back("# monotonicity broken\n:iso " + print(e1) + " " +
                                              print(e2));
            }
        } catch (const EngineError &) {
            ++rep.skipped;
        }
    }
    return rep;
}

/// Every certificate produced while normalizing random expressions replays.
inline SuiteReport check_replay(const GenConfig &cfg, int n) {
    SuiteReport rep;
    rep.name = "certificate-replay";
    Gen gen(cfg);
    AssumptionSet plain;
    for (int i = 0; i < n; ++i) {
        ++rep.total;
        ExprPtr e = gen.pick(2) ? gen.word_expr() : gen.fclass_expr();
        try {
            auto res = to_word(e, plain);
            std::string why;
            if (replay_certificate(res.cert, e, plain, &why)) {
                ++rep.passed;
            } else {
                rep.counterexamples.push_back("# replay failed: " + why + "\n:word " + print(e));
            }
        } catch (const EngineError &) {
            ++rep.skipped;
        }
    }
    return rep;
}

} // namespace factorcalc
