#pragma once

#include <set>
#include <string>

#include "factorcalc/word.hpp"

namespace factorcalc {

enum class VerdictKind { Isomorphic, ProvablyDistinct, NotProvable };

/// Three-valued verdict. ProvablyDistinct is only ever justified by data
/// that survives the open identification questions: trace lists of atoms
/// and matrix blocks, center weights, and the opaque factor structure.
/// Parameter-only differences (interpolated parameters, budgets, stability)
/// stay NotProvable.
struct Verdict {
    VerdictKind kind = VerdictKind::NotProvable;
    Certificate cert;     // both reduction chains when Isomorphic
    std::string witness;  // the distinguishing data when ProvablyDistinct
    std::string left_form, right_form; // canonical forms (NotProvable report)

    bool isomorphic() const { return kind == VerdictKind::Isomorphic; }
};

/// Collapsed mode identifies the interpolated free group factors: every
/// parameter above 1 becomes inf, and any positive budget upgrades to an
/// absorbing LF(inf) context.
inline Word collapse_word(const Word &w) {
    if (w.pure) {
        Word v;
        v.pure = collapse_fclass(*w.pure);
        return v;
    }
    Word v = w;
    if (v.tail.is_positive()) {
        v.tail = ExtRat::infinity();
        v = detail::lift_stable(v);
    }
    return v;
}

namespace detail {

inline std::multiset<std::string> opaque_multiset(const Word &w) {
    std::multiset<std::string> out;
    if (w.base) out.insert(w.base->first);
    for (auto &l : w.letters) out.insert(l.body);
    for (auto &f : w.families)
        out.insert(f.body + (f.count ? "#" + std::to_string(*f.count) : "#inf"));
    return out;
}

inline std::multiset<std::string> keyed_multiset(const Word &w) {
    std::multiset<std::string> out;
    Word v = neutral_view(w);
    for (auto &l : v.letters) out.insert(l.body + "@" + to_string(l.key()));
    for (auto &f : v.families)
        out.insert(f.body + "@fam(" + to_string(f.c_sq / f.sup_first) + "," +
                   to_string(f.sup_ratio) + (f.count ? "," + std::to_string(*f.count) : ",inf") +
                   ")");
    return out;
}

inline std::string join(const std::multiset<std::string> &s) {
    std::string out = "{";
    bool first = true;
    for (auto &x : s) {
        if (!first) out += ", ";
        first = false;
        out += x;
    }
    return out + "}";
}

/// Distinguishing invariant data between two unequal canonical forms, if
/// any; empty when the difference is parameter-only.
inline std::string distinct_witness(const Word &a, const Word &b) {
    if (a.is_pure() != b.is_pure()) {
        return "opaque factor content differs: " + join(opaque_multiset(a)) + " vs " +
               join(opaque_multiset(b));
    }
    if (a.is_pure()) {
        const auto &x = *a.pure, &y = *b.pure;
        if (x.atoms != y.atoms) {
            std::string lhs, rhs;
            for (auto &t : x.atoms) lhs += (lhs.empty() ? "" : ", ") + to_string(t);
            for (auto &t : y.atoms) rhs += (rhs.empty() ? "" : ", ") + to_string(t);
            return "atom traces differ: [" + lhs + "] vs [" + rhs + "]";
        }
        bool blocks_differ = x.blocks.size() != y.blocks.size();
        if (!blocks_differ)
            for (std::size_t i = 0; i < x.blocks.size(); ++i)
                if (x.blocks[i].n != y.blocks[i].n || x.blocks[i].weight != y.blocks[i].weight)
                    blocks_differ = true;
        if (blocks_differ) return "matrix block data differs";
        // diffuse summand count or weights are center data
        if (x.diffuse.size() != y.diffuse.size()) return "center summand counts differ";
        for (std::size_t i = 0; i < x.diffuse.size(); ++i)
            if (x.diffuse[i].weight != y.diffuse[i].weight) return "center summand weights differ";
        return ""; // only kinds/parameters differ
    }
    auto oa = opaque_multiset(a), ob = opaque_multiset(b);
    if (oa != ob) return "opaque factors differ: " + join(oa) + " vs " + join(ob);
    auto ka = keyed_multiset(a), kb = keyed_multiset(b);
    if (ka != kb) return "opaque factor scales differ: " + join(ka) + " vs " + join(kb);
    return "";
}

} // namespace detail

/// Decide provable isomorphism of two expressions under the session mode and
/// assumptions. Both sides normalize to canonical words; collapsed mode
/// upgrades parameters first. Equal canonical data yields Isomorphic with
/// the two reduction chains as certificate; differing genuine invariants
/// yield ProvablyDistinct; anything else is NotProvable.
inline Verdict iso_verdict(const ExprPtr &e1, const ExprPtr &e2, const AssumptionSet &a) {
    auto r1 = to_word(e1, a);
    auto r2 = to_word(e2, a);

    // canonical lift first: the leftover budget of the filled form is the
    // class invariant that collapsed mode may upgrade
    auto canonical_side = [&](WordResult &r, const Word &w) {
        auto fills = canonicalize_word(w);
        if (fills.step) r.cert.steps.push_back(*fills.step);
        Word c = fills.word;
        if (a.mode == Mode::Collapsed) {
            Word cc = collapse_word(c);
            if (print_word(cc) != print_word(c)) {
                CertStep step;
                step.rule = "collapse";
                step.law = "collapsed mode: interpolated parameters and positive budgets "
                           "become LF(inf)";
                step.before = print_word(c);
                step.after = print_word(cc);
                r.cert.steps.push_back(std::move(step));
            }
            c = cc;
        }
        r.cert.final_form = print_word(c);
        return c;
    };
    Word c1 = canonical_side(r1, r1.word);
    Word c2 = canonical_side(r2, r2.word);

    Verdict v;
    v.left_form = print_word(c1);
    v.right_form = print_word(c2);

    if (canonical_word_eq(c1, c2)) {
        v.kind = VerdictKind::Isomorphic;
        for (auto &s : r1.cert.steps) s.bindings.emplace_back("side", "left");
        for (auto &s : r2.cert.steps) s.bindings.emplace_back("side", "right");
        v.cert.initial = r1.cert.initial;
        v.cert.initial_right = r2.cert.initial;
        v.cert.final_form = v.left_form;
        v.cert.steps = r1.cert.steps;
        v.cert.append(r2.cert);
        return v;
    }

    std::string witness = detail::distinct_witness(c1, c2);
    if (!witness.empty()) {
        v.kind = VerdictKind::ProvablyDistinct;
        v.witness = witness;
        return v;
    }
    v.kind = VerdictKind::NotProvable;
    return v;
}

} // namespace factorcalc
