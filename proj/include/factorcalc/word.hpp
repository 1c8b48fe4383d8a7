#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factorcalc/certificate.hpp"
#include "factorcalc/expr.hpp"
#include "factorcalc/fdim.hpp"
#include "factorcalc/fnormal.hpp"
#include "factorcalc/printer.hpp"
#include "factorcalc/wellformed.hpp"

namespace factorcalc {

// ---------------------------------------------------------------------------
// The word model: canonical form of a free scaled product
// ---------------------------------------------------------------------------

/// A letter [t, Q_c]: opaque body at squared support t_sq, body rescaled by
/// the square root of c_sq. key = c_sq / t_sq is preserved by every trade.
struct Letter {
    std::string body;
    Rat c_sq{1};
    Rat t_sq{1};

    Rat key() const { return c_sq / t_sq; }
};

/// A letter family [t(k), Q_c], t(k)^2 = sup_first * sup_ratio^(k-1), with a
/// constant body rescale c_sq. Finite families are expanded during
/// normalization, so stored families are infinite.
struct FamilyLetter {
    std::string body;
    Rat sup_first{1};
    Rat sup_ratio{1};
    std::optional<std::uint64_t> count; // nullopt = infinite
    Rat c_sq{1};

    bool divergent() const { return !count && sup_ratio == 1; }
};

struct Word {
    // Pure class-F content; when set, every other field is empty/default.
    std::optional<FNormalForm> pure;

    std::optional<std::pair<std::string, Rat>> base; // opaque base (name, base_sq)
    bool f_anchored = false; // class-F II1 ambient; its excess over 1 lives in tail
    std::vector<Letter> letters;
    std::vector<FamilyLetter> families;
    ExtRat tail{0};     // nonnegative free-group budget
    bool stable = false; // absorbed LF(inf) context

    bool is_pure() const { return pure.has_value(); }

    /// rho = tail + sum of letter supports; invariant under free trade.
    ExtRat rho() const {
        ExtRat acc = tail;
        for (auto &l : letters) acc = acc + ExtRat(l.t_sq);
        return acc;
    }

    /// Budget in the all-letters-at-full-support view: tail + sum(t^2 - 1).
    /// May be negative, down to 1 - m exclusive (m = factor count).
    ExtRat extended_tail() const {
        ExtRat acc = tail;
        for (auto &l : letters) acc = acc + ExtRat(l.t_sq - 1);
        return acc;
    }

    void sort() {
        std::sort(letters.begin(), letters.end(), [](const Letter &a, const Letter &b) {
            if (a.body != b.body) return a.body < b.body;
            if (a.key() != b.key()) return a.key() < b.key();
            if (a.t_sq != b.t_sq) return a.t_sq > b.t_sq;
            return a.c_sq < b.c_sq;
        });
        std::sort(families.begin(), families.end(),
                  [](const FamilyLetter &a, const FamilyLetter &b) {
                      if (a.body != b.body) return a.body < b.body;
                      if (a.sup_first != b.sup_first) return a.sup_first > b.sup_first;
                      if (a.sup_ratio != b.sup_ratio) return a.sup_ratio < b.sup_ratio;
                      return a.c_sq < b.c_sq;
                  });
    }
};

// ---------------------------------------------------------------------------
// Word <-> expression
// ---------------------------------------------------------------------------

inline ExprPtr body_expr(const std::string &name, const Rat &c_sq) {
    if (c_sq == 1) return mk::opaque(name);
    return mk::rescale(mk::opaque(name), SqScale(c_sq));
}

inline ExprPtr word_to_expr(const Word &w) {
    if (w.pure) return to_expr(*w.pure);

    Word v = w;
    v.sort();

    bool need_sub = false;
    for (auto &l : v.letters)
        if (l.t_sq != 1) need_sub = true;
    if (!v.families.empty()) need_sub = true;
    if (v.base && !v.letters.empty()) need_sub = true;
    if (v.f_anchored) need_sub = true;

    std::vector<ExprPtr> base_parts;
    std::vector<Letter> sub_letters = v.letters;
    if (v.base) {
        base_parts.push_back(body_expr(v.base->first, v.base->second));
    } else if (need_sub && !v.f_anchored) {
        // promote the first full-support letter to carry the ambient
        auto it = std::find_if(sub_letters.begin(), sub_letters.end(),
                               [](const Letter &l) { return l.t_sq == 1; });
        if (it == sub_letters.end())
            throw EngineError(ErrorKind::Internal, "word with no ambient for its supports");
        base_parts.push_back(body_expr(it->body, it->c_sq));
        sub_letters.erase(it);
    }
    if (v.f_anchored) {
        if (v.tail.is_positive())
            base_parts.push_back(mk::lf(ExtRat(1) + v.tail));
        else
            base_parts.push_back(mk::rfactor());
    } else if (v.tail.is_positive()) {
        base_parts.push_back(mk::lf(v.tail));
    }
    if (v.stable) base_parts.push_back(mk::lf_inf());

    if (!need_sub) {
        std::vector<ExprPtr> parts = base_parts;
        for (auto &l : sub_letters) parts.push_back(body_expr(l.body, l.c_sq));
        // keep letters before the budget factors for readability
        std::vector<ExprPtr> ordered;
        for (auto &p : parts)
            if (!p->is<Fgf>()) ordered.push_back(p);
        for (auto &p : parts)
            if (p->is<Fgf>()) ordered.push_back(p);
        if (ordered.empty()) throw EngineError(ErrorKind::Internal, "empty word");
        if (ordered.size() == 1) return ordered[0];
        return mk::fprod(std::move(ordered));
    }

    ExprPtr base = base_parts.size() == 1 ? base_parts[0] : mk::fprod(base_parts);
    std::vector<LetterSpec> ls;
    for (auto &l : sub_letters)
        ls.push_back(mk::letter(SqScale(l.t_sq), body_expr(l.body, l.c_sq)));
    for (auto &f : v.families)
        ls.push_back(mk::family(f.sup_first, f.sup_ratio, f.count, body_expr(f.body, f.c_sq)));
    return mk::sub(std::move(base), std::move(ls));
}

inline std::string print_word(const Word &w) { return print(word_to_expr(w)); }

namespace detail {

/// Opaque factor leaf: N or scale(N, s).
inline std::optional<std::pair<std::string, Rat>> opaque_leaf(const ExprPtr &e) {
    if (auto *o = e->get_if<OpaqueAlg>()) return std::make_pair(o->name, Rat(1));
    if (auto *r = e->get_if<Rescaled>())
        if (auto *o = r->body->get_if<OpaqueAlg>())
            return std::make_pair(o->name, r->scale.sq());
    return std::nullopt;
}

} // namespace detail

/// Read a terminal (fully rewritten) expression as a word.
inline Word read_word(const ExprPtr &e) {
    Word w;
    if (is_pure_fclass(e)) {
        w.pure = normalize_fclass(e);
        return w;
    }

    const SubProd *sp = e->get_if<SubProd>();
    ExprPtr baseprod = sp ? sp->base : e;
    bool sub_rooted = sp != nullptr;

    if (sp) {
        for (auto &l : sp->letters) {
            if (auto *sl = std::get_if<ScaledLetter>(&l)) {
                auto leaf = detail::opaque_leaf(sl->body);
                if (!leaf)
                    throw EngineError(ErrorKind::UnsupportedCase,
                                      "unreduced letter body: " + print(sl->body));
                if (sl->scale.sq() > 1)
                    throw EngineError(ErrorKind::Internal, "letter above full support survived");
                w.letters.push_back({leaf->first, leaf->second, sl->scale.sq()});
            } else {
                const auto &fam = std::get<FamilySpec>(l);
                auto leaf = detail::opaque_leaf(fam.body);
                if (!leaf)
                    throw EngineError(ErrorKind::UnsupportedCase,
                                      "unreduced family body: " + print(fam.body));
                w.families.push_back({leaf->first, fam.first_sq, fam.ratio, fam.count, leaf->second});
            }
        }
    }

    std::vector<ExprPtr> factors;
    if (auto *p = baseprod->get_if<FreeProd>())
        factors = p->parts;
    else
        factors.push_back(baseprod);

    if (is_pure_fclass(baseprod)) {
        // class-F ambient anchoring the supports
        FNormalForm nf = normalize_fclass(baseprod);
        if (!nf.is_ii1_factor())
            throw EngineError(ErrorKind::NotAFactor, "subproduct base is not a II1 factor");
        w.f_anchored = true;
        w.tail = w.tail + (nf.fdim() - ExtRat(1));
    } else {
        for (auto &f : factors) {
            if (auto *lf = f->get_if<Fgf>()) {
                w.tail = w.tail + lf->r;
                continue;
            }
            auto leaf = detail::opaque_leaf(f);
            if (!leaf)
                throw EngineError(ErrorKind::UnsupportedCase,
                                  "unreduced factor: " + print(f));
            if (sub_rooted && !w.base)
                w.base = *leaf;
            else
                w.letters.push_back({leaf->first, leaf->second, Rat(1)});
        }
    }

    if (w.tail.is_inf()) {
        w.stable = true;
        w.tail = ExtRat(0);
        w.f_anchored = false;
        for (auto &l : w.letters) {
            l.c_sq = l.key();
            l.t_sq = 1;
        }
        for (auto &f : w.families) {
            if (f.sup_ratio == 1) {
                f.c_sq = f.c_sq / f.sup_first;
                f.sup_first = 1;
            }
        }
    }
    w.sort();
    return w;
}

// ---------------------------------------------------------------------------
// Rewrite rules
// ---------------------------------------------------------------------------

namespace detail {

struct Hit {
    ExprPtr replacement;
    std::string rule;
    std::string law;
    std::vector<std::pair<std::string, std::string>> bindings;
    std::string path;
};

inline ExprPtr scaled_body(const ExprPtr &body, const Rat &mult_sq) {
    if (mult_sq == 1) return body;
    if (auto *r = body->get_if<Rescaled>())
        return mk::rescale(r->body, SqScale(r->scale.sq() * mult_sq));
    return mk::rescale(body, SqScale(mult_sq));
}

inline ExprPtr prepend_budget(const ExprPtr &base, const ExtRat &r) {
    if (r.is_zero()) return base;
    std::vector<ExprPtr> parts;
    if (auto *p = base->get_if<FreeProd>())
        parts = p->parts;
    else
        parts.push_back(base);
    parts.push_back(mk::lf(r));
    return mk::fprod(std::move(parts));
}

inline bool is_canonical_fgf_or_budget(const ExprPtr &e) {
    return e->is<Fgf>();
}

/// Try a rewrite at this node (children are already stable).
inline std::optional<Hit> rule_at(const ExprPtr &e, const AssumptionSet &a) {
    // class-F normalization of any pure class-F node that is not canonical
    if (is_pure_fclass(e) && !e->is<Fgf>()) {
        FNormalForm nf = normalize_fclass(e);
        ExprPtr ne = to_expr(nf);
        if (!equal(ne, e)) {
            std::string rule = "fclass-normalize";
            std::string law = "class-F direct sums normalize to diffuse + matrix + atom summands";
            if (auto *p = e->get_if<FreeProd>()) {
                bool all_fgf = true;
                for (auto &part : p->parts)
                    if (!part->is<Fgf>()) all_fgf = false;
                if (all_fgf) {
                    rule = "fgf-additivity";
                    law = "LF(r) * LF(s) = LF(r + s)";
                } else {
                    rule = "fclass-free-product";
                    law = "class-F free product: atoms collide to a+b-1, diffuse parameter "
                          "solved from additive dimension";
                }
            } else if (e->is<Rescaled>()) {
                rule = e->get_if<Rescaled>()->body->is<Fgf>() ? "fgf-rescale" : "fclass-rescale";
                law = "LF(r) at scale t = LF(1 + (r - 1)/t^2); M_n at k/n = M_k";
            }
            return Hit{ne, rule, law, {}, ""};
        }
    }

    if (auto *rs = e->get_if<Rescaled>()) {
        if (rs->scale.is_one())
            return Hit{rs->body, "scale-identity", "X at scale 1 = X", {}, ""};
        if (auto *inner = rs->body->get_if<Rescaled>()) {
            return Hit{mk::rescale(inner->body, inner->scale * rs->scale), "scale-compose",
                       "(X_s)_t = X_(s t)", {{"s", inner->scale.str()}, {"t", rs->scale.str()}},
                       ""};
        }
        if (auto *p = rs->body->get_if<FreeProd>()) {
            bool plain = true;
            for (auto &part : p->parts)
                if (part->is<SubProd>() || part->is<FreeProd>()) plain = false;
            if (plain) {
                ExtRat r(0);
                std::vector<ExprPtr> factors;
                for (auto &part : p->parts) {
                    if (auto *lf = part->get_if<Fgf>())
                        r = r + lf->r;
                    else
                        factors.push_back(part);
                }
                Rat ssq = rs->scale.sq();
                std::size_t n = factors.size();
                if (n == 0)
                    throw EngineError(ErrorKind::Internal, "pure budget product under a scale");
                if (ssq < 1) {
                    // compression: every factor rescales and a free-group
                    // budget (n-1)(1/t^2 - 1) + r/t^2 appears
                    ExtRat rp = r.div(ssq) + ExtRat(Rat(n - 1) * (1 / ssq - 1));
                    std::vector<ExprPtr> parts;
                    for (auto &f : factors) parts.push_back(scaled_body(f, ssq));
                    if (rp.is_positive()) parts.push_back(mk::lf(rp));
                    ExprPtr ne = parts.size() == 1 ? parts[0] : mk::fprod(parts);
                    return Hit{ne, "compression-product",
                               "(A1 * ... * An * LF(r))_t = (A1)_t * ... * (An)_t * "
                               "LF(r/t^2 + (n - 1)(1/t^2 - 1))",
                               {{"t", rs->scale.str()}, {"n", std::to_string(n)}},
                               ""};
                }
                // amplification: supports drop below 1, so keep the first
                // factor as ambient and attach the rest as letters
                ExtRat rp = r.div(ssq);
                ExprPtr nbase = scaled_body(factors[0], ssq);
                if (rp.is_positive()) nbase = prepend_budget(nbase, rp);
                std::vector<LetterSpec> ls;
                for (std::size_t i = 1; i < factors.size(); ++i)
                    ls.push_back(mk::letter(SqScale(1 / ssq), factors[i]));
                ExprPtr ne = ls.empty() ? nbase : mk::sub(nbase, std::move(ls));
                return Hit{ne, "compression-product",
                           "(A1 * ... * An * LF(r))_t = ((A1)_t * LF(r/t^2)) sub [1/t, Ai]",
                           {{"t", rs->scale.str()}, {"n", std::to_string(n)}},
                           ""};
            }
        }
        if (auto *sp = rs->body->get_if<SubProd>()) {
            Rat ssq = rs->scale.sq();
            std::vector<LetterSpec> ls;
            for (auto &l : sp->letters) {
                if (auto *sl = std::get_if<ScaledLetter>(&l))
                    ls.push_back(mk::letter(SqScale(sl->scale.sq() / ssq), sl->body));
                else {
                    FamilySpec f = std::get<FamilySpec>(l);
                    f.first_sq = f.first_sq / ssq;
                    ls.push_back(f);
                }
            }
            return Hit{mk::sub(mk::rescale(sp->base, rs->scale), std::move(ls)),
                       "compression-sub", "(N sub [t, Q])_s = N_s sub [t/s, Q]",
                       {{"s", rs->scale.str()}}, ""};
        }
    }

    if (auto *p = e->get_if<FreeProd>()) {
        // flatten nested products
        for (std::size_t i = 0; i < p->parts.size(); ++i) {
            if (p->parts[i]->is<FreeProd>()) {
                std::vector<ExprPtr> parts;
                for (auto &q : p->parts) {
                    if (auto *ip = q->get_if<FreeProd>())
                        parts.insert(parts.end(), ip->parts.begin(), ip->parts.end());
                    else
                        parts.push_back(q);
                }
                return Hit{mk::fprod(std::move(parts)), "product-flatten",
                           "free products flatten", {}, ""};
            }
        }
        if (p->parts.size() == 1)
            return Hit{p->parts[0], "product-flatten", "free products flatten", {}, ""};
        // pull subproducts out: (M sub L) * X = (M * X) sub L
        for (std::size_t i = 0; i < p->parts.size(); ++i) {
            if (auto *sp = p->parts[i]->get_if<SubProd>()) {
                std::vector<ExprPtr> parts = p->parts;
                parts[i] = sp->base;
                return Hit{mk::sub(mk::fprod(std::move(parts)), sp->letters), "product-join",
                           "(M sub L) * X = (M * X) sub L", {}, ""};
            }
        }
        // absorb class-F free factors next to opaque content
        if (!is_pure_fclass(e)) {
            for (std::size_t i = 0; i < p->parts.size(); ++i) {
                const auto &part = p->parts[i];
                if (!part->is<Fgf>() && is_pure_fclass(part)) {
                    ExtRat d = normalize_fclass(part).fdim();
                    std::vector<ExprPtr> parts = p->parts;
                    if (d.is_zero())
                        parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
                    else
                        parts[i] = mk::lf(d);
                    ExprPtr ne = parts.size() == 1 ? parts[0] : mk::fprod(std::move(parts));
                    return Hit{ne, "product-absorb-f", "N * A = N * LF(fdim(A)) for class-F A",
                               {{"fdim", d.str()}}, ""};
                }
            }
            // merge budget factors
            std::size_t fgf_count = 0;
            for (auto &part : p->parts)
                if (part->is<Fgf>()) ++fgf_count;
            if (fgf_count >= 2) {
                ExtRat sum(0);
                std::vector<ExprPtr> parts;
                for (auto &part : p->parts) {
                    if (auto *lf = part->get_if<Fgf>())
                        sum = sum + lf->r;
                    else
                        parts.push_back(part);
                }
                parts.push_back(mk::lf(sum));
                ExprPtr ne = parts.size() == 1 ? parts[0] : mk::fprod(std::move(parts));
                return Hit{ne, "tail-merge", "LF(r) * LF(s) = LF(r + s)", {}, ""};
            }
        }
    }

    if (auto *sp = e->get_if<SubProd>()) {
        if (sp->letters.empty())
            return Hit{sp->base, "sub-empty", "a subproduct with no letters is its base", {}, ""};
        if (auto *inner = sp->base->get_if<SubProd>()) {
            std::vector<LetterSpec> ls = inner->letters;
            ls.insert(ls.end(), sp->letters.begin(), sp->letters.end());
            return Hit{mk::sub(inner->base, std::move(ls)), "sub-assoc",
                       "(N sub L1) sub L2 = N sub (L1, L2)", {}, ""};
        }
        for (std::size_t i = 0; i < sp->letters.size(); ++i) {
            const auto &item = sp->letters[i];
            if (auto *sl = std::get_if<ScaledLetter>(&item)) {
                Rat tsq = sl->scale.sq();
                // composite letter bodies flatten
                if (sl->body->is<FreeProd>() || sl->body->is<SubProd>()) {
                    std::vector<LetterSpec> ls(sp->letters.begin(),
                                               sp->letters.begin() +
                                                   static_cast<std::ptrdiff_t>(i));
                    auto splice_rest = [&](std::vector<LetterSpec> &out) {
                        out.insert(out.end(),
                                   sp->letters.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                   sp->letters.end());
                    };
                    if (auto *bp = sl->body->get_if<FreeProd>()) {
                        for (auto &part : bp->parts)
                            ls.push_back(mk::letter(SqScale(tsq), part));
                        splice_rest(ls);
                        return Hit{mk::sub(sp->base, std::move(ls)), "letter-flatten",
                                   "[t, X * Y] = [t, X], [t, Y]", {}, ""};
                    }
                    auto *bs = sl->body->get_if<SubProd>();
                    ls.push_back(mk::letter(SqScale(tsq), bs->base));
                    for (auto &il : bs->letters) {
                        if (auto *isl = std::get_if<ScaledLetter>(&il))
                            ls.push_back(mk::letter(SqScale(tsq * isl->scale.sq()), isl->body));
                        else {
                            FamilySpec f = std::get<FamilySpec>(il);
                            f.first_sq = f.first_sq * tsq;
                            ls.push_back(f);
                        }
                    }
                    splice_rest(ls);
                    return Hit{mk::sub(sp->base, std::move(ls)), "letter-flatten",
                               "[t, M sub [s, P]] = [t, M], [t s, P]", {}, ""};
                }
                // class-F letters absorb into the budget; a budget factor
                // LF(r), r <= 1, carries its parameter as its dimension
                if (is_pure_fclass(sl->body)) {
                    auto *lf = sl->body->get_if<Fgf>();
                    ExtRat d = lf ? lf->r : normalize_fclass(sl->body).fdim();
                    ExtRat contrib = d.is_zero() ? ExtRat(0) : ExtRat(tsq) * d;
                    std::vector<LetterSpec> ls = sp->letters;
                    ls.erase(ls.begin() + static_cast<std::ptrdiff_t>(i));
                    ExprPtr nbase = prepend_budget(sp->base, contrib);
                    ExprPtr ne = ls.empty() ? nbase : mk::sub(nbase, std::move(ls));
                    return Hit{ne, "letter-absorb",
                               "N sub [t, A] = N * LF(t^2 fdim(A)) for class-F A",
                               {{"t_sq", to_string(tsq)}, {"fdim", d.str()}}, ""};
                }
                // letters above full support desugar
                if (tsq > 1) {
                    std::vector<LetterSpec> ls = sp->letters;
                    ls[i] = mk::letter(SqScale(1), scaled_body(sl->body, 1 / tsq));
                    ExprPtr nbase = prepend_budget(sp->base, ExtRat(tsq - 1));
                    return Hit{mk::sub(nbase, std::move(ls)), "letter-desugar",
                               "[t, Q] = [1, Q_(1/t)] * LF(t^2 - 1) for t > 1",
                               {{"t_sq", to_string(tsq)}}, ""};
                }
            } else {
                const auto &fam = std::get<FamilySpec>(item);
                auto replace_with = [&](std::vector<LetterSpec> add, std::string rule,
                                        std::string law,
                                        std::vector<std::pair<std::string, std::string>> bind,
                                        ExtRat budget) -> Hit {
                    std::vector<LetterSpec> ls(sp->letters.begin(),
                                               sp->letters.begin() +
                                                   static_cast<std::ptrdiff_t>(i));
                    ls.insert(ls.end(), add.begin(), add.end());
                    ls.insert(ls.end(), sp->letters.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                              sp->letters.end());
                    ExprPtr nbase = prepend_budget(sp->base, budget);
                    ExprPtr ne = ls.empty() ? nbase : mk::sub(nbase, std::move(ls));
                    return Hit{ne, std::move(rule), std::move(law), std::move(bind), ""};
                };
                // class-F family bodies absorb with the closed-form sum
                if (is_pure_fclass(fam.body)) {
                    auto *lf = fam.body->get_if<Fgf>();
                    ExtRat d = lf ? lf->r : normalize_fclass(fam.body).fdim();
                    ExtRat s = sum_squares(fam);
                    ExtRat contrib = d.is_zero() ? ExtRat(0) : s * d;
                    return replace_with({}, "family-absorb",
                                        "N sub fam = N * LF(sum t(k)^2 fdim(Q))",
                                        {{"sum_sq", s.str()}, {"fdim", d.str()}}, contrib);
                }
                // composite family bodies split per factor
                if (fam.body->is<FreeProd>() || fam.body->is<SubProd>()) {
                    std::vector<LetterSpec> add;
                    ExtRat budget(0);
                    ExtRat s = sum_squares(fam);
                    auto add_part = [&](const Rat &mult_sq, const ExprPtr &part) {
                        if (auto *lf = part->get_if<Fgf>()) {
                            FamilySpec f = fam;
                            f.first_sq = fam.first_sq * mult_sq;
                            budget = budget + (lf->r.is_zero() ? ExtRat(0) : sum_squares(f) * lf->r);
                            return;
                        }
                        FamilySpec f = fam;
                        f.first_sq = fam.first_sq * mult_sq;
                        f.body = part;
                        add.push_back(f);
                    };
                    if (auto *bp = fam.body->get_if<FreeProd>()) {
                        for (auto &part : bp->parts) add_part(Rat(1), part);
                    } else {
                        auto *bs = fam.body->get_if<SubProd>();
                        add_part(Rat(1), bs->base);
                        for (auto &il : bs->letters) {
                            if (auto *isl = std::get_if<ScaledLetter>(&il))
                                add_part(isl->scale.sq(), isl->body);
                            else
                                throw EngineError(ErrorKind::UnsupportedCase,
                                                  "nested letter families");
                        }
                    }
                    (void)s;
                    return replace_with(std::move(add), "family-split",
                                        "a family of composite bodies splits per factor", {},
                                        budget);
                }
                // finite families expand into letters
                if (fam.count) {
                    if (*fam.count > 4096)
                        throw EngineError(ErrorKind::UnsupportedCase,
                                          "finite family too large to expand");
                    std::vector<LetterSpec> add;
                    Rat t = fam.first_sq;
                    for (std::uint64_t k = 0; k < *fam.count; ++k) {
                        add.push_back(mk::letter(SqScale(t), fam.body));
                        t *= fam.ratio;
                    }
                    return replace_with(std::move(add), "family-expand",
                                        "a finite letter family lists its letters",
                                        {{"count", std::to_string(*fam.count)}}, ExtRat(0));
                }
                // infinite families starting above full support desugar
                if (fam.first_sq > 1) {
                    if (fam.ratio == 1) {
                        FamilySpec f = fam;
                        f.first_sq = 1;
                        f.body = scaled_body(fam.body, 1 / fam.first_sq);
                        return replace_with({f}, "family-desugar",
                                            "[t, Q] = [1, Q_(1/t)] * LF(t^2 - 1) memberwise",
                                            {}, ExtRat::infinity());
                    }
                    std::vector<LetterSpec> add;
                    Rat t = fam.first_sq;
                    std::uint64_t m = 0;
                    while (t > 1) {
                        add.push_back(mk::letter(SqScale(t), fam.body));
                        t *= fam.ratio;
                        ++m;
                    }
                    FamilySpec f = fam;
                    f.first_sq = t;
                    add.push_back(f);
                    return replace_with(std::move(add), "family-desugar",
                                        "family members above full support peel off",
                                        {{"peeled", std::to_string(m)}}, ExtRat(0));
                }
            }
        }
        // an all-full-support subproduct over a class-F ambient releases
        if (is_pure_fclass(sp->base)) {
            bool all_one = true;
            for (auto &item : sp->letters) {
                auto *sl = std::get_if<ScaledLetter>(&item);
                if (!sl || sl->scale.sq() != 1) all_one = false;
            }
            if (all_one) {
                std::vector<ExprPtr> parts;
                parts.push_back(sp->base);
                for (auto &item : sp->letters)
                    parts.push_back(std::get<ScaledLetter>(item).body);
                return Hit{mk::fprod(std::move(parts)), "sub-release",
                           "N sub [1, Q] = N * Q", {}, ""};
            }
        }
    }

    (void)a;
    return std::nullopt;
}

/// Innermost-leftmost scan. Children first, then the node itself.
inline std::optional<Hit> rewrite_once(const ExprPtr &e, const AssumptionSet &a,
                                       const std::string &path = "/") {
    auto kids = children(e);
    for (std::size_t i = 0; i < kids.size(); ++i) {
        auto sub = rewrite_once(kids[i], a, path + std::to_string(i) + "/");
        if (sub) {
            sub->replacement = with_child(e, i, sub->replacement);
            return sub;
        }
    }
    auto hit = rule_at(e, a);
    if (hit) hit->path = path;
    return hit;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Stable absorption
// ---------------------------------------------------------------------------

/// A word carries an LF(inf) context when its budget is infinite, when some
/// body or the base is assumed stable, or when an infinite family with
/// divergent squared supports is present. Infinite families with summable
/// supports do NOT license absorption; that identification is exactly the
/// open question the collapsed mode models.
inline bool absorption_licensed(const Word &w, const AssumptionSet &a) {
    if (w.is_pure()) return false;
    if (w.stable || w.tail.is_inf()) return true;
    if (w.base && a.is_stable(w.base->first)) return true;
    for (auto &l : w.letters)
        if (a.is_stable(l.body)) return true;
    for (auto &f : w.families) {
        if (a.is_stable(f.body)) return true;
        if (f.divergent()) return true;
    }
    return false;
}

namespace detail {

/// Lift every letter to full support against the LF(inf) context.
inline Word lift_stable(Word w) {
    w.stable = true;
    w.tail = ExtRat(0);
    w.f_anchored = false;
    for (auto &l : w.letters) {
        l.c_sq = l.key();
        l.t_sq = 1;
    }
    for (auto &f : w.families) {
        if (f.sup_ratio == 1) {
            f.c_sq = f.c_sq / f.sup_first;
            f.sup_first = 1;
        }
    }
    w.sort();
    return w;
}

inline bool is_lifted_form(const Word &w) {
    if (!w.stable) return false;
    for (auto &l : w.letters)
        if (l.t_sq != 1) return false;
    return true;
}

} // namespace detail

// ---------------------------------------------------------------------------
// toWord driver
// ---------------------------------------------------------------------------

struct WordResult {
    Word word;
    Certificate cert;
};

/// Normalize an expression to its canonical word, recording every rewrite.
inline WordResult to_word(const ExprPtr &input, const AssumptionSet &a) {
    require_well_formed(input);
    Certificate cert;
    cert.initial = print(input);

    ExprPtr state = input;
    for (int guard = 0; guard < 100000; ++guard) {
        auto hit = detail::rewrite_once(state, a);
        if (!hit) break;
        CertStep step;
        step.rule = hit->rule;
        step.law = hit->law;
        step.bindings = hit->bindings;
        step.bindings.emplace_back("path", hit->path);
        step.before = print(state);
        state = hit->replacement;
        step.after = print(state);
        cert.steps.push_back(std::move(step));
        if (guard == 99999)
            throw EngineError(ErrorKind::Internal, "rewrite loop did not terminate");
    }

    Word w = read_word(state);

    // settle on the sorted printed form so later word-level steps chain
    if (!w.is_pure()) {
        std::string sorted_text = print_word(w);
        if (sorted_text != print(state)) {
            CertStep step;
            step.rule = "canonical-order";
            step.law = "letters and factors sort deterministically";
            step.before = print(state);
            state = word_to_expr(w);
            step.after = sorted_text;
            cert.steps.push_back(std::move(step));
        }
    }

    if (absorption_licensed(w, a) && !w.is_pure() && !detail::is_lifted_form(w)) {
        Word lifted = detail::lift_stable(w);
        CertStep step;
        step.rule = "stable-absorption";
        step.law = "a stable context absorbs: every letter lifts to full support against LF(inf)";
        step.before = print(state);
        state = word_to_expr(lifted);
        step.after = print(state);
        cert.steps.push_back(std::move(step));
        w = lifted;
    }

    cert.final_form = print_word(w);
    return {std::move(w), std::move(cert)};
}

// ---------------------------------------------------------------------------
// Word operations
// ---------------------------------------------------------------------------

/// Deterministic redistribution of the letter supports from the invariants
/// alone: in sorted order each letter lifts to full support while more than
/// one unit of pool remains; once the pool drops to 1 or below, the
/// remaining letters share it equally (a full lift there would starve the
/// others, whose supports must stay positive). Depends only on the letter
/// keys and rho, which free trade preserves.
inline Word water_fill(Word w) {
    if (w.is_pure() || w.stable || w.letters.empty()) return w;
    w.sort();
    ExtRat pool_ext = w.rho();
    if (pool_ext.is_inf())
        throw EngineError(ErrorKind::Internal, "infinite pool on a finite word");
    Rat pool = pool_ext.value();
    std::size_t k = w.letters.size();
    for (auto &l : w.letters) {
        Rat t;
        if (pool > 1 || k == 1)
            t = pool < 1 ? pool : Rat(1);
        else
            t = pool / Rat(k);
        l.c_sq = l.key() * t;
        l.t_sq = t;
        pool -= t;
        --k;
    }
    w.tail = ExtRat(pool);
    // a class-F ambient with every support full is itself a free factor
    if (w.f_anchored && w.families.empty()) {
        bool all_one = true;
        for (auto &l : w.letters)
            if (l.t_sq != 1) all_one = false;
        if (all_one) {
            w.f_anchored = false;
            w.tail = w.tail + ExtRat(1);
        }
    }
    return w;
}

struct WordStep {
    Word word;
    std::optional<CertStep> step;
};

Word read_word(const ExprPtr &e);

/// Round-trip through the printed form. Word operations address letters by
/// their index in this form, so recorded steps replay against the text.
inline Word text_normal(const Word &w) {
    return read_word(word_to_expr(w));
}

/// Canonical representative: desugared, absorbed, maximally lifted.
inline WordStep canonicalize_word(const Word &w0) {
    Word w = text_normal(w0);
    Word filled = water_fill(w);
    filled.sort();
    WordStep out{filled, std::nullopt};
    std::string before = print_word(w);
    std::string after = print_word(filled);
    if (before != after) {
        CertStep step;
        step.rule = "canonical-lift";
        step.law = "free trade preserves keys and rho; supports redistribute toward 1";
        step.before = before;
        step.after = after;
        out.step = step;
    }
    return out;
}

/// Single free trade: letter support t_sq -> new_t_sq, body rescaled by the
/// ratio, budget adjusted by t_sq - new_t_sq. The letter is addressed by its
/// index in the sorted letter list.
inline WordStep trade_step(const Word &w, std::size_t letter_idx, const Rat &new_t_sq) {
    if (w.is_pure())
        throw EngineError(ErrorKind::PreconditionViolated, "pure class-F words have no letters");
    if (w.stable)
        throw EngineError(ErrorKind::PreconditionViolated,
                          "stable words trade freely; supports carry no information");
    if (new_t_sq <= 0)
        throw EngineError(ErrorKind::PreconditionViolated, "support must stay positive");

    Word v = text_normal(w);
    if (letter_idx >= v.letters.size())
        throw EngineError(ErrorKind::PreconditionViolated, "no such letter");
    Letter &l = v.letters[letter_idx];
    std::string body = l.body;
    Rat old_t = l.t_sq;
    ExtRat new_tail = v.tail + ExtRat(old_t) - ExtRat(new_t_sq);
    if (new_tail < 0) {
        ExtRat deficit = ExtRat(new_t_sq) - ExtRat(old_t) - v.tail;
        throw EngineError(ErrorKind::PreconditionViolated,
                          "trade needs budget " + (ExtRat(new_t_sq) - ExtRat(old_t)).str() +
                              " but only " + v.tail.str() + " is available (deficit " +
                              deficit.str() + ")");
    }
    l.c_sq = l.c_sq * new_t_sq / old_t;
    l.t_sq = new_t_sq;
    v.tail = new_tail;
    if (l.t_sq > 1) { // desugar back into canonical range
        v.tail = v.tail + ExtRat(l.t_sq - 1);
        l.c_sq = l.c_sq / l.t_sq;
        l.t_sq = 1;
    }
    v.sort();

    CertStep step;
    step.rule = "free-trade";
    step.law = "[t, Q] with budget r = [s, Q_(s/t)] with budget r + t^2 - s^2";
    step.bindings = {{"letter", body},
                     {"index", std::to_string(letter_idx)},
                     {"from_sq", to_string(old_t)},
                     {"to_sq", to_string(new_t_sq)}};
    step.before = print_word(text_normal(w));
    step.after = print_word(v);
    return {std::move(v), std::move(step)};
}

/// Simultaneous trade of several letters; defined when the aggregate budget
/// stays nonnegative. Decreases run before increases, so every intermediate
/// single step is legal whenever the aggregate is.
inline WordStep trade_to_target(const Word &w, const std::vector<std::pair<std::size_t, Rat>> &targets) {
    if (w.is_pure())
        throw EngineError(ErrorKind::PreconditionViolated, "pure class-F words have no letters");
    if (w.stable)
        throw EngineError(ErrorKind::PreconditionViolated,
                          "stable words trade freely; supports carry no information");
    Word v = text_normal(w);
    ExtRat delta(0);
    for (auto &[idx, target] : targets) {
        if (idx >= v.letters.size())
            throw EngineError(ErrorKind::PreconditionViolated, "no such letter");
        if (target <= 0)
            throw EngineError(ErrorKind::PreconditionViolated, "support must stay positive");
        delta = delta + ExtRat(v.letters[idx].t_sq) - ExtRat(target);
    }
    ExtRat new_tail = v.tail + delta;
    if (new_tail < 0)
        throw EngineError(ErrorKind::PreconditionViolated,
                          "aggregate trade leaves budget " + new_tail.str());

    std::vector<std::pair<std::string, std::string>> bindings;
    for (auto &[idx, target] : targets) {
        Letter &l = v.letters[idx];
        bindings.emplace_back(l.body + "[" + std::to_string(idx) + "]",
                              to_string(l.t_sq) + " -> " + to_string(target));
        l.c_sq = l.c_sq * target / l.t_sq;
        l.t_sq = target;
    }
    v.tail = new_tail;
    for (auto &l : v.letters) {
        if (l.t_sq > 1) {
            v.tail = v.tail + ExtRat(l.t_sq - 1);
            l.c_sq = l.c_sq / l.t_sq;
            l.t_sq = 1;
        }
    }
    v.sort();

    CertStep step;
    step.rule = "free-trade-multi";
    step.law = "simultaneous trade: budget' = budget + sum(t_i^2 - s_i^2) >= 0";
    step.bindings = std::move(bindings);
    step.before = print_word(text_normal(w));
    step.after = print_word(v);
    return {std::move(v), std::move(step)};
}

/// Rescale a word by reusing the rewrite pipeline on scale(word, s).
inline WordResult rescale_word(const Word &w, const SqScale &s, const AssumptionSet &a) {
    ExprPtr e = mk::rescale(word_to_expr(w), s);
    return to_word(e, a);
}

/// Explicit stable absorption; errors when no hypothesis licenses it.
inline WordStep absorb_stable(const Word &w, const AssumptionSet &a) {
    if (!absorption_licensed(w, a))
        throw EngineError(ErrorKind::NotLicensed,
                          "no stability assumption, infinite budget, or divergent family");
    Word v = text_normal(w);
    Word lifted = detail::lift_stable(v);
    CertStep step;
    step.rule = "stable-absorption";
    step.law = "a stable context absorbs: every letter lifts to full support against LF(inf)";
    step.before = print_word(v);
    step.after = print_word(lifted);
    return {std::move(lifted), std::move(step)};
}

// ---------------------------------------------------------------------------
// Canonical equality
// ---------------------------------------------------------------------------

namespace detail {

/// Base-neutral view: the base is one more full-support factor.
inline Word neutral_view(const Word &w) {
    Word v = w;
    if (v.base) {
        v.letters.push_back({v.base->first, v.base->second, Rat(1)});
        v.base.reset();
    }
    v.sort();
    return v;
}

} // namespace detail

/// Canonical comparison data for a word, base-neutral and fill-normalized.
inline std::string canonical_word_key(const Word &w) {
    if (w.pure) {
        return "pure:" + print(to_expr(*w.pure));
    }
    Word v = water_fill(detail::neutral_view(w));
    v.sort();
    std::string out;
    out += w.stable ? "stable;" : "";
    out += v.f_anchored ? "anchored;" : "";
    for (auto &l : v.letters) {
        out += "L(" + l.body + "," + to_string(l.key());
        if (!v.stable) out += "," + to_string(l.t_sq);
        out += ");";
    }
    for (auto &f : v.families) {
        out += "F(" + f.body + ",";
        out += f.count ? std::to_string(*f.count) : "inf";
        if (v.stable)
            out += "," + to_string(f.c_sq / f.sup_first) + "," + to_string(f.sup_ratio);
        else
            out += "," + to_string(f.c_sq) + "," + to_string(f.sup_first) + "," +
                   to_string(f.sup_ratio);
        out += ");";
    }
    if (!v.stable) out += "tail:" + v.tail.str();
    return out;
}

inline bool canonical_word_eq(const Word &a, const Word &b) {
    if (a.is_pure() != b.is_pure()) return false;
    if (a.is_pure()) return *a.pure == *b.pure;
    return canonical_word_key(a) == canonical_word_key(b);
}

} // namespace factorcalc
