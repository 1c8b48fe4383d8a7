#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "factorcalc/rational.hpp"

namespace factorcalc {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// L(F_r). Surface syntax requires r > 1 (or inf); values 0 <= r <= 1 are
/// accepted only as free-product budget factors (wellFormed checks context).
struct Fgf {
    ExtRat r;
};

/// Diffuse hyperfinite algebra; `factor` marks the hyperfinite II1 factor R,
/// otherwise the L-infinity flavour (identified with R at fdim level only).
struct DiffuseHf {
    bool factor = false;
};

/// M_n(C); n = 1 is the scalars C.
struct MatrixAlg {
    std::uint64_t n = 1;
};

/// Abstract II1-factor symbol.
struct OpaqueAlg {
    std::string name;
};

struct DirectSum {
    std::vector<std::pair<Rat, ExprPtr>> summands; // (weight, algebra)
};

struct FreeProd {
    std::vector<ExprPtr> parts;
};

struct Rescaled {
    ExprPtr body;
    SqScale scale;
};

/// Letter family [t(k), body], t(k)^2 = first_sq * ratio^(k-1), k = 1..count.
struct FamilySpec {
    Rat first_sq;
    Rat ratio;
    std::optional<std::uint64_t> count; // nullopt = infinite
    ExprPtr body;
};

struct ScaledLetter {
    SqScale scale; // squared support trace
    ExprPtr body;
};

using LetterSpec = std::variant<ScaledLetter, FamilySpec>;

struct SubProd {
    ExprPtr base;
    std::vector<LetterSpec> letters;
};

class Expr {
  public:
    using Node =
        std::variant<Fgf, DiffuseHf, MatrixAlg, OpaqueAlg, DirectSum, FreeProd, Rescaled, SubProd>;

    explicit Expr(Node n) : node_(std::move(n)) {}

    const Node &node() const { return node_; }

    template <class T> const T *get_if() const { return std::get_if<T>(&node_); }
    template <class T> bool is() const { return std::holds_alternative<T>(node_); }

  private:
    Node node_;
};

namespace mk {

inline ExprPtr lf(ExtRat r) { return std::make_shared<Expr>(Fgf{std::move(r)}); }
inline ExprPtr lf(const Rat &r) { return lf(ExtRat(r)); }
inline ExprPtr lf(int r) { return lf(ExtRat(r)); }
inline ExprPtr lf_inf() { return lf(ExtRat::infinity()); }
inline ExprPtr hf() { return std::make_shared<Expr>(DiffuseHf{false}); }
inline ExprPtr rfactor() { return std::make_shared<Expr>(DiffuseHf{true}); }
inline ExprPtr mat(std::uint64_t n) { return std::make_shared<Expr>(MatrixAlg{n}); }
inline ExprPtr scalars() { return mat(1); }
inline ExprPtr opaque(std::string name) { return std::make_shared<Expr>(OpaqueAlg{std::move(name)}); }
inline ExprPtr dsum(std::vector<std::pair<Rat, ExprPtr>> ss) {
    return std::make_shared<Expr>(DirectSum{std::move(ss)});
}
inline ExprPtr fprod(std::vector<ExprPtr> parts) {
    return std::make_shared<Expr>(FreeProd{std::move(parts)});
}
inline ExprPtr rescale(ExprPtr body, SqScale s) {
    return std::make_shared<Expr>(Rescaled{std::move(body), std::move(s)});
}
inline ExprPtr sub(ExprPtr base, std::vector<LetterSpec> letters) {
    return std::make_shared<Expr>(SubProd{std::move(base), std::move(letters)});
}
inline LetterSpec letter(SqScale s, ExprPtr body) { return ScaledLetter{std::move(s), std::move(body)}; }
inline LetterSpec family(Rat first_sq, Rat ratio, std::optional<std::uint64_t> count, ExprPtr body) {
    return FamilySpec{std::move(first_sq), std::move(ratio), count, std::move(body)};
}

} // namespace mk

/// Global session assumptions: the set of opaque symbols assumed stable
/// (Q ~ Q * L(F_inf)) and the identification mode for free group factors.
enum class Mode { Distinct, Collapsed };

struct AssumptionSet {
    std::set<std::string> stable;
    Mode mode = Mode::Distinct;

    bool is_stable(const std::string &name) const { return stable.count(name) > 0; }
};

// ---------------------------------------------------------------------------
// Structural traversal and comparison
// ---------------------------------------------------------------------------

/// Children in a fixed order; used for rewrite paths. SubProd children are
/// [base, letter bodies...] (family bodies included, in letter order).
inline std::vector<ExprPtr> children(const ExprPtr &e) {
    std::vector<ExprPtr> out;
    if (auto *d = e->get_if<DirectSum>()) {
        for (auto &s : d->summands) out.push_back(s.second);
    } else if (auto *p = e->get_if<FreeProd>()) {
        out = p->parts;
    } else if (auto *r = e->get_if<Rescaled>()) {
        out.push_back(r->body);
    } else if (auto *s = e->get_if<SubProd>()) {
        out.push_back(s->base);
        for (auto &l : s->letters) {
            if (auto *sl = std::get_if<ScaledLetter>(&l))
                out.push_back(sl->body);
            else
                out.push_back(std::get<FamilySpec>(l).body);
        }
    }
    return out;
}

/// Rebuild a node with child i replaced.
inline ExprPtr with_child(const ExprPtr &e, std::size_t i, ExprPtr c) {
    if (auto *d = e->get_if<DirectSum>()) {
        DirectSum n = *d;
        n.summands.at(i).second = std::move(c);
        return std::make_shared<Expr>(std::move(n));
    }
    if (auto *p = e->get_if<FreeProd>()) {
        FreeProd n = *p;
        n.parts.at(i) = std::move(c);
        return std::make_shared<Expr>(std::move(n));
    }
    if (auto *r = e->get_if<Rescaled>()) {
        if (i != 0) throw EngineError(ErrorKind::Internal, "bad child index");
        return mk::rescale(std::move(c), r->scale);
    }
    if (auto *s = e->get_if<SubProd>()) {
        SubProd n = *s;
        if (i == 0) {
            n.base = std::move(c);
        } else {
            auto &l = n.letters.at(i - 1);
            if (auto *sl = std::get_if<ScaledLetter>(&l))
                sl->body = std::move(c);
            else
                std::get<FamilySpec>(l).body = std::move(c);
        }
        return std::make_shared<Expr>(std::move(n));
    }
    throw EngineError(ErrorKind::Internal, "with_child on a leaf");
}

inline int variant_rank(const Expr &e) { return static_cast<int>(e.node().index()); }

inline int compare_ext(const ExtRat &a, const ExtRat &b) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
}

inline int compare_rat(const Rat &a, const Rat &b) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
}

int compare(const ExprPtr &a, const ExprPtr &b);

inline int compare_letter(const LetterSpec &a, const LetterSpec &b) {
    bool fa = std::holds_alternative<FamilySpec>(a);
    bool fb = std::holds_alternative<FamilySpec>(b);
    if (fa != fb) return fa ? 1 : -1;
    if (!fa) {
        const auto &x = std::get<ScaledLetter>(a);
        const auto &y = std::get<ScaledLetter>(b);
        if (int c = compare(x.body, y.body)) return c;
        return compare_rat(x.scale.sq(), y.scale.sq());
    }
    const auto &x = std::get<FamilySpec>(a);
    const auto &y = std::get<FamilySpec>(b);
    if (int c = compare(x.body, y.body)) return c;
    if (int c = compare_rat(x.first_sq, y.first_sq)) return c;
    if (int c = compare_rat(x.ratio, y.ratio)) return c;
    if (x.count.has_value() != y.count.has_value()) return x.count.has_value() ? -1 : 1;
    if (x.count && *x.count != *y.count) return *x.count < *y.count ? -1 : 1;
    return 0;
}

/// Total structural order; drives canonical sorting and exact equality.
inline int compare(const ExprPtr &a, const ExprPtr &b) {
    if (a == b) return 0;
    if (int c = variant_rank(*a) - variant_rank(*b)) return c < 0 ? -1 : 1;
    if (auto *x = a->get_if<Fgf>()) return compare_ext(x->r, b->get_if<Fgf>()->r);
    if (auto *x = a->get_if<DiffuseHf>()) {
        auto *y = b->get_if<DiffuseHf>();
        return (x->factor ? 1 : 0) - (y->factor ? 1 : 0);
    }
    if (auto *x = a->get_if<MatrixAlg>()) {
        auto *y = b->get_if<MatrixAlg>();
        if (x->n != y->n) return x->n < y->n ? -1 : 1;
        return 0;
    }
    if (auto *x = a->get_if<OpaqueAlg>()) return x->name.compare(b->get_if<OpaqueAlg>()->name);
    if (auto *x = a->get_if<DirectSum>()) {
        auto *y = b->get_if<DirectSum>();
        if (x->summands.size() != y->summands.size())
            return x->summands.size() < y->summands.size() ? -1 : 1;
        for (std::size_t i = 0; i < x->summands.size(); ++i) {
            if (int c = compare_rat(x->summands[i].first, y->summands[i].first)) return c;
            if (int c = compare(x->summands[i].second, y->summands[i].second)) return c;
        }
        return 0;
    }
    if (auto *x = a->get_if<FreeProd>()) {
        auto *y = b->get_if<FreeProd>();
        if (x->parts.size() != y->parts.size()) return x->parts.size() < y->parts.size() ? -1 : 1;
        for (std::size_t i = 0; i < x->parts.size(); ++i)
            if (int c = compare(x->parts[i], y->parts[i])) return c;
        return 0;
    }
    if (auto *x = a->get_if<Rescaled>()) {
        auto *y = b->get_if<Rescaled>();
        if (int c = compare(x->body, y->body)) return c;
        return compare_rat(x->scale.sq(), y->scale.sq());
    }
    auto *x = a->get_if<SubProd>();
    auto *y = b->get_if<SubProd>();
    if (int c = compare(x->base, y->base)) return c;
    if (x->letters.size() != y->letters.size()) return x->letters.size() < y->letters.size() ? -1 : 1;
    for (std::size_t i = 0; i < x->letters.size(); ++i)
        if (int c = compare_letter(x->letters[i], y->letters[i])) return c;
    return 0;
}

inline bool equal(const ExprPtr &a, const ExprPtr &b) { return compare(a, b) == 0; }

/// True when the expression mentions no opaque symbol and no subproduct node.
inline bool is_pure_fclass(const ExprPtr &e) {
    if (e->is<OpaqueAlg>() || e->is<SubProd>()) return false;
    for (auto &c : children(e))
        if (!is_pure_fclass(c)) return false;
    return true;
}

inline void collect_opaques(const ExprPtr &e, std::set<std::string> &out) {
    if (auto *o = e->get_if<OpaqueAlg>()) {
        out.insert(o->name);
        return;
    }
    for (auto &c : children(e)) collect_opaques(c, out);
}

} // namespace factorcalc
