#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "factorcalc/expr.hpp"
#include "factorcalc/fdim.hpp"

namespace factorcalc {

enum class DiffuseKind { Fgf, Hyperfinite, HyperfiniteFactor };

struct DiffusePart {
    DiffuseKind kind;
    ExtRat r;   // interpolation parameter, meaningful only for kind == Fgf
    Rat weight; // trace of the central support
};

struct MatrixBlock {
    Rat weight;
    std::uint64_t n = 2; // n >= 2
};

/// Canonical form of a class-F algebra: diffuse summands, matrix blocks and
/// scalar atoms with exact trace weights summing to 1. Free products always
/// normalize to at most one diffuse summand and no blocks; general direct
/// sums may carry several diffuse summands (they are distinguished by the
/// center and must not be merged).
struct FNormalForm {
    std::vector<DiffusePart> diffuse;
    std::vector<MatrixBlock> blocks;
    std::vector<Rat> atoms; // descending

    bool is_scalars() const {
        return diffuse.empty() && blocks.empty() && atoms.size() == 1;
    }
    bool is_two_atoms() const {
        return diffuse.empty() && blocks.empty() && atoms.size() == 2;
    }
    std::size_t summand_count() const {
        return diffuse.size() + blocks.size() + atoms.size();
    }

    /// II1 factor: a single full-weight interpolated free group factor or R.
    bool is_ii1_factor() const {
        return summand_count() == 1 && diffuse.size() == 1 &&
               (diffuse[0].kind == DiffuseKind::Fgf ||
                diffuse[0].kind == DiffuseKind::HyperfiniteFactor);
    }
    /// Any factor, including the finite type I ones M_n and C.
    bool is_factor() const {
        if (is_ii1_factor()) return true;
        if (summand_count() != 1) return false;
        return blocks.size() == 1 || atoms.size() == 1;
    }

    ExtRat fdim() const {
        ExtRat acc(1);
        for (auto &d : diffuse) {
            ExtRat f = d.kind == DiffuseKind::Fgf ? d.r : ExtRat(1);
            if (f.is_inf()) return ExtRat::infinity();
            acc = acc + ExtRat(d.weight * d.weight * (f.value() - 1));
        }
        for (auto &b : blocks) {
            Rat n(b.n);
            acc = acc + ExtRat(b.weight * b.weight * (-1 / (n * n)));
        }
        for (auto &a : atoms) acc = acc + ExtRat(-a * a);
        return acc;
    }

    Rat total_weight() const {
        Rat w = 0;
        for (auto &d : diffuse) w += d.weight;
        for (auto &b : blocks) w += b.weight;
        for (auto &a : atoms) w += a;
        return w;
    }

    void sort() {
        std::sort(diffuse.begin(), diffuse.end(), [](const DiffusePart &x, const DiffusePart &y) {
            if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind);
            if (x.r != y.r) return y.r < x.r;
            return y.weight < x.weight;
        });
        std::sort(blocks.begin(), blocks.end(), [](const MatrixBlock &x, const MatrixBlock &y) {
            if (x.n != y.n) return x.n > y.n;
            return x.weight > y.weight;
        });
        std::sort(atoms.begin(), atoms.end(), [](const Rat &x, const Rat &y) { return x > y; });
    }

    friend bool operator==(const FNormalForm &a, const FNormalForm &b) {
        if (a.atoms != b.atoms) return false;
        if (a.blocks.size() != b.blocks.size() || a.diffuse.size() != b.diffuse.size()) return false;
        for (std::size_t i = 0; i < a.blocks.size(); ++i)
            if (a.blocks[i].n != b.blocks[i].n || a.blocks[i].weight != b.blocks[i].weight)
                return false;
        for (std::size_t i = 0; i < a.diffuse.size(); ++i) {
            const auto &x = a.diffuse[i], &y = b.diffuse[i];
            if (x.kind != y.kind || x.weight != y.weight) return false;
            if (x.kind == DiffuseKind::Fgf && x.r != y.r) return false;
        }
        return true;
    }
    friend bool operator!=(const FNormalForm &a, const FNormalForm &b) { return !(a == b); }
};

inline FNormalForm nf_scalars() {
    FNormalForm nf;
    nf.atoms.push_back(Rat(1));
    return nf;
}

inline FNormalForm nf_fgf(ExtRat r) {
    FNormalForm nf;
    nf.diffuse.push_back({DiffuseKind::Fgf, std::move(r), Rat(1)});
    return nf;
}

inline FNormalForm nf_hyperfinite(bool factor) {
    FNormalForm nf;
    nf.diffuse.push_back({factor ? DiffuseKind::HyperfiniteFactor : DiffuseKind::Hyperfinite,
                          ExtRat(1), Rat(1)});
    return nf;
}

inline ExprPtr diffuse_leaf(const DiffusePart &d) {
    switch (d.kind) {
    case DiffuseKind::Fgf: return mk::lf(d.r);
    case DiffuseKind::Hyperfinite: return mk::hf();
    case DiffuseKind::HyperfiniteFactor: return mk::rfactor();
    }
    throw EngineError(ErrorKind::Internal, "bad diffuse kind");
}

/// Canonical expression of a normal form (single leaf or a direct sum).
inline ExprPtr to_expr(const FNormalForm &nf) {
    if (nf.summand_count() == 0)
        throw EngineError(ErrorKind::Internal, "empty normal form");
    if (nf.summand_count() == 1) {
        if (!nf.diffuse.empty()) return diffuse_leaf(nf.diffuse[0]);
        if (!nf.blocks.empty()) return mk::mat(nf.blocks[0].n);
        return mk::mat(1);
    }
    std::vector<std::pair<Rat, ExprPtr>> ss;
    for (auto &d : nf.diffuse) ss.emplace_back(d.weight, diffuse_leaf(d));
    for (auto &b : nf.blocks) ss.emplace_back(b.weight, mk::mat(b.n));
    for (auto &a : nf.atoms) ss.emplace_back(a, mk::mat(1));
    return mk::dsum(std::move(ss));
}

FNormalForm normalize_fclass(const ExprPtr &e);

/// Free product kernel on normal forms. Atoms of the product take one atom
/// from every factor and collide to sum - (n-1) when positive; the remaining
/// weight is a single diffuse summand whose parameter is solved from
/// additivity of the free dimension. Two two-atom abelian inputs always
/// yield a hyperfinite diffuse part. Computing the n-fold product directly
/// keeps it defined in cases where a pairwise fold would hit an intermediate
/// parameter below 1.
inline FNormalForm free_product_many(std::vector<FNormalForm> parts) {
    std::erase_if(parts, [](const FNormalForm &nf) { return nf.is_scalars(); });
    if (parts.empty()) return nf_scalars();
    if (parts.size() == 1) return parts[0];

    FNormalForm out;
    Rat collided = 0;
    Rat collided_sq = 0;
    bool any_empty = false;
    for (auto &p : parts)
        if (p.atoms.empty()) any_empty = true;
    if (!any_empty) {
        // one atom from each factor; depth-first over the choices
        std::vector<std::size_t> idx(parts.size(), 0);
        while (true) {
            Rat sum = 0;
            for (std::size_t i = 0; i < parts.size(); ++i) sum += parts[i].atoms[idx[i]];
            Rat c = sum - Rat(parts.size() - 1);
            if (c > 0) {
                out.atoms.push_back(c);
                collided += c;
                collided_sq += c * c;
            }
            std::size_t k = parts.size();
            while (k > 0 && ++idx[k - 1] == parts[k - 1].atoms.size()) idx[--k] = 0;
            if (k == 0) break;
        }
    }

    Rat w = 1 - collided;
    if (w <= 0)
        throw EngineError(ErrorKind::UnsupportedCase, "free product leaves no diffuse mass");

    ExtRat target(0);
    for (auto &p : parts) target = target + p.fdim();
    ExtRat solved;
    if (target.is_inf()) {
        solved = ExtRat::infinity();
    } else {
        // 1 + w^2 (r - 1) - sum c^2 = sum of the factors' free dimensions
        solved = ExtRat(1 + (target.value() - 1 + collided_sq) / (w * w));
    }

    bool two_by_two = parts.size() == 2 && parts[0].is_two_atoms() && parts[1].is_two_atoms();
    DiffusePart d;
    d.weight = w;
    if (two_by_two) {
        if (solved != ExtRat(1))
            throw EngineError(ErrorKind::Internal, "two-atom product parameter must solve to 1");
        d.kind = DiffuseKind::Hyperfinite;
        d.r = ExtRat(1);
    } else if (solved > 1) {
        d.kind = DiffuseKind::Fgf;
        d.r = solved;
    } else if (solved == ExtRat(1)) {
        bool full = out.atoms.empty() && w == 1;
        d.kind = full ? DiffuseKind::HyperfiniteFactor : DiffuseKind::Hyperfinite;
        d.r = ExtRat(1);
    } else {
        throw EngineError(ErrorKind::UnsupportedCase, "solved free-group parameter below 1");
    }
    out.diffuse.push_back(std::move(d));
    out.sort();
    return out;
}

inline FNormalForm free_product_fclass(const FNormalForm &a, const FNormalForm &b) {
    return free_product_many({a, b});
}

/// Rescaling of a factor normal form: the interpolation parameter transforms
/// as r -> 1 + (r - 1)/t^2, R is invariant, and M_n compresses or amplifies
/// to M_k when t = k/n.
inline FNormalForm rescale_fclass(const FNormalForm &nf, const SqScale &s) {
    if (!nf.is_factor())
        throw EngineError(ErrorKind::NotAFactor, "rescale base is not a factor");
    if (nf.is_ii1_factor()) {
        const auto &d = nf.diffuse[0];
        if (d.kind == DiffuseKind::HyperfiniteFactor) return nf;
        ExtRat r = d.r;
        if (r.is_inf()) return nf_fgf(ExtRat::infinity());
        return nf_fgf(ExtRat(1 + (r.value() - 1) / s.sq()));
    }
    std::uint64_t n = nf.blocks.empty() ? 1 : nf.blocks[0].n;
    auto t = rat_sqrt(s.sq());
    if (!t)
        throw EngineError(ErrorKind::UnrealizableScale,
                          "matrix rescale needs a rational scale");
    Rat k = Rat(n) * *t;
    if (denominator(k) != 1 || k < 1)
        throw EngineError(ErrorKind::UnrealizableScale,
                          "matrix rescale trace is not k/n");
    std::uint64_t kk = static_cast<std::uint64_t>(numerator(k));
    FNormalForm out;
    if (kk == 1)
        out.atoms.push_back(Rat(1));
    else
        out.blocks.push_back({Rat(1), kk});
    return out;
}

inline FNormalForm normalize_fclass(const ExprPtr &e) {
    if (auto *f = e->get_if<Fgf>()) {
        if (!(f->r > 1))
            throw EngineError(ErrorKind::IllFormed,
                              "interpolation parameter must exceed 1");
        return nf_fgf(f->r);
    }
    if (auto *h = e->get_if<DiffuseHf>()) return nf_hyperfinite(h->factor);
    if (auto *m = e->get_if<MatrixAlg>()) {
        if (m->n == 0) throw EngineError(ErrorKind::IllFormed, "matrix size must be positive");
        if (m->n == 1) return nf_scalars();
        FNormalForm nf;
        nf.blocks.push_back({Rat(1), m->n});
        return nf;
    }
    if (auto *d = e->get_if<DirectSum>()) {
        if (d->summands.size() < 2)
            throw EngineError(ErrorKind::IllFormed, "direct sum needs at least two summands");
        FNormalForm out;
        Rat wsum = 0;
        for (auto &[w, part] : d->summands) {
            if (w <= 0) throw EngineError(ErrorKind::IllFormed, "weights must be positive");
            wsum += w;
            FNormalForm sub = normalize_fclass(part);
            for (auto &dd : sub.diffuse)
                out.diffuse.push_back({dd.kind, dd.r, dd.weight * w});
            for (auto &bb : sub.blocks) out.blocks.push_back({bb.weight * w, bb.n});
            for (auto &aa : sub.atoms) out.atoms.push_back(aa * w);
        }
        if (wsum != 1)
            throw EngineError(ErrorKind::IllFormed,
                              "weights sum to " + to_string(wsum) + " != 1");
        // Direct sums of diffuse hyperfinite non-factors are again diffuse
        // hyperfinite; merge them into one summand.
        Rat hsum = 0;
        std::vector<DiffusePart> kept;
        for (auto &dd : out.diffuse) {
            if (dd.kind == DiffuseKind::Hyperfinite)
                hsum += dd.weight;
            else
                kept.push_back(dd);
        }
        if (hsum > 0) kept.push_back({DiffuseKind::Hyperfinite, ExtRat(1), hsum});
        out.diffuse = std::move(kept);
        out.sort();
        return out;
    }
    if (auto *p = e->get_if<FreeProd>()) {
        if (p->parts.size() < 2)
            throw EngineError(ErrorKind::IllFormed, "free product needs at least two parts");
        // Free-group budget factors LF(r), 0 <= r <= 1, only make sense next
        // to a II1 factor; collect them and fold at the end.
        ExtRat budget(0);
        std::vector<FNormalForm> parts;
        for (auto &part : p->parts) {
            if (auto *f = part->get_if<Fgf>(); f && !(f->r > 1)) {
                if (f->r < 0)
                    throw EngineError(ErrorKind::IllFormed, "negative free-group budget");
                budget = budget + f->r;
                continue;
            }
            FNormalForm nf = normalize_fclass(part);
            if (!nf.is_scalars()) parts.push_back(std::move(nf));
        }
        if (parts.empty()) {
            if (budget.is_positive())
                throw EngineError(ErrorKind::IllFormed,
                                  "free-group budget needs an accompanying factor");
            return nf_scalars();
        }
        FNormalForm acc = free_product_many(std::move(parts));
        if (budget.is_positive()) {
            if (!acc.is_ii1_factor())
                throw EngineError(ErrorKind::UnsupportedCase,
                                  "free-group budget attached to a non-factor");
            acc = nf_fgf(acc.fdim() + budget);
        }
        return acc;
    }
    if (auto *r = e->get_if<Rescaled>()) {
        return rescale_fclass(normalize_fclass(r->body), r->scale);
    }
    throw EngineError(ErrorKind::UndefinedFdim,
                      "expression is not in class F");
}

/// Collapsed mode identifies all interpolated free group factors.
inline FNormalForm collapse_fclass(FNormalForm nf) {
    for (auto &d : nf.diffuse)
        if (d.kind == DiffuseKind::Fgf) d.r = ExtRat::infinity();
    nf.sort();
    return nf;
}

} // namespace factorcalc
