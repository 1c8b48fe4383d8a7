#pragma once

#include "factorcalc/expr.hpp"

namespace factorcalc {

/// Free dimension of a class-F expression, computed structurally:
///   diffuse hyperfinite -> 1
///   M_n                 -> 1 - n^-2
///   L(F_r)              -> r
///   direct sum          -> 1 + sum_i a_i^2 (fdim(A_i) - 1)
///   free product        -> sum of the parts' fdim
/// Undefined on opaque symbols, subproducts and unresolved rescalings.
inline ExtRat fdim(const ExprPtr &e) {
    if (auto *f = e->get_if<Fgf>()) return f->r;
    if (e->is<DiffuseHf>()) return ExtRat(1);
    if (auto *m = e->get_if<MatrixAlg>()) {
        Rat n(m->n);
        return ExtRat(1 - 1 / (n * n));
    }
    if (auto *d = e->get_if<DirectSum>()) {
        ExtRat acc(1);
        for (auto &[w, part] : d->summands) {
            ExtRat fd = fdim(part);
            if (fd.is_inf()) return ExtRat::infinity();
            acc = acc + ExtRat(w * w * (fd.value() - 1));
        }
        return acc;
    }
    if (auto *p = e->get_if<FreeProd>()) {
        ExtRat acc(0);
        for (auto &part : p->parts) acc = acc + fdim(part);
        return acc;
    }
    if (e->is<OpaqueAlg>())
        throw EngineError(ErrorKind::UndefinedFdim, "free dimension of an opaque factor symbol");
    if (e->is<SubProd>())
        throw EngineError(ErrorKind::UndefinedFdim, "free dimension of a scaled product");
    throw EngineError(ErrorKind::UndefinedFdim,
                      "free dimension of a rescaling; normalize it first");
}

/// Closed-form sum of the squared supports of a letter family.
inline ExtRat sum_squares(const FamilySpec &f) {
    if (f.ratio == 1) {
        if (!f.count) return ExtRat::infinity();
        return ExtRat(f.first_sq * Rat(*f.count));
    }
    if (f.ratio > 1)
        throw EngineError(ErrorKind::IllFormed, "family ratio must be <= 1");
    if (!f.count) return ExtRat(f.first_sq / (1 - f.ratio));
    return ExtRat(f.first_sq * (1 - rat_pow(f.ratio, *f.count)) / (1 - f.ratio));
}

} // namespace factorcalc
