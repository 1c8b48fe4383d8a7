#pragma once

#include <string>

#include "factorcalc/expr.hpp"

namespace factorcalc {

std::string print(const ExprPtr &e);

inline std::string print_letter(const LetterSpec &l) {
    if (auto *sl = std::get_if<ScaledLetter>(&l))
        return "[" + sl->scale.str() + ", " + print(sl->body) + "]";
    const auto &f = std::get<FamilySpec>(l);
    std::string cnt = f.count ? std::to_string(*f.count) : "inf";
    return "fam(" + to_string(f.first_sq) + ", " + to_string(f.ratio) + ", " + cnt + ", " +
           print(f.body) + ")";
}

/// Deterministic re-parseable text form. Free products print flat; every
/// other node prints as a keyword term, so no parentheses are needed.
inline std::string print(const ExprPtr &e) {
    if (auto *f = e->get_if<Fgf>()) return "LF(" + f->r.str() + ")";
    if (auto *h = e->get_if<DiffuseHf>()) return h->factor ? "R" : "H";
    if (auto *m = e->get_if<MatrixAlg>())
        return m->n == 1 ? "C" : "M(" + std::to_string(m->n) + ")";
    if (auto *o = e->get_if<OpaqueAlg>()) return o->name;
    if (auto *d = e->get_if<DirectSum>()) {
        std::string out = "dsum(";
        bool first = true;
        for (auto &[w, part] : d->summands) {
            if (!first) out += ", ";
            first = false;
            out += to_string(w) + ": " + print(part);
        }
        return out + ")";
    }
    if (auto *p = e->get_if<FreeProd>()) {
        std::string out;
        for (std::size_t i = 0; i < p->parts.size(); ++i) {
            if (i) out += " * ";
            out += print(p->parts[i]);
        }
        return out;
    }
    if (auto *r = e->get_if<Rescaled>())
        return "scale(" + print(r->body) + ", " + r->scale.str() + ")";
    auto *s = e->get_if<SubProd>();
    std::string out = "sub(" + print(s->base);
    for (auto &l : s->letters) out += ", " + print_letter(l);
    return out + ")";
}

} // namespace factorcalc
