#pragma once

#include <string>
#include <vector>

#include "factorcalc/expr.hpp"
#include "factorcalc/fnormal.hpp"

namespace factorcalc {

struct Violation {
    std::string path; // node path like "/0/2"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }

    std::string str() const {
        std::string out;
        for (auto &v : violations) {
            if (!out.empty()) out += "\n";
            out += v.path + ": " + v.message;
        }
        return out;
    }
};

/// True when the expression denotes a II1 factor. Scaled products are always
/// II1 factors, as is any free product with at least one II1-factor part;
/// pure class-F expressions are decided by their normal form.
inline bool denotes_ii1_factor(const ExprPtr &e) {
    if (e->is<OpaqueAlg>()) return true;
    if (auto *f = e->get_if<Fgf>()) return f->r > 1;
    if (auto *h = e->get_if<DiffuseHf>()) return h->factor;
    if (e->is<SubProd>()) return true;
    if (auto *r = e->get_if<Rescaled>()) return denotes_ii1_factor(r->body);
    if (auto *p = e->get_if<FreeProd>()) {
        for (auto &part : p->parts)
            if (denotes_ii1_factor(part)) return true;
        if (is_pure_fclass(e)) {
            try {
                return normalize_fclass(e).is_ii1_factor();
            } catch (const EngineError &) {
                return false;
            }
        }
        return false;
    }
    if (is_pure_fclass(e)) {
        try {
            return normalize_fclass(e).is_ii1_factor();
        } catch (const EngineError &) {
            return false;
        }
    }
    return false;
}

/// True when the expression denotes any factor, including M_n and C.
inline bool denotes_factor(const ExprPtr &e) {
    if (denotes_ii1_factor(e)) return true;
    if (e->is<MatrixAlg>()) return true;
    if (auto *r = e->get_if<Rescaled>()) return denotes_factor(r->body);
    if (is_pure_fclass(e)) {
        try {
            return normalize_fclass(e).is_factor();
        } catch (const EngineError &) {
            return false;
        }
    }
    return false;
}

namespace detail {

inline void check_node(const ExprPtr &e, const std::string &path, ValidationReport &rep) {
    if (auto *f = e->get_if<Fgf>()) {
        if (!(f->r > 1))
            rep.violations.push_back({path, "interpolation parameter must exceed 1, got " +
                                                f->r.str()});
        return;
    }
    if (auto *m = e->get_if<MatrixAlg>()) {
        if (m->n < 1) rep.violations.push_back({path, "matrix size must be >= 1"});
        return;
    }
    if (auto *d = e->get_if<DirectSum>()) {
        if (d->summands.size() < 2)
            rep.violations.push_back({path, "direct sum needs at least two summands"});
        Rat sum = 0;
        std::size_t i = 0;
        for (auto &[w, part] : d->summands) {
            if (w <= 0)
                rep.violations.push_back(
                    {path + "/" + std::to_string(i), "weight must be positive"});
            sum += w;
            check_node(part, path + "/" + std::to_string(i), rep);
            ++i;
        }
        if (sum != 1)
            rep.violations.push_back({path, "weights sum to " + to_string(sum) + " != 1"});
        return;
    }
    if (auto *p = e->get_if<FreeProd>()) {
        if (p->parts.size() < 2)
            rep.violations.push_back({path, "free product needs at least two parts"});
        bool has_factor_part = false;
        for (auto &part : p->parts)
            if (denotes_ii1_factor(part)) has_factor_part = true;
        std::size_t i = 0;
        for (auto &part : p->parts) {
            // Budget factors LF(r), 0 <= r <= 1, are allowed only as free
            // complement bookkeeping next to an actual factor.
            if (auto *f = part->get_if<Fgf>(); f && !(f->r > 1)) {
                if (f->r < 0)
                    rep.violations.push_back(
                        {path + "/" + std::to_string(i), "negative free-group budget"});
                else if (!has_factor_part)
                    rep.violations.push_back({path + "/" + std::to_string(i),
                                              "free-group budget needs an accompanying factor"});
            } else {
                check_node(part, path + "/" + std::to_string(i), rep);
            }
            ++i;
        }
        return;
    }
    if (auto *r = e->get_if<Rescaled>()) {
        check_node(r->body, path + "/0", rep);
        if (!denotes_factor(r->body))
            rep.violations.push_back({path, "rescale base is not a factor"});
        return;
    }
    if (auto *s = e->get_if<SubProd>()) {
        check_node(s->base, path + "/0", rep);
        if (s->letters.empty())
            rep.violations.push_back({path, "subproduct needs at least one letter"});
        if (!denotes_ii1_factor(s->base))
            rep.violations.push_back({path, "subproduct base must denote a II1 factor"});
        std::size_t i = 1;
        for (auto &l : s->letters) {
            std::string lpath = path + "/" + std::to_string(i);
            if (auto *sl = std::get_if<ScaledLetter>(&l)) {
                check_node(sl->body, lpath, rep);
                if (sl->scale.sq() > 1 && !denotes_ii1_factor(sl->body))
                    rep.violations.push_back(
                        {lpath, "letters with scale above 1 need a II1-factor body"});
            } else {
                const auto &fam = std::get<FamilySpec>(l);
                check_node(fam.body, lpath, rep);
                if (fam.first_sq <= 0)
                    rep.violations.push_back({lpath, "family start must be positive"});
                if (fam.ratio <= 0 || fam.ratio > 1)
                    rep.violations.push_back({lpath, "family ratio must lie in (0, 1]"});
                if (fam.count && *fam.count < 1)
                    rep.violations.push_back({lpath, "family count must be positive"});
                if (fam.first_sq > 1 && !denotes_ii1_factor(fam.body))
                    rep.violations.push_back(
                        {lpath, "families starting above scale 1 need a II1-factor body"});
            }
            ++i;
        }
        return;
    }
}

} // namespace detail

/// Total structural validation; never throws, reports every violation.
inline ValidationReport well_formed(const ExprPtr &e) {
    ValidationReport rep;
    detail::check_node(e, "/", rep);
    return rep;
}

inline void require_well_formed(const ExprPtr &e) {
    auto rep = well_formed(e);
    if (!rep.ok()) throw EngineError(ErrorKind::IllFormed, rep.str());
}

} // namespace factorcalc
