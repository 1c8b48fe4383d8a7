#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "factorcalc/expr.hpp"
#include "factorcalc/wellformed.hpp"

namespace factorcalc {

/// Deterministic generation parameters: identical config, identical stream.
struct GenConfig {
    std::uint64_t seed = 1;
    int max_depth = 3;
    int max_summands = 4;
    int max_letters = 4;
    int weight_denominator_bound = 8;
};

/// Seeded expression source for the fuzz suites.
class Gen {
  public:
    explicit Gen(const GenConfig &cfg) : cfg_(cfg), rng_(cfg.seed) {}

    /// Class-F expressions: direct sums of LF/M/C/H/R with exact weights and
    /// nested free products. Always well formed.
    ExprPtr fclass_expr() { return fclass(cfg_.max_depth); }

    /// Free scaled products over opaque symbols: subproducts with rational
    /// supports (occasionally above 1), rescalings, free products, class-F
    /// letters and finite families. Always well formed.
    ExprPtr word_expr() {
        auto e = word(cfg_.max_depth);
        return e;
    }

    /// A word-shaped expression with a budget: (N * LF(r)) sub [t_i, Q_i].
    ExprPtr budgeted_word_expr() {
        std::vector<LetterSpec> ls;
        int n = 1 + pick(cfg_.max_letters);
        for (int i = 0; i < n; ++i)
            ls.push_back(mk::letter(SqScale(small_fraction()), opaque()));
        ExprPtr base = mk::opaque("N");
        Rat budget(pick(5), 1 + pick(3));
        if (budget > 0) base = mk::fprod({base, mk::lf(budget)});
        return mk::sub(base, std::move(ls));
    }

    Rat small_fraction() { // in (0, 1]
        int den = 2 + pick(cfg_.weight_denominator_bound - 1);
        int num = 1 + pick(den);
        return Rat(num, den);
    }

    Rat positive_scale_sq() { // in (0, 4], sometimes above 1
        if (pick(4) == 0) return 1 + small_fraction() * 3;
        return small_fraction();
    }

    std::uint64_t pick(std::uint64_t bound) { // in [0, bound)
        return bound == 0 ? 0 : rng_() % bound;
    }

  private:
    ExprPtr fclass_leaf() {
        switch (pick(6)) {
        case 0: return mk::mat(1);
        case 1: return mk::mat(2 + pick(3));
        case 2: return mk::hf();
        case 3: return mk::rfactor();
        case 4: {
            // parameter in (1, 9]
            int den = 1 + static_cast<int>(pick(4));
            int num = den + 1 + static_cast<int>(pick(8 * den));
            return mk::lf(Rat(num, den));
        }
        default: return pick(8) == 0 ? mk::lf_inf() : mk::lf(2 + pick(4));
        }
    }

    std::vector<Rat> weights(int k) {
        std::vector<Rat> nums(k);
        Rat total = 0;
        for (auto &n : nums) {
            n = 1 + pick(static_cast<std::uint64_t>(cfg_.weight_denominator_bound));
            total += n;
        }
        for (auto &n : nums) n /= total;
        return nums;
    }

    ExprPtr fclass(int depth) {
        if (depth <= 0 || pick(3) == 0) return fclass_leaf();
        if (pick(2) == 0) {
            int k = 2 + static_cast<int>(pick(static_cast<std::uint64_t>(cfg_.max_summands - 1)));
            auto ws = weights(k);
            std::vector<std::pair<Rat, ExprPtr>> ss;
            for (auto &w : ws) ss.emplace_back(w, fclass(depth - 1));
            return mk::dsum(std::move(ss));
        }
        int k = 2 + static_cast<int>(pick(2));
        std::vector<ExprPtr> parts;
        for (int i = 0; i < k; ++i) parts.push_back(fclass(depth - 1));
        return mk::fprod(std::move(parts));
    }

    ExprPtr opaque() {
        static const char *names[] = {"N", "P", "Q1", "Q2", "Q3"};
        return mk::opaque(names[pick(5)]);
    }

    ExprPtr factor_body(int depth) {
        // a II1-factor-denoting body for letters and bases
        switch (depth > 0 ? pick(5) : 0) {
        case 0: return opaque();
        case 1: return mk::lf(2 + pick(4));
        case 2: return mk::rescale(opaque(), SqScale(small_fraction()));
        case 3: return mk::fprod({opaque(), opaque()});
        default: return word(depth - 1);
        }
    }

    ExprPtr word(int depth) {
        if (depth <= 0) return opaque();
        switch (pick(4)) {
        case 0: { // subproduct
            int n = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(cfg_.max_letters)));
            std::vector<LetterSpec> ls;
            for (int i = 0; i < n; ++i) {
                if (pick(5) == 0) { // finite family
                    ls.push_back(mk::family(small_fraction(), Rat(1, 2), 2 + pick(3), opaque()));
                } else if (pick(4) == 0) { // class-F letter
                    ls.push_back(mk::letter(SqScale(small_fraction()), fclass(1)));
                } else {
                    Rat sq = positive_scale_sq();
                    ls.push_back(mk::letter(SqScale(sq),
                                            sq > 1 ? factor_body(depth - 1) : word(depth - 1)));
                }
            }
            return mk::sub(factor_body(depth - 1), std::move(ls));
        }
        case 1: { // rescaling of a factor
            return mk::rescale(factor_body(depth - 1), SqScale(positive_scale_sq()));
        }
        case 2: { // free product, possibly with a class-F part
            std::vector<ExprPtr> parts = {word(depth - 1), word(depth - 1)};
            if (pick(3) == 0) parts.push_back(fclass(1));
            return mk::fprod(std::move(parts));
        }
        default: return opaque();
        }
    }

    GenConfig cfg_;
    std::mt19937_64 rng_;
};

} // namespace factorcalc
