#include <catch2/catch_amalgamated.hpp>


#include <random>
#include "factorcalc/fdim.hpp"
#include "factorcalc/fnormal.hpp"

using namespace factorcalc;

TEST_CASE("free dimension of leaves") {
    REQUIRE(fdim(mk::mat(2)) == ExtRat(Rat(3, 4)));
    REQUIRE(fdim(mk::mat(1)) == ExtRat(0));
    REQUIRE(fdim(mk::mat(3)) == ExtRat(Rat(8, 9)));
    REQUIRE(fdim(mk::hf()) == ExtRat(1));
    REQUIRE(fdim(mk::rfactor()) == ExtRat(1));
    REQUIRE(fdim(mk::lf(Rat(7, 2))) == ExtRat(Rat(7, 2)));
    REQUIRE(fdim(mk::lf_inf()).is_inf());
}

TEST_CASE("free dimension of direct sums") {
    // dsum(1/2: LF(2), 1/2: C) has dimension exactly 1
    auto e = mk::dsum({{Rat(1, 2), mk::lf(2)}, {Rat(1, 2), mk::mat(1)}});
    REQUIRE(fdim(e) == ExtRat(1));

    // two atoms 1/3, 2/3: 1 - 1/9 - 4/9 = 4/9
    auto atoms = mk::dsum({{Rat(1, 3), mk::mat(1)}, {Rat(2, 3), mk::mat(1)}});
    REQUIRE(fdim(atoms) == ExtRat(Rat(4, 9)));

    // an infinite parameter dominates
    auto winf = mk::dsum({{Rat(1, 2), mk::lf_inf()}, {Rat(1, 2), mk::mat(1)}});
    REQUIRE(fdim(winf).is_inf());
}

TEST_CASE("free dimension is additive over free products") {
    auto m = mk::fprod({mk::dsum({{Rat(1, 2), mk::lf(2)}, {Rat(1, 2), mk::mat(1)}}), mk::lf(4)});
    REQUIRE(fdim(m) == ExtRat(5));
}

TEST_CASE("atom-only direct sums satisfy 1 - sum of squared weights") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> kdist(2, 6);
    std::uniform_int_distribution<int> part(1, 9);
    for (int trial = 0; trial < 300; ++trial) {
        int k = kdist(rng);
        std::vector<Rat> nums(k);
        Rat total = 0;
        for (auto &n : nums) {
            n = part(rng);
            total += n;
        }
        std::vector<std::pair<Rat, ExprPtr>> ss;
        Rat sumsq = 0;
        for (auto &n : nums) {
            Rat w = n / total;
            ss.emplace_back(w, mk::mat(1));
            sumsq += w * w;
        }
        REQUIRE(fdim(mk::dsum(std::move(ss))) == ExtRat(1 - sumsq));
    }
}

TEST_CASE("direct-sum dimension is permutation and nesting invariant") {
    auto flat = mk::dsum({{Rat(1, 2), mk::lf(2)}, {Rat(1, 4), mk::mat(2)}, {Rat(1, 4), mk::mat(1)}});
    auto perm = mk::dsum({{Rat(1, 4), mk::mat(1)}, {Rat(1, 2), mk::lf(2)}, {Rat(1, 4), mk::mat(2)}});
    auto nested = mk::dsum(
        {{Rat(1, 2), mk::lf(2)},
         {Rat(1, 2), mk::dsum({{Rat(1, 2), mk::mat(2)}, {Rat(1, 2), mk::mat(1)}})}});
    REQUIRE(fdim(flat) == fdim(perm));
    REQUIRE(fdim(flat) == fdim(nested));
}

TEST_CASE("free dimension is undefined outside class F") {
    REQUIRE_THROWS_AS(fdim(mk::opaque("N")), EngineError);
    REQUIRE_THROWS_AS(fdim(mk::sub(mk::opaque("N"), {mk::letter(SqScale(Rat(1, 4)), mk::opaque("Q"))})),
                      EngineError);
    REQUIRE_THROWS_AS(fdim(mk::rescale(mk::lf(5), SqScale(Rat(1, 4)))), EngineError);
    try {
        fdim(mk::opaque("N"));
        FAIL("expected an error");
    } catch (const EngineError &err) {
        REQUIRE(err.kind() == ErrorKind::UndefinedFdim);
    }
}

TEST_CASE("closed-form family sums") {
    // the family [2^(-k/2), ...]: first_sq = 1/2, ratio = 1/2, infinite
    FamilySpec geo{Rat(1, 2), Rat(1, 2), std::nullopt, mk::lf(2)};
    REQUIRE(sum_squares(geo) == ExtRat(1));

    FamilySpec divergent{Rat(1, 4), Rat(1), std::nullopt, mk::lf(2)};
    REQUIRE(sum_squares(divergent).is_inf());

    FamilySpec constant3{Rat(1, 4), Rat(1), 3, mk::lf(2)};
    REQUIRE(sum_squares(constant3) == ExtRat(Rat(3, 4)));

    FamilySpec finite_geo{Rat(1, 2), Rat(1, 2), 3, mk::lf(2)};
    REQUIRE(sum_squares(finite_geo) == ExtRat(Rat(7, 8)));
}

TEST_CASE("normalization conserves free dimension") {
    auto exprs = {
        mk::fprod({mk::mat(2), mk::mat(2)}),
        mk::fprod({mk::dsum({{Rat(1, 2), mk::lf(2)}, {Rat(1, 2), mk::mat(1)}}), mk::lf(4)}),
        mk::fprod({mk::dsum({{Rat(1, 3), mk::mat(1)}, {Rat(2, 3), mk::mat(1)}}),
                   mk::dsum({{Rat(1, 3), mk::mat(1)}, {Rat(2, 3), mk::mat(1)}})}),
        mk::dsum({{Rat(1, 2), mk::hf()}, {Rat(1, 2), mk::mat(3)}}),
    };
    for (auto &e : exprs) {
        REQUIRE(normalize_fclass(e).fdim() == fdim(e));
        REQUIRE(fdim(to_expr(normalize_fclass(e))) == fdim(e));
    }
}
