#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "factorcalc/rational.hpp"

using namespace factorcalc;

namespace {

Rat random_rat(std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> num(-40, 40);
    std::uniform_int_distribution<int> den(1, 12);
    return Rat(num(rng), den(rng));
}

} // namespace

TEST_CASE("rational arithmetic is exact") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        Rat a = random_rat(rng), b = random_rat(rng), c = random_rat(rng);
        REQUIRE((a + b) + c == a + (b + c));
        REQUIRE(a * (b + c) == a * b + a * c);
    }
}

TEST_CASE("rat_pow and rat_sqrt") {
    REQUIRE(rat_pow(Rat(1, 2), 10) == Rat(1, 1024));
    REQUIRE(rat_pow(Rat(3, 2), 0) == 1);
    REQUIRE(rat_sqrt(Rat(9, 16)).value() == Rat(3, 4));
    REQUIRE(!rat_sqrt(Rat(1, 2)).has_value());
    REQUIRE(!rat_sqrt(Rat(-4)).has_value());
    REQUIRE(rat_sqrt(Rat(0)).value() == 0);
}

TEST_CASE("extended rationals") {
    ExtRat inf = ExtRat::infinity();
    ExtRat half(Rat(1, 2));

    SECTION("infinity absorbs") {
        REQUIRE((inf + half).is_inf());
        REQUIRE((half + inf).is_inf());
        REQUIRE((inf * half).is_inf());
        REQUIRE((inf - half).is_inf());
        REQUIRE(inf.div(Rat(4)).is_inf());
    }
    SECTION("infinity compares above every rational") {
        REQUIRE(half < inf);
        REQUIRE(ExtRat(Rat(1000000)) < inf);
        REQUIRE(!(inf < inf));
        REQUIRE(inf == ExtRat::infinity());
    }
    SECTION("0 * infinity is rejected") {
        REQUIRE_THROWS_AS(ExtRat(0) * inf, EngineError);
    }
    SECTION("finite minus infinity is rejected") {
        REQUIRE_THROWS_AS(half - inf, EngineError);
    }
    SECTION("exact finite arithmetic") {
        REQUIRE((half + ExtRat(Rat(1, 3))).value() == Rat(5, 6));
        REQUIRE((half * ExtRat(Rat(2, 3))).value() == Rat(1, 3));
        REQUIRE(half.div(Rat(1, 4)).value() == 2);
    }
}

TEST_CASE("squared scales") {
    SqScale half = SqScale::from_value(Rat(1, 2)); // sq = 1/4
    REQUIRE(half.sq() == Rat(1, 4));
    REQUIRE(SqScale(Rat(1)).is_one());
    REQUIRE_THROWS_AS(SqScale(Rat(0)), EngineError);
    REQUIRE_THROWS_AS(SqScale(Rat(-1, 4)), EngineError);

    SECTION("composition multiplies the squares") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> num(1, 30);
        std::uniform_int_distribution<int> den(1, 30);
        for (int i = 0; i < 500; ++i) {
            SqScale x{Rat(num(rng), den(rng))};
            SqScale s{Rat(num(rng), den(rng))};
            SqScale t{Rat(num(rng), den(rng))};
            REQUIRE(((x * s) * t).sq() == x.sq() * s.sq() * t.sq());
        }
    }
    SECTION("printing prefers exact roots") {
        REQUIRE(SqScale(Rat(1, 4)).str() == "1/2");
        REQUIRE(SqScale(Rat(1, 2)).str() == "sqrt(1/2)");
        REQUIRE(SqScale(Rat(4)).str() == "2");
    }
}
