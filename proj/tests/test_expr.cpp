#include <catch2/catch_amalgamated.hpp>

#include "factorcalc/wellformed.hpp"

using namespace factorcalc;

TEST_CASE("atomic leaves are well formed") {
    REQUIRE(well_formed(mk::mat(2)).ok());
    REQUIRE(well_formed(mk::lf(2)).ok());
    REQUIRE(well_formed(mk::opaque("N")).ok());
}

TEST_CASE("weight sums are checked exactly") {
    auto bad = mk::dsum({{Rat(1, 2), mk::mat(2)}, {Rat(1, 3), mk::mat(1)}});
    auto rep = well_formed(bad);
    REQUIRE(!rep.ok());
    REQUIRE(rep.str().find("weights sum to 5/6 != 1") != std::string::npos);
}

TEST_CASE("rescale bases must be factors") {
    auto bad = mk::rescale(mk::dsum({{Rat(1, 2), mk::mat(1)}, {Rat(1, 2), mk::mat(1)}}),
                           SqScale(Rat(1, 4)));
    auto rep = well_formed(bad);
    REQUIRE(!rep.ok());
    REQUIRE(rep.str().find("rescale base is not a factor") != std::string::npos);

    REQUIRE(well_formed(mk::rescale(mk::mat(4), SqScale(Rat(1, 4)))).ok());
    REQUIRE(well_formed(mk::rescale(mk::opaque("N"), SqScale(Rat(1, 4)))).ok());
    REQUIRE(well_formed(mk::rescale(mk::fprod({mk::opaque("N"), mk::opaque("Q")}),
                                    SqScale(Rat(1, 4))))
                .ok());
    // the diffuse non-factor does not rescale
    REQUIRE(!well_formed(mk::rescale(mk::hf(), SqScale(Rat(1, 4)))).ok());
    REQUIRE(well_formed(mk::rescale(mk::rfactor(), SqScale(Rat(1, 4)))).ok());
}

TEST_CASE("subproduct bases must be II1 factors") {
    std::vector<LetterSpec> ls = {mk::letter(SqScale(Rat(1, 4)), mk::opaque("Q"))};
    REQUIRE(well_formed(mk::sub(mk::opaque("N"), ls)).ok());
    REQUIRE(well_formed(mk::sub(mk::lf(2), ls)).ok());
    REQUIRE(well_formed(mk::sub(mk::rfactor(), ls)).ok());
    REQUIRE(!well_formed(mk::sub(mk::mat(2), ls)).ok());
    REQUIRE(!well_formed(mk::sub(mk::hf(), ls)).ok());
    REQUIRE(!well_formed(mk::sub(mk::dsum({{Rat(1, 2), mk::mat(1)}, {Rat(1, 2), mk::mat(1)}}), ls))
                 .ok());
    // a pure class-F free product that normalizes to a factor is accepted
    REQUIRE(well_formed(mk::sub(mk::fprod({mk::mat(2), mk::mat(2)}), ls)).ok());
}

TEST_CASE("letters above scale 1 need II1 bodies") {
    auto big_opaque = mk::sub(mk::opaque("N"), {mk::letter(SqScale(Rat(4)), mk::opaque("Q"))});
    REQUIRE(well_formed(big_opaque).ok());
    auto big_matrix = mk::sub(mk::opaque("N"), {mk::letter(SqScale(Rat(4)), mk::mat(2))});
    REQUIRE(!well_formed(big_matrix).ok());
    auto small_fclass = mk::sub(mk::opaque("N"),
                                {mk::letter(SqScale(Rat(1, 4)),
                                            mk::dsum({{Rat(1, 2), mk::mat(1)}, {Rat(1, 2), mk::mat(1)}}))});
    REQUIRE(well_formed(small_fclass).ok());
}

TEST_CASE("family descriptors are validated") {
    auto bad_ratio = mk::sub(mk::opaque("N"),
                             {mk::family(Rat(1, 2), Rat(3, 2), std::nullopt, mk::opaque("Q"))});
    REQUIRE(!well_formed(bad_ratio).ok());
    auto ok = mk::sub(mk::opaque("N"),
                      {mk::family(Rat(1, 2), Rat(1, 2), std::nullopt, mk::opaque("Q"))});
    REQUIRE(well_formed(ok).ok());
}

TEST_CASE("free-group parameters are range checked") {
    REQUIRE(!well_formed(mk::lf(1)).ok());
    REQUIRE(!well_formed(mk::lf(Rat(1, 2))).ok());
    REQUIRE(well_formed(mk::lf_inf()).ok());
    // budget factors are fine next to a factor, alone they are not
    REQUIRE(well_formed(mk::fprod({mk::opaque("N"), mk::lf(Rat(1, 2))})).ok());
    REQUIRE(!well_formed(mk::fprod({mk::mat(1), mk::lf(Rat(1, 2))})).ok());
}

TEST_CASE("well_formed is total and reports all violations") {
    auto e = mk::dsum({{Rat(1, 2), mk::lf(1)}, {Rat(1, 3), mk::lf(Rat(1, 2))}});
    auto rep = well_formed(e);
    REQUIRE(rep.violations.size() == 3);
}

TEST_CASE("structural comparison orders deterministically") {
    REQUIRE(compare(mk::mat(2), mk::mat(2)) == 0);
    REQUIRE(compare(mk::mat(2), mk::mat(3)) < 0);
    REQUIRE(compare(mk::opaque("N"), mk::opaque("Q")) < 0);
    REQUIRE(compare(mk::lf(2), mk::lf_inf()) < 0);
    REQUIRE(equal(mk::fprod({mk::lf(2), mk::mat(2)}), mk::fprod({mk::lf(2), mk::mat(2)})));
    REQUIRE(!equal(mk::fprod({mk::lf(2), mk::mat(2)}), mk::fprod({mk::mat(2), mk::lf(2)})));
}
