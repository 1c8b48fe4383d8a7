#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "factorcalc/parser.hpp"
#include "factorcalc/session.hpp"
#include "factorcalc/printer.hpp"
#include "factorcalc/wellformed.hpp"

using namespace factorcalc;

TEST_CASE("parsing the worked examples") {
    auto e = parse("dsum(1/2: LF(2), 1/2: C) * LF(4)");
    auto *p = e->get_if<FreeProd>();
    REQUIRE(p);
    REQUIRE(p->parts.size() == 2);
    REQUIRE(p->parts[0]->is<DirectSum>());
    REQUIRE(p->parts[1]->get_if<Fgf>()->r == ExtRat(4));

    auto s = parse("sub(N, [sqrt(1/4), Q])");
    auto *sp = s->get_if<SubProd>();
    REQUIRE(sp);
    REQUIRE(sp->base->get_if<OpaqueAlg>()->name == "N");
    REQUIRE(std::get<ScaledLetter>(sp->letters[0]).scale.sq() == Rat(1, 4));

    auto f = parse("sub(LF(2), fam(1/2, 1/2, inf, LF(2)))");
    auto *fp = f->get_if<SubProd>();
    REQUIRE(fp);
    const auto &fam = std::get<FamilySpec>(fp->letters[0]);
    REQUIRE(fam.first_sq == Rat(1, 2));
    REQUIRE(fam.ratio == Rat(1, 2));
    REQUIRE(!fam.count.has_value());
}

TEST_CASE("scale literals: plain values are squared, sqrt is verbatim") {
    auto a = parse("scale(N, 1/2)");
    REQUIRE(a->get_if<Rescaled>()->scale.sq() == Rat(1, 4));
    auto b = parse("scale(N, sqrt(1/2))");
    REQUIRE(b->get_if<Rescaled>()->scale.sq() == Rat(1, 2));
}

TEST_CASE("unknown identifiers introduce opaque symbols") {
    auto e = parse("Nacho * Q_1");
    auto *p = e->get_if<FreeProd>();
    REQUIRE(p->parts[0]->get_if<OpaqueAlg>()->name == "Nacho");
    REQUIRE(p->parts[1]->get_if<OpaqueAlg>()->name == "Q_1");
}

TEST_CASE("parse errors carry positions") {
    try {
        parse("dsum(1/2: LF(2), 1/2 C)");
        FAIL("expected a parse error");
    } catch (const ParseError &pe) {
        REQUIRE(pe.diag.line == 1);
        REQUIRE(pe.diag.col > 1);
    }
    REQUIRE_THROWS_AS(parse("LF(2) *"), ParseError);
    REQUIRE_THROWS_AS(parse("scale(N, 0)"), ParseError);
    REQUIRE_THROWS_AS(parse("M(0)"), ParseError);
    REQUIRE_THROWS_AS(parse("fam(1, 1, inf, Q)"), ParseError);
    REQUIRE_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("printing round-trips the examples") {
    for (const char *text : {
             "dsum(1/2: LF(2), 1/2: C) * LF(4)",
             "sub(N, [1/2, Q])",
             "sub(LF(2), fam(1/2, 1/2, inf, LF(2)))",
             "scale(N, sqrt(1/2)) * M(3)",
             "sub(N * LF(3), [sqrt(1/2), scale(Q, 2)], fam(1/4, 1/2, 7, P))",
             "LF(7/2)",
             "LF(inf)",
             "dsum(1/3: H, 1/3: R, 1/3: M(2))",
         }) {
        auto e = parse(text);
        REQUIRE(print(e) == text);
        REQUIRE(equal(parse(print(e)), e));
    }
}

namespace {

ExprPtr random_expr(std::mt19937_64 &rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 8 : 4);
    std::uniform_int_distribution<int> small(1, 9);
    switch (pick(rng)) {
    case 0: return mk::mat(1 + small(rng) % 3);
    case 1: return mk::lf(Rat(small(rng) + 9, small(rng)));
    case 2: return mk::hf();
    case 3: return mk::rfactor();
    case 4: return mk::opaque(std::string(1, static_cast<char>('N' + small(rng) % 4)));
    case 5: {
        std::vector<std::pair<Rat, ExprPtr>> ss;
        int k = 2 + small(rng) % 2;
        Rat total = 0;
        std::vector<Rat> nums;
        for (int i = 0; i < k; ++i) {
            nums.push_back(small(rng));
            total += nums.back();
        }
        for (int i = 0; i < k; ++i) ss.emplace_back(nums[i] / total, random_expr(rng, depth - 1));
        return mk::dsum(std::move(ss));
    }
    case 6: {
        std::vector<ExprPtr> parts;
        int k = 2 + small(rng) % 2;
        for (int i = 0; i < k; ++i) {
            auto part = random_expr(rng, depth - 1);
            // flat products only: the grammar has no parentheses
            if (part->is<FreeProd>()) part = mk::mat(2);
            parts.push_back(part);
        }
        return mk::fprod(std::move(parts));
    }
    case 7: return mk::rescale(random_expr(rng, depth - 1), SqScale(Rat(small(rng), small(rng))));
    default: {
        std::vector<LetterSpec> ls;
        int k = 1 + small(rng) % 2;
        for (int i = 0; i < k; ++i) {
            if (small(rng) % 3 == 0)
                ls.push_back(mk::family(Rat(small(rng), 9), Rat(1, 2),
                                        small(rng) % 2 ? std::optional<std::uint64_t>(small(rng))
                                                       : std::nullopt,
                                        random_expr(rng, depth - 1)));
            else
                ls.push_back(mk::letter(SqScale(Rat(small(rng), small(rng))),
                                        random_expr(rng, depth - 1)));
        }
        return mk::sub(random_expr(rng, depth - 1), std::move(ls));
    }
    }
}

} // namespace

TEST_CASE("parse after print is the identity on random expressions") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 1000; ++i) {
        auto e = random_expr(rng, 3);
        auto text = print(e);
        auto back = parse(text);
        REQUIRE(equal(back, e));
        REQUIRE(print(back) == text);
    }
}

TEST_CASE("the session is transactional and mode-aware") {
    Session s;
    REQUIRE(eval_command(s, ":mode collapsed").severity == 0);
    REQUIRE(s.assumptions.mode == Mode::Collapsed);

    // the collapsed mode identifies the interpolated parameters
    auto v = eval_command(s, ":iso LF(2) LF(3)");
    REQUIRE(v.severity == 0);
    REQUIRE(v.output.rfind("isomorphic", 0) == 0);

    // diagnostics and engine errors leave the session untouched
    auto bad = eval_command(s, ":mode sideways");
    REQUIRE(bad.severity == 1);
    REQUIRE(s.assumptions.mode == Mode::Collapsed);
    auto engine = eval_command(s, ":trade sub(N, [1/2, Q]) Q 1");
    REQUIRE(engine.severity == 2);
    REQUIRE(engine.output.find("precondition-violated") != std::string::npos);
    REQUIRE(s.assumptions.mode == Mode::Collapsed);
    REQUIRE(s.assumptions.stable.empty());

    // and the session keeps working afterwards
    REQUIRE(eval_command(s, ":mode distinct").severity == 0);
    auto open_again = eval_command(s, ":iso LF(2) LF(3)");
    REQUIRE(open_again.output.rfind("not provable", 0) == 0);

    REQUIRE(eval_command(s, ":assume stable Q").severity == 0);
    REQUIRE(s.assumptions.is_stable("Q"));

    // :explain needs a certificate, :load needs a file
    Session fresh;
    REQUIRE(eval_command(fresh, ":explain").severity == 1);
    REQUIRE(eval_command(fresh, ":load /no/such/file.fc").severity == 1);
    REQUIRE(eval_command(fresh, "hello").severity == 1);
    REQUIRE(eval_command(fresh, ":nonsense").severity == 1);
}

TEST_CASE("scripts run line by line with comments") {
    Session s;
    std::istringstream script(R"(# a comment line
:fdim M(2)   # trailing comment

:nf LF(2) * LF(3)
)");
    auto r = run_script(s, script);
    REQUIRE(r.severity == 0);
    REQUIRE(r.output == "3/4\nLF(5)\n");
}

TEST_CASE("letters trade by index or by unique name") {
    Session s;
    auto by_name = eval_command(s, ":trade sub(N * LF(1), [1/2, Q]) Q 3/4");
    REQUIRE(by_name.severity == 0);
    auto by_index = eval_command(s, ":trade sub(N * LF(1), [1/2, Q]) 1 3/4");
    REQUIRE(by_index.output == by_name.output);
    // ambiguous names are refused
    auto dup = eval_command(s, ":trade sub(N, [1/2, Q], [1/3, Q]) Q 1/2");
    REQUIRE(dup.severity == 2);
    REQUIRE(dup.output.find("ambiguous") != std::string::npos);
    // out-of-range indices too
    REQUIRE(eval_command(s, ":trade sub(N, [1/2, Q]) 2 1/2").severity == 2);
}
