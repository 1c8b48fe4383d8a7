#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorcalc/expr.hpp"

namespace factorcalc {

struct Diagnostic {
    std::size_t line = 1;
    std::size_t col = 1;
    std::string message;

    std::string str() const {
        return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
    }
};

class ParseError : public std::runtime_error {
  public:
    explicit ParseError(Diagnostic d) : std::runtime_error(d.str()), diag(std::move(d)) {}
    Diagnostic diag;
};

/// Recursive-descent parser for the expression language:
///   expr    := term ('*' term)*
///   term    := atom | 'dsum(' wlist ')' | 'scale(' expr ',' scale ')'
///            | 'sub(' expr (',' letteritem)+ ')'
///   atom    := 'LF(' q|'inf' ')' | 'M(' int ')' | 'C' | 'H' | 'R' | ident
///   letteritem := '[' scale ',' expr ']' | 'fam(' q ',' q ',' int|'inf' ',' expr ')'
///   scale   := q | 'sqrt(' q ')'
/// Unknown identifiers introduce opaque factor symbols.
class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr parse_expr_all() {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

    ExprPtr parse_expr() {
        std::vector<ExprPtr> parts;
        parts.push_back(parse_term());
        skip_ws();
        while (peek() == '*') {
            get();
            parts.push_back(parse_term());
            skip_ws();
        }
        if (parts.size() == 1) return parts[0];
        return mk::fprod(std::move(parts));
    }

    /// Scale argument as written (t or sqrt(q)), stored squared.
    SqScale parse_scale() {
        skip_ws();
        if (match_keyword("sqrt")) {
            expect('(');
            Rat q = parse_rat();
            expect(')');
            if (q <= 0) fail("scale must be positive");
            return SqScale(q);
        }
        Rat t = parse_rat();
        if (t <= 0) fail("scale must be positive");
        return SqScale::from_value(t);
    }

    Rat parse_rat() {
        skip_ws();
        if (!std::isdigit(peek())) fail("expected a rational literal");
        BigInt num = parse_int();
        if (peek() == '/') {
            get();
            BigInt den = parse_int();
            if (den == 0) fail("zero denominator");
            return Rat(num, den);
        }
        return Rat(num);
    }

  private:
    ExprPtr parse_term() {
        skip_ws();
        std::size_t start = pos_;
        std::string word = read_ident();
        if (word.empty()) fail("expected an expression");
        if (word == "LF") {
            expect('(');
            ExtRat r = parse_ext();
            expect(')');
            return mk::lf(std::move(r));
        }
        if (word == "M") {
            expect('(');
            Rat n = parse_rat();
            expect(')');
            if (denominator(n) != 1 || n < 1) fail("matrix size must be a positive integer");
            return mk::mat(static_cast<std::uint64_t>(numerator(n)));
        }
        if (word == "C") return mk::mat(1);
        if (word == "H") return mk::hf();
        if (word == "R") return mk::rfactor();
        if (word == "dsum") {
            expect('(');
            std::vector<std::pair<Rat, ExprPtr>> ss;
            while (true) {
                Rat w = parse_rat();
                expect(':');
                ss.emplace_back(std::move(w), parse_expr());
                skip_ws();
                if (peek() == ',') {
                    get();
                    continue;
                }
                break;
            }
            expect(')');
            return mk::dsum(std::move(ss));
        }
        if (word == "scale") {
            expect('(');
            auto body = parse_expr();
            expect(',');
            auto s = parse_scale();
            expect(')');
            return mk::rescale(std::move(body), std::move(s));
        }
        if (word == "sub") {
            expect('(');
            auto base = parse_expr();
            std::vector<LetterSpec> letters;
            skip_ws();
            while (peek() == ',') {
                get();
                letters.push_back(parse_letter());
                skip_ws();
            }
            expect(')');
            if (letters.empty()) fail("subproduct needs at least one letter");
            return mk::sub(std::move(base), std::move(letters));
        }
        if (word == "fam" || word == "sqrt" || word == "inf") {
            pos_ = start;
            fail("'" + word + "' is not valid here");
        }
        return mk::opaque(std::move(word));
    }

    LetterSpec parse_letter() {
        skip_ws();
        if (peek() == '[') {
            get();
            auto s = parse_scale();
            expect(',');
            auto body = parse_expr();
            expect(']');
            return ScaledLetter{std::move(s), std::move(body)};
        }
        if (match_keyword("fam")) {
            expect('(');
            Rat first = parse_rat();
            expect(',');
            Rat ratio = parse_rat();
            expect(',');
            std::optional<std::uint64_t> count;
            skip_ws();
            if (match_keyword("inf")) {
                count = std::nullopt;
            } else {
                Rat c = parse_rat();
                if (denominator(c) != 1 || c < 1) fail("family count must be a positive integer");
                count = static_cast<std::uint64_t>(numerator(c));
            }
            expect(',');
            auto body = parse_expr();
            expect(')');
            return FamilySpec{std::move(first), std::move(ratio), count, std::move(body)};
        }
        fail("expected a [scale, expr] letter or fam(...)");
        throw std::logic_error("unreachable");
    }

    ExtRat parse_ext() {
        skip_ws();
        if (match_keyword("inf")) return ExtRat::infinity();
        return ExtRat(parse_rat());
    }

    BigInt parse_int() {
        skip_ws();
        if (!std::isdigit(peek())) fail("expected an integer");
        BigInt v = 0;
        while (std::isdigit(peek())) v = v * 10 + (get() - '0');
        return v;
    }

    std::string read_ident() {
        skip_ws();
        if (!std::isalpha(peek()) && peek() != '_') return {};
        std::string w;
        while (std::isalnum(peek()) || peek() == '_') w.push_back(get());
        return w;
    }

    bool match_keyword(std::string_view kw) {
        skip_ws();
        std::size_t save = pos_;
        for (char c : kw) {
            if (peek() != c) {
                pos_ = save;
                return false;
            }
            get();
        }
        if (std::isalnum(peek()) || peek() == '_') {
            pos_ = save;
            return false;
        }
        return true;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char get() {
        char c = peek();
        if (pos_ < text_.size()) ++pos_;
        return c;
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string &msg) const {
        Diagnostic d;
        d.line = 1;
        d.col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++d.line;
                d.col = 1;
            } else {
                ++d.col;
            }
        }
        d.message = msg;
        throw ParseError(std::move(d));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline ExprPtr parse(std::string_view text) { return Parser(text).parse_expr_all(); }

} // namespace factorcalc
