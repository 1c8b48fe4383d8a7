#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "factorcalc/errors.hpp"

namespace factorcalc {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const Rat &q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

/// q^k for nonnegative integer k, exact.
inline Rat rat_pow(const Rat &q, std::uint64_t k) {
    Rat acc = 1;
    Rat base = q;
    while (k) {
        if (k & 1) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
inline std::optional<Rat> rat_sqrt(const Rat &q) {
    if (q < 0) return std::nullopt;
    BigInt num = numerator(q), den = denominator(q);
    BigInt ns = boost::multiprecision::sqrt(num);
    BigInt ds = boost::multiprecision::sqrt(den);
    if (ns * ns != num || ds * ds != den) return std::nullopt;
    return Rat(ns, ds);
}

/// Exact rational extended with +infinity. Finite values may be negative
/// (extended-word tails); nonnegativity is enforced at the call sites that
/// require it.
class ExtRat {
  public:
    ExtRat() : inf_(false), v_(0) {}
    ExtRat(Rat v) : inf_(false), v_(std::move(v)) {}
    ExtRat(int v) : inf_(false), v_(v) {}

    static ExtRat infinity() {
        ExtRat e;
        e.inf_ = true;
        return e;
    }

    bool is_inf() const { return inf_; }
    bool is_finite() const { return !inf_; }
    const Rat &value() const {
        if (inf_) throw EngineError(ErrorKind::Internal, "value() on infinite ExtRat");
        return v_;
    }

    bool is_zero() const { return !inf_ && v_ == 0; }
    bool is_positive() const { return inf_ || v_ > 0; }

    ExtRat operator+(const ExtRat &o) const {
        if (inf_ || o.inf_) return infinity();
        return ExtRat(v_ + o.v_);
    }
    /// Subtraction; infinite minuend absorbs any finite subtrahend.
    ExtRat operator-(const ExtRat &o) const {
        if (o.inf_) throw EngineError(ErrorKind::Internal, "cannot subtract infinity");
        if (inf_) return infinity();
        return ExtRat(v_ - o.v_);
    }
    ExtRat operator*(const ExtRat &o) const {
        if (inf_ || o.inf_) {
            const ExtRat &fin = inf_ ? o : *this;
            if (fin.is_inf()) return infinity();
            if (fin.v_ == 0)
                throw EngineError(ErrorKind::Internal, "0 * infinity is not defined");
            if (fin.v_ < 0)
                throw EngineError(ErrorKind::Internal, "negative * infinity is not defined");
            return infinity();
        }
        return ExtRat(v_ * o.v_);
    }
    /// Division by a positive rational.
    ExtRat div(const Rat &d) const {
        if (d <= 0) throw EngineError(ErrorKind::Internal, "division by nonpositive scale");
        if (inf_) return infinity();
        return ExtRat(v_ / d);
    }

    friend bool operator==(const ExtRat &a, const ExtRat &b) {
        if (a.inf_ != b.inf_) return false;
        return a.inf_ || a.v_ == b.v_;
    }
    friend bool operator!=(const ExtRat &a, const ExtRat &b) { return !(a == b); }
    friend bool operator<(const ExtRat &a, const ExtRat &b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator>(const ExtRat &a, const ExtRat &b) { return b < a; }
    friend bool operator<=(const ExtRat &a, const ExtRat &b) { return !(b < a); }
    friend bool operator>=(const ExtRat &a, const ExtRat &b) { return !(a < b); }

    friend bool operator==(const ExtRat &a, int b) { return !a.inf_ && a.v_ == b; }
    friend bool operator>(const ExtRat &a, int b) { return a.inf_ || a.v_ > b; }
    friend bool operator>=(const ExtRat &a, int b) { return a.inf_ || a.v_ >= b; }
    friend bool operator<(const ExtRat &a, int b) { return !a.inf_ && a.v_ < b; }
    friend bool operator<=(const ExtRat &a, int b) { return !a.inf_ && a.v_ <= b; }

    std::string str() const { return inf_ ? "inf" : to_string(v_); }

  private:
    bool inf_;
    Rat v_;
};

/// A positive scale t, stored exactly by its square. The calculus only ever
/// consumes t through t^2 or through multiplicative composition, so squared
/// storage keeps sqrt-of-rational scales (t = 2^(-k/2)) inside the rationals.
class SqScale {
  public:
    explicit SqScale(Rat sq) : sq_(std::move(sq)) {
        if (sq_ <= 0) throw EngineError(ErrorKind::IllFormed, "scale must be positive");
    }
    /// Scale given as the value t itself (t > 0), stored as t^2.
    static SqScale from_value(const Rat &t) { return SqScale(t * t); }

    const Rat &sq() const { return sq_; }
    bool is_one() const { return sq_ == 1; }

    SqScale operator*(const SqScale &o) const { return SqScale(sq_ * o.sq_); }
    SqScale operator/(const SqScale &o) const { return SqScale(sq_ / o.sq_); }

    friend bool operator==(const SqScale &a, const SqScale &b) { return a.sq_ == b.sq_; }
    friend bool operator!=(const SqScale &a, const SqScale &b) { return a.sq_ != b.sq_; }
    friend bool operator<(const SqScale &a, const SqScale &b) { return a.sq_ < b.sq_; }

    /// "1/2" when the square root is rational, otherwise "sqrt(1/2)".
    std::string str() const {
        if (auto r = rat_sqrt(sq_)) return to_string(*r);
        return "sqrt(" + to_string(sq_) + ")";
    }

  private:
    Rat sq_;
};

} // namespace factorcalc
