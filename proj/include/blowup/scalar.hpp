#pragma once

// Exact scalar ring for the series expansions.
//
// Every coefficient that appears in the profile construction and its residual
// is a finite sum of terms
//
//     r(p, delta) * kappa^(m + n(p-1)),     kappa = (p-1)^(-1/(p-1)),
//
// where r is a rational function of p and delta whose denominator is a pure
// power of (p-1).  That closure holds because the only "division" the
// expansions ever perform is by (p-1) (binomial coefficients of exponents
// p and ±1/(p-1) produce exactly such denominators), and the only fractional
// kappa powers come from kappa^p = kappa·kappa^(p-1).  The identity
// kappa^(p-1) = 1/(p-1) lets every term be reduced to a pure integer kappa
// power; `Scalar::reduced` performs that rewrite, and `is_zero` certifies
// symbolic vanishing for all p and delta at once.

#include "blowup/bigq.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace blowup::series {

// ---------------------------------------------------------------------------
// PolyPD: polynomial in (p, delta) over exact rationals.
// ---------------------------------------------------------------------------
struct PolyPD {
    // (degree in p, degree in delta) -> coefficient
    std::map<std::pair<int, int>, BigQ> c;

    static PolyPD zero() { return {}; }
    static PolyPD constant(const BigQ& v) {
        PolyPD r;
        if (v != 0) r.c[{0, 0}] = v;
        return r;
    }
    static PolyPD var_p() {
        PolyPD r;
        r.c[{1, 0}] = 1;
        return r;
    }
    static PolyPD var_delta() {
        PolyPD r;
        r.c[{0, 1}] = 1;
        return r;
    }
    static PolyPD pm1() {  // p - 1
        PolyPD r;
        r.c[{1, 0}] = 1;
        r.c[{0, 0}] = -1;
        return r;
    }

    void prune() {
        for (auto it = c.begin(); it != c.end();)
            it = (it->second == 0) ? c.erase(it) : std::next(it);
    }
    bool is_zero() const {
        for (const auto& [k, v] : c)
            if (v != 0) return false;
        return true;
    }

    PolyPD& operator+=(const PolyPD& o) {
        for (const auto& [k, v] : o.c) c[k] += v;
        prune();
        return *this;
    }
    friend PolyPD operator+(PolyPD a, const PolyPD& b) { return a += b; }
    PolyPD operator-() const {
        PolyPD r = *this;
        for (auto& [k, v] : r.c) v = -v;
        return r;
    }
    friend PolyPD operator-(const PolyPD& a, const PolyPD& b) { return a + (-b); }
    friend PolyPD operator*(const PolyPD& a, const PolyPD& b) {
        PolyPD r;
        for (const auto& [ka, va] : a.c)
            for (const auto& [kb, vb] : b.c)
                r.c[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
        r.prune();
        return r;
    }
    PolyPD scaled(const BigQ& s) const {
        if (s == 0) return {};
        PolyPD r = *this;
        for (auto& [k, v] : r.c) v *= s;
        return r;
    }

    BigQ eval_exact(const BigQ& p, const BigQ& d) const {
        BigQ acc = 0;
        for (const auto& [k, v] : c) acc += v * int_pow(p, k.first) * int_pow(d, k.second);
        return acc;
    }
    double eval(double p, double d) const {
        double acc = 0.0;
        for (const auto& [k, v] : c)
            acc += to_double(v) * std::pow(p, k.first) * std::pow(d, k.second);
        return acc;
    }

    // Substitution p = 1 (collapses the p-degree); used for divisibility by (p-1).
    bool vanishes_at_p1() const {
        std::map<int, BigQ> by_delta;
        for (const auto& [k, v] : c) by_delta[k.second] += v;
        for (const auto& [d, v] : by_delta)
            if (v != 0) return false;
        return true;
    }

    // Exact synthetic division by (p-1).  Pre: vanishes_at_p1().
    PolyPD div_pm1() const {
        if (!vanishes_at_p1())
            throw std::invalid_argument("PolyPD::div_pm1: polynomial not divisible by (p-1)");
        // Per delta-degree, divide sum a_k p^k by (p-1): b_{k-1} = a_k + b_k.
        std::map<int, std::map<int, BigQ>> by_delta;  // delta-deg -> (p-deg -> coeff)
        for (const auto& [k, v] : c) by_delta[k.second][k.first] = v;
        PolyPD q;
        for (const auto& [d, a] : by_delta) {
            const int n = a.empty() ? 0 : a.rbegin()->first;
            BigQ carry = 0;
            for (int k = n; k >= 1; --k) {
                auto it = a.find(k);
                const BigQ ak = (it == a.end()) ? BigQ(0) : it->second;
                carry += ak;  // b_{k-1}
                if (carry != 0) q.c[{k - 1, d}] = carry;
            }
        }
        q.prune();
        return q;
    }

    std::string str() const {
        if (c.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, v] : c) {
            if (!first) os << " + ";
            first = false;
            os << v.str();
            if (k.first) os << "*p^" << k.first;
            if (k.second) os << "*delta^" << k.second;
        }
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// RatPD: num / (p-1)^den_pow.  den_pow may transiently go negative
// (meaning a factor (p-1)^{-den_pow} in the numerator); normalize() restores
// den_pow >= 0 and cancels common (p-1) factors.
// ---------------------------------------------------------------------------
struct RatPD {
    PolyPD num;
    int den_pow = 0;

    void normalize() {
        if (num.is_zero()) {
            num = PolyPD::zero();
            den_pow = 0;
            return;
        }
        while (den_pow < 0) {
            num = num * PolyPD::pm1();
            ++den_pow;
        }
        while (den_pow > 0 && num.vanishes_at_p1()) {
            num = num.div_pm1();
            --den_pow;
        }
    }
    bool is_zero() const { return num.is_zero(); }

    friend RatPD operator+(const RatPD& a, const RatPD& b) {
        RatPD r;
        const int k = std::max(a.den_pow, b.den_pow);
        PolyPD na = a.num, nb = b.num;
        for (int i = a.den_pow; i < k; ++i) na = na * PolyPD::pm1();
        for (int i = b.den_pow; i < k; ++i) nb = nb * PolyPD::pm1();
        r.num = na + nb;
        r.den_pow = k;
        r.normalize();
        return r;
    }
    RatPD operator-() const { return {-num, den_pow}; }
    friend RatPD operator-(const RatPD& a, const RatPD& b) { return a + (-b); }
    friend RatPD operator*(const RatPD& a, const RatPD& b) {
        RatPD r{a.num * b.num, a.den_pow + b.den_pow};
        r.normalize();
        return r;
    }

    double eval(double p, double d) const {
        return num.eval(p, d) / std::pow(p - 1.0, den_pow);
    }
    BigQ eval_exact(const BigQ& p, const BigQ& d) const {
        return num.eval_exact(p, d) / int_pow(p - 1, den_pow);
    }
    std::string str() const {
        std::ostringstream os;
        os << "(" << num.str() << ")";
        if (den_pow) os << "/(p-1)^" << den_pow;
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Scalar: finite sum of RatPD * kappa^(m + n(p-1)).
// ---------------------------------------------------------------------------
struct Scalar {
    // (m, n) -> coefficient of kappa^(m + n(p-1))
    std::map<std::pair<int, int>, RatPD> t;

    static Scalar zero() { return {}; }
    static Scalar rational(const BigQ& v) { return poly(PolyPD::constant(v)); }
    static Scalar integer(long v) { return rational(BigQ(v)); }
    static Scalar poly(const PolyPD& q) {
        Scalar s;
        if (!q.is_zero()) s.t[{0, 0}] = RatPD{q, 0};
        return s;
    }
    static Scalar term(int m, int n, RatPD r) {
        Scalar s;
        r.normalize();
        if (!r.is_zero()) s.t[{m, n}] = std::move(r);
        return s;
    }
    // kappa^m, optionally times (p-1)^{-den_pow} and a rational factor.
    static Scalar kappa_pow(int m, const BigQ& factor = 1, int den_pow = 0) {
        return term(m, 0, RatPD{PolyPD::constant(factor), den_pow});
    }

    void prune() {
        for (auto it = t.begin(); it != t.end();)
            it = it->second.is_zero() ? t.erase(it) : std::next(it);
    }

    Scalar& operator+=(const Scalar& o) {
        for (const auto& [k, v] : o.t) {
            auto it = t.find(k);
            if (it == t.end())
                t[k] = v;
            else
                it->second = it->second + v;
        }
        prune();
        return *this;
    }
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    Scalar operator-() const {
        Scalar r = *this;
        for (auto& [k, v] : r.t) v = -v;
        return r;
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        Scalar r;
        for (const auto& [ka, va] : a.t)
            for (const auto& [kb, vb] : b.t) {
                const std::pair<int, int> k{ka.first + kb.first, ka.second + kb.second};
                auto it = r.t.find(k);
                if (it == r.t.end())
                    r.t[k] = va * vb;
                else
                    it->second = it->second + va * vb;
            }
        r.prune();
        return r;
    }
    Scalar scaled(const BigQ& s) const {
        Scalar r = *this;
        for (auto& [k, v] : r.t) {
            v.num = v.num.scaled(s);
            v.normalize();
        }
        r.prune();
        return r;
    }

    // Rewrite every kappa^(m + n(p-1)) as kappa^m / (p-1)^n.
    Scalar reduced() const {
        Scalar r;
        for (const auto& [k, v] : t) {
            RatPD w = v;
            w.den_pow += k.second;
            w.normalize();
            if (w.is_zero()) continue;
            auto it = r.t.find({k.first, 0});
            if (it == r.t.end())
                r.t[{k.first, 0}] = w;
            else
                it->second = it->second + w;
        }
        r.prune();
        return r;
    }

    bool is_zero() const { return reduced().t.empty(); }

    double eval(double p, double d) const {
        const double kappa = std::pow(p - 1.0, -1.0 / (p - 1.0));
        double acc = 0.0;
        for (const auto& [k, v] : t)
            acc += v.eval(p, d) * std::pow(kappa, k.first + k.second * (p - 1.0));
        return acc;
    }

    std::string str() const {
        if (t.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, v] : t) {
            if (!first) os << " + ";
            first = false;
            os << v.str();
            if (k.first || k.second) {
                os << "*kappa^(" << k.first;
                if (k.second) os << (k.second > 0 ? "+" : "") << k.second << "(p-1)";
                os << ")";
            }
        }
        return os.str();
    }
};

}  // namespace blowup::series
