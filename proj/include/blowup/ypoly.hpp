#pragma once

// Polynomials in the two space variables (y1, y2) with exact Scalar
// coefficients, plus the exact action of the linearized operator
//
//     L = Δ − (1/2) y·∇ + 1,
//
// whose eigenfunctions are the Hermite products h_a(y1) h_b(y2) with
// eigenvalue 1 − (a+b)/2.  The Hermite decomposition uses the exact integer
// basis-change table for ξ^k = Σ_j T[k][j] h_j.

#include "blowup/hermite.hpp"
#include "blowup/scalar.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace blowup::series {

struct PolyY {
    // (a, b) -> Scalar coefficient of y1^a y2^b
    std::map<std::pair<int, int>, Scalar> c;

    static PolyY zero() { return {}; }
    static PolyY constant(const Scalar& s) { return monomial(0, 0, s); }
    static PolyY one() { return constant(Scalar::integer(1)); }
    static PolyY monomial(int a, int b, const Scalar& s) {
        PolyY r;
        if (!s.t.empty()) r.c[{a, b}] = s;
        return r;
    }

    void prune() {
        for (auto it = c.begin(); it != c.end();)
            it = it->second.t.empty() ? c.erase(it) : std::next(it);
    }

    PolyY& operator+=(const PolyY& o) {
        for (const auto& [k, v] : o.c) {
            auto it = c.find(k);
            if (it == c.end())
                c[k] = v;
            else
                it->second += v;
        }
        prune();
        return *this;
    }
    friend PolyY operator+(PolyY a, const PolyY& b) { return a += b; }
    PolyY operator-() const {
        PolyY r = *this;
        for (auto& [k, v] : r.c) v = -v;
        return r;
    }
    friend PolyY operator-(const PolyY& a, const PolyY& b) { return a + (-b); }
    friend PolyY operator*(const PolyY& a, const PolyY& b) {
        PolyY r;
        for (const auto& [ka, va] : a.c)
            for (const auto& [kb, vb] : b.c) {
                const std::pair<int, int> k{ka.first + kb.first, ka.second + kb.second};
                auto it = r.c.find(k);
                if (it == r.c.end())
                    r.c[k] = va * vb;
                else
                    it->second += va * vb;
            }
        r.prune();
        return r;
    }
    PolyY scaled(const Scalar& s) const {
        PolyY r;
        for (const auto& [k, v] : c) {
            Scalar w = v * s;
            if (!w.t.empty()) r.c[k] = std::move(w);
        }
        return r;
    }
    PolyY scaled(const BigQ& q) const {
        PolyY r;
        for (const auto& [k, v] : c) {
            Scalar w = v.scaled(q);
            if (!w.t.empty()) r.c[k] = std::move(w);
        }
        return r;
    }

    PolyY dy1() const {
        PolyY r;
        for (const auto& [k, v] : c)
            if (k.first >= 1) r += monomial(k.first - 1, k.second, v.scaled(k.first));
        return r;
    }
    PolyY dy2() const {
        PolyY r;
        for (const auto& [k, v] : c)
            if (k.second >= 1) r += monomial(k.first, k.second - 1, v.scaled(k.second));
        return r;
    }
    PolyY laplacian() const {
        PolyY r;
        for (const auto& [k, v] : c) {
            const auto [a, b] = k;
            if (a >= 2) r += monomial(a - 2, b, v.scaled(BigQ(a) * (a - 1)));
            if (b >= 2) r += monomial(a, b - 2, v.scaled(BigQ(b) * (b - 1)));
        }
        return r;
    }
    PolyY euler() const {  // y·∇
        PolyY r;
        for (const auto& [k, v] : c) r += monomial(k.first, k.second, v.scaled(k.first + k.second));
        return r;
    }
    // L = Δ − (1/2) y·∇ + 1
    PolyY apply_L() const {
        PolyY r = laplacian();
        for (const auto& [k, v] : c)
            r += monomial(k.first, k.second, v.scaled(BigQ(2 - k.first - k.second) / 2));
        return r;
    }

    bool is_zero_sym() const {
        for (const auto& [k, v] : c)
            if (!v.is_zero()) return false;
        return true;
    }

    double eval(double p, double delta, double y1, double y2) const {
        double acc = 0.0;
        for (const auto& [k, v] : c)
            acc += v.eval(p, delta) * std::pow(y1, k.first) * std::pow(y2, k.second);
        return acc;
    }

    // Exact decomposition on Hermite products: result[(a,b)] multiplies h_a h_b.
    std::map<std::pair<int, int>, Scalar> hermite() const {
        const auto& T = detail::monomial_to_hermite_table();
        std::map<std::pair<int, int>, Scalar> out;
        for (const auto& [k, v] : c) {
            const auto [a, b] = k;
            if (a >= static_cast<int>(T.size()) || b >= static_cast<int>(T.size()))
                throw std::invalid_argument("PolyY::hermite: degree beyond the table cap");
            for (int i = a % 2; i <= a; i += 2) {
                if (T[a][i] == 0) continue;
                for (int j = b % 2; j <= b; j += 2) {
                    if (T[b][j] == 0) continue;
                    Scalar w = v.scaled(BigQ(T[a][i] * T[b][j]));
                    if (w.t.empty()) continue;
                    auto it = out.find({i, j});
                    if (it == out.end())
                        out[{i, j}] = std::move(w);
                    else
                        it->second += w;
                }
            }
        }
        for (auto it = out.begin(); it != out.end();)
            it = it->second.is_zero() ? out.erase(it) : std::next(it);
        return out;
    }

    std::string str() const {
        if (c.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, v] : c) {
            if (!first) os << "  +  ";
            first = false;
            os << "[" << v.str() << "]";
            if (k.first) os << "*y1^" << k.first;
            if (k.second) os << "*y2^" << k.second;
        }
        return os.str();
    }
};

// Hermite product h_a(y1) h_b(y2) as an exact PolyY (integer coefficients).
inline PolyY hermite_product(int a, int b, const Scalar& coeff = Scalar::integer(1)) {
    const auto &ca = hermite_coeffs(a), &cb = hermite_coeffs(b);
    PolyY r;
    for (int i = 0; i < static_cast<int>(ca.size()); ++i) {
        if (ca[i] == 0) continue;
        for (int j = 0; j < static_cast<int>(cb.size()); ++j) {
            if (cb[j] == 0) continue;
            r += PolyY::monomial(i, j, coeff.scaled(BigQ(ca[i] * cb[j])));
        }
    }
    return r;
}

}  // namespace blowup::series
