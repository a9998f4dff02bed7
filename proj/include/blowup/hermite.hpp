#pragma once

// Rescaled Hermite polynomials h_n, the 1-D building block of the tensor basis
// h_i(y1) h_j(y2).  They are the monic eigenpolynomials of L = d²/dξ² − (ξ/2) d/dξ + 1
// for the Gaussian weight rho1(ξ) = e^{−ξ²/4}/√(4π):
//
//   h_n(ξ) = Σ_{i ≤ n/2} n!/(i!(n−2i)!) (−1)^i ξ^{n−2i}
//   h_{n+1} = ξ h_n − 2n h_{n−1},      h_0 = 1, h_1 = ξ
//   ‖h_n‖²_{L²rho1} = 2^n n!
//
// Everything here is exact integer arithmetic; doubles appear only in the
// evaluation entry points.

#include "blowup/bigq.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace blowup {

// Exact coefficients are tabulated up to this degree; enough for degree-16
// spectral states, their pairwise products, and the n <= 20 evaluation contract.
inline constexpr int kHermiteCap = 40;

namespace detail {

// table[n][k] = coefficient of ξ^k in h_n, built once from the recurrence.
inline const std::vector<std::vector<BigInt>>& hermite_table() {
    static const std::vector<std::vector<BigInt>> table = [] {
        std::vector<std::vector<BigInt>> t(kHermiteCap + 1);
        t[0] = {BigInt(1)};
        t[1] = {BigInt(0), BigInt(1)};
        for (int n = 1; n < kHermiteCap; ++n) {
            std::vector<BigInt> next(n + 2, BigInt(0));
            for (int k = 0; k <= n; ++k) next[k + 1] += t[n][k];          // ξ·h_n
            for (int k = 0; k < n; ++k) next[k] -= BigInt(2 * n) * t[n - 1][k];  // −2n·h_{n−1}
            t[n + 1] = std::move(next);
        }
        return t;
    }();
    return table;
}

// mono[k][j]: ξ^k = Σ_j mono[k][j] h_j.  Integer because ξ·h_j = h_{j+1} + 2j h_{j−1}.
inline const std::vector<std::vector<BigInt>>& monomial_to_hermite_table() {
    static const std::vector<std::vector<BigInt>> table = [] {
        const int cap = 2 * kHermiteCap;  // products of two capped polynomials
        std::vector<std::vector<BigInt>> t(cap + 1);
        t[0] = {BigInt(1)};
        for (int k = 0; k < cap; ++k) {
            std::vector<BigInt> next(k + 2, BigInt(0));
            for (int j = 0; j <= k; ++j) {
                const BigInt& c = t[k][j];
                if (c == 0) continue;
                next[j + 1] += c;
                if (j >= 1) next[j - 1] += BigInt(2 * j) * c;
            }
            t[k + 1] = std::move(next);
        }
        return t;
    }();
    return table;
}

}  // namespace detail

// Exact monomial coefficients of h_n (index = power of ξ).
inline const std::vector<BigInt>& hermite_coeffs(int n) {
    if (n < 0 || n > kHermiteCap) throw std::invalid_argument("hermite_coeffs: degree out of range");
    return detail::hermite_table()[n];
}

// Horner evaluation on the exact coefficient list (primary route).
inline double hermite_eval(int n, double xi) {
    const auto& c = hermite_coeffs(n);
    double acc = 0.0;
    for (int k = n; k >= 0; --k) acc = acc * xi + to_double(c[k]);
    return acc;
}

// Three-term recurrence (cross-check route; must agree with hermite_eval).
inline double hermite_eval_rec(int n, double xi) {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = xi;
    for (int k = 1; k < n; ++k) {
        double next = xi * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// ‖h_n‖² under rho1 — closed form 2^n n! (confirmed against the quadrature
// oracle in the test suite before being relied on).
inline BigInt hermite_norm_sq_exact(int n) { return int_pow(2, n) * factorial(n); }
inline double hermite_norm_sq(int n) { return to_double(hermite_norm_sq_exact(n)); }

// Exact change of basis: polynomial given by monomial coefficients -> Hermite
// coefficients.  Zero entries are dropped.
inline std::map<int, BigInt> to_hermite_basis(const std::vector<BigInt>& mono) {
    const auto& t = detail::monomial_to_hermite_table();
    if (mono.size() > t.size())
        throw std::invalid_argument("to_hermite_basis: degree out of range");
    std::map<int, BigInt> out;
    for (int k = 0; k < static_cast<int>(mono.size()); ++k) {
        if (mono[k] == 0) continue;
        for (int j = 0; j <= k; ++j) {
            if (t[k][j] == 0) continue;
            out[j] += mono[k] * t[k][j];
        }
    }
    for (auto it = out.begin(); it != out.end();)
        it = (it->second == 0) ? out.erase(it) : std::next(it);
    return out;
}

// h_m·h_n = Σ_k c_k h_k with exact integer c_k: multiply the exact monomial
// forms, then change basis.
inline std::map<int, BigInt> product_in_basis(int m, int n) {
    if (m < 0 || n < 0 || m > kHermiteCap || n > kHermiteCap)
        throw std::invalid_argument("product_in_basis: degree out of range");
    const auto& a = hermite_coeffs(m);
    const auto& b = hermite_coeffs(n);
    std::vector<BigInt> prod(m + n + 1, BigInt(0));
    for (int i = 0; i <= m; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j <= n; ++j) {
            if (b[j] == 0) continue;
            prod[i + j] += a[i] * b[j];
        }
    }
    return to_hermite_basis(prod);
}

}  // namespace blowup
