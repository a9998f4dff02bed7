#pragma once

// Exact eps-series machinery, eps = e^{-s}.
//
// A series is a finite list of PolyY coefficients: f = Σ_k eps^k c_k(y).
// Because every coefficient of the profile construction depends on s only
// through eps, s-differentiation acts diagonally: ∂_s (eps^k c_k) = -k eps^k c_k.
//
// expand_profile builds the eps-expansion of the profile
//
//     phi = kappa (E/D')^{1/(p-1)},   E  = 1 + eps P + eps² Q,
//                                     D' = 1 + (p-1)/kappa (eps b + delta eps² c),
//     b = y1² y2²,  c = y1⁶ + y2⁶,
//
// and expand_remainder the eps-expansion of its evolution residual
//
//     R = -∂_s phi + (L-1) phi - phi/(p-1) + phi^p,   L = Δ - y·∇/2 + 1.
//
// All arithmetic is exact, so the low-order coefficients of R vanishing is a
// symbolic certificate valid for every p > 1 and every delta simultaneously.

#include "blowup/ypoly.hpp"

#include <stdexcept>
#include <vector>

namespace blowup::series {

inline constexpr int kProfileOrderCap = 3;    // expand_profile accepts K <= 3
inline constexpr int kRemainderOrderCap = 2;  // expand_remainder accepts K <= 2

struct EpsSeries {
    std::vector<PolyY> c;  // c[k] multiplies eps^k

    EpsSeries() : c(1) {}
    explicit EpsSeries(int K) : c(K + 1) {}
    int order() const { return static_cast<int>(c.size()) - 1; }
    PolyY& operator[](int k) { return c[k]; }
    const PolyY& operator[](int k) const { return c[k]; }
};

inline EpsSeries series_add(const EpsSeries& a, const EpsSeries& b) {
    EpsSeries r(std::max(a.order(), b.order()));
    for (int k = 0; k <= a.order(); ++k) r[k] += a[k];
    for (int k = 0; k <= b.order(); ++k) r[k] += b[k];
    return r;
}

// Product truncated at eps^K.
inline EpsSeries series_mul(const EpsSeries& a, const EpsSeries& b, int K) {
    EpsSeries r(K);
    for (int i = 0; i <= std::min(K, a.order()); ++i) {
        if (a[i].c.empty()) continue;
        for (int j = 0; i + j <= K && j <= b.order(); ++j) {
            if (b[j].c.empty()) continue;
            r[i + j] += a[i] * b[j];
        }
    }
    return r;
}

inline EpsSeries series_scale(const EpsSeries& a, const Scalar& s) {
    EpsSeries r(a.order());
    for (int k = 0; k <= a.order(); ++k) r[k] = a[k].scaled(s);
    return r;
}

// reduce_kappa applied to every coefficient: rewrites kappa^(p-1) -> 1/(p-1)
// so that only integer kappa powers remain.
inline EpsSeries series_reduce(const EpsSeries& a) {
    EpsSeries r(a.order());
    for (int k = 0; k <= a.order(); ++k) {
        for (const auto& [key, v] : a[k].c) {
            Scalar w = v.reduced();
            if (!w.t.empty()) r[k].c[key] = std::move(w);
        }
    }
    return r;
}

// Admissible symbolic exponents for series_pow.
enum class Alpha {
    P,          // alpha = p
    InvPm1,     // alpha = +1/(p-1)
    NegInvPm1,  // alpha = -1/(p-1)
};

// Exact generalized binomial coefficient C(alpha, j) = alpha(alpha-1)...(alpha-j+1)/j!.
// For alpha = ±1/(p-1) each factor is (±1 - i(p-1))/(p-1), so the denominator
// is the pure power (p-1)^j — exactly what RatPD represents.
inline Scalar binom(Alpha alpha, int j) {
    if (j < 0) throw std::invalid_argument("binom: negative index");
    if (j == 0) return Scalar::integer(1);
    PolyPD num = PolyPD::constant(1);
    int den_pow = 0;
    for (int i = 0; i < j; ++i) {
        switch (alpha) {
            case Alpha::P:
                num = num * (PolyPD::var_p() - PolyPD::constant(i));
                break;
            case Alpha::InvPm1:
                num = num * (PolyPD::constant(1) - PolyPD::pm1().scaled(i));
                ++den_pow;
                break;
            case Alpha::NegInvPm1:
                num = num * (PolyPD::constant(-1) - PolyPD::pm1().scaled(i));
                ++den_pow;
                break;
        }
    }
    RatPD r{num.scaled(BigQ(1) / BigQ(factorial(j))), den_pow};
    r.normalize();
    return Scalar::term(0, 0, r);
}

// (1 + x)^alpha truncated at eps^K, where f = 1 + x and x has no eps^0 part.
inline EpsSeries series_pow(const EpsSeries& f, Alpha alpha, int K) {
    if (!(f[0] - PolyY::one()).is_zero_sym())
        throw std::invalid_argument("series_pow: base must have constant term 1");
    EpsSeries x(K);
    for (int k = 1; k <= std::min(K, f.order()); ++k) x[k] = f[k];

    EpsSeries acc(K);
    acc[0] = PolyY::one();  // j = 0 term
    EpsSeries xj = x;       // x^j, starting at j = 1
    for (int j = 1; j <= K; ++j) {
        acc = series_add(acc, series_scale(xj, binom(alpha, j)));
        if (j < K) xj = series_mul(xj, x, K);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// The profile's polynomial ingredients I
// ---------------------------------------------------------------------------

// P = 2(p-1)/kappa (y1² + y2² - 2)
inline PolyY poly_P() {
    const Scalar cP = Scalar::term(-1, 0, RatPD{PolyPD::pm1().scaled(2), 0});
    return PolyY::monomial(2, 0, cP) + PolyY::monomial(0, 2, cP) +
           PolyY::monomial(0, 0, cP.scaled(-2));
}

// gamma = (6p-2)/kappa, the coefficient that cancels the y1⁴y2² growth in Q.
inline Scalar gamma_coeff() {
    return Scalar::term(-1, 0,
                        RatPD{PolyPD::var_p().scaled(6) - PolyPD::constant(2), 0});
}

// Q = (p-1)/kappa [ P b/(p-1) + kappa(p-2)/(2(p-1)²) P² + delta(y1⁶-h6(y1))
//                   + delta(y2⁶-h6(y2)) + p/(2kappa)(h4h4 - y1⁴y2⁴)
//                   + gamma (h4h2 + h2h4) ]
inline PolyY poly_Q() {
    const PolyY P = poly_P();
    const PolyY b = PolyY::monomial(2, 2, Scalar::integer(1));

    PolyY inner = (P * b).scaled(Scalar::term(0, 0, RatPD{PolyPD::constant(1), 1}));
    inner += (P * P).scaled(Scalar::term(
        1, 0, RatPD{(PolyPD::var_p() - PolyPD::constant(2)).scaled(BigQ(1) / 2), 2}));
    // y⁶ - h6(y) = 30 y⁴ - 180 y² + 120
    const Scalar d = Scalar::poly(PolyPD::var_delta());
    for (int axis = 0; axis < 2; ++axis) {
        auto mono = [&](int deg, long coeff) {
            return PolyY::monomial(axis == 0 ? deg : 0, axis == 0 ? 0 : deg,
                                   d.scaled(coeff));
        };
        inner += mono(4, 30) + mono(2, -180) + mono(0, 120);
    }
    inner += (hermite_product(4, 4) - PolyY::monomial(4, 4, Scalar::integer(1)))
                 .scaled(Scalar::term(-1, 0, RatPD{PolyPD::var_p().scaled(BigQ(1) / 2), 0}));
    inner += (hermite_product(4, 2) + hermite_product(2, 4)).scaled(gamma_coeff());

    return inner.scaled(Scalar::term(-1, 0, RatPD{PolyPD::pm1(), 0}));
}

// E = 1 + eps P + eps² Q as a series.
inline EpsSeries series_E(int K) {
    EpsSeries E(K);
    E[0] = PolyY::one();
    if (K >= 1) E[1] = poly_P();
    if (K >= 2) E[2] = poly_Q();
    return E;
}

// D' = D/(p-1) = 1 + (p-1)/kappa (eps y1²y2² + delta eps² (y1⁶+y2⁶)).
inline EpsSeries series_Dprime(int K) {
    EpsSeries D(K);
    D[0] = PolyY::one();
    const Scalar f = Scalar::term(-1, 0, RatPD{PolyPD::pm1(), 0});
    if (K >= 1) D[1] = PolyY::monomial(2, 2, f);
    if (K >= 2) {
        const Scalar fd = f * Scalar::poly(PolyPD::var_delta());
        D[2] = PolyY::monomial(6, 0, fd) + PolyY::monomial(0, 6, fd);
    }
    return D;
}

// ---------------------------------------------------------------------------
// expand_profile / expand_remainder
// ---------------------------------------------------------------------------

// phi = kappa (E/D')^{1/(p-1)} expanded to order K (K <= 3).
inline EpsSeries expand_profile(int K) {
    if (K < 0 || K > kProfileOrderCap)
        throw std::invalid_argument("expand_profile: order must be in [0, 3]");
    const EpsSeries num = series_pow(series_E(K), Alpha::InvPm1, K);
    const EpsSeries den = series_pow(series_Dprime(K), Alpha::NegInvPm1, K);
    return series_scale(series_mul(num, den, K), Scalar::kappa_pow(1));
}

// R = -∂_s phi + (L-1) phi - phi/(p-1) + phi^p expanded to order K (K <= 2).
inline EpsSeries expand_remainder(int K) {
    if (K < 0 || K > kRemainderOrderCap)
        throw std::invalid_argument("expand_remainder: order must be in [0, 2]");
    const EpsSeries phi = expand_profile(K);

    EpsSeries R(K);
    for (int k = 0; k <= K; ++k) {
        // -∂_s (eps^k c_k) = +k eps^k c_k
        R[k] += phi[k].scaled(Scalar::integer(k));
        // (L-1) phi - phi/(p-1) = apply_L(phi) - phi (2p-1)/(p-1) + ... spelled out:
        // (L-1)c - c/(p-1) = apply_L(c) - c - c/(p-1).
        R[k] += phi[k].apply_L();
        R[k] += phi[k].scaled(
            Scalar::term(0, 0, RatPD{-PolyPD::var_p(), 1}));  // -(1 + 1/(p-1)) = -p/(p-1)
    }
    // phi^p = kappa^p (phi/kappa)^p with kappa^p = kappa^{1+(p-1)}.
    const EpsSeries base = series_scale(phi, Scalar::kappa_pow(-1));
    const EpsSeries powp = series_pow(base, Alpha::P, K);
    const Scalar kappa_p = Scalar::term(1, 1, RatPD{PolyPD::constant(1), 0});
    for (int k = 0; k <= K; ++k) R[k] += powp[k].scaled(kappa_p);

    return series_reduce(R);
}

}  // namespace blowup::series
