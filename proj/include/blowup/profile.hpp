#pragma once

// Floating-point evaluation of every explicit function in the construction:
// the polynomials P and Q, the numerator/denominator pair (E, D), the profile
//
//     phi(y,s) = (E/D)^{1/(p-1)},
//         E = 1 + e^{-s} P(y) + e^{-2s} Q(y),
//         D = (p-1) + (p-1)²/kappa (e^{-s} y1²y2² + delta e^{-2s} (y1⁶+y2⁶)),
//
// its gradient (logarithmic-derivative form), the cross-shaped limit profile
// Phi = D^{-1/(p-1)}, the flat heteroclinic psi(s) = kappa(1+e^s)^{-1/(p-1)},
// the tunable initial data w0, the final-profile functions G0 and u*, and a
// numeric certification report for the profile's positivity/boundedness/decay
// properties.
//
// Fractional powers are always computed as exp(log(x)/(p-1)) behind explicit
// positivity checks, since p is a free real parameter.

#include "blowup/errors.hpp"
#include "blowup/hermite.hpp"
#include "blowup/params.hpp"
#include "blowup/series.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace blowup::profile {

// ---------------------------------------------------------------------------
// Compiled polynomials: the exact series-layer polynomials specialized to a
// concrete (p, delta) so that pointwise evaluation is a plain double loop.
// ---------------------------------------------------------------------------
struct Poly2 {
    struct Term {
        int a, b;
        double c;
    };
    std::vector<Term> terms;

    static Poly2 compile(const series::PolyY& q, double p, double delta) {
        Poly2 r;
        for (const auto& [k, v] : q.c) r.terms.push_back({k.first, k.second, v.eval(p, delta)});
        return r;
    }

    double operator()(double y1, double y2) const {
        double acc = 0.0;
        for (const Term& t : terms) acc += t.c * std::pow(y1, t.a) * std::pow(y2, t.b);
        return acc;
    }
};

// Per-(p, delta) tables: P, Q, their first derivatives, and (L+1)Q — all
// compiled from the exact symbolic forms so that no hand-differentiation of Q
// can drift from the definition.
struct Tables {
    double p = 0.0, delta = 0.0, kappa = 0.0, gamma = 0.0;
    Poly2 P, Q, Py1, Py2, Qy1, Qy2, LQ_plus_Q;  // LQ_plus_Q = (L+1)Q

    static Tables make(const Params& prm) {
        Tables t;
        t.p = prm.p;
        t.delta = prm.delta;
        t.kappa = prm.kappa;
        t.gamma = prm.gamma;
        const series::PolyY P = series::poly_P();
        const series::PolyY Q = series::poly_Q();
        auto cp = [&](const series::PolyY& q) { return Poly2::compile(q, prm.p, prm.delta); };
        t.P = cp(P);
        t.Q = cp(Q);
        t.Py1 = cp(P.dy1());
        t.Py2 = cp(P.dy2());
        t.Qy1 = cp(Q.dy1());
        t.Qy2 = cp(Q.dy2());
        t.LQ_plus_Q = cp(Q.apply_L() + Q);
        return t;
    }
};

// Thread-local cache keyed by (p, delta): the tables are pure functions of
// those two numbers, and profile evaluations are hot paths in grid sweeps.
inline const Tables& tables_for(const Params& prm) {
    thread_local double cached_p = std::numeric_limits<double>::quiet_NaN();
    thread_local double cached_delta = std::numeric_limits<double>::quiet_NaN();
    thread_local Tables cache;
    if (cached_p != prm.p || cached_delta != prm.delta) {
        cache = Tables::make(prm);
        cached_p = prm.p;
        cached_delta = prm.delta;
    }
    return cache;
}

// ---------------------------------------------------------------------------
// P and Q
// ---------------------------------------------------------------------------

// Simplified closed form 2(p-1)/kappa (y1² + y2² - 2).
inline double eval_P(const Params& prm, double y1, double y2) {
    return 2.0 * (prm.p - 1.0) / prm.kappa * (y1 * y1 + y2 * y2 - 2.0);
}

// Product form (p-1)/kappa (y1²y2² - h2(y1)h2(y2)); algebraically identical to
// eval_P and kept as an independent cross-check route.
inline double eval_P_product_form(const Params& prm, double y1, double y2) {
    return (prm.p - 1.0) / prm.kappa *
           (y1 * y1 * y2 * y2 - hermite_eval(2, y1) * hermite_eval(2, y2));
}

inline double eval_Q(const Params& prm, double y1, double y2) {
    return tables_for(prm).Q(y1, y2);
}

// ---------------------------------------------------------------------------
// E, D and their derivatives, bundled for the operator/dynamics layers.
// ---------------------------------------------------------------------------
struct Parts {
    double eps = 0.0;           // e^{-s}
    double Pv = 0.0, Qv = 0.0;  // P(y), Q(y)
    double bv = 0.0, cv = 0.0;  // y1²y2², y1⁶+y2⁶
    double E = 0.0, D = 0.0, Dt = 0.0;  // Dt = D/(p-1)
    double Es = 0.0, Ds = 0.0;          // ∂_s E, ∂_s D
    double E1 = 0.0, E2 = 0.0;          // ∇E
    double D1 = 0.0, D2 = 0.0;          // ∇D
};

inline Parts eval_parts(const Tables& t, double y1, double y2, double s) {
    Parts r;
    const double p = t.p, kap = t.kappa, delta = t.delta;
    const double eps = std::exp(-s), eps2 = eps * eps;
    r.eps = eps;
    r.Pv = t.P(y1, y2);
    r.Qv = t.Q(y1, y2);
    r.bv = y1 * y1 * y2 * y2;
    r.cv = std::pow(y1, 6) + std::pow(y2, 6);

    r.E = 1.0 + eps * r.Pv + eps2 * r.Qv;
    r.Es = -eps * r.Pv - 2.0 * eps2 * r.Qv;
    r.E1 = eps * t.Py1(y1, y2) + eps2 * t.Qy1(y1, y2);
    r.E2 = eps * t.Py2(y1, y2) + eps2 * t.Qy2(y1, y2);

    const double f = (p - 1.0) * (p - 1.0) / kap;
    r.Dt = 1.0 + (p - 1.0) / kap * (eps * r.bv + delta * eps2 * r.cv);
    r.D = (p - 1.0) * r.Dt;
    r.Ds = -f * (eps * r.bv + 2.0 * delta * eps2 * r.cv);
    r.D1 = f * (eps * 2.0 * y1 * y2 * y2 + delta * eps2 * 6.0 * std::pow(y1, 5));
    r.D2 = f * (eps * 2.0 * y1 * y1 * y2 + delta * eps2 * 6.0 * std::pow(y2, 5));
    assert(r.D >= p - 1.0);  // p-1 plus nonnegative terms; monotone rounding preserves it
    return r;
}

inline double eval_E(const Params& prm, double y1, double y2, double s) {
    const double eps = std::exp(-s);
    return 1.0 + eps * eval_P(prm, y1, y2) + eps * eps * eval_Q(prm, y1, y2);
}

inline double eval_D(const Params& prm, double y1, double y2, double s) {
    const double eps = std::exp(-s);
    const double D = (prm.p - 1.0) + (prm.p - 1.0) * (prm.p - 1.0) / prm.kappa *
                                         (eps * y1 * y1 * y2 * y2 +
                                          prm.delta * eps * eps *
                                              (std::pow(y1, 6) + std::pow(y2, 6)));
    assert(D >= prm.p - 1.0);  // p-1 plus nonnegative terms; monotone rounding preserves it
    return D;
}

namespace detail {
// (numerator/D)^{1/(p-1)} — the shared arithmetic path of phi and w0, so that
// the two coincide bit-for-bit when the tuning term vanishes.
inline double profile_power(double num, double D, double p) {
    return std::exp(std::log(num / D) / (p - 1.0));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// phi and its gradient
// ---------------------------------------------------------------------------
inline double eval_phi(const Params& prm, double y1, double y2, double s) {
    const double E = eval_E(prm, y1, y2, s);
    if (!(E > 0.0)) {
        std::ostringstream os;
        os << "eval_phi: E <= 0 at y = (" << y1 << ", " << y2 << "), s = " << s
           << " (delta or s below the profile's validity thresholds)";
        throw NonpositiveE(os.str());
    }
    return detail::profile_power(E, eval_D(prm, y1, y2, s), prm.p);
}

// grad phi = phi/(p-1) (∇E/E - ∇D/D).
inline std::array<double, 2> eval_grad_phi(const Params& prm, double y1, double y2, double s) {
    const Tables& t = tables_for(prm);
    const Parts r = eval_parts(t, y1, y2, s);
    if (!(r.E > 0.0)) {
        std::ostringstream os;
        os << "eval_grad_phi: E <= 0 at y = (" << y1 << ", " << y2 << "), s = " << s;
        throw NonpositiveE(os.str());
    }
    const double phi = detail::profile_power(r.E, r.D, prm.p);
    const double f = phi / (prm.p - 1.0);
    return {f * (r.E1 / r.E - r.D1 / r.D), f * (r.E2 / r.E - r.D2 / r.D)};
}

// ---------------------------------------------------------------------------
// The cross-shaped limit profile Phi = D^{-1/(p-1)} (bracket >= p-1 > 0 always).
// ---------------------------------------------------------------------------
inline double eval_Phi(const Params& prm, double y1, double y2, double s) {
    return std::exp(-std::log(eval_D(prm, y1, y2, s)) / (prm.p - 1.0));
}

// ---------------------------------------------------------------------------
// The flat heteroclinic psi and its defining-equation residual
// ---------------------------------------------------------------------------

namespace detail {
inline double log1pexp(double s) {  // log(1 + e^s), overflow-safe
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}
}  // namespace detail

inline double eval_psi(const Params& prm, double s) {
    return prm.kappa * std::exp(-detail::log1pexp(s) / (prm.p - 1.0));
}

inline double eval_dpsi(const Params& prm, double s) {
    // psi' = -psi e^s / ((p-1)(1+e^s)); the logistic factor is overflow-safe.
    const double logistic = 1.0 / (1.0 + std::exp(-s));
    return -eval_psi(prm, s) * logistic / (prm.p - 1.0);
}

// psi' + psi/(p-1) - psi^p, which vanishes identically for the exact orbit.
inline double psi_residual(const Params& prm, double s) {
    const double psi = eval_psi(prm, s);
    return eval_dpsi(prm, s) + psi / (prm.p - 1.0) - std::pow(psi, prm.p);
}

// ---------------------------------------------------------------------------
// Tunable initial data w0(y, s0)
// ---------------------------------------------------------------------------

// S = d00 + d20[h2(y1)+h2(y2)] + d40[h4(y1)+h4(y2)] + d42 h2(y1)h2(y2)
inline double eval_S(const Params& prm, double y1, double y2) {
    const double h2a = hermite_eval(2, y1), h2b = hermite_eval(2, y2);
    const double h4a = hermite_eval(4, y1), h4b = hermite_eval(4, y2);
    return prm.d[0] + prm.d[1] * (h2a + h2b) + prm.d[2] * (h4a + h4b) + prm.d[3] * h2a * h2b;
}

// S-bar = d60 (h6(y1) + h6(y2))
inline double eval_Sbar(const Params& prm, double y1, double y2) {
    return prm.d[4] * (hermite_eval(6, y1) + hermite_eval(6, y2));
}

// The positivity bracket E + (p-1)/(kappa D) (A e^{-2s0} S + A s0² e^{-3s0} S-bar).
inline double w0_bracket(const Params& prm, double y1, double y2) {
    const double E = eval_E(prm, y1, y2, prm.s0);
    const double D = eval_D(prm, y1, y2, prm.s0);
    const double X = prm.A * std::exp(-2.0 * prm.s0) * eval_S(prm, y1, y2) +
                     prm.A * prm.s0 * prm.s0 * std::exp(-3.0 * prm.s0) * eval_Sbar(prm, y1, y2);
    return E + (prm.p - 1.0) / (prm.kappa * D) * X;
}

inline double eval_w0_init(const Params& prm, double y1, double y2) {
    const double num = w0_bracket(prm, y1, y2);
    if (!(num > 0.0)) {
        std::ostringstream os;
        os << "eval_w0_init: nonpositive bracket " << num << " at y = (" << y1 << ", " << y2
           << "), s0 = " << prm.s0 << " (s0 below the initialization threshold)";
        throw NonpositiveBracket(os.str());
    }
    return detail::profile_power(num, eval_D(prm, y1, y2, prm.s0), prm.p);
}

// ---------------------------------------------------------------------------
// Final-profile functions
// ---------------------------------------------------------------------------

// G0(a) = (p-1)/kappa [a1²a2² + delta(a1⁶+a2⁶)]
inline double eval_G0(const Params& prm, double a1, double a2) {
    return (prm.p - 1.0) / prm.kappa *
           (a1 * a1 * a2 * a2 + prm.delta * (std::pow(a1, 6) + std::pow(a2, 6)));
}

// u*(a) = [(p-1)²/kappa (a1²a2² + delta(a1⁶+a2⁶))]^{-1/(p-1)} = [(p-1)G0]^{-1/(p-1)}
inline double eval_u_star(const Params& prm, double a1, double a2) {
    const double g = eval_G0(prm, a1, a2);
    if (g == 0.0)
        throw DivergesAtOrigin("eval_u_star: the final profile diverges at a = 0");
    return std::exp(-std::log((prm.p - 1.0) * g) / (prm.p - 1.0));
}

// ---------------------------------------------------------------------------
// Numeric certification of the profile's qualitative properties
// ---------------------------------------------------------------------------
struct LemphiReport {
    double min_E = std::numeric_limits<double>::infinity();
    double sup_phi_excess = 0.0;  // (sup|phi| - kappa) e^{s/3}
    double sup_grad = 0.0;        // sup|grad phi| e^{s/6}
    double tail_value = 0.0;      // sup of phi on the scan boundary
    double s = 0.0;
    double grid_radius = 0.0;

    bool positivity_ok() const { return min_E >= 0.5; }
};

// Graded scan coordinates: dense core |t| <= 10 (step 1/4), geometric tail to
// the requested radius.
inline std::vector<double> graded_coords(double radius) {
    std::vector<double> half;
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.25) half.push_back(t);
    double t = 10.0;
    while (t < radius) {
        t = std::min(t * 1.25, radius);
        half.push_back(t);
    }
    std::vector<double> full;
    for (auto it = half.rbegin(); it != half.rend(); ++it)
        if (*it > 0.0) full.push_back(-*it);
    for (double v : half) full.push_back(v);
    return full;
}

inline LemphiReport certify_lemphi(const Params& prm, double s, double grid_radius) {
    if (!(grid_radius >= 10.0))
        throw std::invalid_argument("certify_lemphi: grid radius must be >= 10");
    const Tables& t = tables_for(prm);
    const std::vector<double> cs = graded_coords(grid_radius);
    const double outer = cs.back();

    LemphiReport rep;
    rep.s = s;
    rep.grid_radius = grid_radius;
    double sup_phi = 0.0, sup_grad = 0.0, tail = 0.0;
    for (double y1 : cs)
        for (double y2 : cs) {
            const Parts r = eval_parts(t, y1, y2, s);
            rep.min_E = std::min(rep.min_E, r.E);
            if (!(r.E > 0.0)) continue;  // phi undefined here; min_E already records it
            const double phi = detail::profile_power(r.E, r.D, prm.p);
            sup_phi = std::max(sup_phi, std::fabs(phi));
            const double f = phi / (prm.p - 1.0);
            const double g1 = f * (r.E1 / r.E - r.D1 / r.D);
            const double g2 = f * (r.E2 / r.E - r.D2 / r.D);
            sup_grad = std::max(sup_grad, std::hypot(g1, g2));
            if (std::max(std::fabs(y1), std::fabs(y2)) >= outer - 1e-12)
                tail = std::max(tail, phi);
        }
    rep.sup_phi_excess = (sup_phi - prm.kappa) * std::exp(s / 3.0);
    rep.sup_grad = sup_grad * std::exp(s / 6.0);
    rep.tail_value = tail;
    return rep;
}

// The smallest delta from a fixed menu whose profile passes the positivity
// scan (min E >= 1/2) at the given s — makes "delta large enough" operational.
inline std::optional<double> delta_threshold(double p, double s, double grid_radius = 20.0) {
    for (double delta : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
        Params prm = Params::make(p, delta);
        if (certify_lemphi(prm, s, grid_radius).positivity_ok()) return delta;
    }
    return std::nullopt;
}

}  // namespace blowup::profile
