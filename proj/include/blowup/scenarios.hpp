#pragma once

// Three-region control of the recentred solution.
//
// The verification splits the recentring points a into three regions by the
// size of G0(a) relative to e^{-s0} and certifies a different behaviour in
// each: collapse to a profile value below kappa in the large region, a
// quantitative sandwich in the middle band, and — in the small region — a
// monitored descent of the recentred solution from kappa to kappa - eta*,
// where it hands off to the flat connecting orbit.  Two stability probes
// (around zero and around the flat orbit) supply the constants that the
// hand-off consumes, and two endgame checks translate the trapped trajectory
// into statements about the original variables: a pure-reaction ODE for the
// final profile, and a sup-norm comparison of the evolved solution against
// the limiting cross profile on its growing plateau region.
//
// Every integration here uses the full equation in self-similar variables,
//
//     d_s w = Delta w - (y/2) . grad w - w/(p-1) + |w|^{p-1} w,
//
// which is autonomous in s: the linear part acts diagonally on the product
// Hermite basis with eigenvalues -(a+b)/2 - 1/(p-1), and the reaction term
// |w|^{p-1} w has an exact pointwise flow, so a Strang split needs no
// quadrature in time.  This differs from the difference-field integrator in
// dynamics.hpp, which tracks w - phi and therefore carries profile terms;
// here the full field is the unknown and no profile validity is assumed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blowup/calibrated.hpp"
#include "blowup/dynamics.hpp"
#include "blowup/errors.hpp"
#include "blowup/field.hpp"
#include "blowup/hermite.hpp"
#include "blowup/params.hpp"
#include "blowup/profile.hpp"
#include "blowup/quad.hpp"

namespace blowup::scenarios {

// ---------------------------------------------------------------------------
// Region classification
// ---------------------------------------------------------------------------

enum class Region { R1, R2, R3 };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::R1: return "R1";
        case Region::R2: return "R2";
        default: return "R3";
    }
}

// Points within this relative distance of a threshold carry both adjacent
// labels, so exact-boundary constructions classify stably in floating point.
inline constexpr double kBoundaryBand = 1e-9;

struct RegionLabel {
    std::set<Region> labels;
    double m = 0.0;
    double M = 1.0;
    double G0_value = 0.0;

    bool has(Region r) const { return labels.count(r) != 0; }
};

// G0(a) >= M e^{-s0} is R1, G0(a) <= m e^{-s0} is R3, the band between is R2;
// values within the boundary band of a threshold belong to both sides.
inline RegionLabel classify(const std::array<double, 2>& a, double s0, double m, double M,
                            const Params& prm) {
    if (!(m > 0.0 && m < 1.0 && M >= 1.0))
        throw std::invalid_argument("classify: need 0 < m < 1 <= M");
    calibrated::validate(prm);
    RegionLabel out;
    out.m = m;
    out.M = M;
    out.G0_value = profile::eval_G0(prm, a[0], a[1]);
    const double lo = m * std::exp(-s0), hi = M * std::exp(-s0);
    if (out.G0_value >= hi * (1.0 - kBoundaryBand)) out.labels.insert(Region::R1);
    if (out.G0_value <= hi * (1.0 + kBoundaryBand) &&
        out.G0_value >= lo * (1.0 - kBoundaryBand))
        out.labels.insert(Region::R2);
    if (out.G0_value <= lo * (1.0 + kBoundaryBand)) out.labels.insert(Region::R3);
    return out;
}

// ---------------------------------------------------------------------------
// Size bounds for the initial data over the three regions
// ---------------------------------------------------------------------------

struct RegionSizeReport {
    RegionLabel label;
    double w0_value = 0.0;  // w0(a e^{s0/2}, s0)
    double lower = 0.0;     // binding bounds over all labels carried by a
    double upper = 0.0;
    bool pass = false;
};

// Evaluates the initial data at the recentring point and checks the frozen
// two-sided size bound of the region(s) the point belongs to.  The bands
// bracket kappa (1 + e^{s0} G0)^{-1/(p-1)} through the region thresholds,
// with slack C e^{-s0/3} for the finite-s0 profile corrections.
inline RegionSizeReport region_size_check(const std::array<double, 2>& a, const Params& prm,
                                          double m = calibrated::kRegionLo,
                                          double M = calibrated::kRegionHi) {
    RegionSizeReport rep;
    rep.label = classify(a, prm.s0, m, M, prm);
    const double root = std::exp(0.5 * prm.s0);
    rep.w0_value = profile::eval_w0_init(prm, a[0] * root, a[1] * root);
    const double slack = calibrated::kSizeSlackC * std::exp(-prm.s0 / 3.0);
    const auto cap = [&](double t) {  // kappa (1 + t)^{-1/(p-1)}
        return prm.kappa * std::exp(-std::log1p(t) / (prm.p - 1.0));
    };
    rep.lower = -std::numeric_limits<double>::infinity();
    rep.upper = std::numeric_limits<double>::infinity();
    const auto tighten = [&](double lo, double hi) {
        rep.lower = std::max(rep.lower, lo);
        rep.upper = std::min(rep.upper, hi);
    };
    if (rep.label.has(Region::R1)) tighten(0.0, cap(M) + slack);
    if (rep.label.has(Region::R2)) tighten(cap(M) - slack, cap(m) + slack);
    if (rep.label.has(Region::R3)) tighten(cap(m) - slack, prm.kappa + slack);
    rep.pass = rep.lower <= rep.w0_value && rep.w0_value <= rep.upper;
    return rep;
}

// ---------------------------------------------------------------------------
// Full-equation integrator (autonomous, Strang split, exact reaction flow)
// ---------------------------------------------------------------------------

struct WState {
    SpectralField w;  // the full field in self-similar variables
    double s = 0.0;   // elapsed label; the flow itself is autonomous
};

// Spectral box for the full-equation integrator.  The reaction substep is an
// exact pointwise flow with a finite basin (|v| < ((p-1) ds)^{-1/(p-1)}), and
// on a large basis the product cascade piles up against the truncation shell,
// whose basis values at the far grid corners are astronomically amplified —
// a pure truncation artifact that can push corner samples out of the basin
// even though the continuum far field decays.  Degree 8 keeps one generation
// of reaction products of the admissible (sup <= 2 kappa on the hull) data,
// which stays well inside the basin; the weighted norms the checks report are
// insensitive to the discarded tail.
inline constexpr int kWNmax = 8;

namespace detail {

// Re-project a shape onto the integrator's box; content beyond it is a
// caller error, not something to fold silently into the measurements.
inline SpectralField boxed(const SpectralField& f, const char* who) {
    SpectralField out;
    out.nmax = kWNmax;
    out.symmetric = false;
    for (const auto& [k, v] : f.coeffs) {
        if (v == 0.0) continue;
        if (k.first + k.second > kWNmax) {
            std::ostringstream os;
            os << who << ": shape carries mode (" << k.first << ", " << k.second
               << ") beyond the integrator's degree bound " << kWNmax;
            throw std::invalid_argument(os.str());
        }
        out.coeffs[k] = v;
    }
    return out;
}

}  // namespace detail

namespace detail {

// Exact time-ds flow of v' = |v|^{p-1} v: |v|^{1-p} decreases linearly, so
// v(ds) = v (1 - (p-1)|v|^{p-1} ds)^{-1/(p-1)}.  A nonpositive bracket means
// the pointwise orbit blows up within the substep.
inline double reaction_flow(double v, double p, double ds) {
    if (v == 0.0) return 0.0;
    const double bracket = 1.0 - (p - 1.0) * std::pow(std::fabs(v), p - 1.0) * ds;
    if (!(bracket > 0.0)) {
        std::ostringstream os;
        os << "w_step: the pointwise reaction flow blows up within the substep at |v| = "
           << std::fabs(v) << " (bracket " << bracket << ")";
        throw IntegrationOverflow(os.str());
    }
    return v * std::exp(-std::log(bracket) / (p - 1.0));
}

}  // namespace detail

inline WState w_step(const WState& st, double ds, const Params& prm) {
    if (!(ds > 0.0) || ds > 0.1)
        throw std::invalid_argument("w_step: need ds in (0, 0.1]");
    if (!st.w.has_samples() || st.w.grid_order != dynamics::kGridOrder)
        throw std::invalid_argument("w_step: state must carry samples on the flow grid");
    const Grid2& g = dynamics::flow_grid();
    const auto& bc = dynamics::detail::BasisCache::get(g, st.w.nmax);

    Eigen::MatrixXd C = dynamics::detail::coeff_matrix(st.w);
    const int m = st.w.nmax + 1;
    // e^{(ds/2) lambda_{a,b}} with lambda = -(a+b)/2 - 1/(p-1) factors as
    // e^{-ds/(2(p-1))} e^{-(ds/4) a} e^{-(ds/4) b}.
    Eigen::VectorXd u(m);
    for (int a = 0; a < m; ++a) u(a) = std::exp(-0.25 * ds * a);
    const double c0 = std::exp(-0.5 * ds / (prm.p - 1.0));
    const auto half_linear = [&](Eigen::MatrixXd& Mtx) {
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) Mtx(a, b) *= c0 * u(a) * u(b);
    };
    half_linear(C);

    Eigen::MatrixXd S = bc.H * C * bc.H.transpose();
    const int n = g.n;
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            S(i, j) = detail::reaction_flow(S(i, j), prm.p, ds);
            if (std::fabs(g.y1(i)) <= dynamics::kCoreRadius &&
                std::fabs(g.y2(j)) <= dynamics::kCoreRadius)
                sup = std::max(sup, std::fabs(S(i, j)));
        }
    if (sup > 10.0 * prm.kappa) {
        std::ostringstream os;
        os << "w_step: sup|w| = " << sup << " > 10 kappa on the core region at s = " << st.s
           << "; integration left the trusted regime";
        throw IntegrationOverflow(os.str());
    }
    C = bc.Pr * S * bc.Pr.transpose();
    // Drop the unresolved total degrees picked up by the analysis matrices.
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a + b > st.w.nmax) C(a, b) = 0.0;
    half_linear(C);
    const Eigen::MatrixXd Sout = bc.H * C * bc.H.transpose();

    WState out;
    out.w = dynamics::detail::field_from_matrices(g, C, Sout, st.w.nmax, st.w.symmetric);
    out.s = st.s + ds;
    return out;
}

namespace detail {

// Sup over the whole grid hull.  The probes gate on this rather than a core
// restriction because it is an integrator-validity bound: the exact reaction
// substep diverges at any node whose value leaves the pointwise basin, so the
// far field must be controlled wherever the split flow evaluates it.
inline double hull_sup(const std::vector<double>& samples) {
    double sup = 0.0;
    for (double v : samples) sup = std::max(sup, std::fabs(v));
    return sup;
}

// ||f - c|| in L2(rho): subtract c from the constant mode, then use the exact
// mode norms.
inline double l2_dist_to_constant(const SpectralField& f, double c) {
    double acc = 0.0;
    for (const auto& [k, v] : f.coeffs) {
        const double d = (k.first == 0 && k.second == 0) ? v - c : v;
        acc += d * d * hermite_norm_sq(k.first) * hermite_norm_sq(k.second);
    }
    return std::sqrt(acc);
}

inline int step_count(double window, double ds) {
    return std::max(1, static_cast<int>(std::ceil(window / ds - 1e-12)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stability probe of the zero solution
// ---------------------------------------------------------------------------

struct DecayReport {
    std::vector<double> s;      // elapsed window time s - s1
    std::vector<double> norm;   // ||w(s)||_{L2 rho}
    std::vector<double> ratio;  // ||w(s)|| e^{(s-s1)/(p-1)} / ||w(s1)||
    double sup_ratio = 1.0;
    double fitted_exponent = 0.0;  // -(log norm(end) - log norm(0)) / window
};

// Integrates the full equation from w = eps * shape and reports the decay
// ratios against the linear rate e^{-(s-s1)/(p-1)}; the sup must stay below
// the frozen M0.  An identically zero start yields the trivial report with
// all ratios 1 and the nominal linear exponent.
inline DecayReport probe_zero_stability(double eps, const SpectralField& shape, double window,
                                        const Params& prm) {
    calibrated::validate(prm);
    if (!(window > 0.0)) throw std::invalid_argument("probe_zero_stability: need window > 0");
    WState st;
    st.w = detail::boxed(shape, "probe_zero_stability");
    for (auto& [k, v] : st.w.coeffs) v *= eps;
    const double base = l2_norm(st.w);
    if (!(base <= calibrated::eps0(prm))) {
        std::ostringstream os;
        os << "probe_zero_stability: ||eps shape|| = " << base << " exceeds eps0 = "
           << calibrated::eps0(prm);
        throw std::invalid_argument(os.str());
    }
    const Grid2& g = dynamics::flow_grid();
    st.w.attach_samples(g);
    if (detail::hull_sup(st.w.samples) > 2.0 * prm.kappa)
        throw std::invalid_argument(
            "probe_zero_stability: sup|eps shape| exceeds 2 kappa on the grid hull");

    DecayReport rep;
    const int nstep = detail::step_count(window, dynamics::kDefaultDs);
    const double ds = window / nstep;
    const auto log_row = [&](double t, double nrm) {
        rep.s.push_back(t);
        rep.norm.push_back(nrm);
        rep.ratio.push_back(base > 0.0 ? nrm * std::exp(t / (prm.p - 1.0)) / base : 1.0);
    };
    log_row(0.0, base);
    for (int k = 1; k <= nstep; ++k) {
        st = w_step(st, ds, prm);
        log_row(k * ds, l2_norm(st.w));
    }
    rep.sup_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
    rep.fitted_exponent = base > 0.0 && rep.norm.back() > 0.0
                              ? (std::log(base) - std::log(rep.norm.back())) / window
                              : 1.0 / (prm.p - 1.0);
    return rep;
}

// ---------------------------------------------------------------------------
// Stability probe of the flat connecting orbit
// ---------------------------------------------------------------------------

struct OrbitReport {
    std::vector<double> s;    // elapsed window time
    std::vector<double> dev;  // ||w(s) - psi(s + sigma1)||_{L2 rho}
    std::vector<double> ratio;
    double sup_ratio = 0.0;
};

// Integrates from w = psi(sigma1) + eps * shape and reports the deviation
// from the time-shifted flat orbit, normalized by the local orbit speed:
// ratio(s) = ||w - psi(s+sigma1)|| |psi'(sigma1)| / (||w(0) - psi(sigma1)||
// |psi'(s+sigma1)|), which must stay below the frozen M1.  An unperturbed
// start follows the orbit exactly: all ratios 0.
inline OrbitReport probe_psi_stability(double sigma1, double eps, const SpectralField& shape,
                                       double window, const Params& prm) {
    calibrated::validate(prm);
    if (!(window > 0.0)) throw std::invalid_argument("probe_psi_stability: need window > 0");
    WState st;
    st.w = detail::boxed(shape, "probe_psi_stability");
    for (auto& [k, v] : st.w.coeffs) v *= eps;
    const double base = l2_norm(st.w);
    const double speed1 = std::fabs(profile::eval_dpsi(prm, sigma1));
    if (!(base <= speed1 / calibrated::kM1)) {
        std::ostringstream os;
        os << "probe_psi_stability: ||eps shape|| = " << base
           << " exceeds |psi'(sigma1)|/M1 = " << speed1 / calibrated::kM1;
        throw std::invalid_argument(os.str());
    }
    st.w.coeffs[{0, 0}] += profile::eval_psi(prm, sigma1);
    const Grid2& g = dynamics::flow_grid();
    st.w.attach_samples(g);
    if (detail::hull_sup(st.w.samples) > 2.0 * prm.kappa)
        throw std::invalid_argument(
            "probe_psi_stability: sup|psi(sigma1) + eps shape| exceeds 2 kappa on the grid "
            "hull");

    OrbitReport rep;
    const int nstep = detail::step_count(window, dynamics::kDefaultDs);
    const double ds = window / nstep;
    const auto log_row = [&](double t) {
        const double d = detail::l2_dist_to_constant(st.w, profile::eval_psi(prm, sigma1 + t));
        rep.s.push_back(t);
        rep.dev.push_back(d);
        rep.ratio.push_back(
            base > 0.0 ? d * speed1 /
                             (base * std::fabs(profile::eval_dpsi(prm, sigma1 + t)))
                       : 0.0);
    };
    log_row(0.0);
    for (int k = 1; k <= nstep; ++k) {
        st = w_step(st, ds, prm);
        log_row(k * ds);
    }
    rep.sup_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
    return rep;
}

// ---------------------------------------------------------------------------
// Descent from kappa to kappa - eta* in the small region
// ---------------------------------------------------------------------------

struct DescentReport {
    double iota = 0.0;        // recentred deficit e^{-s0}K^2L^2 + delta e^{-2s0}(K^6+L^6)
    double s0 = 0.0;
    double s_star = 0.0;      // e^{s*-s0} iota = eta*
    double sigma_star = 0.0;  // psi(sigma*) = kappa - eta*
    std::vector<double> s;    // logged rows on [s0, s*]
    std::vector<double> dev;  // ||w_a(s) - (kappa - e^{s-s0} iota)||
    std::vector<double> bound;
    std::vector<double> h00;  // constant-mode coefficient
    double worst_excess = 0.0;    // max(dev - bound); <= 0 means the envelope holds
    double handoff_norm = 0.0;    // ||w_a(s*) - (kappa - eta*)||
    double handoff_budget = 0.0;  // |psi'(sigma*)| / M1, the orbit probe's gate
    bool h00_monotone = false;
    double post_sup_norm = 0.0;  // sup ||w_a|| over the two units after s*
    bool pass = false;
};

// Follows the recentred solution w_a, a = (K, L) e^{-s0/2} in the small
// region with K + L >= A, from s0 until its constant mode has descended to
// kappa - eta*, checking the drift envelope
//     ||w_a(s) - (kappa - e^{s-s0} iota)|| <= M ((eta* + 1/A) e^{s-s0} iota
//                                                 + e^{-s0/3})
// with the frozen M; at s* it confirms the hand-off to the flat orbit at the
// point sigma* where psi(sigma*) = kappa - eta*, within the orbit probe's
// admission gate, and that nothing re-grows in the two units after s*.
inline DescentReport descent_check(double K, double L, double eta_star, const Params& prm) {
    calibrated::validate(prm);
    if (!(K >= 0.0 && L >= 0.0 && K + L >= prm.A)) {
        std::ostringstream os;
        os << "descent_check: need K, L >= 0 with K + L >= A = " << prm.A;
        throw std::invalid_argument(os.str());
    }
    if (!(eta_star > 0.0 && eta_star < 0.5 * prm.kappa))
        throw std::invalid_argument("descent_check: need 0 < eta* < kappa/2");
    if (!(calibrated::kRegionLo <= eta_star * (prm.p - 1.0) / prm.kappa)) {
        std::ostringstream os;
        os << "descent_check: region threshold m = " << calibrated::kRegionLo
           << " exceeds eta* (p-1)/kappa = " << eta_star * (prm.p - 1.0) / prm.kappa
           << "; the small region does not force the deficit below the descent depth";
        throw std::invalid_argument(os.str());
    }
    const double root = std::exp(-0.5 * prm.s0);
    const RegionLabel lab =
        classify({K * root, L * root}, prm.s0, calibrated::kRegionLo, calibrated::kRegionHi, prm);
    if (!lab.has(Region::R3)) {
        std::ostringstream os;
        os << "descent_check: a = (K, L) e^{-s0/2} is not in the small region: G0 = "
           << lab.G0_value << " > m e^{-s0} = " << calibrated::kRegionLo * std::exp(-prm.s0)
           << " at K = " << K << ", L = " << L << ", s0 = " << prm.s0;
        throw std::invalid_argument(os.str());
    }

    DescentReport rep;
    rep.s0 = prm.s0;
    rep.iota = std::exp(-prm.s0) * K * K * L * L +
               prm.delta * std::exp(-2.0 * prm.s0) * (std::pow(K, 6) + std::pow(L, 6));
    rep.s_star = prm.s0 + std::max(0.0, std::log(eta_star / rep.iota));
    rep.sigma_star =
        std::log(std::exp((prm.p - 1.0) * std::log(prm.kappa / (prm.kappa - eta_star))) - 1.0);
    rep.handoff_budget = std::fabs(profile::eval_dpsi(prm, rep.sigma_star)) / calibrated::kM1;

    // Recentred initial data in closed form: w_a(y, s0) = w0(y + (K, L), s0),
    // projected onto the integrator's box.
    const Grid2& g = dynamics::flow_grid();
    WState st;
    st.s = prm.s0;
    st.w = SpectralField::from_samples(
        g,
        g.sample([&](double y1, double y2) {
            return profile::eval_w0_init(prm, y1 + K, y2 + L);
        }),
        kWNmax, false);

    const auto log_row = [&](const WState& cur) {
        const double drift = prm.kappa - std::exp(cur.s - prm.s0) * rep.iota;
        const double d = detail::l2_dist_to_constant(cur.w, drift);
        const double b = calibrated::kDescentM *
                         ((eta_star + 1.0 / prm.A) * std::exp(cur.s - prm.s0) * rep.iota +
                          std::exp(-prm.s0 / 3.0));
        rep.s.push_back(cur.s);
        rep.dev.push_back(d);
        rep.bound.push_back(b);
        rep.h00.push_back(cur.w.coeff(0, 0));
    };
    log_row(st);
    const int nstep = detail::step_count(rep.s_star - prm.s0, dynamics::kDefaultDs);
    const double ds = (rep.s_star - prm.s0) / nstep;
    for (int k = 1; k <= nstep; ++k) {
        st = w_step(st, ds, prm);
        st.s = prm.s0 + k * ds;  // keep the label exact at the endpoint
        log_row(st);
    }
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rep.s.size(); ++k)
        rep.worst_excess = std::max(rep.worst_excess, rep.dev[k] - rep.bound[k]);
    rep.handoff_norm = detail::l2_dist_to_constant(st.w, prm.kappa - eta_star);
    rep.h00_monotone = true;
    for (std::size_t k = 1; k < rep.h00.size(); ++k)
        if (!(rep.h00[k] < rep.h00[k - 1] + 1e-15)) rep.h00_monotone = false;

    rep.post_sup_norm = 0.0;
    const int npost = detail::step_count(2.0, dynamics::kDefaultDs);
    for (int k = 1; k <= npost; ++k) {
        st = w_step(st, 2.0 / npost, prm);
        rep.post_sup_norm = std::max(rep.post_sup_norm, l2_norm(st.w));
    }
    rep.pass = rep.worst_excess <= 0.0 && rep.handoff_norm <= rep.handoff_budget &&
               rep.h00_monotone && rep.post_sup_norm <= 1.5 * prm.kappa;
    return rep;
}

// ---------------------------------------------------------------------------
// Final-profile endgame: the pure-reaction ODE u' = u^p
// ---------------------------------------------------------------------------

// Adaptive embedded Runge-Kutta (Cash-Karp 4/5) for the scalar reaction ODE
// u' = |u|^{p-1} u from t0 to t1.  Throws IntegrationOverflow if the orbit
// blows up before t1 (the exact blow-up time is |u0|^{1-p}/(p-1) past t0).
inline double integrate_power_ode(double u0, double t0, double t1, double p,
                                  double reltol = 1e-12) {
    if (!(t1 >= t0)) throw std::invalid_argument("integrate_power_ode: need t1 >= t0");
    const auto f = [p](double u) { return std::copysign(std::pow(std::fabs(u), p), u); };
    // Cash-Karp nodes are irrelevant for an autonomous right-hand side.
    static constexpr double b21 = 0.2;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static constexpr double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0,
                            b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                            b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                            b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                            c6 = 512.0 / 1771.0;
    static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                            d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                            d6 = c6 - 0.25;

    double t = t0, u = u0;
    double h = std::min(1e-3, t1 - t0 > 0.0 ? (t1 - t0) / 16.0 : 1e-3);
    const double cap = 1e12;
    int iterations = 0;
    while (t < t1 - 1e-300 && (t1 - t) > 1e-16 * std::max(1.0, std::fabs(t1))) {
        if (++iterations > 2000000)
            throw std::runtime_error("integrate_power_ode: step count exceeded");
        h = std::min(h, t1 - t);
        const double k1 = f(u);
        const double k2 = f(u + h * b21 * k1);
        const double k3 = f(u + h * (b31 * k1 + b32 * k2));
        const double k4 = f(u + h * (b41 * k1 + b42 * k2 + b43 * k3));
        const double k5 = f(u + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        const double k6 =
            f(u + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        const double u5 = u + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        const double err =
            std::fabs(h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6));
        const double tol = reltol * std::max(std::fabs(u), std::fabs(u5)) + 1e-300;
        if (err <= tol || h <= 1e-15 * std::max(1.0, std::fabs(t))) {
            t += h;
            u = u5;
            if (!(std::fabs(u) < cap)) {
                std::ostringstream os;
                os << "integrate_power_ode: |u| reached " << std::fabs(u) << " at t = " << t
                   << " < t1 = " << t1 << "; the orbit blows up at t = "
                   << t0 + std::exp((1.0 - p) * std::log(std::fabs(u0))) / (p - 1.0)
                   << " before the requested endpoint";
                throw IntegrationOverflow(os.str());
            }
        }
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
    }
    return u;
}

// Integrates the pure-reaction endgame from the cap value
// u(t*) = kappa [(1+K0)(T-t*)]^{-1/(p-1)} and returns u(T); the separable
// closed form gives u(T) = kappa [K0 (T-t*)]^{-1/(p-1)}, which the adaptive
// integrator must reproduce.
inline double final_profile_ode(double K0, double T, double t_star, const Params& prm) {
    if (!(K0 > 0.0)) throw std::invalid_argument("final_profile_ode: need K0 > 0");
    if (!(t_star >= 0.0 && t_star < T))
        throw std::invalid_argument("final_profile_ode: need 0 <= t* < T");
    const double u0 =
        prm.kappa * std::exp(-std::log((1.0 + K0) * (T - t_star)) / (prm.p - 1.0));
    return integrate_power_ode(u0, t_star, T, prm.p);
}

// ---------------------------------------------------------------------------
// Intermediate profile along a trapped trajectory
// ---------------------------------------------------------------------------

struct IntermediateReport {
    std::vector<double> s;
    std::vector<double> sup_err;  // sup over the plateau region of |w - Phi|
    std::vector<int> region_nodes;
    bool decreasing = false;
};

// Evolves the seeded initial data and, at each requested time, measures the
// sup of |w - Phi| over the plateau region
//     { e^{-s} y1^2 y2^2 + delta e^{-2s} (y1^6 + y2^6) < K }
// intersected with the grid hull.  The trajectory must stay inside the
// membership region throughout; an exit raises MissingTrajectory.  The
// sequence of sups must decrease: the evolved solution settles onto the
// limiting cross profile on the plateau.
inline IntermediateReport intermediate_profile_check(double K, const std::vector<double>& s_list,
                                                     const Params& prm) {
    if (!(K > 0.0)) throw std::invalid_argument("intermediate_profile_check: need K > 0");
    if (s_list.empty())
        throw std::invalid_argument("intermediate_profile_check: need a nonempty s list");
    for (std::size_t k = 0; k < s_list.size(); ++k) {
        if (s_list[k] < prm.s0 - 1e-12)
            throw std::invalid_argument("intermediate_profile_check: each s must be >= s0");
        if (k > 0 && s_list[k] < s_list[k - 1])
            throw std::invalid_argument("intermediate_profile_check: s list must be sorted");
    }
    const Grid2& g = dynamics::flow_grid();
    dynamics::SpectralState st = dynamics::build_initial(prm);
    IntermediateReport rep;
    for (double starget : s_list) {
        if (starget > st.s + 1e-12) {
            dynamics::EvolveOptions opts;
            opts.log_every = 1000000;  // only the endpoints matter here
            const dynamics::EvolveResult res = dynamics::evolve(st, starget, prm, opts);
            if (res.exited) {
                std::ostringstream os;
                os << "intermediate_profile_check: the trajectory left the membership region "
                      "at s = "
                   << res.exit_s << " (constraint " << res.exit_constraint
                   << ") before reaching s = " << starget
                   << "; seed a trapped trajectory first";
                throw MissingTrajectory(os.str());
            }
            st = res.state;
        }
        const dynamics::detail::NodeTerms nt = dynamics::detail::node_terms(prm, g, st.s);
        double sup = 0.0;
        int count = 0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) {
                const double y1 = g.y1(i), y2 = g.y2(j);
                const double plateau =
                    std::exp(-st.s) * y1 * y1 * y2 * y2 +
                    prm.delta * std::exp(-2.0 * st.s) *
                        (std::pow(y1, 6) + std::pow(y2, 6));
                if (!(plateau < K)) continue;
                ++count;
                const std::size_t idx = g.index(i, j);
                const double w = nt.phi[idx] + st.q.samples[idx];
                sup = std::max(sup, std::fabs(w - profile::eval_Phi(prm, y1, y2, st.s)));
            }
        rep.s.push_back(st.s);
        rep.sup_err.push_back(sup);
        rep.region_nodes.push_back(count);
    }
    rep.decreasing = true;
    for (std::size_t k = 1; k < rep.sup_err.size(); ++k)
        if (!(rep.sup_err[k] < rep.sup_err[k - 1])) rep.decreasing = false;
    return rep;
}

}  // namespace blowup::scenarios
