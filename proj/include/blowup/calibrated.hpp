#pragma once

// Frozen calibration constants for the three-region scenario checks.
//
// The size bounds, stability probes, and descent envelope each assert an
// inequality "quantity <= constant * budget" in which the constant is not
// derivable in closed form.  Each such constant was measured once on the
// reference sweep documented next to it (p = 2, delta = 100 defaults, the
// order-48 flow grid, ds = 0.01) and then frozen here with a safety factor.
// The checks treat these values as fixed inputs; re-running the sweeps is a
// diagnostic, not part of the test contract.

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "blowup/params.hpp"

namespace blowup::scenarios::calibrated {

// Trap-ball radius for the zero-stability probe, as a fraction of kappa.
inline constexpr double kEps0Frac = 0.05;

// Zero-stability decay-ratio cap M0: sup over a window-5 run of
// ||w(s)|| e^{(s-s1)/(p-1)} / ||w(s1)||.  Sweep: shapes h0h0, h2h2, h2h0+h0h2,
// h4h4, and a mixed low-mode draw, both signs (the reaction term is odd, so
// +eps and -eps runs have identical norms), scaled to the smaller of
// {0.25, 0.5, 1.0} * eps0 and the grid-hull cap 2 kappa / sup|shape|.
// Measured sup 1.052258 (attained by eps0 * h0h0, where the pointwise
// reaction slows the flat decay toward 1/(1 - eps0) in the limit); every
// non-flat shape decays strictly faster than the flat rate (ratio 1.000000);
// frozen with room at 2.0.  Must stay <= kappa/(2 * lhs(M)) for validate().
inline constexpr double kM0 = 2.0;

// Orbit-stability ratio cap M1 for perturbations of the flat connecting
// orbit.  The sweep sigma1 in {-3, 0, 2} x {h0h0, h2h2, mixed} of both signs,
// scaled to the smaller of the |psi'(sigma1)|/M1 budget and the hull cap,
// measured sup ratio 1.089915 (attained by +eps h0h0 at sigma1 = -3, where a
// flat perturbation acts as a time shift of the orbit and the deviation is
// carried at the orbit speed; the -eps runs stay below 1 because the shifted
// orbit runs ahead); the cap 10 is kept as-is.
inline constexpr double kM1 = 10.0;

// Region thresholds: G0 <= m e^{-s0} is the small region, G0 >= M e^{-s0} the
// large one, the middle band is between.  m is also the small-region gate for
// the descent check (it forces the recentred deficit below the descent depth).
inline constexpr double kRegionLo = 0.05;  // m
inline constexpr double kRegionHi = 10.0;  // M

// Descent depth eta*: the descent check follows the recentred solution from
// kappa - iota down to kappa - eta*.
inline constexpr double kEtaStar = 0.05;

// Size-bound slack C: |w0(a e^{s0/2}, s0) - band| <= C e^{-s0/3} in each
// region.  Sweep: rays a = t(1, 1), t(1, 0), t(1, 1/2), t(1, 2) through all
// three regions (72 log-spaced G0 targets down to 100 M e^{-s0}) at s0 in
// {12, 14}, d = 0 and the seeded d of the shooting runs.  Measured max
// excess / e^{-s0/3} = 1.152996, attained at the deep large-region end
// (t = 0.0922 at s0 = 12), where the finite-s0 corrections to the profile
// are t^2-sized and the e^{-s0/3} yardstick is tightest relative to them;
// frozen at 2.0.
inline constexpr double kSizeSlackC = 2.0;

// Descent envelope factor M: ||w_a(s) - (kappa - e^{s-s0} iota)|| <=
// M ((eta* + 1/A) e^{s-s0} iota + e^{-s0/3}).  Sweep: (K, L) in {(10, 10),
// (8, 12), (12, 8), (14, 6)} at s0 in {14, 15, 16, 17}.  Measured max ratio
// 0.581477 (s0 = 14, K = 14: the deviation is dominated by the linear
// recentring modes seeded at e^{-s0} K L^2 size and growing like e^{(s-s0)/2},
// plus the logistic correction to the linear drift law near s*); frozen
// at 1.0.
inline constexpr double kDescentM = 1.0;

inline double eps0(const Params& prm) { return kEps0Frac * prm.kappa; }

// Configuration-time compatibility of the region threshold M with the frozen
// stability constants: kappa (1+M)^{-1/(p-1)} <= max(eps0/2, kappa/(2 M0)).
// The left side is the large-region size cap; the right side is the larger of
// the trap-ball radius and the decay-ratio budget that the cap must clear.
inline void validate(const Params& prm) {
    const double lhs = prm.kappa * std::exp(-std::log(1.0 + kRegionHi) / (prm.p - 1.0));
    const double rhs = std::max(0.5 * eps0(prm), 0.5 * prm.kappa / kM0);
    if (!(lhs <= rhs)) {
        std::ostringstream os;
        os << "calibrated::validate: kappa (1+M)^{-1/(p-1)} = " << lhs
           << " exceeds max(eps0/2, kappa/(2 M0)) = " << rhs
           << "; the region threshold M = " << kRegionHi
           << " is incompatible with the frozen stability constants at p = " << prm.p;
        throw std::logic_error(os.str());
    }
}

}  // namespace blowup::scenarios::calibrated
