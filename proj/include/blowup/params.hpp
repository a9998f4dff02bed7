#pragma once

// Run parameters.  kappa and gamma are derived from p and recomputed on
// construction — they are never free inputs:
//
//     kappa = (p-1)^{-1/(p-1)}   (the constant equilibrium of the flat flow),
//     gamma = (6p-2)/kappa       (the profile coefficient that kills the
//                                 y1^4 y2^2-type growth in Q).

#include <array>
#include <cmath>
#include <stdexcept>

namespace blowup {

struct Params {
    double p = 2.0;
    double delta = 100.0;
    double A = 20.0;
    double s0 = 12.0;
    // Initial-data tuning parameters (d00, d20, d40, d42, d60), each in [-2, 2].
    std::array<double, 5> d{0.0, 0.0, 0.0, 0.0, 0.0};

    // Derived.
    double kappa = 1.0;
    double gamma = 10.0;

    static Params make(double p, double delta = 100.0, double A = 20.0, double s0 = 12.0,
                       std::array<double, 5> d = {0.0, 0.0, 0.0, 0.0, 0.0}) {
        if (!(p > 1.0)) throw std::invalid_argument("Params: need p > 1");
        if (!(delta >= 1.0)) throw std::invalid_argument("Params: need delta >= 1");
        if (!(A >= 1.0)) throw std::invalid_argument("Params: need A >= 1");
        for (double di : d)
            if (!(di >= -2.0 && di <= 2.0))
                throw std::invalid_argument("Params: each d component must lie in [-2, 2]");
        Params q;
        q.p = p;
        q.delta = delta;
        q.A = A;
        q.s0 = s0;
        q.d = d;
        q.kappa = std::pow(p - 1.0, -1.0 / (p - 1.0));
        q.gamma = (6.0 * p - 2.0) / q.kappa;
        // Defining identity kappa^(p-1) (p-1) = 1, to near machine precision.
        if (std::fabs(std::pow(q.kappa, p - 1.0) * (p - 1.0) - 1.0) > 1e-14)
            throw std::runtime_error("Params: kappa consistency check failed");
        return q;
    }

    static Params defaults() { return make(2.0); }
};

}  // namespace blowup
