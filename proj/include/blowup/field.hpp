#pragma once

// Spectral fields on the Gaussian-weighted plane: a coefficient map over the
// tensor Hermite basis h_a(y1) h_b(y2) plus optional cached samples on the
// Gauss tensor grid.  Degree pairs (a, b) index the basis; the total/slot
// convention (i, j) used by the projection API corresponds to
// (a, b) = (i-j, j).
//
// The "symmetric" flag marks membership in the subspace invariant under the
// axis and bisectrix reflections: coefficients vanish unless a and b are both
// even, and c(a,b) = c(b,a).

#include "blowup/hermite.hpp"
#include "blowup/quad.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blowup {

struct SpectralField {
    int nmax = 16;
    bool symmetric = false;
    std::map<std::pair<int, int>, double> coeffs;  // (a, b) -> coefficient
    int grid_order = 0;                            // > 0 iff samples cached
    std::vector<double> samples;                   // row-major per Grid2

    bool has_samples() const { return grid_order > 0; }

    double coeff(int a, int b) const {
        const auto it = coeffs.find({a, b});
        return it == coeffs.end() ? 0.0 : it->second;
    }

    // Pointwise synthesis from coefficients.
    double eval(double y1, double y2) const {
        double acc = 0.0;
        for (const auto& [k, c] : coeffs)
            acc += c * hermite_eval(k.first, y1) * hermite_eval(k.second, y2);
        return acc;
    }

    void attach_samples(const Grid2& g) {
        samples = g.sample([this](double a, double b) { return eval(a, b); });
        grid_order = g.rule.order;
    }

    static SpectralField from_coeffs(std::map<std::pair<int, int>, double> c, int nmax = 16,
                                     bool symmetric = false) {
        SpectralField f;
        f.nmax = nmax;
        f.symmetric = symmetric;
        f.coeffs = std::move(c);
        for (const auto& [k, v] : f.coeffs) {
            if (k.first < 0 || k.second < 0 || k.first + k.second > nmax) {
                std::ostringstream os;
                os << "SpectralField: mode (" << k.first << ", " << k.second
                   << ") outside degree bound " << nmax;
                throw std::invalid_argument(os.str());
            }
            if (symmetric) {
                if ((k.first % 2 != 0 || k.second % 2 != 0) && v != 0.0)
                    throw std::invalid_argument(
                        "SpectralField: odd mode breaks the symmetric-subspace flag");
                if (f.coeff(k.second, k.first) != v)
                    throw std::invalid_argument(
                        "SpectralField: coefficients must satisfy c(a,b) = c(b,a) when "
                        "flagged symmetric");
            }
        }
        return f;
    }

    // Analysis: project grid samples onto every mode a+b <= nmax.  Exact for
    // polynomial fields of degree <= nmax when the grid order exceeds nmax.
    static SpectralField from_samples(const Grid2& g, std::vector<double> s, int nmax = 16,
                                      bool symmetric = false) {
        if (static_cast<int>(s.size()) != g.size())
            throw std::invalid_argument("SpectralField: sample vector does not match the grid");
        if (nmax >= g.rule.order)
            throw std::invalid_argument(
                "SpectralField: analysis needs quadrature order > degree bound");
        SpectralField f;
        f.nmax = nmax;
        f.symmetric = symmetric;
        for (int a = 0; a <= nmax; ++a)
            for (int b = 0; a + b <= nmax; ++b)
                f.coeffs[{a, b}] = project(g, s, a + b, b);
        if (symmetric) {
            // Enforce the subspace structure, tolerating analysis round-off.
            double scale = 1.0;
            for (const auto& [k, v] : f.coeffs) scale = std::max(scale, std::fabs(v));
            for (auto& [k, v] : f.coeffs) {
                if (k.first % 2 != 0 || k.second % 2 != 0) {
                    if (std::fabs(v) > 1e-9 * scale)
                        throw std::invalid_argument(
                            "SpectralField: samples are not symmetric (odd-mode content)");
                    v = 0.0;
                }
            }
            for (auto& [k, v] : f.coeffs) {
                const double w = f.coeffs[{k.second, k.first}];
                if (std::fabs(v - w) > 1e-9 * scale)
                    throw std::invalid_argument(
                        "SpectralField: samples are not symmetric under index swap");
                const double avg = 0.5 * (v + w);
                v = avg;
                f.coeffs[{k.second, k.first}] = avg;
            }
        }
        f.samples = std::move(s);
        f.grid_order = g.rule.order;
        return f;
    }
};

// L2(rho) norm from coefficients via the exact mode norms.
inline double l2_norm(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& [k, c] : f.coeffs)
        acc += c * c * hermite_norm_sq(k.first) * hermite_norm_sq(k.second);
    return std::sqrt(acc);
}

// L^r(rho) norm of grid samples.
inline double lr_norm(const Grid2& g, const std::vector<double>& samples, double r) {
    if (!(r >= 1.0)) throw std::invalid_argument("lr_norm: need r >= 1");
    if (static_cast<int>(samples.size()) != g.size())
        throw std::invalid_argument("lr_norm: sample vector does not match the grid");
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            acc += g.w2(i, j) * std::pow(std::fabs(samples[g.index(i, j)]), r);
    return std::pow(acc, 1.0 / r);
}

// Coefficients-vs-samples consistency: the largest deviation between stored
// coefficients and re-projection of the stored samples.
inline double projection_residual(const Grid2& g, const SpectralField& f) {
    if (!f.has_samples() || f.grid_order != g.rule.order)
        throw std::invalid_argument("projection_residual: field has no samples on this grid");
    double worst = 0.0;
    for (int a = 0; a <= f.nmax; ++a)
        for (int b = 0; a + b <= f.nmax; ++b)
            worst = std::max(worst,
                             std::fabs(project(g, f.samples, a + b, b) - f.coeff(a, b)));
    return worst;
}

}  // namespace blowup
