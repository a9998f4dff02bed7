#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blowup/field.hpp"
#include "blowup/oper.hpp"
#include "blowup/series.hpp"

#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

using namespace blowup;

namespace {

// A dense deterministic degree-<=8 coefficient field (distinct from the
// calibration family's seed).
SpectralField dense_field(unsigned seed, int deg = 8) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::map<std::pair<int, int>, double> c;
    for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) c[{a, b}] = u(gen);
    return SpectralField::from_coeffs(std::move(c), deg);
}

double coeff_distance(const SpectralField& f, const SpectralField& g) {
    double worst = 0.0;
    for (const auto& [k, c] : f.coeffs)
        worst = std::max(worst, std::fabs(c - g.coeff(k.first, k.second)));
    for (const auto& [k, c] : g.coeffs)
        worst = std::max(worst, std::fabs(c - f.coeff(k.first, k.second)));
    return worst;
}

}  // namespace

TEST_CASE("diagonal action multiplies each mode by one minus half its degree") {
    SpectralField f = SpectralField::from_coeffs(
        {{{4, 2}, 1.0}, {{2, 0}, 3.0}, {{0, 0}, 5.0}}, 16);
    SpectralField lf = apply_L_spectral(f);
    CHECK(lf.coeff(4, 2) == -2.0);   // degree 6 mode: eigenvalue -2
    CHECK(lf.coeff(2, 0) == 0.0);    // degree 2 mode: eigenvalue 0
    CHECK(lf.coeff(0, 0) == 5.0);    // constant mode: eigenvalue 1
    CHECK(lf.nmax == 16);

    // Full eigenvalue table.
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; a + b <= 10; ++b) {
            SpectralField mode = SpectralField::from_coeffs({{{a, b}, 2.5}}, 16);
            CHECK(apply_L_spectral(mode).coeff(a, b) == 2.5 * (1.0 - 0.5 * (a + b)));
        }

    // Symmetric flag survives; stale samples do not.
    SpectralField sym = SpectralField::from_coeffs({{{2, 2}, 1.0}}, 16, true);
    Grid2 g(24);
    sym.attach_samples(g);
    SpectralField lsym = apply_L_spectral(sym);
    CHECK(lsym.symmetric);
    CHECK(!lsym.has_samples());
}

TEST_CASE("field construction validates degree bounds and the symmetric subspace") {
    CHECK_THROWS_AS(SpectralField::from_coeffs({{{9, 8}, 1.0}}, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS(SpectralField::from_coeffs({{{-1, 0}, 1.0}}, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS(SpectralField::from_coeffs({{{3, 2}, 1.0}}, 16, true),
                    std::invalid_argument);  // odd mode under the symmetric flag
    CHECK_THROWS_AS(SpectralField::from_coeffs({{{4, 2}, 1.0}, {{2, 4}, 2.0}}, 16, true),
                    std::invalid_argument);  // swap-asymmetric pair
    CHECK_NOTHROW(SpectralField::from_coeffs({{{4, 2}, 1.0}, {{2, 4}, 1.0}}, 16, true));
    CHECK_NOTHROW(SpectralField::from_coeffs({{{3, 2}, 0.0}}, 16, true));

    Grid2 g(12);
    std::vector<double> bad(7, 0.0);
    CHECK_THROWS_AS(SpectralField::from_samples(g, bad, 8), std::invalid_argument);
    std::vector<double> zeros(g.size(), 0.0);
    CHECK_THROWS_AS(SpectralField::from_samples(g, zeros, 12), std::invalid_argument);
    CHECK_NOTHROW(SpectralField::from_samples(g, zeros, 11));

    // Symmetric analysis of an asymmetric function must refuse.
    std::vector<double> odd = g.sample([](double y1, double) { return y1; });
    CHECK_THROWS_AS(SpectralField::from_samples(g, odd, 8, true), std::invalid_argument);
}

TEST_CASE("analysis and synthesis round-trip a polynomial field at machine precision") {
    Grid2 g(40);
    SpectralField f = dense_field(20240901u);
    f.attach_samples(g);
    CHECK(f.grid_order == 40);

    SpectralField back = SpectralField::from_samples(g, f.samples, 8);
    CHECK(coeff_distance(f, back) < 1e-11);  // measured 1.7e-12

    // Contract: stored coefficients and stored samples describe the same
    // polynomial to 1e-9; here they agree far tighter.
    CHECK(projection_residual(g, f) < 1e-11);

    // Coefficient-space L2 norm against a directly accumulated sum.
    double acc = 0.0;
    for (const auto& [k, c] : f.coeffs)
        acc += c * c * hermite_norm_sq(k.first) * hermite_norm_sq(k.second);
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(acc)).epsilon(1e-14));

    // Sample-space L2 norm of a polynomial agrees with the exact one.
    CHECK(lr_norm(g, f.samples, 2.0) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("exact coefficient route agrees with the diagonal route through degree 12") {
    using series::PolyY;
    using series::hermite_product;

    // Pinned low-degree actions of the exact route.
    CHECK(apply_L_poly(PolyY::one()).is_zero_sym() == false);
    CHECK((apply_L_poly(PolyY::one()) - PolyY::one()).is_zero_sym());  // L 1 = 1
    PolyY y1sq = PolyY::monomial(2, 0, series::Scalar::integer(1));
    CHECK((apply_L_poly(y1sq) - PolyY::constant(series::Scalar::integer(2))).is_zero_sym());

    PolyY h6 = hermite_product(6, 0);
    CHECK((apply_L_poly(h6) - h6.scaled(BigQ(-2))).is_zero_sym());

    // L h_a h_b = (1 - (a+b)/2) h_a h_b, exactly, for every pair through
    // total degree 12.
    for (int a = 0; a <= 12; ++a)
        for (int b = 0; a + b <= 12; ++b) {
            PolyY hab = hermite_product(a, b);
            PolyY diff = apply_L_poly(hab) - hab.scaled(BigQ(2 - a - b) / 2);
            CHECK(diff.is_zero_sym());
        }
}

TEST_CASE("heat-flow quadrature reproduces the pinned kernel actions") {
    Grid2 g(40);

    SpectralField one = SpectralField::from_coeffs({{{0, 0}, 1.0}}, 8);
    SpectralField out = mehler_apply(g, one, 1.0);
    for (double v : out.samples) CHECK(v == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
    CHECK(out.coeff(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));

    SpectralField q = SpectralField::from_coeffs({{{2, 2}, 1.0}}, 8, true);
    SpectralField eq = mehler_apply(g, q, 1.0);
    CHECK(eq.symmetric);
    CHECK(eq.coeff(2, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    for (const auto& [k, c] : eq.coeffs)
        if (k != std::make_pair(2, 2)) CHECK(std::fabs(c) < 1e-10);

    SpectralField lin = SpectralField::from_coeffs({{{1, 0}, 1.0}}, 8);
    SpectralField elin = mehler_apply(g, lin, 2.0);
    CHECK(elin.coeff(1, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    for (const auto& [k, c] : elin.coeffs)
        if (k != std::make_pair(1, 0)) CHECK(std::fabs(c) < 1e-10);
}

TEST_CASE("heat-flow quadrature decays every mode at its own exponential rate") {
    Grid2 g(40);
    for (double s : {0.5, 1.0, 2.0}) {
        for (int a = 0; a <= 8; ++a)
            for (int b = 0; a + b <= 8; ++b) {
                SpectralField mode = SpectralField::from_coeffs({{{a, b}, 1.0}}, 8);
                SpectralField out = mehler_apply(g, mode, s);
                const double want = std::exp((1.0 - 0.5 * (a + b)) * s);
                double err = 0.0;
                for (const auto& [k, c] : out.coeffs) {
                    const double target = (k == std::make_pair(a, b)) ? want : 0.0;
                    err = std::max(err, std::fabs(c - target));
                }
                CHECK(err / want < 1e-6);  // measured <= 1.5e-9
            }
    }
}

TEST_CASE("heat flow composes as a semigroup and preserves positivity") {
    Grid2 g(40);
    SpectralField f = dense_field(7u);
    for (double s1 : {0.5, 1.0})
        for (double s2 : {0.5, 1.0}) {
            SpectralField two = mehler_apply(g, mehler_apply(g, f, s1), s2);
            SpectralField onehop = mehler_apply(g, f, s1 + s2);
            const double rel = coeff_distance(two, onehop) / l2_norm(onehop);
            CHECK(rel < 1e-6);  // measured <= 3e-12 absolute
        }

    // (y1 y2)^2 >= 0 expanded over the basis; the flow keeps it nonnegative
    // because every quadrature weight is positive.
    SpectralField sq = SpectralField::from_coeffs(
        {{{2, 2}, 1.0}, {{2, 0}, 2.0}, {{0, 2}, 2.0}, {{0, 0}, 4.0}}, 8, true);
    SpectralField out = mehler_apply(g, sq, 0.7);
    for (double v : out.samples) CHECK(v >= 0.0);
}

TEST_CASE("heat-flow quadrature rejects non-positive and near-singular times") {
    Grid2 g(20);
    SpectralField f = SpectralField::from_coeffs({{{0, 0}, 1.0}}, 8);
    CHECK_THROWS_AS(mehler_apply(g, f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mehler_apply(g, f, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(mehler_apply(g, f, 5e-4), std::invalid_argument);
    CHECK_NOTHROW(mehler_apply(g, f, 1e-3));
}

TEST_CASE("smoothing check enforces its admissibility window") {
    Grid2 g(40);
    SpectralField f = dense_field(11u);
    CHECK_THROWS_AS(check_regularizing(g, 2.0, 4.0, std::log(3.0), f),
                    std::invalid_argument);  // window for (2,4) is exactly log 3
    CHECK_THROWS_AS(check_regularizing(g, 2.0, 4.0, 0.5, f), std::invalid_argument);
    CHECK_THROWS_AS(check_regularizing(g, 1.5, 4.0, 2.0, f), std::invalid_argument);
    CHECK_THROWS_AS(check_regularizing(g, 4.0, 2.0, 2.0, f), std::invalid_argument);

    RegularizingReport rep = check_regularizing(g, 2.0, 4.0, 1.2, f);
    CHECK(rep.window == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(rep.s_cal == doctest::Approx(std::log(3.0) + 0.1).epsilon(1e-12));
}

TEST_CASE("smoothing ratio of the flat field is exactly the top eigen-growth") {
    Grid2 g(40);
    SpectralField flat = SpectralField::from_coeffs({{{0, 0}, 1.0}}, 8);
    for (double s : {1.2, 1.5, 2.0, 3.0}) {
        RegularizingReport rep = check_regularizing(g, 2.0, 4.0, s, flat);
        CHECK(rep.ratio == doctest::Approx(std::exp(s)).epsilon(1e-12));
    }
    // The calibrated constant is set by the random family, whose constant-mode
    // fraction is tiny; a pure constant therefore sits above the family-scaled
    // shape bound.  That verdict is part of the designed behavior.
    RegularizingReport rep = check_regularizing(g, 2.0, 4.0, 2.0, flat);
    CHECK(!rep.pass);
}

TEST_CASE("smoothing ratio decays below the calibrated shape for generic fields") {
    Grid2 g(40);
    SpectralField f = dense_field(4242u);
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {1.2, 1.5, 2.0, 3.0}) {
        RegularizingReport rep = check_regularizing(g, 2.0, 4.0, s, f);
        const double normalized = rep.ratio / std::exp(s);
        CHECK(normalized <= prev * (1.0 + 1e-12));  // nonincreasing after e^s is factored out
        CHECK(rep.pass);
        prev = normalized;
    }

    // Determinism sentinel for the calibration (seeded family, order-40 grid).
    RegularizingReport rep = check_regularizing(g, 2.0, 4.0, 2.0, f);
    CHECK(rep.C == doctest::Approx(0.145792).epsilon(1e-4));
    CHECK(rep.bound == doctest::Approx(rep.C * std::exp(2.0) *
                                       std::pow(1.0 - std::exp(-2.0), -0.5) *
                                       std::pow(1.0 - 3.0 * std::exp(-2.0), -0.25))
                           .epsilon(1e-12));

    // A second exponent pair exercises the general window formula.
    RegularizingReport wide = check_regularizing(g, 2.5, 6.0, 2.0, f);
    CHECK(wide.window == doctest::Approx(std::log(5.0 / 1.5)).epsilon(1e-14));
    CHECK(wide.pass);
}
