#pragma once

// Gauss quadrature for the 1-D marginal weight rho1(ξ) = e^{−ξ²/4}/√(4π)
// and its 2-D tensorization for rho(y) = e^{−|y|²/4}/(4π).
//
// The nodes are the scaled standard Gauss–Hermite abscissae (x ↦ √2·x with
// renormalized weights); concretely we diagonalize the Jacobi matrix of the
// monic orthogonal family for rho1 — which is exactly h_n, with recurrence
// coefficient b_n = ‖h_n‖²/‖h_{n−1}‖² = 2n — so the off-diagonal entries are
// √(2n), i.e. √2 times the probabilists' √n (Golub–Welsch).

#include "blowup/hermite.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace blowup {

inline constexpr int kQuadOrderCap = 128;  // documented cap (spec floor is 64)

struct QuadRule {
    std::vector<double> nodes;    // ascending, symmetric about 0
    std::vector<double> weights;  // positive, sum = 1 (rho1 is a probability density)
    int order = 0;
};

inline QuadRule make_quad(int order) {
    if (order < 1 || order > kQuadOrderCap)
        throw std::invalid_argument("make_quad: order must be in [1, 128]");

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order > 1 ? order - 1 : 1);
    for (int n = 1; n < order; ++n) sub[n - 1] = std::sqrt(2.0 * n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(order - 1, 0)),
                              Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("make_quad: eigensolver failed");

    QuadRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) rule.nodes[i] = es.eigenvalues()[i];  // ascending

    // Enforce the exact ± symmetry of the nodes (kills eigensolver round-off
    // asymmetry, which matters for byte-identical reruns).
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double v = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -v;
        rule.nodes[j] = v;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;

    // Weights via the Christoffel identity w_i = 1 / Σ_{k<n} p_k(x_i)² with p_k
    // the orthonormal family (p_k = h_k/√(2^k k!)).  This is markedly more
    // accurate for the extreme nodes than squaring the first eigenvector
    // component, whose relative error is amplified by the tiny weight itself.
    double sum = 0.0;
    for (int i = 0; i < order; ++i) {
        const double x = rule.nodes[i];
        double pkm1 = 0.0, pk = 1.0, acc = 1.0;  // p_0 = 1
        for (int k = 1; k < order; ++k) {
            // b_k = √(2k): p_k = (x·p_{k−1} − b_{k−1}·p_{k−2}) / b_k
            const double pkp1 = (x * pk - std::sqrt(2.0 * (k - 1)) * pkm1) / std::sqrt(2.0 * k);
            pkm1 = pk;
            pk = pkp1;
            acc += pk * pk;
        }
        rule.weights[i] = 1.0 / acc;
        sum += rule.weights[i];
    }
    // Normalize so Σw = mu0 = ∫rho1 = 1 exactly (up to one rounding).
    for (double& w : rule.weights) w /= sum;
    for (int i = 0; i < order / 2; ++i) {  // exact ± symmetry of the weights
        const int j = order - 1 - i;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = rule.weights[j] = w;
    }
    return rule;
}

inline double integrate_1d(const QuadRule& q, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (int i = 0; i < q.order; ++i) acc += q.weights[i] * f(q.nodes[i]);
    return acc;
}

// Tensor grid for 2-D integrals against rho.  Samples are stored row-major:
// index(i,j) = i*n + j with y1 = nodes[i], y2 = nodes[j].
struct Grid2 {
    QuadRule rule;
    int n = 0;

    explicit Grid2(const QuadRule& r) : rule(r), n(r.order) {}
    explicit Grid2(int order) : Grid2(make_quad(order)) {}

    int size() const { return n * n; }
    int index(int i, int j) const { return i * n + j; }
    double y1(int i) const { return rule.nodes[i]; }
    double y2(int j) const { return rule.nodes[j]; }
    double w2(int i, int j) const { return rule.weights[i] * rule.weights[j]; }

    std::vector<double> sample(const std::function<double(double, double)>& f) const {
        std::vector<double> s(size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s[index(i, j)] = f(y1(i), y2(j));
        return s;
    }

    double integrate(const std::vector<double>& samples) const {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc += w2(i, j) * samples[index(i, j)];
        return acc;
    }
};

// Projection v_{i,j} = ∫ v · k_{i−j}(y1) k_j(y2) rho dy on the paper's
// convention: the first index is the *total* degree, so (i,j) addresses the
// coefficient of h_{i−j}(y1) h_j(y2); k_n = h_n/‖h_n‖².
inline double project(const Grid2& g, const std::vector<double>& samples, int i, int j) {
    if (j < 0 || j > i) throw std::invalid_argument("project: need 0 <= j <= i");
    const int a = i - j;
    // Self-projection of a degree-i mode needs exactness up to 2i per variable.
    if (i >= g.rule.order)
        throw std::invalid_argument("project: quadrature order too small for this mode");
    const double inv_norm = 1.0 / (hermite_norm_sq(a) * hermite_norm_sq(j));
    double acc = 0.0;
    for (int r = 0; r < g.n; ++r) {
        const double ha = hermite_eval(a, g.y1(r));
        for (int c = 0; c < g.n; ++c)
            acc += g.w2(r, c) * samples[g.index(r, c)] * ha * hermite_eval(j, g.y2(c));
    }
    return acc * inv_norm;
}

}  // namespace blowup
