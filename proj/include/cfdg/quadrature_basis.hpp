// Legendre polynomials, Gauss-Legendre rules and reference-cell operators on [-1,1].
#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfdg {

/// L_k(x) by the three-term recurrence.
inline double legendre_eval(int k, double x) {
    if (k < 0) throw std::invalid_argument("legendre_eval: negative degree");
    if (k == 0) return 1.0;
    double p_prev = 1.0, p = x;
    for (int m = 1; m < k; ++m) {
        const double p_next = ((2.0 * m + 1.0) * x * p - m * p_prev) / (m + 1.0);
        p_prev = p;
        p = p_next;
    }
    return p;
}

/// Fills values[m] = L_m(x) for m = 0..values.size()-1.
inline void legendre_values(double x, std::span<double> values) {
    if (values.empty()) return;
    values[0] = 1.0;
    if (values.size() > 1) values[1] = x;
    for (std::size_t m = 1; m + 1 < values.size(); ++m) {
        values[m + 1] = ((2.0 * m + 1.0) * x * values[m] - m * values[m - 1]) / (m + 1.0);
    }
}

/// Fills derivs[m] = L_m'(x), using L'_{m+1} = L'_{m-1} + (2m+1) L_m.
inline void legendre_derivatives(double x, std::span<double> derivs) {
    const std::size_t n = derivs.size();
    if (n == 0) return;
    std::vector<double> values(n);
    legendre_values(x, values);
    derivs[0] = 0.0;
    if (n > 1) derivs[1] = 1.0;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        derivs[m + 1] = derivs[m - 1] + (2.0 * m + 1.0) * values[m];
    }
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    /// Integral over [-1,1] of f.
    template <class F>
    double integrate(F&& f) const {
        double sum = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * f(nodes[q]);
        return sum;
    }
};

namespace detail {

inline QuadratureRule compute_gauss_rule(int n) {
    constexpr double tolerance = 1e-15;
    constexpr int max_iterations = 100;
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like guess for the i-th largest root.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < max_iterations; ++it) {
            double p_prev = 1.0, p = z;
            for (int m = 1; m < n; ++m) {
                const double p_next = ((2.0 * m + 1.0) * z * p - m * p_prev) / (m + 1.0);
                p_prev = p;
                p = p_next;
            }
            dp = n * (z * p - p_prev) / (z * z - 1.0);
            const double step = p / dp;
            z -= step;
            if (std::abs(step) <= tolerance) break;
        }
        // recompute derivative at the converged root for the weight
        double p_prev = 1.0, p = z;
        for (int m = 1; m < n; ++m) {
            const double p_next = ((2.0 * m + 1.0) * z * p - m * p_prev) / (m + 1.0);
            p_prev = p;
            p = p_next;
        }
        dp = n * (z * p - p_prev) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[n - 1 - i] = z;
        rule.nodes[i] = -z;
        rule.weights[n - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1,1], nodes increasing. Cached.
inline const QuadratureRule& gauss_rule(int n) {
    if (n <= 0) throw std::invalid_argument("gauss_rule: need at least one point, got " + std::to_string(n));
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_rule(n)).first;
    return it->second;
}

/// Points used for inner products in a degree-k space (exact up to degree 2k+7).
inline int default_quadrature_points(int k) { return k + 4; }

/// Mass, stiffness and trace data of the Legendre basis on [-1,1].
struct ReferenceOperators {
    int degree = 0;
    std::vector<double> mass_diag;  // 2/(2m+1)
    // stiffness[m][n] = int L_n L_m'
    std::vector<std::vector<double>> stiffness;
    std::vector<double> edge_left;   // L_m(-1)
    std::vector<double> edge_right;  // L_m(+1)

    int size() const { return degree + 1; }
};

namespace detail {

inline ReferenceOperators compute_reference_operators(int k) {
    ReferenceOperators ops;
    ops.degree = k;
    const int n = k + 1;
    ops.mass_diag.resize(n);
    ops.edge_left.resize(n);
    ops.edge_right.resize(n);
    ops.stiffness.assign(n, std::vector<double>(n, 0.0));
    for (int m = 0; m < n; ++m) {
        ops.mass_diag[m] = 2.0 / (2.0 * m + 1.0);
        ops.edge_right[m] = 1.0;
        ops.edge_left[m] = (m % 2 == 0) ? 1.0 : -1.0;
    }
    const QuadratureRule& rule = gauss_rule(k + 2);
    std::vector<double> values(n), derivs(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        legendre_values(rule.nodes[q], values);
        legendre_derivatives(rule.nodes[q], derivs);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) ops.stiffness[m][j] += rule.weights[q] * values[j] * derivs[m];
    }
    // L_m' only contains L_j with j < m and m - j odd
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            if (j >= m || (m - j) % 2 == 0) ops.stiffness[m][j] = 0.0;
    return ops;
}

}  // namespace detail

/// Cached per degree; the returned reference stays valid for the program lifetime.
inline const ReferenceOperators& reference_operators(int k) {
    if (k < 0) throw std::invalid_argument("reference_operators: negative degree");
    static std::mutex mutex;
    static std::map<int, ReferenceOperators> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, detail::compute_reference_operators(k)).first;
    return it->second;
}

}  // namespace cfdg
