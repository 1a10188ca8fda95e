// Local projections matching interior moments plus interface averages.
//
// 1D: for k >= 2 even, P*w on a cell satisfies
//   int P*w v = int w v          for all v in P^{k-1},
//   (P*w(x_R^-) + P*w(x_L^+))/2 = (w(x_R) + w(x_L))/2.
// For k = 0 the only condition is preservation of the cell average.
//
// 2D (Q^k, k even): interior moments against Q^{k-1}, x-moments of the averaged
// bottom/top traces and y-moments of the averaged left/right traces against
// P^{k-1}, and the average of the four corner values.
//
// For odd k both local systems are singular: L_k (resp. L_k(x) L_k(y)) has every
// moment and every averaged trace equal to zero.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfdg/field.hpp"
#include "cfdg/mesh.hpp"
#include "cfdg/quadrature_basis.hpp"

namespace cfdg {

/// Raised when a shifted projection is requested for an odd degree.
class SingularProjectionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

inline double parity_average(int m) { return (m % 2 == 0) ? 1.0 : 0.0; }  // (L_m(1) + L_m(-1)) / 2

inline void require_even(int k, const char* what) {
    if (k < 0) throw std::invalid_argument(std::string(what) + ": negative degree");
    if (k % 2 != 0) {
        const std::string null_fn = k == 1 ? "w = x" : "w = L_" + std::to_string(k);
        throw SingularProjectionError(std::string(what) + ": local system is singular for odd degree k = " +
                                      std::to_string(k) + " (" + null_fn +
                                      " has zero moments and zero interface average, so the projection is not unique)");
    }
}

}  // namespace detail

/// Local matrix of the 1D projection on [-1,1], acting on Legendre coefficients. Defined for every k.
inline Eigen::MatrixXd pstar_reference_matrix(int k) {
    const int n = k + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    if (k == 0) {
        a(0, 0) = 2.0;
        return a;
    }
    for (int m = 0; m < k; ++m) a(m, m) = 2.0 / (2.0 * m + 1.0);
    for (int j = 0; j < n; ++j) a(k, j) = detail::parity_average(j);
    return a;
}

/// Local matrix of the 2D projection on [-1,1]^2; unknown (a,b) at index a*(k+1)+b.
inline Eigen::MatrixXd pistar_reference_matrix(int k) {
    const int n = k + 1;
    const auto idx = [n](int a, int b) { return a * n + b; };
    const auto mass = [](int m) { return 2.0 / (2.0 * m + 1.0); };
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n * n, n * n);
    int row = 0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) mat(row++, idx(a, b)) = mass(a) * mass(b);
    for (int a = 0; a < k; ++a) {  // averaged bottom/top traces, x-moments
        for (int q = 0; q < n; ++q) mat(row, idx(a, q)) = mass(a) * detail::parity_average(q);
        ++row;
    }
    for (int b = 0; b < k; ++b) {  // averaged left/right traces, y-moments
        for (int p = 0; p < n; ++p) mat(row, idx(p, b)) = mass(b) * detail::parity_average(p);
        ++row;
    }
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) mat(row, idx(p, q)) = detail::parity_average(p) * detail::parity_average(q);
    return mat;
}

struct LocalMatrixReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    Eigen::VectorXd null_vector;  // right singular vector of sigma_min

    double ratio() const { return sigma_max > 0.0 ? sigma_min / sigma_max : 0.0; }
    double condition_number() const {
        return sigma_min > 0.0 ? sigma_max / sigma_min : std::numeric_limits<double>::infinity();
    }
};

inline LocalMatrixReport analyze_local_matrix(const Eigen::MatrixXd& mat) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    LocalMatrixReport report;
    report.sigma_max = s(0);
    report.sigma_min = s(s.size() - 1);
    report.null_vector = svd.matrixV().col(s.size() - 1);
    return report;
}

namespace detail {

inline const Eigen::PartialPivLU<Eigen::MatrixXd>& pstar_factorization(int k) {
    static std::mutex mutex;
    static std::map<int, Eigen::PartialPivLU<Eigen::MatrixXd>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, Eigen::PartialPivLU<Eigen::MatrixXd>(pstar_reference_matrix(k))).first;
    return it->second;
}

inline const Eigen::PartialPivLU<Eigen::MatrixXd>& pistar_factorization(int k) {
    static std::mutex mutex;
    static std::map<int, Eigen::PartialPivLU<Eigen::MatrixXd>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(k);
    if (it == cache.end())
        it = cache.emplace(k, Eigen::PartialPivLU<Eigen::MatrixXd>(pistar_reference_matrix(k))).first;
    return it->second;
}

}  // namespace detail

/// Right-hand side of the 1D local system for w given on [-1,1]; points <= 0 selects k+4.
template <class F>
Eigen::VectorXd pstar_reference_rhs(F&& w, int k, int points = -1) {
    const int n = k + 1;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : default_quadrature_points(k));
    if (k == 0) {
        rhs(0) = rule.integrate(w);
        return rhs;
    }
    std::vector<double> values(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double wq = w(rule.nodes[q]);
        legendre_values(rule.nodes[q], values);
        for (int m = 0; m < k; ++m) rhs(m) += rule.weights[q] * wq * values[m];
    }
    rhs(k) = 0.5 * (w(1.0) + w(-1.0));
    return rhs;
}

/// Legendre coefficients of P*w on [-1,1]. Requires even k.
template <class F>
std::vector<double> pstar_reference(F&& w, int k, int points = -1) {
    detail::require_even(k, "pstar_project_1d");
    Eigen::VectorXd c = detail::pstar_factorization(k).solve(pstar_reference_rhs(w, k, points));
    return {c.data(), c.data() + c.size()};
}

/// Cellwise P* projection of f onto P^k, k even.
template <class F>
Field1D pstar_project_1d(F&& f, const Mesh1D& mesh, int k, int points = -1) {
    detail::require_even(k, "pstar_project_1d");
    Field1D field(mesh, k);
    for (int j = 0; j < mesh.num_cells(); ++j) {
        const auto local = [&](double xi) { return f(mesh.to_physical(j, xi)); };
        const std::vector<double> c = pstar_reference(local, k, points);
        std::copy(c.begin(), c.end(), field.cell(j).begin());
    }
    return field;
}

/// Right-hand side of the 2D local system for w given on [-1,1]^2.
template <class F>
Eigen::VectorXd pistar_reference_rhs(F&& w, int k, int points = -1) {
    const int n = k + 1;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : default_quadrature_points(k));
    const std::size_t nq = rule.size();
    std::vector<double> basis(nq * n);
    for (std::size_t q = 0; q < nq; ++q) legendre_values(rule.nodes[q], std::span<double>(&basis[q * n], n));
    const auto L = [&](std::size_t q, int m) { return basis[q * n + m]; };
    int row = 0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t qy = 0; qy < nq; ++qy)
                for (std::size_t qx = 0; qx < nq; ++qx)
                    s += rule.weights[qx] * rule.weights[qy] * w(rule.nodes[qx], rule.nodes[qy]) * L(qx, a) * L(qy, b);
            rhs(row++) = s;
        }
    for (int a = 0; a < k; ++a) {
        double s = 0.0;
        for (std::size_t q = 0; q < nq; ++q)
            s += rule.weights[q] * 0.5 * (w(rule.nodes[q], 1.0) + w(rule.nodes[q], -1.0)) * L(q, a);
        rhs(row++) = s;
    }
    for (int b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < nq; ++q)
            s += rule.weights[q] * 0.5 * (w(1.0, rule.nodes[q]) + w(-1.0, rule.nodes[q])) * L(q, b);
        rhs(row++) = s;
    }
    rhs(row) = 0.25 * (w(1.0, 1.0) + w(1.0, -1.0) + w(-1.0, 1.0) + w(-1.0, -1.0));
    return rhs;
}

/// Coefficients of Pi*w on [-1,1]^2 in Q^k mode order (a outer). Requires even k.
template <class F>
std::vector<double> pistar_reference(F&& w, int k, int points = -1) {
    detail::require_even(k, "pistar_project_2d");
    Eigen::VectorXd c = detail::pistar_factorization(k).solve(pistar_reference_rhs(w, k, points));
    return {c.data(), c.data() + c.size()};
}

/// Cellwise Pi* projection of f onto Q^k, k even.
template <class F>
Field2D pistar_project_2d(F&& f, const TensorMesh2D& mesh, int k, int points = -1) {
    detail::require_even(k, "pistar_project_2d");
    Field2D field(mesh, Space(SpaceKind::Q2D, k));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const auto local = [&](double xi, double eta) {
                return f(mesh.x().to_physical(i, xi), mesh.y().to_physical(j, eta));
            };
            const std::vector<double> c = pistar_reference(local, k, points);
            std::copy(c.begin(), c.end(), field.cell(i, j).begin());
        }
    return field;
}

enum class Axis { x, y };

/// On a uniform 3-cell patch with f = x^{k+1}, the projection errors e_j = f - P*f|_{I_j} satisfy
/// e_0(x-h) = e_1(x) = e_2(x+h). Returns the largest deviation over samples in the middle cell.
inline double translation_residual_1d(int k, int samples = 20) {
    detail::require_even(k, "translation_residual_1d");
    const Mesh1D patch = uniform_mesh(3, {0.25, 1.75});
    const auto f = [k](double x) { return std::pow(x, k + 1); };
    const Field1D p = pstar_project_1d(f, patch, k);
    const double h = patch.width(1);
    const auto err = [&](int j, double x) { return f(x) - p.eval_local(j, patch.to_reference(j, x)); };
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double x = patch.left(1) + h * (s + 0.5) / samples;
        const double mid = err(1, x);
        worst = std::max({worst, std::abs(err(0, x - h) - mid), std::abs(err(2, x + h) - mid)});
    }
    return worst;
}

/// 2D analogue on the 5-cell cross around the centre of a uniform 3x3 patch, f = x^{k+1} or y^{k+1}.
inline double translation_residual_2d(int k, Axis axis, int samples = 8) {
    detail::require_even(k, "translation_residual_2d");
    const TensorMesh2D patch(uniform_mesh(3, {0.25, 1.75}), uniform_mesh(3, {-0.5, 1.0}));
    const auto f = [k, axis](double x, double y) { return std::pow(axis == Axis::x ? x : y, k + 1); };
    const Field2D p = pistar_project_2d(f, patch, k);
    const double hx = patch.x().width(1), hy = patch.y().width(1);
    const auto err = [&](int i, int j, double x, double y) {
        return f(x, y) - p.eval_local(i, j, patch.x().to_reference(i, x), patch.y().to_reference(j, y));
    };
    double worst = 0.0;
    for (int sy = 0; sy < samples; ++sy)
        for (int sx = 0; sx < samples; ++sx) {
            const double x = patch.x().left(1) + hx * (sx + 0.5) / samples;
            const double y = patch.y().left(1) + hy * (sy + 0.5) / samples;
            const double mid = err(1, 1, x, y);
            worst = std::max({worst, std::abs(err(0, 1, x - hx, y) - mid), std::abs(err(2, 1, x + hx, y) - mid),
                              std::abs(err(1, 0, x, y - hy) - mid), std::abs(err(1, 2, x, y + hy) - mid)});
        }
    return worst;
}

}  // namespace cfdg
