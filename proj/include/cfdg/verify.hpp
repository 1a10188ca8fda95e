// Executable property checks: energy conservation, projection properties, superconvergence.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cfdg/dg_operator.hpp"
#include "cfdg/field.hpp"
#include "cfdg/mesh.hpp"
#include "cfdg/shifted_projection.hpp"
#include "cfdg/time_integration.hpp"

namespace cfdg {

/// One measured property. Passes when value <= tolerance.
struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline CheckResult make_check(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance};
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

inline constexpr int skew_samples = 200;

/// Fills coefficients with portable uniform draws in [-1,1).
inline void randomize(std::vector<double>& coeffs, std::mt19937_64& gen) {
    for (double& c : coeffs) c = 2.0 * portable_unit_draw(gen) - 1.0;
}

/// max over random fields of |sum_cells a(u,u)| / ||u||^2 on a 1D mesh.
inline double worst_skew_ratio_1d(const Mesh1D& mesh, int k, int samples, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Field1D u(mesh, k);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        randomize(u.coeffs(), gen);
        worst = std::max(worst, std::abs(global_skew_sum_1d(u)) / u.norm_squared());
    }
    return worst;
}

inline double worst_skew_ratio_2d(const TensorMesh2D& mesh, const Space& space, int samples, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Field2D u(mesh, space);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        randomize(u.coeffs(), gen);
        worst = std::max(worst, std::abs(global_skew_sum_2d(u)) / u.norm_squared());
    }
    return worst;
}

/// Relative drift of ||u_h||^2 over a full k=2, N=40, T=1 run of the 1D problem.
inline double energy_drift_run(int k = 2, int n = 40) {
    const Mesh1D mesh = uniform_mesh(n, {0.0, 2.0 * std::numbers::pi});
    const Operator1D op(mesh, k);
    std::vector<double> series;
    integrate(op, l2_project(advect1d_expsin().initial, mesh, k), IntegrationConfig{}, &series);
    return energy_drift(series);
}

inline std::vector<CheckResult> verify_energy() {
    const Interval dom{0.0, 2.0 * std::numbers::pi};
    std::vector<CheckResult> out;
    out.push_back(make_check("skew 1D uniform N=16 k=2", worst_skew_ratio_1d(uniform_mesh(16, dom), 2, skew_samples, 1), 1e-12));
    out.push_back(make_check("skew 1D alpha=0.1 N=16 k=2", worst_skew_ratio_1d(alpha_mesh(16, 0.1, dom), 2, skew_samples, 2), 1e-12));
    const TensorMesh2D grid = tensor_mesh(uniform_mesh(8, dom), uniform_mesh(8, dom));
    out.push_back(make_check("skew 2D 8x8 Q2", worst_skew_ratio_2d(grid, Space(SpaceKind::Q2D, 2), skew_samples, 3), 1e-12));
    out.push_back(make_check("skew 2D 8x8 P2", worst_skew_ratio_2d(grid, Space(SpaceKind::P2D, 2), skew_samples, 4), 1e-12));
    out.push_back(make_check("energy drift k=2 N=40 T=1", energy_drift_run(), 1e-10));
    return out;
}

/// 1 - |component of the null vector along L_k|; zero when the kernel is spanned by L_k (x for k=1).
inline double null_vector_mismatch(int k) {
    const LocalMatrixReport r = analyze_local_matrix(pstar_reference_matrix(k));
    return 1.0 - std::abs(r.null_vector(k)) / r.null_vector.norm();
}

/// max_j |avg_j(P*f) - avg_j(f)| for f = exp(sin x) on an alpha mesh.
inline double cell_average_defect(int k) {
    const Mesh1D mesh = alpha_mesh(12, 0.1, {0.0, 2.0 * std::numbers::pi});
    const auto f = [](double x) { return std::exp(std::sin(x)); };
    const Field1D p = pstar_project_1d(f, mesh, k);
    const QuadratureRule& rule = gauss_rule(k + 10);
    double worst = 0.0;
    for (int j = 0; j < mesh.num_cells(); ++j) {
        const double avg = 0.5 * rule.integrate([&](double xi) { return f(mesh.to_physical(j, xi)); });
        worst = std::max(worst, std::abs(p.cell_average(j) - avg));
    }
    return worst;
}

/// max coefficient deviation of P*(x^3), k=2 on [-1,1], from (3/5) x.
inline double pstar_cubic_defect() {
    const std::vector<double> c = pstar_reference([](double x) { return x * x * x; }, 2);
    return std::max({std::abs(c[0]), std::abs(c[1] - 0.6), std::abs(c[2])});
}

inline std::vector<CheckResult> verify_projection() {
    std::vector<CheckResult> out;
    for (int k : {1, 3}) {
        const LocalMatrixReport r = analyze_local_matrix(pstar_reference_matrix(k));
        out.push_back(make_check("P* singular value ratio k=" + std::to_string(k), r.ratio(), 1e-12));
        out.push_back(make_check("P* null vector is L_k, k=" + std::to_string(k), null_vector_mismatch(k), 1e-12));
        out.push_back(make_check("Pi* singular value ratio k=" + std::to_string(k),
                                 analyze_local_matrix(pistar_reference_matrix(k)).ratio(), 1e-12));
    }
    for (int k : {2, 4}) {
        out.push_back(make_check("1D translation k=" + std::to_string(k), translation_residual_1d(k), 1e-12));
        out.push_back(make_check("P* cell average k=" + std::to_string(k), cell_average_defect(k), 1e-12));
    }
    out.push_back(make_check("2D translation k=2 x^3", translation_residual_2d(2, Axis::x), 1e-12));
    out.push_back(make_check("2D translation k=2 y^3", translation_residual_2d(2, Axis::y), 1e-12));
    out.push_back(make_check("P*(x^3) = (3/5)x, k=2", pstar_cubic_defect(), 1e-13));
    return out;
}

inline std::vector<CheckResult> verify_superconvergence() {
    std::vector<CheckResult> out;
    for (int k : {2, 4})
        out.push_back(make_check("1D a(P*u - u, v) k=" + std::to_string(k), superconvergence_residual_1d(k), 1e-11));
    out.push_back(make_check("2D b(Pi*u - u, v) k=2 x^3", superconvergence_residual_2d(2, PatchMonomial::x_power), 1e-11));
    out.push_back(make_check("2D b(Pi*u - u, v) k=2 y^3", superconvergence_residual_2d(2, PatchMonomial::y_power), 1e-11));
    out.push_back(make_check("2D flux moment cancellation k=2", flux_cancellation_2d(2).max_moment, 1e-11));
    return out;
}

/// Runs a suite by name: energy, projection, superconvergence or all.
inline std::vector<CheckResult> run_verification(const std::string& suite) {
    if (suite == "energy") return verify_energy();
    if (suite == "projection") return verify_projection();
    if (suite == "superconvergence") return verify_superconvergence();
    if (suite == "all") {
        std::vector<CheckResult> out = verify_energy();
        for (auto& c : verify_projection()) out.push_back(std::move(c));
        for (auto& c : verify_superconvergence()) out.push_back(std::move(c));
        return out;
    }
    throw std::invalid_argument("unknown verification suite '" + suite + "' (energy, projection, superconvergence, all)");
}

}  // namespace cfdg
