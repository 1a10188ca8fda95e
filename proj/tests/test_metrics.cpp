#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cfdg/metrics.hpp"
#include "cfdg/time_integration.hpp"

using namespace cfdg;

namespace {
const Interval two_pi{0.0, 2.0 * std::numbers::pi};
}

TEST(LsOrder, Examples) {
    std::vector<double> ns{10, 20, 40, 80, 160}, es;
    for (double n : ns) es.push_back(7.0 * std::pow(n, -3.0));
    EXPECT_NEAR(ls_order(ns, es), 3.0, 1e-12);
    EXPECT_NEAR(ls_order(std::vector<double>{10, 20}, std::vector<double>{1e-2, 2.5e-3}), 2.0, 1e-12);
}

TEST(LsOrder, ReferenceColumn) {
    const std::vector<double> ns{10, 20, 40, 80, 160, 320, 640, 1280, 2560, 5120};
    const std::vector<double> es{9.30e-3, 7.82e-4, 1.33e-4, 2.00e-5, 4.21e-6, 9.99e-7, 2.46e-7, 6.13e-8, 1.53e-8, 3.83e-9};
    EXPECT_NEAR(ls_order(ns, es), 2.28, 0.01);
}

TEST(LsOrder, NoisyPowerLaw) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> eps(-0.05, 0.05);
    for (double p : {1.0, 2.0, 3.0, 5.0}) {
        std::vector<double> ns, es;
        for (int n = 10; n <= 5120; n *= 2) {
            ns.push_back(n);
            es.push_back(3.0 * std::pow(n, -p) * (1.0 + eps(gen)));
        }
        EXPECT_NEAR(ls_order(ns, es), p, 0.1);
    }
}

TEST(LsOrder, RejectsBadInput) {
    EXPECT_THROW(ls_order(std::vector<double>{10}, std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(ls_order(std::vector<double>{10, 20}, std::vector<double>{1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(ls_order(std::vector<double>{10, 20}, std::vector<double>{1.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(ls_order(std::vector<double>{20, 10}, std::vector<double>{1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(ls_order(std::vector<double>{10, 20, 40}, std::vector<double>{1.0, 0.5}), std::invalid_argument);
}

TEST(ObservedRate, NonDoublingLadder) {
    EXPECT_NEAR(observed_rate(5, 1.0, 9, std::pow(9.0 / 5.0, -2.0)), 2.0, 1e-12);
}

TEST(Metrics, VanishForFieldsInTheSpace) {
    const Mesh1D mesh = alpha_mesh(8, 0.1, two_pi);
    const auto poly = [](double x, double t) { return 1.0 + (x - t) * (x - t) - 0.1 * x; };
    const Field1D uh = l2_project([&](double x) { return poly(x, 0.5); }, mesh, 2);
    EXPECT_LE(error_E2(poly, uh, 0.5), 1e-12);
    EXPECT_LE(error_EA(poly, uh, 0.5), 1e-12);

    const TensorMesh2D m2 = tensor_mesh(mesh, uniform_mesh(5, two_pi));
    const auto p2 = [](double x, double y, double) { return x * y + y * y; };
    const Field2D u2 = l2_project([&](double x, double y) { return p2(x, y, 0.0); }, m2, Space(SpaceKind::P2D, 2));
    EXPECT_LE(error_E2(p2, u2, 0.0), 1e-12);
    EXPECT_LE(error_EA(p2, u2, 0.0), 1e-12);
}

TEST(Metrics, FluxErrorVanishesForContinuousInterpolant) {
    // piecewise linear interpolant of u: continuous and exact at the nodes
    const Mesh1D mesh = random_mesh(12, 0.3, 2, two_pi);
    const auto u = [](double x, double) { return std::sin(x); };
    Field1D uh(mesh, 1);
    for (int j = 0; j < 12; ++j) {
        const double l = u(mesh.left(j), 0.0), r = u(mesh.right(j), 0.0);
        uh.cell(j)[0] = 0.5 * (l + r);
        uh.cell(j)[1] = 0.5 * (r - l);
    }
    EXPECT_LE(error_Ef(u, uh, 0.0), 1e-15);
}

TEST(Metrics, CellAverageErrorVanishesForExactAverages) {
    const Mesh1D mesh = uniform_mesh(10, two_pi);
    const auto u = [](double x, double) { return std::exp(std::sin(x)); };
    Field1D uh = l2_project([&](double x) { return u(x, 0.0); }, mesh, 0, 20);
    EXPECT_LE(error_EA(u, uh, 0.0), 1e-12);
    EXPECT_GT(error_E2(u, uh, 0.0), 1e-2);
}

TEST(Metrics, SpotValuesFromRuns) {
    const Problem1D pb = advect1d_expsin();
    const auto run = [&](const Mesh1D& mesh) {
        return integrate(Operator1D(mesh, 2), l2_project(pb.initial, mesh, 2), IntegrationConfig{});
    };
    const Field1D u40 = run(uniform_mesh(40, two_pi));
    EXPECT_NEAR(error_E2(pb.exact, u40, 1.0) / 6.12e-5, 1.0, 0.10);
    EXPECT_NEAR(error_EA(pb.exact, u40, 1.0) / 5.25e-7, 1.0, 0.15);
    EXPECT_NEAR(error_Ef(pb.exact, run(uniform_mesh(20, two_pi)), 1.0) / 8.32e-5, 1.0, 0.15);
    EXPECT_NEAR(error_Ef(pb.exact, run(alpha_mesh(40, 0.1, two_pi)), 1.0) / 2.10e-5, 1.0, 0.15);
}

TEST(Metrics, ReQuadratureInvariance) {
    const Problem1D pb = advect1d_expsin();
    for (int k : {0, 2, 4}) {
        const Mesh1D mesh = alpha_mesh(40, 0.1, two_pi);
        const Field1D u = integrate(Operator1D(mesh, k), l2_project(pb.initial, mesh, k), IntegrationConfig{});
        const double base = error_E2(pb.exact, u, 1.0);
        const double finer = error_E2(pb.exact, u, 1.0, error_quadrature_points(k) + 2);
        EXPECT_LT(std::abs(finer - base) / base, 1e-3) << "k=" << k;
    }
}

TEST(ConvergenceTable, CsvSchemaAndRates) {
    ConvergenceTable t;
    for (int n : {10, 20, 40}) t.rows.push_back({n, 1.0 / (n * n), 1.0 / (n * n * n), 2.0 / (n * n * n), {}, {}, {}});
    t.finalize();
    EXPECT_NEAR(*t.rows[1].rate2, 2.0, 1e-12);
    EXPECT_NEAR(*t.rows[2].rate_a, 3.0, 1e-12);
    EXPECT_NEAR(*t.ls_f, 3.0, 1e-12);
    const std::string csv = t.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,E2,rate2,EA,rateA,Ef,ratef");
    EXPECT_NE(csv.find("\nLS,"), std::string::npos);
    EXPECT_NE(t.to_markdown().find("| 10 | 1.00E-02 | -- |"), std::string::npos);

    ConvergenceTable t2;
    t2.has_flux_error = false;
    t2.rows.push_back({4, 1e-2, 1e-3, std::nullopt, {}, {}, {}});
    t2.rows.push_back({8, 1e-3, 1e-4, std::nullopt, {}, {}, {}});
    t2.finalize();
    EXPECT_EQ(t2.to_csv().substr(0, t2.to_csv().find('\n')), "N,E2,rate2,EA,rateA");
    EXPECT_FALSE(t2.ls_f.has_value());
}
