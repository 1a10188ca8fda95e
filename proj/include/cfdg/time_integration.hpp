// Explicit Runge-Kutta integration of du/dt = L(u).
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfdg/dg_operator.hpp"
#include "cfdg/field.hpp"

namespace cfdg {

/// Butcher tableau of an explicit method: a is strictly lower triangular.
struct RKScheme {
    std::string name;
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> c;
    int order = 1;

    int stages() const { return static_cast<int>(b.size()); }

    /// Throws unless the tableau is explicit, row-sum consistent and its weights sum to one.
    void validate() const {
        const std::size_t s = b.size();
        if (s == 0) throw std::invalid_argument("RK scheme '" + name + "': no stages");
        if (a.size() != s || c.size() != s) throw std::invalid_argument("RK scheme '" + name + "': inconsistent sizes");
        double bsum = 0.0;
        for (double w : b) bsum += w;
        if (std::abs(bsum - 1.0) > 1e-14) throw std::invalid_argument("RK scheme '" + name + "': weights do not sum to 1");
        for (std::size_t i = 0; i < s; ++i) {
            if (a[i].size() != s) throw std::invalid_argument("RK scheme '" + name + "': tableau row size");
            double row = 0.0;
            for (std::size_t j = 0; j < s; ++j) {
                if (j >= i && a[i][j] != 0.0) throw std::invalid_argument("RK scheme '" + name + "': not explicit");
                row += a[i][j];
            }
            if (std::abs(row - c[i]) > 1e-14)
                throw std::invalid_argument("RK scheme '" + name + "': node " + std::to_string(i) + " != row sum");
        }
    }
};

inline RKScheme forward_euler() { return {"euler", {{0.0}}, {1.0}, {0.0}, 1}; }

inline RKScheme ssp_rk2() { return {"ssprk2", {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}, {0.0, 1.0}, 2}; }

inline RKScheme ssp_rk3() {
    return {"ssprk3",
            {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.25, 0.25, 0.0}},
            {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
            {0.0, 1.0, 0.5},
            3};
}

inline RKScheme classical_rk4() {
    return {"rk4",
            {{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}},
            {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
            {0.0, 0.5, 0.5, 1.0},
            4};
}

inline std::vector<RKScheme> builtin_schemes() { return {forward_euler(), ssp_rk2(), ssp_rk3(), classical_rk4()}; }

inline RKScheme scheme_by_name(const std::string& name) {
    for (auto& s : builtin_schemes())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown time scheme '" + name + "' (built-in: euler, ssprk2, ssprk3, rk4)");
}

/// Final time, step rule dt = dt_coefficient * min_j h_j, and the scheme.
struct IntegrationConfig {
    double final_time = 1.0;
    double dt_coefficient = 0.01;
    RKScheme scheme = classical_rk4();

    void validate() const {
        if (!(final_time > 0.0) || !std::isfinite(final_time)) throw std::invalid_argument("time.T must be positive");
        if (!(dt_coefficient > 0.0) || !std::isfinite(dt_coefficient)) throw std::invalid_argument("time.c must be positive");
        scheme.validate();
    }
};

/// Thrown when the state stops being finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long step, double time)
        : std::runtime_error("non-finite state after step " + std::to_string(step) + " (t = " + std::to_string(time) + ")"),
          step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/// Number of steps of size dt needed to reach T; the last one is shortened.
inline long step_count(double final_time, double dt) {
    const double ratio = final_time / dt;
    long n = static_cast<long>(std::ceil(ratio));
    // guard against ratio = integer + rounding noise
    if (n > 1 && (n - 1) >= ratio * (1.0 - 1e-12)) --n;
    return std::max(n, 1L);
}

/// Integrates u' = rhs(u, out) from 0 to final_time. observer(step, t, u) runs after every step
/// and once for the initial state with step 0.
template <class Rhs, class Observer>
std::vector<double> integrate(Rhs&& rhs, std::vector<double> u, double final_time, double dt, const RKScheme& scheme,
                              Observer&& observer) {
    scheme.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    const int s = scheme.stages();
    const std::size_t n = u.size();
    std::vector<std::vector<double>> k(s, std::vector<double>(n));
    std::vector<double> stage(n);
    const long steps = step_count(final_time, dt);
    observer(0L, 0.0, std::span<const double>(u));
    double t = 0.0;
    for (long step = 1; step <= steps; ++step) {
        const double h = step == steps ? final_time - (steps - 1) * dt : dt;
        for (int i = 0; i < s; ++i) {
            std::copy(u.begin(), u.end(), stage.begin());
            for (int j = 0; j < i; ++j) {
                const double aij = scheme.a[i][j];
                if (aij == 0.0) continue;
                for (std::size_t m = 0; m < n; ++m) stage[m] += h * aij * k[j][m];
            }
            rhs(std::span<const double>(stage), std::span<double>(k[i]));
        }
        for (int i = 0; i < s; ++i) {
            const double bi = scheme.b[i];
            if (bi == 0.0) continue;
            for (std::size_t m = 0; m < n; ++m) u[m] += h * bi * k[i][m];
        }
        t = step == steps ? final_time : step * dt;
        for (double x : u)
            if (!std::isfinite(x)) throw DivergenceError(step, t);
        observer(step, t, std::span<const double>(u));
    }
    return u;
}

template <class Rhs>
std::vector<double> integrate(Rhs&& rhs, std::vector<double> u, double final_time, double dt, const RKScheme& scheme) {
    return integrate(std::forward<Rhs>(rhs), std::move(u), final_time, dt, scheme,
                     [](long, double, std::span<const double>) {});
}

/// Advances a 1D DG field to cfg.final_time with dt = c * min h_j. Optionally records ||u_h||^2 per step.
inline Field1D integrate(const Operator1D& op, Field1D u0, const IntegrationConfig& cfg,
                         std::vector<double>* energy_series = nullptr) {
    cfg.validate();
    const double dt = cfg.dt_coefficient * op.mesh().min_width();
    Field1D scratch(op.mesh(), op.degree());
    auto rhs = [&op](std::span<const double> u, std::span<double> w) { op.apply(u, w); };
    auto observer = [&](long, double, std::span<const double> u) {
        if (!energy_series) return;
        std::copy(u.begin(), u.end(), scratch.coeffs().begin());
        energy_series->push_back(scratch.norm_squared());
    };
    u0.coeffs() = integrate(rhs, std::move(u0.coeffs()), cfg.final_time, dt, cfg.scheme, observer);
    return u0;
}

inline Field2D integrate(const Operator2D& op, Field2D u0, const IntegrationConfig& cfg,
                         std::vector<double>* energy_series = nullptr) {
    cfg.validate();
    const double dt = cfg.dt_coefficient * op.mesh().min_width();
    Field2D scratch(op.mesh(), op.space());
    auto rhs = [&op](std::span<const double> u, std::span<double> w) { op.apply(u, w); };
    auto observer = [&](long, double, std::span<const double> u) {
        if (!energy_series) return;
        std::copy(u.begin(), u.end(), scratch.coeffs().begin());
        energy_series->push_back(scratch.norm_squared());
    };
    u0.coeffs() = integrate(rhs, std::move(u0.coeffs()), cfg.final_time, dt, cfg.scheme, observer);
    return u0;
}

/// max_t | ||u(t)||^2 - ||u(0)||^2 | / ||u(0)||^2 over a series of squared norms.
inline double energy_drift(std::span<const double> norms_squared) {
    if (norms_squared.empty()) throw std::invalid_argument("energy_drift: empty series");
    const double e0 = norms_squared.front();
    double worst = 0.0;
    for (double e : norms_squared) worst = std::max(worst, std::abs(e - e0));
    return e0 > 0.0 ? worst / e0 : worst;
}

}  // namespace cfdg
