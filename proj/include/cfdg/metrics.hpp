// Error functionals (L2, cell-average, interface), per-level rates and least-squares orders.
#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfdg/field.hpp"
#include "cfdg/quadrature_basis.hpp"

namespace cfdg {

/// Gauss points per direction used for error integrals.
inline int error_quadrature_points(int k) { return k + 6; }

/// E2 = ||u(., t) - u_h||_{L2}.
template <class Exact>
double error_E2(Exact&& exact, const Field1D& uh, double t, int points = -1) {
    const Mesh1D& mesh = uh.mesh();
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : error_quadrature_points(uh.degree()));
    double total = 0.0;
    for (int j = 0; j < mesh.num_cells(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double d = exact(mesh.to_physical(j, rule.nodes[q]), t) - uh.eval_local(j, rule.nodes[q]);
            s += rule.weights[q] * d * d;
        }
        total += 0.5 * mesh.width(j) * s;
    }
    return std::sqrt(total);
}

/// E_A = sqrt( (1/N) sum_j ( (1/h_j) int_{I_j} (u - u_h) )^2 ).
template <class Exact>
double error_EA(Exact&& exact, const Field1D& uh, double t, int points = -1) {
    const Mesh1D& mesh = uh.mesh();
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : error_quadrature_points(uh.degree()));
    double total = 0.0;
    for (int j = 0; j < mesh.num_cells(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * exact(mesh.to_physical(j, rule.nodes[q]), t);
        const double d = 0.5 * s - uh.cell_average(j);
        total += d * d;
    }
    return std::sqrt(total / mesh.num_cells());
}

/// E_f = sqrt( (1/N) sum_j (u(x_{j+1/2}, t) - {u_h}_{j+1/2})^2 ) over the N periodic interfaces.
template <class Exact>
double error_Ef(Exact&& exact, const Field1D& uh, double t) {
    const Mesh1D& mesh = uh.mesh();
    const int n = mesh.num_cells();
    double total = 0.0;
    for (int node = 1; node <= n; ++node) {
        const double d = exact(mesh.nodes()[node], t) - uh.interface_central_value(node);
        total += d * d;
    }
    return std::sqrt(total / n);
}

template <class Exact>
double error_E2(Exact&& exact, const Field2D& uh, double t, int points = -1) {
    const TensorMesh2D& mesh = uh.mesh();
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : error_quadrature_points(uh.degree()));
    double total = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            double s = 0.0;
            for (std::size_t qy = 0; qy < rule.size(); ++qy) {
                const double y = mesh.y().to_physical(j, rule.nodes[qy]);
                for (std::size_t qx = 0; qx < rule.size(); ++qx) {
                    const double d = exact(mesh.x().to_physical(i, rule.nodes[qx]), y, t) -
                                     uh.eval_local(i, j, rule.nodes[qx], rule.nodes[qy]);
                    s += rule.weights[qx] * rule.weights[qy] * d * d;
                }
            }
            total += 0.25 * mesh.area(i, j) * s;
        }
    return std::sqrt(total);
}

template <class Exact>
double error_EA(Exact&& exact, const Field2D& uh, double t, int points = -1) {
    const TensorMesh2D& mesh = uh.mesh();
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : error_quadrature_points(uh.degree()));
    double total = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            double s = 0.0;
            for (std::size_t qy = 0; qy < rule.size(); ++qy) {
                const double y = mesh.y().to_physical(j, rule.nodes[qy]);
                for (std::size_t qx = 0; qx < rule.size(); ++qx)
                    s += rule.weights[qx] * rule.weights[qy] * exact(mesh.x().to_physical(i, rule.nodes[qx]), y, t);
            }
            const double d = 0.25 * s - uh.cell_average(i, j);
            total += d * d;
        }
    return std::sqrt(total / mesh.num_cells());
}

/// Negated OLS slope of log E against log N.
inline double ls_order(std::span<const double> ns, std::span<const double> es) {
    if (ns.size() != es.size()) throw std::invalid_argument("ls_order: N and E have different lengths");
    if (ns.size() < 2) throw std::invalid_argument("ls_order: need at least two levels");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(es[i] > 0.0)) throw std::invalid_argument("ls_order: errors must be positive");
        if (!(ns[i] > 0.0)) throw std::invalid_argument("ls_order: N must be positive");
        if (i > 0 && !(ns[i] > ns[i - 1])) throw std::invalid_argument("ls_order: N must be strictly increasing");
    }
    const double count = static_cast<double>(ns.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mx += std::log(ns[i]);
        my += std::log(es[i]);
    }
    mx /= count;
    my /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double dx = std::log(ns[i]) - mx;
        sxy += dx * (std::log(es[i]) - my);
        sxx += dx * dx;
    }
    return -sxy / sxx;
}

/// log(E_prev / E) / log(N / N_prev); equals log2 of the error ratio when N doubles.
inline double observed_rate(double n_prev, double e_prev, double n, double e) {
    return std::log(e_prev / e) / std::log(n / n_prev);
}

struct ConvergenceRow {
    int n = 0;
    double e2 = 0.0;
    double ea = 0.0;
    std::optional<double> ef;
    std::optional<double> rate2, rate_a, rate_f;
};

/// One study: per-level errors, rates, and least-squares orders.
struct ConvergenceTable {
    std::string label;
    bool has_flux_error = true;
    std::vector<ConvergenceRow> rows;
    std::optional<double> ls2, ls_a, ls_f;

    /// Recomputes rates and LS orders from the error columns.
    void finalize() {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& r = rows[i];
            r.rate2.reset();
            r.rate_a.reset();
            r.rate_f.reset();
            if (i == 0) continue;
            const auto& p = rows[i - 1];
            r.rate2 = observed_rate(p.n, p.e2, r.n, r.e2);
            r.rate_a = observed_rate(p.n, p.ea, r.n, r.ea);
            if (has_flux_error && r.ef && p.ef) r.rate_f = observed_rate(p.n, *p.ef, r.n, *r.ef);
        }
        ls2.reset();
        ls_a.reset();
        ls_f.reset();
        if (rows.size() < 2) return;
        std::vector<double> ns, e2, ea, ef;
        for (const auto& r : rows) {
            ns.push_back(r.n);
            e2.push_back(r.e2);
            ea.push_back(r.ea);
            if (r.ef) ef.push_back(*r.ef);
        }
        const auto safe = [&](const std::vector<double>& es) -> std::optional<double> {
            for (double e : es)
                if (!(e > 0.0)) return std::nullopt;
            return ls_order(ns, es);
        };
        ls2 = safe(e2);
        ls_a = safe(ea);
        if (has_flux_error && ef.size() == rows.size()) ls_f = safe(ef);
    }

    std::vector<double> column_e2() const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.e2);
        return out;
    }

    /// Full precision; header N,E2,rate2,EA,rateA[,Ef,ratef], trailing LS row.
    std::string to_csv() const {
        std::ostringstream os;
        os << (has_flux_error ? "N,E2,rate2,EA,rateA,Ef,ratef\n" : "N,E2,rate2,EA,rateA\n");
        for (const auto& r : rows) {
            os << r.n << ',' << full(r.e2) << ',' << opt(r.rate2) << ',' << full(r.ea) << ',' << opt(r.rate_a);
            if (has_flux_error) os << ',' << opt(r.ef) << ',' << opt(r.rate_f);
            os << '\n';
        }
        os << "LS," << opt(ls2) << ",," << opt(ls_a) << ',';
        if (has_flux_error) os << ',' << opt(ls_f) << ',';
        os << '\n';
        return os.str();
    }

    /// Errors to 3 significant digits, rates to 2 decimals.
    std::string to_markdown() const {
        std::ostringstream os;
        if (!label.empty()) os << "### " << label << "\n\n";
        os << (has_flux_error ? "| N | E2 | Rate | EA | Rate | Ef | Rate |\n|---|---|---|---|---|---|---|\n"
                              : "| N | E2 | Rate | EA | Rate |\n|---|---|---|---|---|\n");
        for (const auto& r : rows) {
            os << "| " << r.n << " | " << sci(r.e2) << " | " << fixed(r.rate2) << " | " << sci(r.ea) << " | "
               << fixed(r.rate_a) << " |";
            if (has_flux_error) os << ' ' << (r.ef ? sci(*r.ef) : "") << " | " << fixed(r.rate_f) << " |";
            os << '\n';
        }
        os << "| LS order | | " << fixed(ls2) << " | | " << fixed(ls_a) << " |";
        if (has_flux_error) os << " | " << fixed(ls_f) << " |";
        os << '\n';
        return os.str();
    }

private:
    static std::string full(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    static std::string opt(const std::optional<double>& v) { return v ? full(*v) : std::string(); }
    static std::string sci(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.2E", v);
        return buf;
    }
    static std::string fixed(const std::optional<double>& v) {
        if (!v) return "--";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.2f", *v);
        return buf;
    }
};

}  // namespace cfdg
