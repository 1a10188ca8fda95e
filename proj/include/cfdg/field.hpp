// Modal DG fields in the (tensor-)Legendre basis and the standard L2 projection.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfdg/mesh.hpp"
#include "cfdg/quadrature_basis.hpp"

namespace cfdg {

enum class SpaceKind { P1D, Q2D, P2D };

inline std::string to_string(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::P1D: return "P1D";
        case SpaceKind::Q2D: return "Q2D";
        case SpaceKind::P2D: return "P2D";
    }
    return "?";
}

inline SpaceKind space_kind_from_string(const std::string& s) {
    if (s == "P1D") return SpaceKind::P1D;
    if (s == "Q2D") return SpaceKind::Q2D;
    if (s == "P2D") return SpaceKind::P2D;
    throw std::invalid_argument("unknown space kind '" + s + "' (expected P1D, Q2D or P2D)");
}

/// One 2D basis function L_a(xi) L_b(eta).
struct Mode2D {
    int a;
    int b;
};

struct Space {
    SpaceKind kind = SpaceKind::P1D;
    int degree = 0;

    Space() = default;
    Space(SpaceKind kind_, int degree_) : kind(kind_), degree(degree_) {
        if (degree < 0) throw std::invalid_argument("space degree must be nonnegative");
    }

    int dimension() const { return kind == SpaceKind::P1D ? 1 : 2; }

    int dofs_per_cell() const {
        const int k = degree;
        switch (kind) {
            case SpaceKind::P1D: return k + 1;
            case SpaceKind::Q2D: return (k + 1) * (k + 1);
            case SpaceKind::P2D: return (k + 1) * (k + 2) / 2;
        }
        return 0;
    }

    /// 2D modes ordered with the x-degree a outermost.
    std::vector<Mode2D> modes() const {
        std::vector<Mode2D> out;
        if (kind == SpaceKind::P1D) return out;
        for (int a = 0; a <= degree; ++a) {
            const int b_max = kind == SpaceKind::Q2D ? degree : degree - a;
            for (int b = 0; b <= b_max; ++b) out.push_back({a, b});
        }
        return out;
    }

    bool operator==(const Space&) const = default;
};

/// Piecewise P^k field on a 1D mesh; coefficients stored cell-major.
class Field1D {
public:
    Field1D() = default;
    Field1D(Mesh1D mesh, int degree)
        : mesh_(std::move(mesh)), degree_(degree),
          coeffs_(static_cast<std::size_t>(mesh_.num_cells()) * (degree + 1), 0.0) {
        if (degree < 0) throw std::invalid_argument("Field1D: negative degree");
    }

    const Mesh1D& mesh() const { return mesh_; }
    int degree() const { return degree_; }
    Space space() const { return {SpaceKind::P1D, degree_}; }
    int dofs_per_cell() const { return degree_ + 1; }
    int num_cells() const { return mesh_.num_cells(); }

    std::vector<double>& coeffs() { return coeffs_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    std::span<double> cell(int j) { return {coeffs_.data() + offset(j), static_cast<std::size_t>(degree_ + 1)}; }
    std::span<const double> cell(int j) const {
        return {coeffs_.data() + offset(j), static_cast<std::size_t>(degree_ + 1)};
    }

    /// Value of the cell-j polynomial at reference coordinate xi (closed cell).
    double eval_local(int j, double xi) const {
        auto c = cell(j);
        double p_prev = 1.0, p = xi;
        double sum = c[0];
        if (degree_ >= 1) sum += c[1] * xi;
        for (int m = 1; m < degree_; ++m) {
            const double p_next = ((2.0 * m + 1.0) * xi * p - m * p_prev) / (m + 1.0);
            p_prev = p;
            p = p_next;
            sum += c[m + 1] * p;
        }
        return sum;
    }

    double eval_at(double x) const {
        const int j = mesh_.locate(x);
        return eval_local(j, mesh_.to_reference(j, x));
    }

    double cell_average(int j) const { return cell(j)[0]; }

    double right_trace(int j) const {
        double s = 0.0;
        for (double c : cell(j)) s += c;
        return s;
    }
    double left_trace(int j) const {
        double s = 0.0, sign = 1.0;
        for (double c : cell(j)) {
            s += sign * c;
            sign = -sign;
        }
        return s;
    }

    /// Central value {u} at node x_{node+1/2}, node in 0..N; nodes 0 and N are the same periodic interface.
    double interface_central_value(int node) const {
        const int n = num_cells();
        if (node < 0 || node > n) throw std::out_of_range("interface_central_value: node index out of range");
        const int left_cell = node == 0 ? n - 1 : node - 1;
        const int right_cell = node == n ? 0 : node;
        return 0.5 * (right_trace(left_cell) + left_trace(right_cell));
    }

    /// Sum over cells of int u^2.
    double norm_squared() const {
        double total = 0.0;
        for (int j = 0; j < num_cells(); ++j) {
            auto c = cell(j);
            double s = 0.0;
            for (int m = 0; m <= degree_; ++m) s += c[m] * c[m] * 2.0 / (2.0 * m + 1.0);
            total += 0.5 * mesh_.width(j) * s;
        }
        return total;
    }

private:
    std::size_t offset(int j) const {
        if (j < 0 || j >= mesh_.num_cells()) throw std::out_of_range("Field1D: cell index out of range");
        return static_cast<std::size_t>(j) * (degree_ + 1);
    }

    Mesh1D mesh_;
    int degree_ = 0;
    std::vector<double> coeffs_;
};

/// Piecewise Q^k or P^k field on a tensor mesh; per cell the coefficients follow Space::modes().
class Field2D {
public:
    Field2D() = default;
    Field2D(TensorMesh2D mesh, Space space)
        : mesh_(std::move(mesh)), space_(space), modes_(space.modes()),
          coeffs_(static_cast<std::size_t>(mesh_.num_cells()) * space.dofs_per_cell(), 0.0) {
        if (space.dimension() != 2) throw std::invalid_argument("Field2D: space must be two-dimensional");
    }

    const TensorMesh2D& mesh() const { return mesh_; }
    const Space& space() const { return space_; }
    int degree() const { return space_.degree; }
    const std::vector<Mode2D>& modes() const { return modes_; }
    int dofs_per_cell() const { return static_cast<int>(modes_.size()); }

    std::vector<double>& coeffs() { return coeffs_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    std::span<double> cell(int i, int j) {
        return {coeffs_.data() + offset(i, j), modes_.size()};
    }
    std::span<const double> cell(int i, int j) const {
        return {coeffs_.data() + offset(i, j), modes_.size()};
    }

    double eval_local(int i, int j, double xi, double eta) const {
        const int n = degree() + 1;
        double lx[32], ly[32];
        if (n > 32) throw std::invalid_argument("Field2D: degree too large");
        legendre_values(xi, std::span<double>(lx, n));
        legendre_values(eta, std::span<double>(ly, n));
        auto c = cell(i, j);
        double sum = 0.0;
        for (std::size_t m = 0; m < modes_.size(); ++m) sum += c[m] * lx[modes_[m].a] * ly[modes_[m].b];
        return sum;
    }

    double eval_at(double x, double y) const {
        const int i = mesh_.x().locate(x);
        const int j = mesh_.y().locate(y);
        return eval_local(i, j, mesh_.x().to_reference(i, x), mesh_.y().to_reference(j, y));
    }

    double cell_average(int i, int j) const { return cell(i, j)[0]; }

    double norm_squared() const {
        double total = 0.0;
        for (int j = 0; j < mesh_.ny(); ++j)
            for (int i = 0; i < mesh_.nx(); ++i) {
                auto c = cell(i, j);
                double s = 0.0;
                for (std::size_t m = 0; m < modes_.size(); ++m)
                    s += c[m] * c[m] * (2.0 / (2.0 * modes_[m].a + 1.0)) * (2.0 / (2.0 * modes_[m].b + 1.0));
                total += 0.25 * mesh_.area(i, j) * s;
            }
        return total;
    }

private:
    std::size_t offset(int i, int j) const {
        if (i < 0 || i >= mesh_.nx() || j < 0 || j >= mesh_.ny())
            throw std::out_of_range("Field2D: cell index out of range");
        return static_cast<std::size_t>(mesh_.cell_index(i, j)) * modes_.size();
    }

    TensorMesh2D mesh_;
    Space space_;
    std::vector<Mode2D> modes_;
    std::vector<double> coeffs_;
};

/// u_t + u_x = 0 on a periodic interval.
struct Problem1D {
    std::string id;
    Interval domain;
    std::function<double(double)> initial;
    std::function<double(double, double)> exact;  // (x, t)
};

/// u_t + u_x + u_y = 0 on a periodic rectangle.
struct Problem2D {
    std::string id;
    Interval domain_x;
    Interval domain_y;
    std::function<double(double, double)> initial;
    std::function<double(double, double, double)> exact;  // (x, y, t)
};

/// u(x,0) = exp(sin x) on [0, 2pi].
inline Problem1D advect1d_expsin() {
    return {"advect1d_expsin",
            {0.0, 2.0 * std::numbers::pi},
            [](double x) { return std::exp(std::sin(x)); },
            [](double x, double t) { return std::exp(std::sin(x - t)); }};
}

/// u(x,y,0) = sin(x+y) on [0, 2pi]^2.
inline Problem2D advect2d_sin() {
    const Interval d{0.0, 2.0 * std::numbers::pi};
    return {"advect2d_sin", d, d, [](double x, double y) { return std::sin(x + y); },
            [](double x, double y, double t) { return std::sin(x + y - 2.0 * t); }};
}

template <class F>
Field1D l2_project(F&& f, const Mesh1D& mesh, int degree, int points = -1) {
    Field1D field(mesh, degree);
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : default_quadrature_points(degree));
    std::vector<double> values(degree + 1);
    for (int j = 0; j < mesh.num_cells(); ++j) {
        auto c = field.cell(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double fx = f(mesh.to_physical(j, rule.nodes[q]));
            legendre_values(rule.nodes[q], values);
            for (int m = 0; m <= degree; ++m) c[m] += rule.weights[q] * fx * values[m];
        }
        for (int m = 0; m <= degree; ++m) c[m] *= (2.0 * m + 1.0) / 2.0;
    }
    return field;
}

template <class F>
Field2D l2_project(F&& f, const TensorMesh2D& mesh, Space space, int points = -1) {
    Field2D field(mesh, space);
    const int k = space.degree;
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : default_quadrature_points(k));
    const std::size_t nq = rule.size();
    // basis values at the quadrature nodes, shared by both directions
    std::vector<double> basis(nq * (k + 1));
    for (std::size_t q = 0; q < nq; ++q) legendre_values(rule.nodes[q], std::span<double>(&basis[q * (k + 1)], k + 1));
    const auto& modes = field.modes();
    std::vector<double> fq(nq * nq);
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            for (std::size_t qy = 0; qy < nq; ++qy)
                for (std::size_t qx = 0; qx < nq; ++qx)
                    fq[qy * nq + qx] = f(mesh.x().to_physical(i, rule.nodes[qx]), mesh.y().to_physical(j, rule.nodes[qy]));
            auto c = field.cell(i, j);
            for (std::size_t m = 0; m < modes.size(); ++m) {
                double s = 0.0;
                for (std::size_t qy = 0; qy < nq; ++qy)
                    for (std::size_t qx = 0; qx < nq; ++qx)
                        s += rule.weights[qx] * rule.weights[qy] * fq[qy * nq + qx] * basis[qx * (k + 1) + modes[m].a] *
                             basis[qy * (k + 1) + modes[m].b];
                c[m] = s * (2.0 * modes[m].a + 1.0) * (2.0 * modes[m].b + 1.0) / 4.0;
            }
        }
    return field;
}

}  // namespace cfdg
