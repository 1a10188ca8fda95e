// Semi-discrete central-flux DG operators for u_t + u_x = 0 and u_t + u_x + u_y = 0 (periodic).
//
// 1D cell form:  a_j(u,v) = -(u, v_x)_j + {u}_{j+1/2} v^-_{j+1/2} - {u}_{j-1/2} v^+_{j-1/2},
//                (u_t, v)_j = -a_j(u, v).
// 2D cell form:  b_ij(u,v) = (u, v_x + v_y)_K - int_J [{u} v]_{x_L}^{x_R} dy - int_I [{u} v]_{y_B}^{y_T} dx,
//                (u_t, v)_K = b_ij(u, v).
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfdg/field.hpp"
#include "cfdg/mesh.hpp"
#include "cfdg/quadrature_basis.hpp"
#include "cfdg/shifted_projection.hpp"

namespace cfdg {

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

/// du/dt = L(u) on a periodic 1D mesh, with the inverse mass matrix folded in.
class Operator1D {
public:
    Operator1D(Mesh1D mesh, int degree)
        : mesh_(std::move(mesh)), degree_(degree), ops_(&reference_operators(degree)) {
        inv_mass_scale_.resize(mesh_.num_cells());
        for (int j = 0; j < mesh_.num_cells(); ++j) inv_mass_scale_[j] = 2.0 / mesh_.width(j);
    }

    const Mesh1D& mesh() const { return mesh_; }
    int degree() const { return degree_; }
    int dofs_per_cell() const { return degree_ + 1; }
    std::size_t size() const { return static_cast<std::size_t>(mesh_.num_cells()) * (degree_ + 1); }

    /// w = M^{-1} (modal residual). Each cell writes only its own dofs.
    void apply(std::span<const double> u, std::span<double> w) const {
        const int n = degree_ + 1;
        const int cells = mesh_.num_cells();
        if (u.size() != size() || w.size() != size()) throw std::invalid_argument("Operator1D::apply: size mismatch");
        const auto& stiff = ops_->stiffness;
        const auto right_trace = [&](int j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += u[j * n + m];
            return s;
        };
        const auto left_trace = [&](int j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += (m % 2 == 0 ? 1.0 : -1.0) * u[j * n + m];
            return s;
        };
        for (int j = 0; j < cells; ++j) {
            const int jl = mesh_.periodic_left(j);
            const int jr = mesh_.periodic_right(j);
            const double flux_r = 0.5 * (right_trace(j) + left_trace(jr));
            const double flux_l = 0.5 * (right_trace(jl) + left_trace(j));
            const double* c = &u[j * n];
            for (int m = 0; m < n; ++m) {
                double vol = 0.0;
                for (int p = m - 1; p >= 0; p -= 2) vol += stiff[m][p] * c[p];
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                w[j * n + m] = inv_mass_scale_[j] * (2.0 * m + 1.0) * 0.5 * (vol - flux_r + sign * flux_l);
            }
        }
    }

private:
    Mesh1D mesh_;
    int degree_;
    const ReferenceOperators* ops_;
    std::vector<double> inv_mass_scale_;
};

inline Field1D apply_rhs_1d(const Operator1D& op, const Field1D& u) {
    if (!(u.mesh() == op.mesh()) || u.degree() != op.degree())
        throw std::invalid_argument("apply_rhs_1d: field and operator disagree on mesh or degree");
    Field1D w(op.mesh(), op.degree());
    op.apply(u.coeffs(), w.coeffs());
    return w;
}

/// a_j(u, v) with v given by its Legendre coefficients on cell j (modal evaluation).
inline double bilinear_a(const Field1D& u, int j, std::span<const double> v) {
    const Mesh1D& mesh = u.mesh();
    if (j < 0 || j >= mesh.num_cells()) throw std::out_of_range("bilinear_a: cell index out of range");
    const int k = u.degree();
    const auto& ops = reference_operators(std::max<int>(k, static_cast<int>(v.size()) - 1));
    const auto c = u.cell(j);
    double vol = 0.0;  // (u, v_x)_j
    for (std::size_t m = 0; m < v.size(); ++m)
        for (int p = 0; p <= k && p < static_cast<int>(m); ++p) vol += v[m] * ops.stiffness[m][p] * c[p];
    double v_right = 0.0, v_left = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) {
        v_right += v[m];
        v_left += (m % 2 == 0 ? 1.0 : -1.0) * v[m];
    }
    const double flux_r = u.interface_central_value(j + 1);
    const double flux_l = u.interface_central_value(j);
    return -vol + flux_r * v_right - flux_l * v_left;
}

/// a_j(u, v) for an arbitrary piecewise function u(cell, xi) by quadrature. One-sided limits are
/// u(cell, +-1) of the neighbouring cells (periodic wrap).
template <class Piecewise>
double bilinear_a_quadrature(const Mesh1D& mesh, int j, Piecewise&& u, std::span<const double> v, int points = -1) {
    if (j < 0 || j >= mesh.num_cells()) throw std::out_of_range("bilinear_a_quadrature: cell index out of range");
    const int nv = static_cast<int>(v.size());
    const QuadratureRule& rule = gauss_rule(points > 0 ? points : default_quadrature_points(nv));
    std::vector<double> derivs(nv);
    double vol = 0.0;  // -(u, v_x) = -int u dv/dxi dxi
    for (std::size_t q = 0; q < rule.size(); ++q) {
        legendre_derivatives(rule.nodes[q], derivs);
        double dv = 0.0;
        for (int m = 0; m < nv; ++m) dv += v[m] * derivs[m];
        vol += rule.weights[q] * u(j, rule.nodes[q]) * dv;
    }
    double v_right = 0.0, v_left = 0.0;
    for (int m = 0; m < nv; ++m) {
        v_right += v[m];
        v_left += (m % 2 == 0 ? 1.0 : -1.0) * v[m];
    }
    const double flux_r = 0.5 * (u(j, 1.0) + u(mesh.periodic_right(j), -1.0));
    const double flux_l = 0.5 * (u(mesh.periodic_left(j), 1.0) + u(j, -1.0));
    return -vol + flux_r * v_right - flux_l * v_left;
}

/// Adapts a field to the piecewise interface used by the quadrature bilinear forms.
inline auto piecewise(const Field1D& f) {
    return [&f](int j, double xi) { return f.eval_local(j, xi); };
}

/// Adapts a global function of x (continuous across cells) to the piecewise interface.
template <class F>
auto piecewise(const Mesh1D& mesh, F f) {
    return [&mesh, f](int j, double xi) { return f(mesh.to_physical(j, xi)); };
}

/// sum_j a_j(u, u|_{I_j}); zero for any u by the central-flux telescoping.
inline double global_skew_sum_1d(const Field1D& u) {
    double s = 0.0;
    for (int j = 0; j < u.num_cells(); ++j) s += bilinear_a(u, j, u.cell(j));
    return s;
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

/// du/dt = L(u) for Q^k or P^k on a periodic tensor mesh, inverse mass folded in.
class Operator2D {
public:
    Operator2D(TensorMesh2D mesh, Space space)
        : mesh_(std::move(mesh)), space_(space), modes_(space.modes()), ops_(&reference_operators(space.degree)) {
        if (space.dimension() != 2) throw std::invalid_argument("Operator2D: space must be two-dimensional");
        const int n = space.degree + 1;
        index_.assign(n * n, -1);
        for (std::size_t m = 0; m < modes_.size(); ++m) index_[modes_[m].a * n + modes_[m].b] = static_cast<int>(m);
    }

    const TensorMesh2D& mesh() const { return mesh_; }
    const Space& space() const { return space_; }
    std::size_t size() const { return static_cast<std::size_t>(mesh_.num_cells()) * modes_.size(); }

    /// Per-cell modal residual r_m = b_ij(u, phi_m), i.e. (u_t, phi_m) before inverting the mass.
    void residual(std::span<const double> u, std::span<double> r) const { sweep(u, r, false); }

    /// w = M^{-1} residual.
    void apply(std::span<const double> u, std::span<double> w) const { sweep(u, w, true); }

private:
    // Per cell, 4 blocks of k+1 Legendre coefficients: right, left (series in eta), top, bottom (series in xi).
    void compute_traces(std::span<const double> u, std::vector<double>& tr) const {
        const int n = space_.degree + 1;
        const std::size_t dofs = modes_.size();
        const int cells = mesh_.num_cells();
        tr.assign(static_cast<std::size_t>(cells) * 4 * n, 0.0);
        for (int c = 0; c < cells; ++c) {
            const double* cu = &u[c * dofs];
            double* t = &tr[static_cast<std::size_t>(c) * 4 * n];
            for (std::size_t m = 0; m < dofs; ++m) {
                const int a = modes_[m].a, b = modes_[m].b;
                t[0 * n + b] += cu[m];                            // x = x_R
                t[1 * n + b] += (a % 2 == 0 ? 1.0 : -1.0) * cu[m];  // x = x_L
                t[2 * n + a] += cu[m];                            // y = y_T
                t[3 * n + a] += (b % 2 == 0 ? 1.0 : -1.0) * cu[m];  // y = y_B
            }
        }
    }

    void sweep(std::span<const double> u, std::span<double> out, bool invert_mass) const {
        if (u.size() != size() || out.size() != size()) throw std::invalid_argument("Operator2D: size mismatch");
        const int n = space_.degree + 1;
        const std::size_t dofs = modes_.size();
        const auto& stiff = ops_->stiffness;
        std::vector<double> tr;
        compute_traces(u, tr);
        const auto trace = [&](int i, int j, int side) {
            return &tr[(static_cast<std::size_t>(mesh_.cell_index(i, j)) * 4 + side) * n];
        };
        std::vector<double> fr(n), fl(n), gt(n), gb(n);
        const Mesh1D& mx = mesh_.x();
        const Mesh1D& my = mesh_.y();
        for (int j = 0; j < mesh_.ny(); ++j) {
            const int jb = my.periodic_left(j), jt = my.periodic_right(j);
            const double hy = my.width(j);
            for (int i = 0; i < mesh_.nx(); ++i) {
                const int il = mx.periodic_left(i), ir = mx.periodic_right(i);
                const double hx = mx.width(i);
                const double* own_r = trace(i, j, 0);
                const double* own_l = trace(i, j, 1);
                const double* own_t = trace(i, j, 2);
                const double* own_b = trace(i, j, 3);
                const double* nb_r = trace(ir, j, 1);  // left trace of right neighbour
                const double* nb_l = trace(il, j, 0);
                const double* nb_t = trace(i, jt, 3);
                const double* nb_b = trace(i, jb, 2);
                for (int s = 0; s < n; ++s) {
                    fr[s] = 0.5 * (own_r[s] + nb_r[s]);
                    fl[s] = 0.5 * (nb_l[s] + own_l[s]);
                    gt[s] = 0.5 * (own_t[s] + nb_t[s]);
                    gb[s] = 0.5 * (nb_b[s] + own_b[s]);
                }
                const std::size_t base = static_cast<std::size_t>(mesh_.cell_index(i, j)) * dofs;
                const double* c = &u[base];
                for (std::size_t m = 0; m < dofs; ++m) {
                    const int a = modes_[m].a, b = modes_[m].b;
                    double vx = 0.0;
                    for (int p = a - 1; p >= 0; p -= 2) {
                        const int id = index_[p * n + b];
                        if (id >= 0) vx += stiff[a][p] * c[id];
                    }
                    double vy = 0.0;
                    for (int q = b - 1; q >= 0; q -= 2) {
                        const int id = index_[a * n + q];
                        if (id >= 0) vy += stiff[b][q] * c[id];
                    }
                    const double sa = (a % 2 == 0) ? 1.0 : -1.0;
                    const double sb = (b % 2 == 0) ? 1.0 : -1.0;
                    const double x_part = vx - fr[b] + sa * fl[b];
                    const double y_part = vy - gt[a] + sb * gb[a];
                    const double mass_a = 2.0 / (2.0 * a + 1.0);
                    const double mass_b = 2.0 / (2.0 * b + 1.0);
                    if (invert_mass) {
                        out[base + m] = (2.0 / hx) / mass_a * x_part + (2.0 / hy) / mass_b * y_part;
                    } else {
                        out[base + m] = 0.5 * hy * mass_b * x_part + 0.5 * hx * mass_a * y_part;
                    }
                }
            }
        }
    }

    TensorMesh2D mesh_;
    Space space_;
    std::vector<Mode2D> modes_;
    std::vector<int> index_;  // (a,b) -> mode index or -1
    const ReferenceOperators* ops_;
};

inline Field2D apply_rhs_2d(const Operator2D& op, const Field2D& u) {
    if (!(u.mesh() == op.mesh()) || !(u.space() == op.space()))
        throw std::invalid_argument("apply_rhs_2d: field and operator disagree on mesh or space");
    Field2D w(op.mesh(), op.space());
    op.apply(u.coeffs(), w.coeffs());
    return w;
}

/// b_ij(u, v) with v given in the cell's modal basis (same space as u).
inline double bilinear_b(const Field2D& u, int i, int j, std::span<const double> v) {
    const TensorMesh2D& mesh = u.mesh();
    if (i < 0 || i >= mesh.nx() || j < 0 || j >= mesh.ny()) throw std::out_of_range("bilinear_b: cell index out of range");
    if (v.size() != u.modes().size()) throw std::invalid_argument("bilinear_b: test function size mismatch");
    Operator2D op(mesh, u.space());
    std::vector<double> r(op.size());
    op.residual(u.coeffs(), r);
    const std::size_t base = static_cast<std::size_t>(mesh.cell_index(i, j)) * v.size();
    double s = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) s += v[m] * r[base + m];
    return s;
}

/// b_ij(u, v) for a piecewise function u(i, j, xi, eta) by quadrature; v uses the given mode list.
/// Volume integrals use (k+4)^2 points, edge integrals (k+2) points.
template <class Piecewise>
double bilinear_b_quadrature(const TensorMesh2D& mesh, int i, int j, Piecewise&& u, const std::vector<Mode2D>& modes,
                             std::span<const double> v) {
    if (i < 0 || i >= mesh.nx() || j < 0 || j >= mesh.ny())
        throw std::out_of_range("bilinear_b_quadrature: cell index out of range");
    int k = 0;
    for (const auto& md : modes) k = std::max({k, md.a, md.b});
    const int n = k + 1;
    const auto eval_v = [&](double xi, double eta, double& val, double& dxi, double& deta) {
        std::vector<double> lx(n), ly(n), dx(n), dy(n);
        legendre_values(xi, lx);
        legendre_values(eta, ly);
        legendre_derivatives(xi, dx);
        legendre_derivatives(eta, dy);
        val = dxi = deta = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            val += v[m] * lx[modes[m].a] * ly[modes[m].b];
            dxi += v[m] * dx[modes[m].a] * ly[modes[m].b];
            deta += v[m] * lx[modes[m].a] * dy[modes[m].b];
        }
    };
    const double hx = mesh.x().width(i), hy = mesh.y().width(j);
    const QuadratureRule& vol_rule = gauss_rule(k + 4);
    double vol = 0.0;
    for (std::size_t qy = 0; qy < vol_rule.size(); ++qy)
        for (std::size_t qx = 0; qx < vol_rule.size(); ++qx) {
            const double xi = vol_rule.nodes[qx], eta = vol_rule.nodes[qy];
            double val, dxi, deta;
            eval_v(xi, eta, val, dxi, deta);
            // (u, v_x) = (hy/2) int u dv/dxi ; (u, v_y) = (hx/2) int u dv/deta
            vol += vol_rule.weights[qx] * vol_rule.weights[qy] * u(i, j, xi, eta) * (0.5 * hy * dxi + 0.5 * hx * deta);
        }
    const int il = mesh.x().periodic_left(i), ir = mesh.x().periodic_right(i);
    const int jb = mesh.y().periodic_left(j), jt = mesh.y().periodic_right(j);
    const QuadratureRule& edge_rule = gauss_rule(k + 2);
    double edges = 0.0;
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
        const double s = edge_rule.nodes[q], wq = edge_rule.weights[q];
        double val, d1, d2;
        eval_v(1.0, s, val, d1, d2);
        edges += wq * 0.5 * hy * 0.5 * (u(i, j, 1.0, s) + u(ir, j, -1.0, s)) * val;
        eval_v(-1.0, s, val, d1, d2);
        edges -= wq * 0.5 * hy * 0.5 * (u(il, j, 1.0, s) + u(i, j, -1.0, s)) * val;
        eval_v(s, 1.0, val, d1, d2);
        edges += wq * 0.5 * hx * 0.5 * (u(i, j, s, 1.0) + u(i, jt, s, -1.0)) * val;
        eval_v(s, -1.0, val, d1, d2);
        edges -= wq * 0.5 * hx * 0.5 * (u(i, jb, s, 1.0) + u(i, j, s, -1.0)) * val;
    }
    return vol - edges;
}

inline auto piecewise(const Field2D& f) {
    return [&f](int i, int j, double xi, double eta) { return f.eval_local(i, j, xi, eta); };
}

template <class F>
auto piecewise(const TensorMesh2D& mesh, F f) {
    return [&mesh, f](int i, int j, double xi, double eta) {
        return f(mesh.x().to_physical(i, xi), mesh.y().to_physical(j, eta));
    };
}

/// sum_ij b_ij(u, u|_K).
inline double global_skew_sum_2d(const Field2D& u) {
    Operator2D op(u.mesh(), u.space());
    std::vector<double> r(op.size());
    op.residual(u.coeffs(), r);
    double s = 0.0;
    for (std::size_t m = 0; m < r.size(); ++m) s += u.coeffs()[m] * r[m];
    return s;
}

// ---------------------------------------------------------------------------
// Superconvergence identities on small patches
// ---------------------------------------------------------------------------

namespace detail {

inline Mesh1D uniform_patch_1d() { return uniform_mesh(3, {0.25, 1.75}); }

inline TensorMesh2D uniform_patch_2d() {
    return tensor_mesh(uniform_mesh(3, {0.25, 1.75}), uniform_mesh(3, {-0.5, 1.0}));
}

}  // namespace detail

/// max over Legendre basis v on the middle cell of |a_1(P*u, v) - a_1(u, v)|, u = x^{k+1},
/// on a 3-cell patch. Flux limits of P*u come from the neighbour projections.
inline double superconvergence_residual_1d(int k, const Mesh1D& patch) {
    detail::require_even(k, "superconvergence_residual_1d");
    if (patch.num_cells() != 3) throw std::invalid_argument("superconvergence_residual_1d: patch must have 3 cells");
    const auto u = [k](double x) { return std::pow(x, k + 1); };
    const Field1D projected = pstar_project_1d(u, patch, k);
    double worst = 0.0;
    for (int m = 0; m <= k; ++m) {
        std::vector<double> v(k + 1, 0.0);
        v[m] = 1.0;
        const double lhs = bilinear_a_quadrature(patch, 1, piecewise(projected), v);
        const double rhs = bilinear_a_quadrature(patch, 1, piecewise(patch, u), v);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

inline double superconvergence_residual_1d(int k) { return superconvergence_residual_1d(k, detail::uniform_patch_1d()); }

enum class PatchMonomial { x_power, y_power };

/// max over Q^k basis v on the centre cell of |b(Pi*u, v) - b(u, v)| for u = x^{k+1} or y^{k+1}.
inline double superconvergence_residual_2d(int k, PatchMonomial which, const TensorMesh2D& patch) {
    detail::require_even(k, "superconvergence_residual_2d");
    if (patch.nx() != 3 || patch.ny() != 3)
        throw std::invalid_argument("superconvergence_residual_2d: patch must be 3x3");
    const auto u = [k, which](double x, double y) { return std::pow(which == PatchMonomial::x_power ? x : y, k + 1); };
    const Field2D projected = pistar_project_2d(u, patch, k);
    const auto& modes = projected.modes();
    double worst = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        std::vector<double> v(modes.size(), 0.0);
        v[m] = 1.0;
        const double lhs = bilinear_b_quadrature(patch, 1, 1, piecewise(projected), modes, v);
        const double rhs = bilinear_b_quadrature(patch, 1, 1, piecewise(patch, u), modes, v);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

inline double superconvergence_residual_2d(int k, PatchMonomial which) {
    return superconvergence_residual_2d(k, which, detail::uniform_patch_2d());
}

/// For u = x^{k+1} and e = Pi*u - u: max over both vertical faces of the centre cell and
/// over m < k of |int_J (e(x^+, y) + e(x^-, y)) L_m dy|, plus the pointwise maximum of the sum.
struct FluxCancellation {
    double max_moment = 0.0;
    double max_pointwise = 0.0;
};

inline FluxCancellation flux_cancellation_2d(int k) {
    detail::require_even(k, "flux_cancellation_2d");
    const TensorMesh2D patch = detail::uniform_patch_2d();
    const auto u = [k](double x, double /*y*/) { return std::pow(x, k + 1); };
    const Field2D projected = pistar_project_2d(u, patch, k);
    const auto err = [&](int i, int j, double xi, double eta) {
        return projected.eval_local(i, j, xi, eta) -
               u(patch.x().to_physical(i, xi), patch.y().to_physical(j, eta));
    };
    FluxCancellation out;
    const QuadratureRule& rule = gauss_rule(k + 4);
    for (int face = 0; face < 2; ++face) {
        // face 0: x_R between cells (1,1) and (2,1); face 1: x_L between (0,1) and (1,1)
        const int left_cell = face == 0 ? 1 : 0;
        const auto sum_at = [&](double eta) { return err(left_cell, 1, 1.0, eta) + err(left_cell + 1, 1, -1.0, eta); };
        for (int m = 0; m < k; ++m) {
            const double moment =
                rule.integrate([&](double eta) { return sum_at(eta) * legendre_eval(m, eta); }) * 0.5 * patch.y().width(1);
            out.max_moment = std::max(out.max_moment, std::abs(moment));
        }
        for (int s = 0; s <= 20; ++s) out.max_pointwise = std::max(out.max_pointwise, std::abs(sum_at(-1.0 + 0.1 * s)));
    }
    return out;
}

}  // namespace cfdg
