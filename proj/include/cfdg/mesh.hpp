// Periodic 1D meshes (uniform, alternating-shift, random perturbation) and 2D tensor products.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfdg {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
};

/// Partition lo = x_{1/2} < ... < x_{N+1/2} = hi of a periodic interval.
class Mesh1D {
public:
    Mesh1D() = default;

    /// Validates monotonicity and endpoint placement.
    explicit Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2) throw std::invalid_argument("Mesh1D: need at least one cell");
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            if (!(nodes_[i + 1] > nodes_[i]))
                throw std::invalid_argument("Mesh1D: nodes not strictly increasing at index " + std::to_string(i));
        }
    }

    int num_cells() const { return static_cast<int>(nodes_.size()) - 1; }
    const std::vector<double>& nodes() const { return nodes_; }
    Interval domain() const { return {nodes_.front(), nodes_.back()}; }

    double left(int j) const { return nodes_[j]; }
    double right(int j) const { return nodes_[j + 1]; }
    double width(int j) const { return nodes_[j + 1] - nodes_[j]; }
    double center(int j) const { return 0.5 * (nodes_[j] + nodes_[j + 1]); }

    /// Nominal size (hi - lo) / N.
    double nominal_h() const { return domain().length() / num_cells(); }

    double min_width() const {
        double h = width(0);
        for (int j = 1; j < num_cells(); ++j) h = std::min(h, width(j));
        return h;
    }
    double max_width() const {
        double h = width(0);
        for (int j = 1; j < num_cells(); ++j) h = std::max(h, width(j));
        return h;
    }
    /// max_j h_j / min_j h_j
    double regularity_ratio() const { return max_width() / min_width(); }

    int periodic_left(int j) const { return j == 0 ? num_cells() - 1 : j - 1; }
    int periodic_right(int j) const { return j == num_cells() - 1 ? 0 : j + 1; }

    /// Owning cell of x; a node belongs to the cell on its right except the last one.
    int locate(double x) const {
        if (x < nodes_.front() || x > nodes_.back())
            throw std::out_of_range("Mesh1D::locate: point " + std::to_string(x) + " outside the domain");
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        int j = static_cast<int>(it - nodes_.begin()) - 1;
        return std::clamp(j, 0, num_cells() - 1);
    }

    /// Reference coordinate of x in cell j.
    double to_reference(int j, double x) const { return (2.0 * x - nodes_[j] - nodes_[j + 1]) / width(j); }
    double to_physical(int j, double xi) const { return center(j) + 0.5 * width(j) * xi; }

    bool operator==(const Mesh1D&) const = default;

private:
    std::vector<double> nodes_;
};

inline void require_interval(const Interval& d) {
    if (!(d.hi > d.lo)) throw std::invalid_argument("mesh domain must satisfy lo < hi");
}

inline Mesh1D uniform_mesh(int n, Interval domain) {
    if (n < 1) throw std::invalid_argument("uniform_mesh: N must be positive");
    require_interval(domain);
    const double h = domain.length() / n;
    std::vector<double> nodes(n + 1);
    for (int j = 0; j <= n; ++j) nodes[j] = domain.lo + j * h;
    nodes[n] = domain.hi;
    return Mesh1D(std::move(nodes));
}

/// Uniform nodes with x_{2j-1/2} moved by +alpha*h for j = 1..floor(N/2); endpoints fixed.
inline Mesh1D alpha_mesh(int n, double alpha, Interval domain) {
    if (n < 2) throw std::invalid_argument("alpha_mesh: N must be at least 2");
    if (!(std::abs(alpha) < 1.0))
        throw std::invalid_argument("alpha_mesh: |alpha| must be < 1, got " + std::to_string(alpha));
    require_interval(domain);
    Mesh1D base = uniform_mesh(n, domain);
    std::vector<double> nodes = base.nodes();
    const double h = domain.length() / n;
    // node x_{2j-1/2} sits at array index 2j-1
    for (int j = 1; 2 * j - 1 < n; ++j) nodes[2 * j - 1] += alpha * h;
    return Mesh1D(std::move(nodes));
}

/// Uniform draw in [0,1) from the top 53 bits of a 64-bit Mersenne Twister (std::mt19937_64).
/// std::uniform_real_distribution is avoided because its output is implementation-defined.
inline double portable_unit_draw(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Interior uniform nodes displaced by i.i.d. U[-fraction*h/2, fraction*h/2].
inline Mesh1D random_mesh(int n, double fraction, std::uint64_t seed, Interval domain) {
    if (n < 2) throw std::invalid_argument("random_mesh: N must be at least 2");
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw std::invalid_argument("random_mesh: fraction must lie in [0,1), got " + std::to_string(fraction));
    require_interval(domain);
    std::vector<double> nodes = uniform_mesh(n, domain).nodes();
    if (fraction == 0.0) return Mesh1D(std::move(nodes));
    const double h = domain.length() / n;
    std::mt19937_64 gen(seed);
    for (int j = 1; j < n; ++j) {
        const double u = portable_unit_draw(gen);
        nodes[j] += (u - 0.5) * fraction * h;
    }
    return Mesh1D(std::move(nodes));
}

/// Cartesian product mesh; cell (i,j) = I_i x J_j.
class TensorMesh2D {
public:
    TensorMesh2D() = default;
    TensorMesh2D(Mesh1D mx, Mesh1D my) : x_(std::move(mx)), y_(std::move(my)) {}

    const Mesh1D& x() const { return x_; }
    const Mesh1D& y() const { return y_; }

    int nx() const { return x_.num_cells(); }
    int ny() const { return y_.num_cells(); }
    int num_cells() const { return nx() * ny(); }
    /// Row-major in x: cell (i,j) has index j*nx + i.
    int cell_index(int i, int j) const { return j * nx() + i; }
    double area(int i, int j) const { return x_.width(i) * y_.width(j); }
    double min_width() const { return std::min(x_.min_width(), y_.min_width()); }

    bool operator==(const TensorMesh2D&) const = default;

private:
    Mesh1D x_;
    Mesh1D y_;
};

inline TensorMesh2D tensor_mesh(Mesh1D mx, Mesh1D my) { return TensorMesh2D(std::move(mx), std::move(my)); }

}  // namespace cfdg
