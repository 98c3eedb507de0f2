/// Lattice geometry: boxes with row-major site indexing, switch functions,
/// diagonal weights and the planar geometry helpers (areas, sight angles).
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/Dense>

namespace hall {

using cplx = std::complex<double>;

/// A lattice site or a plaquette center. Coordinates are stored doubled so
/// half-integers are exact.
class SitePoint {
public:
    constexpr SitePoint() = default;
    static constexpr SitePoint site(std::int64_t x1, std::int64_t x2) { return SitePoint(2 * x1, 2 * x2); }
    static constexpr SitePoint from_twice(std::int64_t t1, std::int64_t t2) { return SitePoint(t1, t2); }
    /// Plaquette center (x1 + 1/2, x2 + 1/2).
    static constexpr SitePoint plaquette(std::int64_t x1, std::int64_t x2) { return SitePoint(2 * x1 + 1, 2 * x2 + 1); }

    double x1() const { return 0.5 * static_cast<double>(t1_); }
    double x2() const { return 0.5 * static_cast<double>(t2_); }
    std::int64_t twice_x1() const { return t1_; }
    std::int64_t twice_x2() const { return t2_; }
    bool is_site() const { return t1_ % 2 == 0 && t2_ % 2 == 0; }
    bool is_plaquette_center() const { return t1_ % 2 != 0 && t2_ % 2 != 0; }

    friend bool operator==(const SitePoint&, const SitePoint&) = default;

private:
    constexpr SitePoint(std::int64_t t1, std::int64_t t2) : t1_(t1), t2_(t2) {}
    std::int64_t t1_ = 0;
    std::int64_t t2_ = 0;
};

/// 1-norm |x1| + |x2|.
double norm1(const SitePoint& p);
/// 1-norm distance between two points.
double distance1(const SitePoint& p, const SitePoint& q);

/// Rectangular window of Z^2. Sites are numbered row-major: x2 is the outer
/// (slow) coordinate, x1 the inner (fast) one.
struct Box {
    int x1_min = 0;
    int x1_max = 0;
    int x2_min = 0;
    int x2_max = 0;

    int width() const { return x1_max - x1_min + 1; }
    int height() const { return x2_max - x2_min + 1; }
    int n_sites() const { return width() * height(); }

    bool contains(int x1, int x2) const { return x1 >= x1_min && x1 <= x1_max && x2 >= x2_min && x2 <= x2_max; }
    int index(int x1, int x2) const { return (x2 - x2_min) * width() + (x1 - x1_min); }
    std::pair<int, int> site(int k) const { return {x1_min + k % width(), x2_min + k / width()}; }
    SitePoint point(int k) const;

    friend bool operator==(const Box&, const Box&) = default;
};

/// Throws ConfigError on an empty range.
Box make_box(std::pair<int, int> x1_range, std::pair<int, int> x2_range);

/// Diagonal multiplication operator on a box.
struct DiagonalOperator {
    Box box;
    Eigen::VectorXcd values;
    bool real = false;

    cplx at(int x1, int x2) const { return values(box.index(x1, x2)); }
    Eigen::VectorXd real_values() const { return values.real(); }
};

/// Characteristic function of {x_axis < offset}. The offset must be an
/// integer or a half-integer.
DiagonalOperator switch_function(const Box& box, int axis, double offset = 0.0);

/// Diagonal e^{delta * ell(x)}. ell is checked to be 1-Lipschitz on all
/// nearest-neighbour pairs of the box.
DiagonalOperator lipschitz_weight(const Box& box, const std::function<double(int, int)>& ell, double delta);

/// (1/2)(x - y) ^ (y - z).
double oriented_area(const SitePoint& x, const SitePoint& y, const SitePoint& z);

/// Signed angle at p from u to v, in (-pi, pi].
double sight_angle(const SitePoint& p, const SitePoint& u, const SitePoint& v);

}  // namespace hall
