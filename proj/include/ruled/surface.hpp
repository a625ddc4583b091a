#ifndef RULED_SURFACE_HPP
#define RULED_SURFACE_HPP

// Pointwise geometry of x(u, v) = s(u) + v e(u) in standard form.
//
//   g = [[v² + δ²(λ² + 1), δλ], [δλ, 1]]
//   h = (1/w) [[−(k v² + δ' v + δ²(k − λ)), δ], [δ, 0]],   w = √(v² + δ²)
//   K = −δ²/w⁴,   H = −(k v² + δ' v + δ²(k + λ)) / (2 w³)

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruled/error.hpp"
#include "ruled/format.hpp"
#include "ruled/frame.hpp"
#include "ruled/profile.hpp"

namespace ruled {

using Mat2 = Eigen::Matrix2d;

/// Unit tangent direction du:dv in parameter space.
struct DirectionUV {
    double du = 1.0;
    double dv = 0.0;

    /// Normalizes to du² + dv² = 1.
    static DirectionUV normalized(double du, double dv)
    {
        const double norm = std::hypot(du, dv);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw PreconditionError("direction du:dv must be finite and non-zero");
        }
        return DirectionUV{du / norm, dv / norm};
    }

    Eigen::Vector2d vec() const { return {du, dv}; }
};

struct FundamentalTensors {
    Mat2 g;
    Mat2 h;
    double w = 0.0;
};

/// Everything the curvature formulas produce at one (u, v).
struct PointGeometry {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
    Mat2 g = Mat2::Identity();
    Mat2 h = Mat2::Zero();
    double K = 0.0;
    double H = 0.0;
    double k1 = 0.0; ///< larger principal curvature
    double k2 = 0.0; ///< smaller principal curvature
};

namespace detail {

/// Roots of κ² − 2Hκ + K, larger first. The larger-magnitude root is formed
/// directly and the other as K divided by it, which keeps k1·k2 = K tight.
inline std::pair<double, double> principal_from_scalars(double K, double H)
{
    const double r = std::sqrt(std::max(H * H - K, 0.0));
    const double big = H >= 0.0 ? H + r : H - r;
    const double small = big != 0.0 ? K / big : 0.0;
    return big >= small ? std::pair{big, small} : std::pair{small, big};
}

inline double bilinear(const Mat2& m, const DirectionUV& a, const DirectionUV& b)
{
    return a.vec().dot(m * b.vec());
}

} // namespace detail

/// g, h and w at (u, v); needs δ'(u).
inline FundamentalTensors fundamental_tensors(const InvariantProfile& profile, double u, double v)
{
    const double k = profile.k(u);
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double l = profile.lambda(u);
    const double w = std::sqrt(v * v + d * d);
    FundamentalTensors t;
    t.w = w;
    t.g << v * v + d * d * (l * l + 1.0), d * l, d * l, 1.0;
    t.h << -(k * v * v + dp * v + d * d * (k - l)) / w, d / w, d / w, 0.0;
    return t;
}

inline PointGeometry curvature_scalars(const InvariantProfile& profile, double u, double v)
{
    const FundamentalTensors t = fundamental_tensors(profile, u, v);
    const double k = profile.k(u);
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double l = profile.lambda(u);
    const double w = t.w;
    const double w2 = v * v + d * d;

    PointGeometry p;
    p.u = u;
    p.v = v;
    p.w = w;
    p.g = t.g;
    p.h = t.h;
    p.K = -d * d / (w2 * w2);
    p.H = -(k * v * v + dp * v + d * d * (k + l)) / (2.0 * w2 * w);
    std::tie(p.k1, p.k2) = detail::principal_from_scalars(p.K, p.H);
    return p;
}

/// Principal curvatures of an Edlinger surface (δ' = 0, kλ + 1 = 0):
/// (−k/w, δ²/(k w³)), in that order.
inline std::pair<double, double> edlinger_principal_curvatures(const InvariantProfile& profile, double u, double v,
                                                               double tol = 1e-9)
{
    const double k = profile.k(u);
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double l = profile.lambda(u);
    if (std::abs(dp) > tol * std::abs(d) || std::abs(k * l + 1.0) > tol) {
        throw PreconditionError("not an Edlinger surface at u=" + format_double(u) + " (delta'=" + format_double(dp) +
                                ", k*lambda+1=" + format_double(k * l + 1.0) + ")");
    }
    if (k == 0.0) {
        throw PreconditionError("conical curvature vanishes at u=" + format_double(u));
    }
    const double w = std::sqrt(v * v + d * d);
    return {-k / w, d * d / (k * w * w * w)};
}

/// k_N = II(dir) / I(dir) from precomputed tensors.
inline double normal_curvature(const Mat2& g, const Mat2& h, const DirectionUV& dir)
{
    return detail::bilinear(h, dir, dir) / detail::bilinear(g, dir, dir);
}

/// Normal curvature in direction du:dv, written out in the invariants.
inline double normal_curvature(const InvariantProfile& profile, double u, double v, const DirectionUV& dir)
{
    const double k = profile.k(u);
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double l = profile.lambda(u);
    const double w = std::sqrt(v * v + d * d);
    const double du = dir.du;
    const double dv = dir.dv;
    const double second = -(k * v * v + dp * v + d * d * (k - l)) * du * du + 2.0 * d * du * dv;
    const double first = (v * v + d * d * (l * l + 1.0)) * du * du + 2.0 * d * l * du * dv + dv * dv;
    return second / (w * first);
}

/// Surface built from an invariant profile by integrating its striction line.
class RuledSurface {
public:
    RuledSurface(InvariantProfile profile, StrictionCurve striction, Interval v_range)
        : profile_(std::move(profile)), striction_(std::move(striction)), v_range_(v_range)
    {
        const Interval& d = profile_.domain();
        const double slack = 1e-9 * std::max(1.0, d.length());
        if (striction_.u_min() < d.lo - slack || striction_.u_max() > d.hi + slack) {
            throw PreconditionError("striction samples extend beyond the profile domain");
        }
        if (!(v_range_.lo <= v_range_.hi)) {
            throw PreconditionError("v-range must satisfy lo <= hi");
        }
    }

    /// Integrates the striction line over the whole profile domain.
    static RuledSurface build(InvariantProfile profile, Interval v_range, double step = 1e-3)
    {
        const Interval d = profile.domain();
        StrictionCurve curve = integrate_striction_frame(profile, d.lo, d.hi, step);
        return RuledSurface(std::move(profile), std::move(curve), v_range);
    }

    const InvariantProfile& profile() const { return profile_; }
    const StrictionCurve& striction() const { return striction_; }
    const Interval& v_range() const { return v_range_; }
    Interval u_range() const { return {striction_.u_min(), striction_.u_max()}; }

    /// Striction point and frame at any u, by one RK4 sub-step from the
    /// nearest stored sample at or below u. Smooth inside each cell and
    /// reproduces the stored samples at the nodes.
    StrictionSample striction_at(double u) const
    {
        if (!u_range().contains(u)) {
            throw DomainError("u=" + format_double(u) + " outside surface range [" + format_double(striction_.u_min()) +
                              ", " + format_double(striction_.u_max()) + "]");
        }
        const StrictionSample& base = striction_[striction_.locate(u)];
        const double dt = u - base.u;
        if (dt == 0.0) {
            return base;
        }
        return detail::advance_sample(base, profile_, dt);
    }

    /// x(u, v) for any real v; only u is range-checked.
    Vec3 point(double u, double v) const
    {
        const StrictionSample sample = striction_at(u);
        return sample.s + v * sample.frame.e;
    }

    /// x(u, v) with both parameters checked against the surface ranges.
    Vec3 position(double u, double v) const
    {
        if (!v_range_.contains(v)) {
            throw DomainError("v=" + format_double(v) + " outside v-range");
        }
        return point(u, v);
    }

private:
    InvariantProfile profile_;
    StrictionCurve striction_;
    Interval v_range_;
};

inline Vec3 position(const RuledSurface& surface, double u, double v) { return surface.position(u, v); }

/// Geometry from central differences of the embedding alone. Used as an
/// independent check on the closed forms.
inline PointGeometry fd_geometry_oracle(const RuledSurface& surface, double u, double v, double step)
{
    if (!(step > 0.0) || step > 0.1) {
        throw PreconditionError("oracle step must be in (0, 0.1]");
    }
    const Interval range = surface.u_range();
    if (u - 2.0 * step < range.lo || u + 2.0 * step > range.hi) {
        throw DomainError("oracle stencil at u=" + format_double(u) + " leaves the surface range");
    }
    auto x = [&](double a, double b) { return surface.point(a, b); };
    const double s = step;
    const Vec3 x0 = x(u, v);
    const Vec3 xp = x(u + s, v);
    const Vec3 xm = x(u - s, v);
    const Vec3 xu = (xp - xm) / (2.0 * s);
    const Vec3 xv = (x(u, v + s) - x(u, v - s)) / (2.0 * s);
    const Vec3 xuu = (xp - 2.0 * x0 + xm) / (s * s);
    const Vec3 xuv = (x(u + s, v + s) - x(u + s, v - s) - x(u - s, v + s) + x(u - s, v - s)) / (4.0 * s * s);

    const Vec3 normal = xu.cross(xv).normalized();
    PointGeometry p;
    p.u = u;
    p.v = v;
    p.g << xu.dot(xu), xu.dot(xv), xu.dot(xv), xv.dot(xv);
    // x_vv vanishes identically on a ruled surface.
    p.h << xuu.dot(normal), xuv.dot(normal), xuv.dot(normal), 0.0;
    const double det_g = p.g.determinant();
    if (!(det_g > 0.0)) {
        throw NumericError("oracle metric is degenerate at u=" + format_double(u));
    }
    p.w = std::sqrt(det_g);
    p.K = p.h.determinant() / det_g;
    p.H = (p.g(1, 1) * p.h(0, 0) - 2.0 * p.g(0, 1) * p.h(0, 1) + p.g(0, 0) * p.h(1, 1)) / (2.0 * det_g);
    std::tie(p.k1, p.k2) = detail::principal_from_scalars(p.K, p.H);
    return p;
}

/// Raw second difference x(u, v+s) − 2x(u, v) + x(u, v−s) along a ruling.
inline Vec3 ruling_second_difference(const RuledSurface& surface, double u, double v, double step)
{
    return surface.point(u, v + step) - 2.0 * surface.point(u, v) + surface.point(u, v - step);
}

/// nu × nv vertex grid (row-major, u outer) with (nu−1)(nv−1) quads.
struct Mesh {
    std::size_t nu = 0;
    std::size_t nv = 0;
    std::vector<double> u_values;
    std::vector<double> v_values;
    std::vector<Vec3> vertices;
    /// 0-based vertex indices, counter-clockwise in (u, v).
    std::vector<std::array<std::size_t, 4>> quads;

    std::size_t index(std::size_t i, std::size_t j) const { return i * nv + j; }
};

inline Mesh sample_mesh(const RuledSurface& surface, std::size_t nu, std::size_t nv)
{
    if (nu < 2 || nv < 2) {
        throw PreconditionError("mesh needs nu >= 2 and nv >= 2");
    }
    Mesh mesh;
    mesh.nu = nu;
    mesh.nv = nv;
    mesh.u_values = surface.u_range().grid(nu);
    mesh.v_values = surface.v_range().grid(nv);
    mesh.vertices.reserve(nu * nv);
    for (double u : mesh.u_values) {
        const StrictionSample sample = surface.striction_at(u);
        for (double v : mesh.v_values) {
            mesh.vertices.push_back(sample.s + v * sample.frame.e);
        }
    }
    mesh.quads.reserve((nu - 1) * (nv - 1));
    for (std::size_t i = 0; i + 1 < nu; ++i) {
        for (std::size_t j = 0; j + 1 < nv; ++j) {
            mesh.quads.push_back({mesh.index(i, j), mesh.index(i + 1, j), mesh.index(i + 1, j + 1), mesh.index(i, j + 1)});
        }
    }
    return mesh;
}

} // namespace ruled

#endif // RULED_SURFACE_HPP
