#ifndef RULED_FAMILIES_HPP
#define RULED_FAMILIES_HPP

// Distinguished curve families on a skew ruled surface and the normal
// curvature along each of them.
//
//   S1  v = const                                  (constant striction distance)
//   S2  [v² + δ²(λ² + 1)] du + δλ dv = 0           (orthogonal to S1)
//   S3  δλ du + dv = 0                             (orthogonal to the rulings)
//   S4  δ'(δ² − v²) du + 2δv dv = 0                (constant Gaussian curvature)
//   PRINCIPAL_1 / PRINCIPAL_2                      (curvature lines, k1 ≥ k2)

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ruled/error.hpp"
#include "ruled/format.hpp"
#include "ruled/profile.hpp"
#include "ruled/surface.hpp"

namespace ruled {

enum class CurveFamily { S1, S2, S3, S4, Principal1, Principal2 };

inline constexpr std::array<CurveFamily, 6> all_families{CurveFamily::S1,         CurveFamily::S2,
                                                         CurveFamily::S3,         CurveFamily::S4,
                                                         CurveFamily::Principal1, CurveFamily::Principal2};

inline std::string_view family_name(CurveFamily f)
{
    switch (f) {
    case CurveFamily::S1: return "S1";
    case CurveFamily::S2: return "S2";
    case CurveFamily::S3: return "S3";
    case CurveFamily::S4: return "S4";
    case CurveFamily::Principal1: return "PRINCIPAL_1";
    case CurveFamily::Principal2: return "PRINCIPAL_2";
    }
    return "?";
}

/// Field direction at a point. `degenerate` marks the S4 points where both
/// coefficients vanish; the direction is then the S1 fallback (1, 0).
struct FieldDirection {
    DirectionUV direction;
    bool degenerate = false;
};

namespace detail {

/// du ≥ 0, and dv > 0 when du = 0.
inline DirectionUV canonical_direction(double du, double dv)
{
    DirectionUV d = DirectionUV::normalized(du, dv);
    if (d.du < 0.0 || (d.du == 0.0 && d.dv < 0.0)) {
        d.du = -d.du;
        d.dv = -d.dv;
    }
    if (d.du == 0.0) {
        d.du = 0.0; // drop a negative zero
    }
    return d;
}

/// Direction solving a du + b dv = 0.
inline DirectionUV solve_linear(double a, double b) { return canonical_direction(b, -a); }

inline constexpr double degenerate_coefficient = 1e-12;

struct S4Coefficients {
    double a; ///< coefficient of du
    double b; ///< coefficient of dv
    bool degenerate;
};

inline S4Coefficients s4_coefficients(const InvariantProfile& profile, double u, double v)
{
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double a = dp * (d * d - v * v);
    const double b = 2.0 * d * v;
    const double scale = degenerate_coefficient * (v * v + d * d);
    return {a, b, std::abs(a) <= scale && std::abs(b) <= scale};
}

inline bool is_edlinger_at(const InvariantProfile& profile, double u, double tol = 1e-9)
{
    const double k = profile.k(u);
    return k != 0.0 && std::abs(profile.delta_prime(u)) <= tol * std::abs(profile.delta(u)) &&
           std::abs(k * profile.lambda(u) + 1.0) <= tol;
}

inline DirectionUV principal_direction(const InvariantProfile& profile, double u, double v, bool first)
{
    const PointGeometry p = curvature_scalars(profile, u, v);
    const double kappa = first ? p.k1 : p.k2;
    const Mat2 m = p.h - kappa * p.g;
    // Each row of (h − κ g) annihilates the eigendirection; use the better conditioned one.
    const Eigen::Vector2d r0 = m.row(0);
    const Eigen::Vector2d r1 = m.row(1);
    const Eigen::Vector2d r = r0.squaredNorm() >= r1.squaredNorm() ? r0 : r1;
    return solve_linear(r[0], r[1]);
}

} // namespace detail

inline FieldDirection direction_field(CurveFamily family, const InvariantProfile& profile, double u, double v)
{
    switch (family) {
    case CurveFamily::S1:
        profile.require(u);
        return {DirectionUV{1.0, 0.0}, false};
    case CurveFamily::S2: {
        const double d = profile.delta(u);
        const double l = profile.lambda(u);
        return {detail::solve_linear(v * v + d * d * (l * l + 1.0), d * l), false};
    }
    case CurveFamily::S3: {
        const double d = profile.delta(u);
        const double l = profile.lambda(u);
        return {detail::solve_linear(d * l, 1.0), false};
    }
    case CurveFamily::S4: {
        const auto c = detail::s4_coefficients(profile, u, v);
        if (c.degenerate) {
            return {DirectionUV{1.0, 0.0}, true};
        }
        return {detail::solve_linear(c.a, c.b), false};
    }
    case CurveFamily::Principal1: return {detail::principal_direction(profile, u, v, true), false};
    case CurveFamily::Principal2: return {detail::principal_direction(profile, u, v, false), false};
    }
    throw PreconditionError("unknown curve family");
}

/// Normal curvature along the family from its specialized closed form.
inline double family_normal_curvature(CurveFamily family, const InvariantProfile& profile, double u, double v)
{
    const double k = profile.k(u);
    const double d = profile.delta(u);
    const double dp = profile.delta_prime(u);
    const double l = profile.lambda(u);
    const double d2 = d * d;
    const double v2 = v * v;
    const double w = std::sqrt(v2 + d2);
    const double w3 = w * w * w;
    const double g11 = v2 + d2 * (l * l + 1.0);

    auto s1 = [&] { return -(k * v2 + dp * v + d2 * (k - l)) / (w * g11); };

    switch (family) {
    case CurveFamily::S1: return s1();
    case CurveFamily::S2:
        return -d2 * l * ((k * l + 2.0) * v2 + dp * l * v + d2 * (l * l + k * l + 2.0)) / (w3 * g11);
    case CurveFamily::S3: return -(k * v2 + dp * v + d2 * (k + l)) / w3;
    case CurveFamily::S4: {
        if (detail::s4_coefficients(profile, u, v).degenerate) {
            return s1();
        }
        const double dp2 = dp * dp;
        const double a = (4.0 * d2 + dp2) * v2 * v2 + 4.0 * d2 * dp * l * v2 * v +
                         2.0 * d2 * (2.0 * d2 * (l * l + 1.0) - dp2) * v2 - 4.0 * d2 * d2 * dp * l * v +
                         d2 * d2 * dp2;
        return -4.0 * d2 * v * (k * v2 * v + d2 * (k - l) * v + d2 * dp) / (w * a);
    }
    case CurveFamily::Principal1:
    case CurveFamily::Principal2: {
        const bool first = family == CurveFamily::Principal1;
        if (detail::is_edlinger_at(profile, u)) {
            const double a = -k / w;
            const double b = d2 / (k * w3);
            return first ? std::max(a, b) : std::min(a, b);
        }
        const PointGeometry p = curvature_scalars(profile, u, v);
        return first ? p.k1 : p.k2;
    }
    }
    throw PreconditionError("unknown curve family");
}

/// Points (u, v) of one integrated family curve.
struct FamilyCurveSample {
    CurveFamily family = CurveFamily::S1;
    std::vector<Eigen::Vector2d> points;
    double step = 0.0;
};

/// Sine of the angle between the chord p0→p1 and the field direction at its
/// midpoint; O(step²) on an accurately integrated curve.
inline double family_chord_residual(CurveFamily family, const InvariantProfile& profile, const Eigen::Vector2d& p0,
                                    const Eigen::Vector2d& p1)
{
    const Eigen::Vector2d mid = 0.5 * (p0 + p1);
    const Eigen::Vector2d chord = (p1 - p0).normalized();
    const Eigen::Vector2d field = direction_field(family, profile, mid[0], mid[1]).direction.vec();
    return std::abs(chord[0] * field[1] - chord[1] * field[0]);
}

/// RK4 in (u, v)-plane arc length from `start`, total length `span`. The
/// field's ± ambiguity is resolved by continuity, starting with du ≥ 0.
inline FamilyCurveSample integrate_family_curve(CurveFamily family, const InvariantProfile& profile,
                                                const Eigen::Vector2d& start, double span, double step)
{
    if (!(step > 0.0) || !(span >= 0.0)) {
        throw PreconditionError("curve integration needs step > 0 and span >= 0");
    }
    const FieldDirection initial = direction_field(family, profile, start[0], start[1]);
    const bool start_degenerate = initial.degenerate;

    auto field = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& reference) -> Eigen::Vector2d {
        if (!profile.domain().contains(p[0])) {
            throw DomainError(std::string(family_name(family)) + " curve left the domain at u=" + format_double(p[0]));
        }
        const FieldDirection f = direction_field(family, profile, p[0], p[1]);
        if (f.degenerate && !start_degenerate) {
            throw PreconditionError(std::string(family_name(family)) + " field degenerates at u=" + format_double(p[0]) +
                                    ", v=" + format_double(p[1]));
        }
        Eigen::Vector2d d = f.direction.vec();
        return d.dot(reference) < 0.0 ? Eigen::Vector2d(-d) : d;
    };

    FamilyCurveSample curve;
    curve.family = family;
    curve.points.push_back(start);
    if (span == 0.0) {
        return curve;
    }
    const auto steps = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
    const double h = span / static_cast<double>(steps);
    curve.step = h;
    Eigen::Vector2d heading = initial.direction.vec();
    Eigen::Vector2d p = start;
    for (std::size_t i = 0; i < steps; ++i) {
        const Eigen::Vector2d k1 = field(p, heading);
        const Eigen::Vector2d k2 = field(p + 0.5 * h * k1, k1);
        const Eigen::Vector2d k3 = field(p + 0.5 * h * k2, k1);
        const Eigen::Vector2d k4 = field(p + h * k3, k1);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!profile.domain().contains(p[0])) {
            throw DomainError(std::string(family_name(family)) + " curve left the domain at u=" + format_double(p[0]));
        }
        heading = k4;
        curve.points.push_back(p);
    }
    return curve;
}

} // namespace ruled

#endif // RULED_FAMILIES_HPP
