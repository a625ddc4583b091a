#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ruled/families.hpp"

using namespace ruled;

namespace {

const double rt2 = std::sqrt(2.0);

std::vector<InvariantProfile> profiles()
{
    return {helicoid(1.0), edlinger(-1.0, 1.0), const_drall_orthoid(ScalarProfile::constant(0.7), 1.0),
            const_drall_conoid(ScalarProfile::constant(1.0), 1.0),
            InvariantProfile::from_lambda(ScalarProfile::expression("0.5*cos(u)"),
                                          ScalarProfile::expression("1+0.2*sin(u)"),
                                          ScalarProfile::expression("0.3+0.1*sin(2*u)"), default_builtin_domain,
                                          "variable")};
}

double g_inner(const Mat2& g, const DirectionUV& a, const DirectionUV& b) { return a.vec().dot(g * b.vec()); }

} // namespace

TEST(DirectionField, DocumentedDirections)
{
    const InvariantProfile orthoid = const_drall_orthoid(ScalarProfile::constant(0.7), 1.0);
    const DirectionUV s3 = direction_field(CurveFamily::S3, orthoid, 1.0, 0.5).direction;
    EXPECT_EQ(s3.du, 1.0);
    EXPECT_EQ(s3.dv, 0.0);
    const DirectionUV s2 = direction_field(CurveFamily::S2, orthoid, 1.0, 0.5).direction;
    EXPECT_EQ(s2.du, 0.0);
    EXPECT_EQ(s2.dv, 1.0);
    const DirectionUV s1 = direction_field(CurveFamily::S1, orthoid, 1.0, 0.5).direction;
    EXPECT_EQ(s1.du, 1.0);
    EXPECT_EQ(s1.dv, 0.0);

    const DirectionUV p1 = direction_field(CurveFamily::Principal1, edlinger(-1.0, 1.0), 1.0, 0.0).direction;
    EXPECT_NEAR(p1.du, 1.0, 1e-12);
    EXPECT_NEAR(p1.dv, 0.0, 1e-12);
}

TEST(DirectionField, SignConvention)
{
    for (const InvariantProfile& p : profiles()) {
        for (CurveFamily f : all_families) {
            for (double v : {-1.5, -0.2, 0.4, 1.9}) {
                const DirectionUV d = direction_field(f, p, 2.0, v).direction;
                EXPECT_NEAR(std::hypot(d.du, d.dv), 1.0, 1e-15);
                EXPECT_TRUE(d.du > 0.0 || (d.du == 0.0 && d.dv > 0.0)) << family_name(f);
            }
        }
    }
}

TEST(DirectionField, EdlingerPrincipalMatchesClosedFormField)
{
    // [k²v² + δ²(k² + 1)] du − δ k dv = 0 on an Edlinger surface.
    const InvariantProfile e = edlinger(-2.0, 0.5);
    for (double v : {-1.0, 0.0, 0.3, 1.7}) {
        const double k = -2.0, d = 0.5;
        const double a = k * k * v * v + d * d * (k * k + 1.0);
        const double b = -d * k;
        bool found = false;
        for (CurveFamily f : {CurveFamily::Principal1, CurveFamily::Principal2}) {
            const DirectionUV dir = direction_field(f, e, 1.0, v).direction;
            found = found || std::abs(a * dir.du + b * dir.dv) <= 1e-10 * std::hypot(a, b);
        }
        EXPECT_TRUE(found) << "v=" << v;
    }
}

TEST(DirectionField, Orthogonality)
{
    for (const InvariantProfile& p : profiles()) {
        for (double u : p.domain().grid(10)) {
            for (double v : Interval{-2.0, 2.0}.grid(10)) {
                const Mat2 g = fundamental_tensors(p, u, v).g;
                const DirectionUV s1 = direction_field(CurveFamily::S1, p, u, v).direction;
                const DirectionUV s2 = direction_field(CurveFamily::S2, p, u, v).direction;
                const DirectionUV s3 = direction_field(CurveFamily::S3, p, u, v).direction;
                EXPECT_LE(std::abs(g_inner(g, s1, s2)), 1e-10 * g(0, 0)) << p.name();
                EXPECT_LE(std::abs(g_inner(g, s3, DirectionUV{0.0, 1.0})), 1e-10) << p.name();
            }
        }
    }
}

TEST(DirectionField, PrincipalDirectionsDiagonalize)
{
    for (const InvariantProfile& p : profiles()) {
        for (double u : p.domain().grid(10)) {
            for (double v : Interval{-2.0, 2.0}.grid(10)) {
                const FundamentalTensors t = fundamental_tensors(p, u, v);
                const DirectionUV a = direction_field(CurveFamily::Principal1, p, u, v).direction;
                const DirectionUV b = direction_field(CurveFamily::Principal2, p, u, v).direction;
                EXPECT_LE(std::abs(g_inner(t.g, a, b)), 1e-9 * t.g.norm()) << p.name();
                EXPECT_LE(std::abs(g_inner(t.h, a, b)), 1e-9 * std::max(1.0, t.h.norm())) << p.name();
            }
        }
    }
}

TEST(DirectionField, S4ReducesToS1ForConstantDrall)
{
    for (const InvariantProfile& p : {edlinger(-1.0, 1.0), const_drall_orthoid(ScalarProfile::constant(0.7), 1.0),
                                      const_drall_conoid(ScalarProfile::constant(1.0), 1.0), helicoid(1.0)}) {
        for (double v : {-2.0, -0.5, 0.25, 1.0}) {
            const FieldDirection f = direction_field(CurveFamily::S4, p, 1.0, v);
            EXPECT_FALSE(f.degenerate);
            EXPECT_EQ(f.direction.du, 1.0);
            EXPECT_EQ(f.direction.dv, 0.0);
        }
        const FieldDirection at_zero = direction_field(CurveFamily::S4, p, 1.0, 0.0);
        EXPECT_TRUE(at_zero.degenerate);
        EXPECT_EQ(at_zero.direction.du, 1.0);
        EXPECT_EQ(family_normal_curvature(CurveFamily::S4, p, 1.0, 0.0),
                  family_normal_curvature(CurveFamily::S1, p, 1.0, 0.0));
    }
}

TEST(DirectionField, S4AlongRulingWhereDriftVanishesOnStrictionLine)
{
    const InvariantProfile p = InvariantProfile::from_lambda(
        ScalarProfile::constant(0.2), ScalarProfile::expression("1+0.2*sin(u)"), ScalarProfile::constant(0.1),
        default_builtin_domain);
    const FieldDirection f = direction_field(CurveFamily::S4, p, 1.0, 0.0);
    EXPECT_FALSE(f.degenerate);
    EXPECT_EQ(f.direction.du, 0.0);
    EXPECT_EQ(f.direction.dv, 1.0);
    EXPECT_EQ(family_normal_curvature(CurveFamily::S4, p, 1.0, 0.0), 0.0);
}

TEST(FamilyNormalCurvature, DocumentedValues)
{
    const InvariantProfile e = edlinger(-1.0, 1.0);
    EXPECT_NEAR(family_normal_curvature(CurveFamily::S1, e, 1.0, 1.0), 1.0 / rt2, 1e-15);
    EXPECT_NEAR(family_normal_curvature(CurveFamily::S2, e, 1.0, 1.0), -1.0 / (2.0 * rt2), 1e-15);
    const InvariantProfile h = helicoid(1.0);
    for (double v : {-2.0, -0.3, 0.0, 1.4}) {
        EXPECT_EQ(family_normal_curvature(CurveFamily::S3, h, 0.5, v), 0.0);
        EXPECT_EQ(family_normal_curvature(CurveFamily::S4, h, 0.5, v), 0.0);
    }
}

TEST(FamilyNormalCurvature, ClosedFormsMatchGeneralFormula)
{
    for (const InvariantProfile& p : profiles()) {
        for (double u : p.domain().grid(10)) {
            for (double v : Interval{-2.0, 2.0}.grid(10)) {
                const double scale = std::sqrt(-curvature_scalars(p, u, v).K);
                for (CurveFamily f : all_families) {
                    const FieldDirection d = direction_field(f, p, u, v);
                    const double general = normal_curvature(p, u, v, d.direction);
                    const double closed = family_normal_curvature(f, p, u, v);
                    EXPECT_LE(oracle::rel(closed, general, 1e-3 * scale), 1e-9)
                        << p.name() << " " << family_name(f) << " u=" << u << " v=" << v;
                }
            }
        }
    }
}

TEST(FamilyNormalCurvature, S3EqualsTwiceMeanCurvature)
{
    for (const InvariantProfile& p : profiles()) {
        for (double u : p.domain().grid(20)) {
            for (double v : Interval{-2.0, 2.0}.grid(20)) {
                const PointGeometry g = curvature_scalars(p, u, v);
                EXPECT_LE(oracle::rel(family_normal_curvature(CurveFamily::S3, p, u, v), 2.0 * g.H, std::sqrt(-g.K)),
                          1e-12);
            }
        }
    }
}

TEST(FamilyCurve, S1KeepsVConstant)
{
    const FamilyCurveSample c =
        integrate_family_curve(CurveFamily::S1, edlinger(-1.0, 1.0), Eigen::Vector2d(0.0, 1.0), 1.0, 1e-2);
    ASSERT_EQ(c.points.size(), 101u);
    for (const auto& p : c.points) EXPECT_EQ(p[1], 1.0);
    EXPECT_NEAR(c.points.back()[0], 1.0, 1e-12);
}

TEST(FamilyCurve, S4KeepsGaussianCurvatureConstant)
{
    const InvariantProfile quadratic = InvariantProfile::from_lambda(
        ScalarProfile::constant(0.3), ScalarProfile::expression("1+u^2"), ScalarProfile::constant(0.2),
        Interval{0.0, 1.5});
    const InvariantProfile periodic = InvariantProfile::from_lambda(
        ScalarProfile::constant(0.3), ScalarProfile::expression("1+0.2*sin(u)"), ScalarProfile::constant(0.2),
        Interval{0.0, 6.0});
    for (const InvariantProfile* p : {&quadratic, &periodic}) {
        for (double v0 : {0.5, 1.0, -1.5}) {
            const FamilyCurveSample c = integrate_family_curve(CurveFamily::S4, *p, Eigen::Vector2d(0.1, v0), 1.0, 1e-3);
            const double K0 = curvature_scalars(*p, c.points.front()[0], c.points.front()[1]).K;
            double worst = 0.0;
            for (const auto& q : c.points) {
                worst = std::max(worst, oracle::rel(curvature_scalars(*p, q[0], q[1]).K, K0, 0.0));
            }
            EXPECT_LE(worst, 1e-6) << p->name() << " v0=" << v0;
            for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
                ASSERT_LE(family_chord_residual(CurveFamily::S4, *p, c.points[i], c.points[i + 1]),
                          10.0 * c.step * c.step);
            }
        }
    }
}

TEST(FamilyCurve, EdlingerPrincipalCurvesCarryClosedFormCurvature)
{
    const InvariantProfile e = edlinger(-1.0, 1.0);
    for (CurveFamily f : {CurveFamily::Principal1, CurveFamily::Principal2}) {
        const FamilyCurveSample c = integrate_family_curve(f, e, Eigen::Vector2d(0.5, 0.3), 1.0, 1e-3);
        for (const auto& q : c.points) {
            const auto [a, b] = edlinger_principal_curvatures(e, q[0], q[1]);
            const double expected = f == CurveFamily::Principal1 ? std::max(a, b) : std::min(a, b);
            const DirectionUV d = direction_field(f, e, q[0], q[1]).direction;
            EXPECT_NEAR(normal_curvature(e, q[0], q[1], d), expected, 1e-8);
        }
        for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
            ASSERT_LE(family_chord_residual(f, e, c.points[i], c.points[i + 1]), 10.0 * c.step * c.step);
        }
    }
}

TEST(FamilyCurve, LeavingTheDomainIsReported)
{
    const InvariantProfile h = helicoid(1.0, Interval{0.0, 1.0});
    EXPECT_THROW(integrate_family_curve(CurveFamily::S1, h, Eigen::Vector2d(0.5, 0.0), 2.0, 1e-2), DomainError);
    EXPECT_THROW(integrate_family_curve(CurveFamily::S1, h, Eigen::Vector2d(0.5, 0.0), 1.0, 0.0), PreconditionError);
}
