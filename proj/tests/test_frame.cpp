#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ruled/frame.hpp"

using namespace ruled;

namespace {

std::vector<InvariantProfile> builtins(Interval d = default_builtin_domain)
{
    return {helicoid(1.0, d), edlinger(-1.0, 1.0, d), const_drall_orthoid(ScalarProfile::constant(0.7), 1.0, d),
            const_drall_conoid(ScalarProfile::constant(1.0), 1.0, d)};
}

double max_relative_invariant_error(const InvariantProfile& original, const StandardForm& sf)
{
    double delta_scale = 0.0;
    for (double u : sf.raw_parameter) delta_scale = std::max(delta_scale, std::abs(original.delta(u)));
    double worst = 0.0;
    for (std::size_t i = 0; i < sf.raw_parameter.size(); ++i) {
        const double u = sf.raw_parameter[i];
        const double t = sf.striction[i].u;
        worst = std::max({worst, oracle::rel(sf.profile.k(t), original.k(u), 1.0),
                          oracle::rel(sf.profile.delta(t), original.delta(u), delta_scale),
                          oracle::rel(sf.profile.lambda(t), original.lambda(u), 1.0)});
    }
    return worst;
}

} // namespace

TEST(Frame, PlanarRotationForVanishingCurvature)
{
    const InvariantProfile p = helicoid(1.0, Interval{0.0, 2.0});
    FrameState f = FrameState::canonical(0.0);
    const int steps = 1571;
    const double h = (std::numbers::pi / 2.0) / steps;
    for (int i = 0; i < steps; ++i) f = advance_frame(f, p, h);
    EXPECT_LT((f.e - Vec3(0, 1, 0)).norm(), 1e-8);
    EXPECT_LT((f.n - Vec3(-1, 0, 0)).norm(), 1e-8);
    EXPECT_LT((f.z - Vec3(0, 0, 1)).norm(), 1e-8);
}

TEST(Frame, ZeroStepIsIdentity)
{
    const InvariantProfile p = edlinger(-1.0, 1.0);
    FrameState f = FrameState::canonical(1.0);
    f.e = Vec3(0.6, 0.8, 0.0);
    f.n = Vec3(-0.8, 0.6, 0.0);
    const FrameState g = advance_frame(f, p, 0.0);
    EXPECT_EQ(g.e, f.e);
    EXPECT_EQ(g.n, f.n);
    EXPECT_EQ(g.z, f.z);
}

TEST(Frame, AngularVelocityIsFixedForConstantCurvature)
{
    const InvariantProfile p = const_drall_orthoid(ScalarProfile::constant(1.0), 1.0, Interval{0.0, 10.0});
    FrameState f = FrameState::canonical(0.0);
    const Vec3 axis = (Vec3(1, 0, 0) + Vec3(0, 0, 1)) / std::sqrt(2.0);
    for (int i = 0; i < 10000; ++i) {
        f = advance_frame(f, p, 1e-3);
        ASSERT_NEAR(f.e.dot(axis), 1.0 / std::sqrt(2.0), 1e-8);
    }
}

TEST(Frame, DefectsStayWithinBoundsOverLongIntegration)
{
    for (const InvariantProfile& p : builtins(Interval{0.0, 20.0})) {
        const StrictionCurve c = integrate_striction_frame(p, 0.0, 20.0, 1e-3);
        EXPECT_LE(c.max_defect_before, 1e-9) << p.name();
        EXPECT_LE(c.max_defect_after, 1e-15) << p.name();
        EXPECT_EQ(c.size(), 20001u);
    }
}

TEST(Frame, HelicoidStrictionLineIsAxis)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const StrictionCurve c = integrate_striction_frame(helicoid(1.0), 0.0, two_pi, 1e-3);
    EXPECT_LT((c[c.size() - 1].s - c[0].s - Vec3(0, 0, two_pi)).norm(), 1e-6);
    EXPECT_EQ(c.u_max(), two_pi);
}

TEST(Frame, EmptyIntervalGivesOneSample)
{
    const StrictionCurve c = integrate_striction_frame(helicoid(1.0), 1.0, 1.0, 1e-3);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].s, Vec3::Zero());
}

TEST(Frame, StrictionTangentIsOrthogonalToCentralNormal)
{
    for (const InvariantProfile& p : builtins()) {
        const StrictionCurve c = integrate_striction_frame(p, p.domain().lo, p.domain().hi, 1e-3);
        const double h = c.step();
        EXPECT_LE(c.max_tangent_normal_residual(), 10.0 * h * h) << p.name();
    }
}

TEST(Frame, MatchesIndependentIntegrator)
{
    for (const InvariantProfile& p : builtins()) {
        const StrictionCurve c = integrate_striction_frame(p, p.domain().lo, p.domain().hi, 1e-3);
        const oracle::Embedding ref(p);
        for (std::size_t i = 0; i < c.size(); i += 1000) {
            const auto f = ref.frame(c[i].u);
            EXPECT_LT((c[i].s - f[0]).norm(), 1e-10) << p.name() << " u=" << c[i].u;
            EXPECT_LT((c[i].frame.e - f[1]).norm(), 1e-10) << p.name();
            EXPECT_LT((c[i].frame.z - f[3]).norm(), 1e-10) << p.name();
        }
    }
}

TEST(Frame, FourthOrderConvergence)
{
    const InvariantProfile p = InvariantProfile::from_lambda(
        ScalarProfile::expression("0.8*cos(u)"), ScalarProfile::expression("1 + 0.3*sin(u)"),
        ScalarProfile::expression("0.4 + 0.2*cos(2*u)"), Interval{0.0, 4.0});
    auto end = [&](double h) { return integrate_striction_frame(p, 0.0, 4.0, h).samples().back().s; };
    const double h = 0.05;
    const Vec3 reference = end(h / 8.0);
    const double ratio = (end(h) - reference).norm() / (end(h / 2.0) - reference).norm();
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(Frame, OutsideDomainIsRejected)
{
    const InvariantProfile p = helicoid(1.0, Interval{0.0, 1.0});
    EXPECT_THROW(integrate_striction_frame(p, 0.0, 2.0, 1e-3), DomainError);
    EXPECT_THROW(integrate_striction_frame(p, 0.0, 1.0, 0.0), PreconditionError);
}

TEST(Extraction, HelicoidFromRawMap)
{
    const RawRuledMap raw{VectorProfile::expressions("0", "0", "u"), VectorProfile::expressions("cos(u)", "sin(u)", "0"),
                          Interval{0.0, 6.0}};
    const StandardForm sf = extract_standard_form(raw);
    for (std::size_t i = 0; i < sf.raw_parameter.size(); i += 64) {
        const double t = sf.striction[i].u;
        EXPECT_NEAR(sf.profile.k(t), 0.0, 1e-9);
        EXPECT_NEAR(sf.profile.delta(t), 1.0, 1e-9);
        EXPECT_EQ(sf.profile.lambda(t), 0.0);
        EXPECT_NEAR(t, sf.raw_parameter[i], 1e-9);
        EXPECT_LT((sf.striction[i].s - Vec3(0, 0, sf.raw_parameter[i])).norm(), 1e-9);
    }
}

TEST(Extraction, ScaledDirectionGivesSameInvariants)
{
    const RawRuledMap a{VectorProfile::expressions("cos(u)", "sin(u)", "0.5*u"),
                        VectorProfile::expressions("cos(u)", "sin(u)", "0.3"), Interval{0.0, 5.0}};
    const RawRuledMap b{VectorProfile::expressions("cos(u)", "sin(u)", "0.5*u"),
                        VectorProfile::expressions("5*cos(u)", "5*sin(u)", "1.5"), Interval{0.0, 5.0}};
    const StandardForm sa = extract_standard_form(a);
    const StandardForm sb = extract_standard_form(b);
    for (std::size_t i = 0; i < sa.raw_parameter.size(); i += 50) {
        const double t = sa.striction[i].u;
        EXPECT_NEAR(sa.profile.k(t), sb.profile.k(t), 1e-12);
        EXPECT_NEAR(sa.profile.delta(t), sb.profile.delta(t), 1e-12);
        EXPECT_NEAR(sa.profile.lambda(t), sb.profile.lambda(t), 1e-12);
    }
}

TEST(Extraction, ReparametrizationInsensitive)
{
    // Same surface with u -> u^2 / 4 on the raw side.
    const RawRuledMap a{VectorProfile::expressions("0", "0", "u"), VectorProfile::expressions("cos(u)", "sin(u)", "0.2"),
                        Interval{1.0, 4.0}};
    const RawRuledMap b{VectorProfile::expressions("0", "0", "u^2/4"),
                        VectorProfile::expressions("cos(u^2/4)", "sin(u^2/4)", "0.2"), Interval{2.0, 4.0}};
    const StandardForm sa = extract_standard_form(a);
    const StandardForm sb = extract_standard_form(b);
    const double ka = sa.profile.k(sa.striction[500].u);
    const double kb = sb.profile.k(sb.striction[500].u);
    EXPECT_NEAR(ka, kb, 1e-8);
    EXPECT_NEAR(sa.profile.lambda(sa.striction[500].u), sb.profile.lambda(sb.striction[500].u), 1e-8);
}

TEST(Extraction, TorsalSurfaceIsRejected)
{
    // A cone: every generator passes through the origin.
    const RawRuledMap cone{VectorProfile::expressions("0", "0", "0"), VectorProfile::expressions("cos(u)", "sin(u)", "1"),
                           Interval{0.0, 3.0}};
    EXPECT_THROW(extract_standard_form(cone), InvariantViolation);
}

TEST(Extraction, RoundTripForEveryBuiltin)
{
    for (const InvariantProfile& p : builtins()) {
        const StrictionCurve c = integrate_striction_frame(p, p.domain().lo, p.domain().hi, 1e-3);
        const StandardForm sf = extract_standard_form(raw_map_from_striction(c));
        EXPECT_LE(max_relative_invariant_error(p, sf), 1e-6) << p.name();
        EXPECT_LE(sf.striction.max_tangent_normal_residual(), 10.0 * sf.striction.step() * sf.striction.step())
            << p.name();
    }
}

TEST(Extraction, StandardFormInputIsIdentityReparametrization)
{
    const InvariantProfile p = edlinger(-1.0, 1.0);
    const StrictionCurve c = integrate_striction_frame(p, 0.0, p.domain().hi, 1e-3);
    const StandardForm sf = extract_standard_form(raw_map_from_striction(c));
    for (std::size_t i = 0; i < sf.raw_parameter.size(); ++i) {
        EXPECT_NEAR(sf.striction[i].u, sf.raw_parameter[i], 1e-9);
    }
}
