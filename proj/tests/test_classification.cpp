#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ruled/classification.hpp"

using namespace ruled;

namespace {

const std::vector<double> five_v{0.0, 0.5, 1.0, 1.5, 2.0};

// Grid of an arbitrary per-point quantity, with w from the profile.
template <class F>
PowerLawFit fit_quantity(const InvariantProfile& p, const std::vector<double>& us, const std::vector<double>& vs,
                         F&& value, double tol = analytic_fit_tol)
{
    Eigen::MatrixXd kn(static_cast<Eigen::Index>(us.size()), static_cast<Eigen::Index>(vs.size()));
    Eigen::MatrixXd w(kn.rows(), kn.cols());
    for (std::size_t i = 0; i < us.size(); ++i) {
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
            kn(r, c) = value(us[i], vs[j]);
            w(r, c) = std::hypot(vs[j], p.delta(us[i]));
        }
    }
    return fit_power_law(us, kn, w, tol);
}

SampleGrid standard_grid(const InvariantProfile& p) { return SampleGrid::uniform(p.domain(), 20, {-2.0, 2.0}, 9); }

std::vector<std::size_t> indices(const std::vector<const TableRow*>& rows)
{
    std::vector<std::size_t> out;
    for (const TableRow* r : rows) out.push_back(row_index(*r));
    return out;
}

} // namespace

TEST(PowerLawFit, EdlingerS1)
{
    const InvariantProfile e = edlinger(-1.0, 1.0);
    const PowerLawFit fit = fit_quantity(e, Interval{0.0, 6.0}.grid(5), five_v, [&](double u, double v) {
        return family_normal_curvature(CurveFamily::S1, e, u, v);
    });
    EXPECT_EQ(fit.n, -1);
    EXPECT_TRUE(fit.accepted);
    EXPECT_FALSE(fit.zero);
    EXPECT_LE(fit.residual, 1e-10);
    for (double f : fit.f) EXPECT_NEAR(f, 1.0, 1e-12);
}

TEST(PowerLawFit, HelicoidPrincipal)
{
    const InvariantProfile h = helicoid(1.0);
    const PowerLawFit fit = fit_quantity(h, Interval{0.0, 6.0}.grid(5), five_v,
                                         [&](double u, double v) { return curvature_scalars(h, u, v).k1; });
    EXPECT_EQ(fit.n, -2);
    EXPECT_LE(fit.residual, 1e-10);
    for (double f : fit.f) EXPECT_NEAR(f, 1.0, 1e-12);
}

TEST(PowerLawFit, ZeroGridIsFlagged)
{
    const InvariantProfile h = helicoid(1.0);
    const PowerLawFit fit = fit_quantity(h, Interval{0.0, 6.0}.grid(5), five_v, [&](double u, double v) {
        return family_normal_curvature(CurveFamily::S3, h, u, v);
    });
    EXPECT_TRUE(fit.zero);
    EXPECT_TRUE(fit.accepted);
    for (double f : fit.f) EXPECT_EQ(f, 0.0);
}

TEST(PowerLawFit, RejectsBadGrids)
{
    const std::vector<double> u4{0, 1, 2, 3};
    EXPECT_THROW(fit_power_law(u4, Eigen::MatrixXd::Ones(4, 5), Eigen::MatrixXd::Ones(4, 5), 1e-8), PreconditionError);
    const std::vector<double> u5{0, 1, 2, 3, 4};
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(5, 5, 2.0);
    EXPECT_THROW(fit_power_law(u5, Eigen::MatrixXd::Ones(5, 5), w, 1e-8), PreconditionError);
    w(0, 0) = 1.0;
    Eigen::MatrixXd kn = Eigen::MatrixXd::Ones(5, 5);
    kn(2, 2) = std::nan("");
    EXPECT_THROW(fit_power_law(u5, kn, w, 1e-8), PreconditionError);
}

TEST(PowerLawFitProperty, SyntheticGridsAreRecoveredExactly)
{
    std::mt19937_64 rng(11);
    for (int n = -5; n <= 2; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const oracle::PowerLawGrid g = oracle::power_law_grid(n, rng);
            ASSERT_GE(g.w.maxCoeff() / g.w.minCoeff(), 10.0);
            const PowerLawFit fit = fit_power_law(g.u, g.kn, g.w, analytic_fit_tol);
            ASSERT_EQ(fit.n, n);
            EXPECT_TRUE(fit.accepted);
            EXPECT_LE(fit.residual, 1e-12);
            for (std::size_t i = 0; i < g.f.size(); ++i) {
                EXPECT_LE(oracle::rel(fit.f[i], g.f[i], 0.0), 1e-12);
            }
            const double at_true = std::max(fit.residual_by_exponent[static_cast<std::size_t>(n - min_exponent)], 1e-16);
            for (int m = min_exponent; m <= max_exponent; ++m) {
                if (m != n) {
                    EXPECT_GE(fit.residual_by_exponent[static_cast<std::size_t>(m - min_exponent)], 1e3 * at_true)
                        << "n=" << n << " m=" << m;
                }
            }
        }
    }
}

TEST(ClassifyByInvariants, Builtins)
{
    const std::vector<double> us = default_builtin_domain.grid(40);
    EXPECT_EQ(classify_by_invariants(helicoid(1.0), us, 1e-9).cls.names(),
              (std::vector<std::string>{"WENDELFLAECHE", "CONST_DRALL", "ORTHOID", "KONOID"}));
    EXPECT_EQ(classify_by_invariants(edlinger(-1.0, 1.0), us, 1e-9).cls.names(),
              (std::vector<std::string>{"EDLINGER", "CONST_DRALL"}));
    EXPECT_EQ(classify_by_invariants(const_drall_orthoid(ScalarProfile::constant(0.7), 1.0), us, 1e-9).cls.label(),
              "CONST_DRALL+ORTHOID");
    EXPECT_EQ(classify_by_invariants(const_drall_conoid(ScalarProfile::constant(1.0), 1.0), us, 1e-9).cls.label(),
              "CONST_DRALL+KONOID");
    const InvariantProfile generic = InvariantProfile::from_lambda(
        ScalarProfile::constant(0.3), ScalarProfile::expression("1+0.1*sin(u)"), ScalarProfile::constant(0.2),
        default_builtin_domain);
    EXPECT_EQ(classify_by_invariants(generic, us, 1e-9).cls.names(), std::vector<std::string>{"GENERIC_SKEW"});
    EXPECT_THROW(classify_by_invariants(generic, Interval{0.0, 1.0}.grid(19), 1e-9), PreconditionError);
}

TEST(TheoremTable, Lookups)
{
    auto rows_for = [](CurveFamily f, const InvariantProfile& p) {
        const auto [kn, w] = family_grid(f, p, standard_grid(p));
        const PowerLawFit fit = fit_power_law(standard_grid(p).u, kn, w, analytic_fit_tol, 1e-12);
        std::vector<std::string> out;
        for (const RowMatch& m : theorem_table_lookup(f, fit, p, analytic_fit_tol)) {
            if (m.shape_match) out.push_back(std::string(surface_type_name(m.row->type)));
        }
        return out;
    };
    EXPECT_EQ(rows_for(CurveFamily::Principal1, helicoid(1.0)), std::vector<std::string>{"Wendelflaeche"});
    EXPECT_EQ(rows_for(CurveFamily::Principal2, helicoid(1.0)), std::vector<std::string>{"Wendelflaeche"});
    EXPECT_EQ(rows_for(CurveFamily::S2, edlinger(-1.0, 1.0)), std::vector<std::string>{"Edlinger-Flaeche"});
    EXPECT_EQ(rows_for(CurveFamily::S1, helicoid(1.0)), std::vector<std::string>{"Wendelflaeche"});
    EXPECT_EQ(rows_for(CurveFamily::S3, const_drall_orthoid(ScalarProfile::constant(0.7), 1.0)),
              std::vector<std::string>{"konstant gedralltes Orthoid"});
}

TEST(TheoremTable, ShapeMismatchIsReported)
{
    // S1 with n = -1 but f = -k + 0.1 matches no row shape.
    const InvariantProfile e = edlinger(-1.0, 1.0);
    const SampleGrid grid = standard_grid(e);
    const PowerLawFit fit = fit_quantity(e, grid.u, grid.v, [&](double u, double v) {
        return 1.1 / std::hypot(v, e.delta(u));
    });
    ASSERT_EQ(fit.n, -1);
    const auto rows = theorem_table_lookup(CurveFamily::S1, fit, e, analytic_fit_tol);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_FALSE(rows[0].shape_match);
    // Deviation 0.1 relative to max|f| = 1 of the expected shape.
    EXPECT_NEAR(rows[0].shape_residual, 0.1, 1e-12);
}

TEST(Corollary, HoldsOnEdlinger)
{
    const InvariantProfile e = edlinger(-1.0, 1.0);
    const std::vector<double> us = e.domain().grid(20);
    const std::vector<double> vs = Interval{-2.0, 2.0}.grid(20);
    const CorollaryResult r = check_corollary2(e, us, vs, 1e-10);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.residual, 1e-12);
    EXPECT_TRUE(check_corollary2(e, us, vs, 1e-11).holds);
    EXPECT_EQ(check_corollary2(e, us, vs, 1e-11).residual, r.residual);

    const double rt2 = std::sqrt(2.0);
    const double k1 = 1.0 / rt2, k2 = -1.0 / (2.0 * rt2);
    EXPECT_NEAR(k1 * k1 * k1 + k2, 0.0, 1e-16);
}

TEST(Corollary, FailsOnNonEdlingerWitness)
{
    const InvariantProfile p = const_drall_orthoid(ScalarProfile::constant(1.0), 1.0);
    const CorollaryResult r = check_corollary2(p, p.domain().grid(20), Interval{-2.0, 2.0}.grid(20), 1e-10);
    EXPECT_FALSE(r.holds);
    EXPECT_GT(r.residual, 0.1);
    EXPECT_GT(r.residual_by_assignment[0], 0.1);
    EXPECT_GT(r.residual_by_assignment[1], 0.1);
}

TEST(Corollary, RequiresNonzeroConicalCurvature)
{
    const InvariantProfile h = helicoid(1.0);
    EXPECT_THROW(check_corollary2(h, {1.0}, {1.0}, 1e-10), PreconditionError);
}

TEST(VerifySurface, BuiltinsReproduceExactlyTheirTableRows)
{
    for (const InvariantProfile& p : {helicoid(1.0), edlinger(-1.0, 1.0),
                                      const_drall_orthoid(ScalarProfile::constant(0.7), 1.0),
                                      const_drall_conoid(ScalarProfile::constant(1.0), 1.0)}) {
        const ClassificationReport r = verify_surface(p, standard_grid(p), analytic_fit_tol);
        EXPECT_TRUE(r.consistent()) << p.name() << ": " << (r.disagreements.empty() ? "" : r.disagreements[0]);
        EXPECT_EQ(indices(r.matched_rows), indices(r.expected_rows)) << p.name();
        EXPECT_FALSE(r.matched_rows.empty()) << p.name();
        EXPECT_TRUE(r.outside_table.empty()) << p.name();
    }
}

TEST(VerifySurface, EdlingerReport)
{
    const InvariantProfile e = edlinger(-1.0, 1.0);
    const ClassificationReport r = verify_surface(e, standard_grid(e), analytic_fit_tol);
    EXPECT_EQ(r.invariants.cls.label(), "EDLINGER");
    EXPECT_TRUE(r.has_row(TableFamily::Principal, -1));
    EXPECT_TRUE(r.has_row(TableFamily::Principal, -3));
    EXPECT_TRUE(r.has_row(TableFamily::S1, -1));
    EXPECT_TRUE(r.has_row(TableFamily::S2, -3));
    EXPECT_FALSE(r.has_row(TableFamily::Principal, -2));
    ASSERT_TRUE(r.corollary.has_value());
    EXPECT_TRUE(r.corollary->holds);
    const PowerLawFit& s2 = r.family(CurveFamily::S2).fit;
    EXPECT_EQ(s2.n, -3);
    for (double f : s2.f) EXPECT_NEAR(f, -1.0, 1e-12);
}

TEST(VerifySurface, HelicoidReport)
{
    const InvariantProfile h = helicoid(1.0);
    const ClassificationReport r = verify_surface(h, standard_grid(h), analytic_fit_tol);
    EXPECT_EQ(r.invariants.cls.label(), "WENDELFLAECHE");
    EXPECT_EQ(r.family(CurveFamily::Principal1).fit.n, -2);
    EXPECT_TRUE(r.family(CurveFamily::S1).fit.zero);
    EXPECT_TRUE(r.family(CurveFamily::S3).fit.zero);
    EXPECT_TRUE(r.family(CurveFamily::S4).fit.zero);
    EXPECT_FALSE(r.corollary.has_value());
}

TEST(VerifySurface, GenericProfileIsOutsideTable)
{
    const InvariantProfile g = InvariantProfile::from_lambda(
        ScalarProfile::constant(0.3), ScalarProfile::expression("1+0.1*sin(u)"), ScalarProfile::constant(0.2),
        default_builtin_domain);
    const ClassificationReport r = verify_surface(g, standard_grid(g), analytic_fit_tol);
    EXPECT_EQ(r.invariants.cls.label(), "GENERIC_SKEW");
    EXPECT_TRUE(r.matched_rows.empty());
    EXPECT_TRUE(r.expected_rows.empty());
    EXPECT_FALSE(r.outside_table.empty());
    for (const FamilyReport& f : r.families) EXPECT_FALSE(f.fit.accepted) << family_name(f.family);
}

TEST(VerifySurface, PerturbedEdlingerIsRejected)
{
    // λ = −1/k + 0.05 with k = −1.
    const InvariantProfile p = InvariantProfile::from_lambda(ScalarProfile::constant(-1.0), ScalarProfile::constant(1.0),
                                                             ScalarProfile::constant(1.05), default_builtin_domain);
    const ClassificationReport r = verify_surface(p, standard_grid(p), analytic_fit_tol);
    EXPECT_FALSE(r.invariants.cls.edlinger);
    EXPECT_FALSE(r.has_row(TableFamily::S2, -3));
    EXPECT_GT(r.family(CurveFamily::S2).fit.residual_by_exponent[static_cast<std::size_t>(-3 - min_exponent)], 1e-3);
    ASSERT_TRUE(r.corollary.has_value());
    EXPECT_FALSE(r.corollary->holds);
}
