#ifndef RULED_CLASSIFICATION_HPP
#define RULED_CLASSIFICATION_HPP

// Detection of the shape k_N = f(u) wⁿ along the curve families and the
// resulting classification of skew ruled surfaces.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ruled/error.hpp"
#include "ruled/families.hpp"
#include "ruled/format.hpp"
#include "ruled/profile.hpp"
#include "ruled/surface.hpp"

namespace ruled {

inline constexpr int min_exponent = -6;
inline constexpr int max_exponent = 3;
inline constexpr std::size_t exponent_count = max_exponent - min_exponent + 1;

/// Default fit tolerance for profiles given in closed form.
inline constexpr double analytic_fit_tol = 1e-8;
/// Default fit tolerance for profiles recovered from sampled geometry.
inline constexpr double extracted_fit_tol = 1e-4;

struct PowerLawFit {
    int n = 0;
    std::vector<double> u;
    std::vector<double> f;
    /// max over the grid of |k_N w⁻ⁿ − f(u)| / |f(u)| at the chosen n.
    double residual = std::numeric_limits<double>::infinity();
    bool accepted = false;
    /// The whole grid is zero: f ≡ 0, n carries no information.
    bool zero = false;
    /// Residual for every candidate exponent, index n − min_exponent.
    std::array<double, exponent_count> residual_by_exponent{};
};

namespace detail {

inline double median(std::vector<double> values)
{
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

} // namespace detail

/// Scans integer n in [−6, 3] for the best fit of k_N = f(u) wⁿ.
/// Rows of the grids correspond to `u`, columns to the v-samples.
/// A grid whose entries are all at most `zero_threshold` in magnitude is
/// reported as the f ≡ 0 fit.
inline PowerLawFit fit_power_law(const std::vector<double>& u, const Eigen::MatrixXd& kn, const Eigen::MatrixXd& w,
                                 double tol, double zero_threshold = 0.0)
{
    if (kn.rows() < 5 || kn.cols() < 5) {
        throw PreconditionError("power-law fit needs at least a 5x5 grid");
    }
    if (w.rows() != kn.rows() || w.cols() != kn.cols() || static_cast<Eigen::Index>(u.size()) != kn.rows()) {
        throw PreconditionError("power-law fit grids have mismatched shapes");
    }
    if (!kn.allFinite() || !w.allFinite() || (w.array() <= 0.0).any()) {
        throw PreconditionError("power-law fit needs finite k_N and positive finite w");
    }
    if (w.maxCoeff() < 1.01 * w.minCoeff()) {
        throw PreconditionError("w must vary across the v-samples to identify an exponent");
    }

    PowerLawFit best;
    best.u = u;
    if (kn.cwiseAbs().maxCoeff() <= zero_threshold) {
        best.zero = true;
        best.accepted = true;
        best.residual = 0.0;
        best.f.assign(u.size(), 0.0);
        best.residual_by_exponent.fill(0.0);
        return best;
    }

    const Eigen::Index rows = kn.rows();
    const Eigen::Index cols = kn.cols();
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (int n = min_exponent; n <= max_exponent; ++n) {
        std::vector<double> f(static_cast<std::size_t>(rows));
        double residual = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                row[static_cast<std::size_t>(j)] = kn(i, j) * std::pow(w(i, j), -n);
            }
            const double m = detail::median(row);
            const double scale = std::max(std::abs(m), 1e-14);
            for (double c : row) {
                residual = std::max(residual, std::abs(c - m) / scale);
            }
            f[static_cast<std::size_t>(i)] = m;
        }
        best.residual_by_exponent[static_cast<std::size_t>(n - min_exponent)] = residual;
        if (residual < best.residual) {
            best.residual = residual;
            best.n = n;
            best.f = std::move(f);
        }
    }
    best.accepted = best.residual <= tol;
    return best;
}

/// Surface classes recognized from the invariants. Several flags may hold.
struct SurfaceClass {
    bool wendelflaeche = false; ///< helicoid: k = δ' = λ = 0
    bool edlinger = false;      ///< δ' = 0, kλ + 1 = 0
    bool orthoid = false;       ///< λ = 0
    bool const_drall = false;   ///< δ' = 0
    bool konoid = false;        ///< k = 0
    bool generic_skew = false;  ///< none of the above

    /// Flag names in a fixed order.
    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        if (wendelflaeche) out.emplace_back("WENDELFLAECHE");
        if (edlinger) out.emplace_back("EDLINGER");
        if (const_drall) out.emplace_back("CONST_DRALL");
        if (orthoid) out.emplace_back("ORTHOID");
        if (konoid) out.emplace_back("KONOID");
        if (generic_skew) out.emplace_back("GENERIC_SKEW");
        return out;
    }

    /// Most specific class name; otherwise the flags joined with '+'.
    std::string label() const
    {
        if (wendelflaeche) return "WENDELFLAECHE";
        if (edlinger) return "EDLINGER";
        std::string out;
        for (const auto& n : names()) {
            out += out.empty() ? n : "+" + n;
        }
        return out;
    }

    friend bool operator==(const SurfaceClass&, const SurfaceClass&) = default;
};

/// Predicate values behind a SurfaceClass verdict.
struct InvariantClassification {
    SurfaceClass cls;
    double tol = 0.0;
    double drall_variation = 0.0; ///< max|δ'| / max|δ|
    double max_abs_lambda = 0.0;
    double max_abs_k = 0.0;
    double edlinger_defect = 0.0; ///< max|kλ + 1|
};

inline InvariantClassification classify_by_invariants(const InvariantProfile& profile,
                                                      const std::vector<double>& u_samples, double tol)
{
    if (u_samples.size() < 20) {
        throw PreconditionError("invariant classification needs at least 20 u-samples");
    }
    InvariantClassification out;
    out.tol = tol;
    double max_delta = 0.0;
    double max_delta_prime = 0.0;
    for (double u : u_samples) {
        const double k = profile.k(u);
        const double l = profile.lambda(u);
        max_delta = std::max(max_delta, std::abs(profile.delta(u)));
        max_delta_prime = std::max(max_delta_prime, std::abs(profile.delta_prime(u)));
        out.max_abs_lambda = std::max(out.max_abs_lambda, std::abs(l));
        out.max_abs_k = std::max(out.max_abs_k, std::abs(k));
        out.edlinger_defect = std::max(out.edlinger_defect, std::abs(k * l + 1.0));
    }
    out.drall_variation = max_delta_prime / max_delta;

    SurfaceClass& c = out.cls;
    c.const_drall = out.drall_variation <= tol;
    c.orthoid = out.max_abs_lambda <= tol;
    c.konoid = out.max_abs_k <= tol;
    c.edlinger = c.const_drall && out.edlinger_defect <= tol;
    c.wendelflaeche = c.orthoid && c.konoid && c.const_drall;
    c.generic_skew = !(c.const_drall || c.orthoid || c.konoid || c.edlinger);
    return out;
}

/// Families as they appear in the summary table; both curvature-line
/// branches share the PRINCIPAL rows.
enum class TableFamily { Principal, S1, S2, S3, S4 };

inline TableFamily table_family(CurveFamily f)
{
    switch (f) {
    case CurveFamily::S1: return TableFamily::S1;
    case CurveFamily::S2: return TableFamily::S2;
    case CurveFamily::S3: return TableFamily::S3;
    case CurveFamily::S4: return TableFamily::S4;
    case CurveFamily::Principal1:
    case CurveFamily::Principal2: return TableFamily::Principal;
    }
    return TableFamily::Principal;
}

inline std::string_view table_family_name(TableFamily f)
{
    switch (f) {
    case TableFamily::Principal: return "PRINCIPAL";
    case TableFamily::S1: return "S1";
    case TableFamily::S2: return "S2";
    case TableFamily::S3: return "S3";
    case TableFamily::S4: return "S4";
    }
    return "?";
}

enum class FShape { Zero, MinusK, PlusMinusDelta, DeltaSquaredOverK, MinusDeltaSquaredLambda };

inline std::string_view shape_name(FShape s)
{
    switch (s) {
    case FShape::Zero: return "0";
    case FShape::MinusK: return "-k";
    case FShape::PlusMinusDelta: return "+-delta";
    case FShape::DeltaSquaredOverK: return "delta^2/k";
    case FShape::MinusDeltaSquaredLambda: return "-delta^2*lambda";
    }
    return "?";
}

enum class SurfaceType { Wendelflaeche, Edlinger, ConstDrallOrthoidOrEdlinger, Orthoid, ConstDrallOrthoid, ConstDrallKonoid };

inline std::string_view surface_type_name(SurfaceType t)
{
    switch (t) {
    case SurfaceType::Wendelflaeche: return "Wendelflaeche";
    case SurfaceType::Edlinger: return "Edlinger-Flaeche";
    case SurfaceType::ConstDrallOrthoidOrEdlinger: return "konstant gedralltes Orthoid oder Edlinger-Flaeche";
    case SurfaceType::Orthoid: return "Orthoid";
    case SurfaceType::ConstDrallOrthoid: return "konstant gedralltes Orthoid";
    case SurfaceType::ConstDrallKonoid: return "konstant gedralltes Konoid";
    }
    return "?";
}

inline bool satisfies(SurfaceType t, const SurfaceClass& c)
{
    switch (t) {
    case SurfaceType::Wendelflaeche: return c.wendelflaeche;
    case SurfaceType::Edlinger: return c.edlinger;
    case SurfaceType::ConstDrallOrthoidOrEdlinger: return (c.const_drall && c.orthoid) || c.edlinger;
    case SurfaceType::Orthoid: return c.orthoid;
    case SurfaceType::ConstDrallOrthoid: return c.const_drall && c.orthoid;
    case SurfaceType::ConstDrallKonoid: return c.const_drall && c.konoid;
    }
    return false;
}

/// One row of the summary table. `n` is empty for the f ≡ 0 rows.
struct TableRow {
    TableFamily family;
    std::optional<int> n;
    FShape shape;
    SurfaceType type;
};

inline constexpr std::array<TableRow, 12> theorem_table{{
    {TableFamily::Principal, -1, FShape::MinusK, SurfaceType::Edlinger},
    {TableFamily::Principal, -2, FShape::PlusMinusDelta, SurfaceType::Wendelflaeche},
    {TableFamily::Principal, -3, FShape::DeltaSquaredOverK, SurfaceType::Edlinger},
    {TableFamily::S1, std::nullopt, FShape::Zero, SurfaceType::Wendelflaeche},
    {TableFamily::S1, -1, FShape::MinusK, SurfaceType::ConstDrallOrthoidOrEdlinger},
    {TableFamily::S2, std::nullopt, FShape::Zero, SurfaceType::Orthoid},
    {TableFamily::S2, -3, FShape::DeltaSquaredOverK, SurfaceType::Edlinger},
    {TableFamily::S3, std::nullopt, FShape::Zero, SurfaceType::Wendelflaeche},
    {TableFamily::S3, -1, FShape::MinusK, SurfaceType::ConstDrallOrthoid},
    {TableFamily::S3, -3, FShape::MinusDeltaSquaredLambda, SurfaceType::ConstDrallKonoid},
    {TableFamily::S4, std::nullopt, FShape::Zero, SurfaceType::Wendelflaeche},
    {TableFamily::S4, -1, FShape::MinusK, SurfaceType::ConstDrallOrthoidOrEdlinger},
}};

inline std::size_t row_index(const TableRow& row) { return static_cast<std::size_t>(&row - theorem_table.data()); }

inline std::string describe_row(const TableRow& row)
{
    std::string out(table_family_name(row.family));
    out += row.n ? " n=" + std::to_string(*row.n) : std::string(" f=0");
    if (row.n) {
        out += " f=";
        out += shape_name(row.shape);
    }
    out += " -> ";
    out += surface_type_name(row.type);
    return out;
}

/// Which rows of the table a class must reproduce. Helicoids collapse every
/// −k row to the f ≡ 0 row.
inline bool row_expected(const TableRow& row, const SurfaceClass& c)
{
    if (c.wendelflaeche) {
        return !row.n.has_value() || row.type == SurfaceType::Wendelflaeche;
    }
    return row.type != SurfaceType::Wendelflaeche && satisfies(row.type, c);
}

struct RowMatch {
    const TableRow* row = nullptr;
    bool shape_match = false;
    /// max_i |f_i − shape(u_i)| / max_i |shape(u_i)|.
    double shape_residual = 0.0;
};

namespace detail {

inline double shape_value(FShape shape, const InvariantProfile& p, double u, double sign = 1.0)
{
    switch (shape) {
    case FShape::Zero: return 0.0;
    case FShape::MinusK: return -p.k(u);
    case FShape::PlusMinusDelta: return sign * p.delta(u);
    case FShape::DeltaSquaredOverK: {
        const double d = p.delta(u);
        return d * d / p.k(u);
    }
    case FShape::MinusDeltaSquaredLambda: {
        const double d = p.delta(u);
        return -d * d * p.lambda(u);
    }
    }
    return 0.0;
}

inline double shape_residual(FShape shape, const PowerLawFit& fit, const InvariantProfile& p, double sign)
{
    double scale = 1e-14;
    double worst = 0.0;
    for (std::size_t i = 0; i < fit.u.size(); ++i) {
        const double expected = shape_value(shape, p, fit.u[i], sign);
        if (!std::isfinite(expected)) {
            return std::numeric_limits<double>::infinity();
        }
        scale = std::max(scale, std::abs(expected));
        worst = std::max(worst, std::abs(fit.f[i] - expected));
    }
    return worst / scale;
}

} // namespace detail

/// Table rows whose family and exponent match the fit, each with its f-shape check.
inline std::vector<RowMatch> theorem_table_lookup(CurveFamily family, const PowerLawFit& fit,
                                                  const InvariantProfile& profile, double tol)
{
    std::vector<RowMatch> out;
    if (!fit.accepted) {
        return out;
    }
    const TableFamily tf = table_family(family);
    for (const TableRow& row : theorem_table) {
        if (row.family != tf) {
            continue;
        }
        if (fit.zero) {
            if (!row.n) {
                out.push_back({&row, true, 0.0});
            }
            continue;
        }
        if (!row.n || *row.n != fit.n) {
            continue;
        }
        double residual = 0.0;
        try {
            residual = detail::shape_residual(row.shape, fit, profile, 1.0);
            if (row.shape == FShape::PlusMinusDelta) {
                residual = std::min(residual, detail::shape_residual(row.shape, fit, profile, -1.0));
            }
        } catch (const Error&) {
            residual = std::numeric_limits<double>::infinity();
        }
        out.push_back({&row, residual <= tol, residual});
    }
    return out;
}

struct CorollaryResult {
    bool holds = false;
    /// max over the grid of |δ² k₁³ + k⁴ k₂| / scale for the chosen index assignment.
    double residual = 0.0;
    /// Residual with k₁ the larger (index 0) or the smaller (index 1) principal curvature.
    std::array<double, 2> residual_by_assignment{};
    /// true when k₁ is the larger principal curvature.
    bool k1_is_larger = true;
    double witness_u = 0.0;
    double witness_v = 0.0;
};

/// Tests δ² k₁³ + k⁴ k₂ = 0 on the grid under both index assignments and
/// reports the better one.
inline CorollaryResult check_corollary2(const InvariantProfile& profile, const std::vector<double>& u_samples,
                                        const std::vector<double>& v_samples, double tol)
{
    for (double u : u_samples) {
        if (profile.k(u) == 0.0) {
            throw PreconditionError("conical curvature vanishes at u=" + format_double(u) +
                                    "; the principal-curvature relation is trivial there");
        }
    }
    CorollaryResult out;
    std::array<double, 2> worst{0.0, 0.0};
    std::array<std::pair<double, double>, 2> witness{};
    for (double u : u_samples) {
        const double k = profile.k(u);
        const double d2 = profile.delta(u) * profile.delta(u);
        const double k4 = k * k * k * k;
        for (double v : v_samples) {
            const PointGeometry p = curvature_scalars(profile, u, v);
            const std::array<std::pair<double, double>, 2> assignments{{{p.k1, p.k2}, {p.k2, p.k1}}};
            for (std::size_t a = 0; a < 2; ++a) {
                const auto [c1, c2] = assignments[a];
                const double lhs = d2 * c1 * c1 * c1;
                const double rhs = k4 * c2;
                const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-14});
                const double r = std::abs(lhs + rhs) / scale;
                if (r > worst[a]) {
                    worst[a] = r;
                    witness[a] = {u, v};
                }
            }
        }
    }
    out.residual_by_assignment = worst;
    const std::size_t best = worst[0] <= worst[1] ? 0 : 1;
    out.k1_is_larger = best == 0;
    out.residual = worst[best];
    out.witness_u = witness[best].first;
    out.witness_v = witness[best].second;
    out.holds = out.residual <= tol;
    return out;
}

/// Sample points used by verify_surface.
struct SampleGrid {
    std::vector<double> u;
    std::vector<double> v;

    static SampleGrid uniform(const Interval& u_range, std::size_t nu, const Interval& v_range, std::size_t nv)
    {
        return SampleGrid{u_range.grid(nu), v_range.grid(nv)};
    }
};

struct FamilyReport {
    CurveFamily family = CurveFamily::S1;
    PowerLawFit fit;
    std::vector<RowMatch> rows;
};

struct ClassificationReport {
    double tol = 0.0;
    InvariantClassification invariants;
    std::vector<FamilyReport> families;
    std::optional<CorollaryResult> corollary;
    std::string corollary_note;
    /// Rows reproduced by a fit with matching f-shape, in table order.
    std::vector<const TableRow*> matched_rows;
    /// Rows the invariant classes call for, in table order.
    std::vector<const TableRow*> expected_rows;
    /// Human-readable disagreements between fits and invariant predicates.
    std::vector<std::string> disagreements;
    /// Accepted non-zero fits that correspond to no row of the table.
    std::vector<std::string> outside_table;

    bool consistent() const { return disagreements.empty(); }

    const FamilyReport& family(CurveFamily f) const
    {
        for (const auto& r : families) {
            if (r.family == f) {
                return r;
            }
        }
        throw PreconditionError("family missing from report");
    }

    bool has_row(TableFamily f, std::optional<int> n) const
    {
        return std::any_of(matched_rows.begin(), matched_rows.end(),
                           [&](const TableRow* r) { return r->family == f && r->n == n; });
    }
};

/// k_N grid of one family over (u_i, v_j) together with w.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> family_grid(CurveFamily family, const InvariantProfile& profile,
                                                               const SampleGrid& grid)
{
    const auto rows = static_cast<Eigen::Index>(grid.u.size());
    const auto cols = static_cast<Eigen::Index>(grid.v.size());
    Eigen::MatrixXd kn(rows, cols);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double u = grid.u[static_cast<std::size_t>(i)];
        const double d = profile.delta(u);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = grid.v[static_cast<std::size_t>(j)];
            kn(i, j) = family_normal_curvature(family, profile, u, v);
            w(i, j) = std::sqrt(v * v + d * d);
        }
    }
    return {kn, w};
}

/// Runs every family fit, the table lookup, the invariant predicates and the
/// corollary, and cross-checks them against each other.
inline ClassificationReport verify_surface(const InvariantProfile& profile, const SampleGrid& grid, double tol)
{
    ClassificationReport report;
    report.tol = tol;
    report.invariants = classify_by_invariants(profile, grid.u, tol);
    const SurfaceClass& cls = report.invariants.cls;

    // f ≡ 0 threshold relative to the curvature scale √|K| of the grid.
    double curvature_scale = 0.0;
    for (double u : grid.u) {
        for (double v : grid.v) {
            curvature_scale = std::max(curvature_scale, std::sqrt(std::abs(curvature_scalars(profile, u, v).K)));
        }
    }
    const double zero_threshold = tol * curvature_scale;

    std::array<bool, theorem_table.size()> matched{};
    for (CurveFamily family : all_families) {
        FamilyReport fr;
        fr.family = family;
        const auto [kn, w] = family_grid(family, profile, grid);
        fr.fit = fit_power_law(grid.u, kn, w, tol, zero_threshold);
        fr.rows = theorem_table_lookup(family, fr.fit, profile, tol);
        bool any = false;
        for (const RowMatch& m : fr.rows) {
            if (m.shape_match) {
                matched[row_index(*m.row)] = true;
                any = true;
            }
        }
        if (fr.fit.accepted && !fr.fit.zero && !any) {
            report.outside_table.push_back(std::string(family_name(family)) + " n=" + std::to_string(fr.fit.n) +
                                           " has no matching table row");
        }
        report.families.push_back(std::move(fr));
    }
    if (std::none_of(report.families.begin(), report.families.end(),
                     [](const FamilyReport& f) { return f.fit.accepted; })) {
        report.outside_table.emplace_back("no family has the shape f(u) w^n: outside table");
    }

    for (const TableRow& row : theorem_table) {
        const bool is_matched = matched[row_index(row)];
        const bool is_expected = row_expected(row, cls);
        if (is_matched) report.matched_rows.push_back(&row);
        if (is_expected) report.expected_rows.push_back(&row);
        if (is_matched && !satisfies(row.type, cls)) {
            report.disagreements.push_back("fit reproduces '" + describe_row(row) +
                                           "' but the invariants do not satisfy its class");
        } else if (is_matched && !is_expected) {
            report.disagreements.push_back("fit reproduces '" + describe_row(row) + "' which the class does not call for");
        } else if (!is_matched && is_expected) {
            report.disagreements.push_back("class calls for '" + describe_row(row) + "' but no fit reproduces it");
        }
    }

    const bool k_vanishes = std::any_of(grid.u.begin(), grid.u.end(), [&](double u) { return profile.k(u) == 0.0; });
    if (k_vanishes) {
        report.corollary_note = "skipped: conical curvature vanishes on the grid";
    } else {
        report.corollary = check_corollary2(profile, grid.u, grid.v, tol);
        const bool holds = report.corollary->holds;
        report.corollary_note = holds ? "relation holds" : "relation fails";
        if (holds && !cls.edlinger) {
            report.disagreements.emplace_back("principal-curvature relation holds but the surface is not Edlinger");
        }
        if (!holds && cls.edlinger) {
            report.disagreements.emplace_back("Edlinger surface violates the principal-curvature relation");
        }
    }
    return report;
}

} // namespace ruled

#endif // RULED_CLASSIFICATION_HPP
