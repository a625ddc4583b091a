#ifndef RULED_COMMANDS_HPP
#define RULED_COMMANDS_HPP

// The four command-line verbs as library functions. Each returns a JSON
// report with a fixed key order and writes its files into an output
// directory; the executable is a thin argument parser around these.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ruled/classification.hpp"
#include "ruled/error.hpp"
#include "ruled/families.hpp"
#include "ruled/format.hpp"
#include "ruled/frame.hpp"
#include "ruled/profile.hpp"
#include "ruled/spec_io.hpp"
#include "ruled/surface.hpp"

namespace ruled::cli {

using io::Json;

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_spec_error = 2, exit_numeric_error = 3 };

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<double> tol;
    std::optional<std::pair<std::size_t, std::size_t>> grid;
};

struct CommandResult {
    int exit_code = exit_ok;
    Json report;
    /// Files written, relative to the output directory.
    std::vector<std::string> files;
};

/// One line of a verification report.
struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    /// "<=" when the measured value must stay below the tolerance, ">" when above.
    std::string relation = "<=";
};

inline Check check_below(std::string name, double measured, double tolerance)
{
    return Check{std::move(name), measured <= tolerance, measured, tolerance, "<="};
}

inline Check check_above(std::string name, double measured, double threshold)
{
    return Check{std::move(name), measured > threshold, measured, threshold, ">"};
}

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const Check& c)
{
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["measured"] = number_or_null(c.measured);
    j["relation"] = c.relation;
    j["tolerance"] = c.tolerance;
    return j;
}

/// A surface ready for analysis, with the provenance of its invariants.
struct ResolvedSurface {
    InvariantProfile profile;
    bool extracted = false;
};

inline ResolvedSurface resolve(const io::SurfaceSpec& spec)
{
    if (spec.has_invariants()) {
        return {io::make_profile(spec), false};
    }
    return {extract_standard_form(io::make_raw_map(spec)).profile, true};
}

inline double fit_tolerance(const io::SurfaceSpec& spec, const CommandOptions& opts, bool extracted)
{
    if (opts.tol) return *opts.tol;
    if (spec.tol.fit) return *spec.tol.fit;
    return extracted ? extracted_fit_tol : analytic_fit_tol;
}

inline double predicate_tolerance(const io::SurfaceSpec& spec, const CommandOptions& opts, bool extracted)
{
    if (opts.tol) return *opts.tol;
    if (spec.tol.predicate) return *spec.tol.predicate;
    return extracted ? extracted_fit_tol : analytic_fit_tol;
}

inline std::pair<std::size_t, std::size_t> grid_size(const io::SurfaceSpec& spec, const CommandOptions& opts)
{
    return opts.grid.value_or(std::pair{spec.nu, spec.nv});
}

inline Json interval_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

inline Json surface_json(const ResolvedSurface& s)
{
    Json j;
    j["name"] = s.profile.name();
    j["source"] = s.extracted ? "parametrization" : "invariants";
    j["domain"] = interval_json(s.profile.domain());
    return j;
}

inline void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text,
                       std::vector<std::string>& manifest)
{
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw SpecError("--out", "cannot write '" + (dir / name).string() + "'");
    }
    out << text;
    if (!out) {
        throw SpecError("--out", "failed writing '" + (dir / name).string() + "'");
    }
    manifest.push_back(name);
}

inline void finish(CommandResult& result, const CommandOptions& opts)
{
    result.files.push_back("report.json");
    result.report["files"] = result.files;
    std::vector<std::string> unused;
    write_text(opts.out_dir, "report.json", result.report.dump(2) + "\n", unused);
}

inline Json report_header(const char* command, const io::SurfaceSpec& spec, const ResolvedSurface& surface)
{
    Json j;
    j["command"] = command;
    j["spec"] = spec.echo;
    j["surface"] = surface_json(surface);
    return j;
}

// ---------------------------------------------------------------- analyze

inline CommandResult cmd_analyze(const io::SurfaceSpec& spec, const CommandOptions& opts = {})
{
    const ResolvedSurface surface = resolve(spec);
    const auto [nu, nv] = grid_size(spec, opts);
    const std::vector<double> us = surface.profile.domain().grid(nu);
    const std::vector<double> vs = spec.v_range.grid(nv);

    CommandResult result;
    std::ostringstream csv;
    io::write_curvature_csv(csv, surface.profile, us, vs);
    write_text(opts.out_dir, "curvature.csv", csv.str(), result.files);

    constexpr std::array<const char*, 11> names{"w", "g11", "g12", "g22", "h11", "h12", "h22", "K", "H", "k1", "k2"};
    std::array<double, 11> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    double max_h22 = 0.0;
    double max_k = -std::numeric_limits<double>::infinity();
    for (double u : us) {
        for (double v : vs) {
            const PointGeometry p = curvature_scalars(surface.profile, u, v);
            const std::array<double, 11> row{p.w,       p.g(0, 0), p.g(0, 1), p.g(1, 1), p.h(0, 0), p.h(0, 1),
                                             p.h(1, 1), p.K,       p.H,       p.k1,      p.k2};
            for (std::size_t i = 0; i < row.size(); ++i) {
                lo[i] = std::min(lo[i], row[i]);
                hi[i] = std::max(hi[i], row[i]);
            }
            max_h22 = std::max(max_h22, std::abs(p.h(1, 1)));
            max_k = std::max(max_k, p.K);
        }
    }

    result.report = report_header("analyze", spec, surface);
    result.report["grid"] = Json::array({nu, nv});
    Json ranges = Json::object();
    for (std::size_t i = 0; i < names.size(); ++i) {
        ranges[names[i]] = Json::array({lo[i], hi[i]});
    }
    result.report["ranges"] = ranges;
    const std::vector<Check> checks{check_below("gaussian_curvature_negative", max_k, -std::numeric_limits<double>::min()),
                                    check_below("h22_zero", max_h22, 0.0)};
    Json cj = Json::array();
    bool ok = true;
    for (const Check& c : checks) {
        cj.push_back(to_json(c));
        ok = ok && c.passed;
    }
    result.report["checks"] = cj;
    result.exit_code = ok ? exit_ok : exit_check_failed;
    finish(result, opts);
    return result;
}

// ---------------------------------------------------------------- classify

inline SampleGrid classification_grid(const Interval& domain, const Interval& v_range, std::size_t nu, std::size_t nv)
{
    return SampleGrid::uniform(domain, std::max<std::size_t>(nu, 20), v_range, std::max<std::size_t>(nv, 5));
}

inline Json fit_json(const FamilyReport& fr)
{
    Json j;
    j["family"] = family_name(fr.family);
    j["accepted"] = fr.fit.accepted;
    j["zero"] = fr.fit.zero;
    j["n"] = fr.fit.zero ? Json(nullptr) : Json(fr.fit.n);
    j["residual"] = number_or_null(fr.fit.residual);
    if (!fr.fit.f.empty()) {
        const auto [mn, mx] = std::minmax_element(fr.fit.f.begin(), fr.fit.f.end());
        j["f_range"] = Json::array({*mn, *mx});
    }
    Json rows = Json::array();
    for (const RowMatch& m : fr.rows) {
        Json r;
        r["row"] = describe_row(*m.row);
        r["f_shape"] = shape_name(m.row->shape);
        r["shape_match"] = m.shape_match;
        r["shape_residual"] = number_or_null(m.shape_residual);
        rows.push_back(r);
    }
    j["table_rows"] = rows;
    return j;
}

inline Json classification_json(const ClassificationReport& report)
{
    Json j;
    const InvariantClassification& inv = report.invariants;
    j["label"] = inv.cls.label();
    j["flags"] = inv.cls.names();
    Json pred;
    pred["tolerance"] = inv.tol;
    pred["drall_variation"] = inv.drall_variation;
    pred["max_abs_lambda"] = inv.max_abs_lambda;
    pred["max_abs_k"] = inv.max_abs_k;
    pred["edlinger_defect"] = inv.edlinger_defect;
    j["predicates"] = pred;
    j["fit_tolerance"] = report.tol;
    Json fams = Json::array();
    for (const FamilyReport& fr : report.families) {
        fams.push_back(fit_json(fr));
    }
    j["families"] = fams;
    Json matched = Json::array();
    for (const TableRow* r : report.matched_rows) matched.push_back(describe_row(*r));
    Json expected = Json::array();
    for (const TableRow* r : report.expected_rows) expected.push_back(describe_row(*r));
    j["table_rows"] = matched;
    j["expected_rows"] = expected;
    Json cor;
    cor["note"] = report.corollary_note;
    if (report.corollary) {
        const CorollaryResult& c = *report.corollary;
        cor["holds"] = c.holds;
        cor["residual"] = c.residual;
        cor["residual_k1_larger"] = c.residual_by_assignment[0];
        cor["residual_k1_smaller"] = c.residual_by_assignment[1];
        cor["k1_is_larger"] = c.k1_is_larger;
        cor["witness"] = Json::array({c.witness_u, c.witness_v});
    }
    j["corollary"] = cor;
    j["disagreements"] = report.disagreements;
    j["outside_table"] = report.outside_table;
    j["consistent"] = report.consistent();
    return j;
}

inline CommandResult cmd_classify(const io::SurfaceSpec& spec, const CommandOptions& opts = {})
{
    const ResolvedSurface surface = resolve(spec);
    const auto [nu, nv] = grid_size(spec, opts);
    const double fit_tol = fit_tolerance(spec, opts, surface.extracted);
    const SampleGrid grid = classification_grid(surface.profile.domain(), spec.v_range, nu, nv);

    ClassificationReport report = verify_surface(surface.profile, grid, fit_tol);
    const double pred_tol = predicate_tolerance(spec, opts, surface.extracted);
    if (pred_tol != fit_tol) {
        report.invariants = classify_by_invariants(surface.profile, grid.u, pred_tol);
    }

    CommandResult result;
    result.report = report_header("classify", spec, surface);
    result.report["classification"] = classification_json(report);
    finish(result, opts);
    return result;
}

// ---------------------------------------------------------------- reconstruct

inline constexpr double reconstruction_step = 1e-3;

/// Largest distance of a mesh row's vertices from the line through its end
/// vertices, relative to the row length.
inline double max_ruling_deviation(const Mesh& mesh)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.nu; ++i) {
        const Vec3& a = mesh.vertices[mesh.index(i, 0)];
        const Vec3& b = mesh.vertices[mesh.index(i, mesh.nv - 1)];
        const Vec3 dir = (b - a).normalized();
        const double length = (b - a).norm();
        for (std::size_t j = 1; j + 1 < mesh.nv; ++j) {
            const Vec3 d = mesh.vertices[mesh.index(i, j)] - a;
            worst = std::max(worst, (d - d.dot(dir) * dir).norm() / length);
        }
    }
    return worst;
}

inline CommandResult cmd_reconstruct(const io::SurfaceSpec& spec, const CommandOptions& opts = {})
{
    if (!spec.has_invariants()) {
        throw SpecError("$.invariants", "reconstruction needs the invariants form");
    }
    const ResolvedSurface resolved = resolve(spec);
    const auto [nu, nv] = grid_size(spec, opts);
    const RuledSurface surface = RuledSurface::build(resolved.profile, spec.v_range, reconstruction_step);
    const Mesh mesh = sample_mesh(surface, nu, nv);

    CommandResult result;
    std::ostringstream obj, striction, generators;
    io::write_obj(obj, mesh);
    io::write_striction_csv(striction, surface.striction());
    io::write_generators_csv(generators, surface.striction());
    write_text(opts.out_dir, "surface.obj", obj.str(), result.files);
    write_text(opts.out_dir, "striction.csv", striction.str(), result.files);
    write_text(opts.out_dir, "generators.csv", generators.str(), result.files);

    result.report = report_header("reconstruct", spec, resolved);
    Json m;
    m["nu"] = nu;
    m["nv"] = nv;
    m["vertices"] = mesh.vertices.size();
    m["quads"] = mesh.quads.size();
    m["striction_samples"] = surface.striction().size();
    m["integration_step"] = surface.striction().step();
    result.report["mesh"] = m;
    const std::vector<Check> checks{
        check_below("frame_defect_before_renormalization", surface.striction().max_defect_before, 1e-9),
        check_below("frame_defect_after_renormalization", surface.striction().max_defect_after, 1e-15),
        check_below("ruling_collinearity", max_ruling_deviation(mesh), 1e-12)};
    Json cj = Json::array();
    bool ok = true;
    for (const Check& c : checks) {
        cj.push_back(to_json(c));
        ok = ok && c.passed;
    }
    result.report["checks"] = cj;
    result.exit_code = ok ? exit_ok : exit_check_failed;
    finish(result, opts);
    return result;
}

// ---------------------------------------------------------------- verify

inline double relative(double a, double b, double floor)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Algebraic identities between the closed forms on a 20×20 grid.
inline std::vector<Check> structural_checks(const InvariantProfile& profile, const Interval& v_range)
{
    double s3_vs_2h = 0.0, ruling = 0.0, k_max = -std::numeric_limits<double>::infinity();
    double product = 0.0, sum = 0.0;
    for (double u : profile.domain().grid(20)) {
        for (double v : v_range.grid(20)) {
            const PointGeometry p = curvature_scalars(profile, u, v);
            const double scale = std::sqrt(std::abs(p.K));
            s3_vs_2h = std::max(s3_vs_2h, relative(family_normal_curvature(CurveFamily::S3, profile, u, v),
                                                   2.0 * p.H, scale));
            ruling = std::max(ruling, std::abs(normal_curvature(profile, u, v, DirectionUV{0.0, 1.0})));
            k_max = std::max(k_max, p.K);
            product = std::max(product, relative(p.k1 * p.k2, p.K, 0.0));
            sum = std::max(sum, relative(p.k1 + p.k2, 2.0 * p.H, scale));
        }
    }
    return {check_below("s3_normal_curvature_equals_2H", s3_vs_2h, 1e-12),
            check_below("ruling_normal_curvature_zero", ruling, 0.0),
            check_below("gaussian_curvature_negative", k_max, -std::numeric_limits<double>::min()),
            check_below("principal_product_equals_K", product, 1e-12),
            check_below("principal_sum_equals_2H", sum, 1e-12)};
}

/// Closed forms against central differences of the reconstructed embedding.
inline Check oracle_check(const RuledSurface& surface, const Interval& v_range)
{
    const Interval u = surface.u_range();
    const double margin = 0.05 * u.length();
    double worst = 0.0;
    for (double uu : Interval{u.lo + margin, u.hi - margin}.grid(8)) {
        for (double v : v_range.grid(8)) {
            const PointGeometry exact = curvature_scalars(surface.profile(), uu, v);
            const PointGeometry fd = fd_geometry_oracle(surface, uu, v, 1e-4);
            const double scale = std::sqrt(std::abs(exact.K));
            worst = std::max({worst, relative(fd.K, exact.K, 0.0), relative(fd.H, exact.H, scale)});
        }
    }
    return check_below("closed_forms_match_difference_oracle", worst, 1e-5);
}

/// Re-extracts k, δ, λ from the reconstructed striction line and generators.
inline Check round_trip_check(const RuledSurface& surface)
{
    const StandardForm sf = extract_standard_form(raw_map_from_striction(surface.striction()));
    const InvariantProfile& original = surface.profile();
    double delta_scale = 0.0;
    for (double u : sf.raw_parameter) {
        delta_scale = std::max(delta_scale, std::abs(original.delta(u)));
    }
    double worst = 0.0;
    const auto& t = sf.striction.samples();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double u = sf.raw_parameter[i];
        const double tt = t[i].u;
        worst = std::max({worst, relative(sf.profile.k(tt), original.k(u), 1.0),
                          relative(sf.profile.delta(tt), original.delta(u), delta_scale),
                          relative(sf.profile.lambda(tt), original.lambda(u), 1.0)});
    }
    return check_below("round_trip_invariants", worst, 1e-6);
}

/// Frame defects while integrating over the whole domain of `profile`.
inline Check frame_check(const InvariantProfile& profile, bool after)
{
    const Interval& span = profile.domain();
    const StrictionCurve c = integrate_striction_frame(profile, span.lo, span.hi, reconstruction_step);
    return after ? check_below("frame_defect_after_renormalization", c.max_defect_after, 1e-15)
                 : check_below("frame_defect_before_renormalization", c.max_defect_before, 1e-9);
}

/// Classification checks shared by spec and built-in verification.
inline std::vector<Check> classification_checks(const ClassificationReport& report)
{
    std::vector<Check> out;
    out.push_back(check_below("table_consistent_with_invariants", static_cast<double>(report.disagreements.size()), 0.0));
    const bool edlinger = report.invariants.cls.edlinger;
    const FamilyReport& s2 = report.family(CurveFamily::S2);
    const double s2_residual = s2.fit.zero ? 0.0 : s2.fit.residual_by_exponent[static_cast<std::size_t>(-3 - min_exponent)];
    if (edlinger) {
        out.push_back(check_below("s2_edlinger_row_present", s2_residual, report.tol));
        if (report.corollary) {
            out.push_back(check_below("principal_curvature_relation", report.corollary->residual, 1e-10));
        }
    } else if (report.invariants.cls.const_drall && report.invariants.max_abs_k > 0.0 && !s2.fit.zero) {
        // Converse direction: off the Edlinger locus the S2 shape test must reject.
        out.push_back(check_above("s2_edlinger_row_rejected", s2_residual, 1e-3));
    }
    return out;
}

struct BuiltinCase {
    std::string name;
    std::function<InvariantProfile(Interval)> make;
    std::string expected_label;
};

inline std::vector<BuiltinCase> builtin_cases()
{
    return {
        {"helicoid", [](Interval d) { return helicoid(1.0, d); }, "WENDELFLAECHE"},
        {"edlinger", [](Interval d) { return edlinger(-1.0, 1.0, d); }, "EDLINGER"},
        {"const_drall_orthoid", [](Interval d) { return const_drall_orthoid(ScalarProfile::constant(0.7), 1.0, d); },
         "CONST_DRALL+ORTHOID"},
        {"const_drall_conoid", [](Interval d) { return const_drall_conoid(ScalarProfile::constant(1.0), 1.0, d); },
         "CONST_DRALL+KONOID"},
    };
}

inline Json verify_entry(const std::string& name, const std::vector<Check>& checks, bool& all_ok)
{
    Json j;
    j["surface"] = name;
    Json cj = Json::array();
    for (const Check& c : checks) {
        cj.push_back(to_json(c));
        all_ok = all_ok && c.passed;
    }
    j["checks"] = cj;
    return j;
}

inline std::vector<Check> full_battery(const InvariantProfile& profile, const InvariantProfile& frame_profile,
                                       const Interval& v_range, double tol, bool extracted,
                                       ClassificationReport& report)
{
    std::vector<Check> checks;
    checks.push_back(frame_check(frame_profile, false));
    checks.push_back(frame_check(frame_profile, true));
    for (Check& c : structural_checks(profile, v_range)) checks.push_back(std::move(c));
    if (!extracted) {
        const RuledSurface surface = RuledSurface::build(profile, v_range, reconstruction_step);
        checks.push_back(oracle_check(surface, v_range));
        checks.push_back(round_trip_check(surface));
    }
    report = verify_surface(profile, classification_grid(profile.domain(), v_range, 24, 16), tol);
    for (Check& c : classification_checks(report)) checks.push_back(std::move(c));
    return checks;
}

inline CommandResult cmd_verify(const io::SurfaceSpec& spec, const CommandOptions& opts = {})
{
    const ResolvedSurface surface = resolve(spec);
    const double tol = fit_tolerance(spec, opts, surface.extracted);
    ClassificationReport report;
    const std::vector<Check> checks =
        full_battery(surface.profile, surface.profile, spec.v_range, tol, surface.extracted, report);

    CommandResult result;
    result.report = report_header("verify", spec, surface);
    bool ok = true;
    Json entry = verify_entry(surface.profile.name(), checks, ok);
    entry["classification"] = classification_json(report);
    result.report["results"] = Json::array({entry});
    result.report["passed"] = ok;
    result.exit_code = ok ? exit_ok : exit_check_failed;
    finish(result, opts);
    return result;
}

inline CommandResult cmd_verify_builtins(const CommandOptions& opts = {})
{
    const Interval v_range{-2.0, 2.0};
    const Interval frame_span{0.0, 20.0};
    const double tol = opts.tol.value_or(analytic_fit_tol);

    CommandResult result;
    result.report["command"] = "verify";
    result.report["builtins"] = true;
    Json results = Json::array();
    bool ok = true;
    for (const BuiltinCase& b : builtin_cases()) {
        ClassificationReport report;
        std::vector<Check> checks =
            full_battery(b.make(default_builtin_domain), b.make(frame_span), v_range, tol, false, report);
        checks.push_back(Check{"class_label_" + b.expected_label, report.invariants.cls.label() == b.expected_label,
                               report.invariants.cls.label() == b.expected_label ? 0.0 : 1.0, 0.0, "<="});
        Json entry = verify_entry(b.name, checks, ok);
        entry["classification"] = classification_json(report);
        results.push_back(entry);
    }

    // Converse: leaving the Edlinger locus must destroy the S2 n=−3 shape.
    const InvariantProfile perturbed = InvariantProfile::from_lambda(
        ScalarProfile::constant(-1.0), ScalarProfile::constant(1.0), ScalarProfile::constant(1.0 + 0.05),
        default_builtin_domain, "perturbed_edlinger");
    const ClassificationReport pr =
        verify_surface(perturbed, classification_grid(perturbed.domain(), v_range, 24, 16), tol);
    const FamilyReport& s2 = pr.family(CurveFamily::S2);
    std::vector<Check> converse{
        check_above("s2_edlinger_row_rejected", s2.fit.residual_by_exponent[static_cast<std::size_t>(-3 - min_exponent)],
                    1e-3),
        Check{"edlinger_flag_lost", !pr.invariants.cls.edlinger, pr.invariants.edlinger_defect, tol, ">"}};
    Json entry = verify_entry(perturbed.name(), converse, ok);
    entry["classification"] = classification_json(pr);
    results.push_back(entry);

    result.report["results"] = results;
    result.report["passed"] = ok;
    result.exit_code = ok ? exit_ok : exit_check_failed;
    finish(result, opts);
    return result;
}

/// Maps library exceptions to process exit codes.
inline int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const EvaluationError*>(&e)) {
        return exit_numeric_error;
    }
    return exit_spec_error;
}

} // namespace ruled::cli

#endif // RULED_COMMANDS_HPP
