#ifndef RULED_SPEC_IO_HPP
#define RULED_SPEC_IO_HPP

// Surface description files (JSON) and the plain-text output formats:
// curvature grids as CSV and meshes as Wavefront OBJ.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruled/error.hpp"
#include "ruled/expression.hpp"
#include "ruled/format.hpp"
#include "ruled/frame.hpp"
#include "ruled/profile.hpp"
#include "ruled/surface.hpp"

namespace ruled::io {

using Json = nlohmann::ordered_json;

struct BuiltinInvariants {
    std::string name;
    NamedParams params;
};

struct ExpressionInvariants {
    ScalarProfile k;
    ScalarProfile delta;
    ScalarProfile angle; ///< λ or σ, see `sigma`
    bool sigma = false;
};

struct Parametrization {
    std::array<std::string, 3> directrix;
    std::array<std::string, 3> direction;
};

struct Tolerances {
    std::optional<double> fit;
    std::optional<double> predicate;
};

struct SurfaceSpec {
    std::variant<BuiltinInvariants, ExpressionInvariants, Parametrization> source;
    Interval domain;
    Interval v_range{-2.0, 2.0};
    std::size_t nu = 64;
    std::size_t nv = 16;
    Tolerances tol;
    /// The document as read, for echoing into reports.
    Json echo;

    bool has_invariants() const { return !std::holds_alternative<Parametrization>(source); }
};

namespace detail {

inline void reject_unknown_keys(const Json& object, const std::string& path,
                                std::initializer_list<std::string_view> known)
{
    for (const auto& [key, _] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw SpecError(path + "." + key, "unknown field");
        }
    }
}

inline const Json& require_field(const Json& object, const std::string& path, const char* key)
{
    const auto it = object.find(key);
    if (it == object.end()) {
        throw SpecError(path + "." + key, "missing field");
    }
    return *it;
}

inline double number_at(const Json& value, const std::string& path)
{
    if (!value.is_number()) {
        throw SpecError(path, "expected a number");
    }
    const double x = value.get<double>();
    if (!std::isfinite(x)) {
        throw SpecError(path, "number is not finite");
    }
    return x;
}

inline Interval interval_at(const Json& value, const std::string& path)
{
    if (!value.is_array() || value.size() != 2) {
        throw SpecError(path, "expected [min, max]");
    }
    const double lo = number_at(value[0], path + "[0]");
    const double hi = number_at(value[1], path + "[1]");
    if (!(lo < hi)) {
        throw SpecError(path, "min must be smaller than max");
    }
    return {lo, hi};
}

inline std::size_t count_at(const Json& value, const std::string& path)
{
    if (!value.is_number_integer()) {
        throw SpecError(path, "expected an integer");
    }
    const auto n = value.get<long long>();
    if (n < 2) {
        throw SpecError(path, "must be at least 2");
    }
    return static_cast<std::size_t>(n);
}

inline expr::Expression expression_at(const Json& value, const std::string& path)
{
    if (value.is_number()) {
        return expr::Expression::constant(number_at(value, path));
    }
    if (!value.is_string()) {
        throw SpecError(path, "expected an expression string or a number");
    }
    try {
        return expr::Expression::parse(value.get<std::string>());
    } catch (const ParseError& e) {
        throw SpecError(path, e.what());
    }
}

inline ScalarProfile profile_at(const Json& value, const std::string& path)
{
    const expr::Expression e = expression_at(value, path);
    return e.depends_on_u() ? ScalarProfile::expression(e) : ScalarProfile::constant(e.evaluate(0.0));
}

inline std::array<std::string, 3> vector_at(const Json& value, const std::string& path)
{
    if (!value.is_array() || value.size() != 3) {
        throw SpecError(path, "expected three component expressions");
    }
    std::array<std::string, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        expression_at(value[i], p);
        out[i] = value[i].is_string() ? value[i].get<std::string>() : format_double(value[i].get<double>());
    }
    return out;
}

inline std::variant<BuiltinInvariants, ExpressionInvariants> invariants_at(const Json& value)
{
    const std::string path = "$.invariants";
    if (!value.is_object()) {
        throw SpecError(path, "expected an object");
    }
    if (value.contains("builtin")) {
        reject_unknown_keys(value, path, {"builtin", "params"});
        const Json& name = value["builtin"];
        if (!name.is_string()) {
            throw SpecError(path + ".builtin", "expected a string");
        }
        BuiltinInvariants out{name.get<std::string>(), {}};
        if (value.contains("params")) {
            const Json& params = value["params"];
            if (!params.is_object()) {
                throw SpecError(path + ".params", "expected an object");
            }
            for (const auto& [key, v] : params.items()) {
                out.params.emplace(key, profile_at(v, path + ".params." + key));
            }
        }
        return out;
    }
    reject_unknown_keys(value, path, {"k", "delta", "lambda", "sigma"});
    const bool has_lambda = value.contains("lambda");
    const bool has_sigma = value.contains("sigma");
    if (has_lambda == has_sigma) {
        throw SpecError(path, "exactly one of 'lambda' and 'sigma' is required");
    }
    ExpressionInvariants out{profile_at(require_field(value, path, "k"), path + ".k"),
                             profile_at(require_field(value, path, "delta"), path + ".delta"),
                             has_sigma ? profile_at(value["sigma"], path + ".sigma")
                                       : profile_at(value["lambda"], path + ".lambda"),
                             has_sigma};
    return out;
}

} // namespace detail

/// Builds the invariant profile of an invariants-form spec.
inline InvariantProfile make_profile(const SurfaceSpec& spec)
{
    if (const auto* b = std::get_if<BuiltinInvariants>(&spec.source)) {
        return make_builtin_profile(b->name, b->params, spec.domain);
    }
    if (const auto* e = std::get_if<ExpressionInvariants>(&spec.source)) {
        return e->sigma ? InvariantProfile::from_sigma(e->k, e->delta, e->angle, spec.domain)
                        : InvariantProfile::from_lambda(e->k, e->delta, e->angle, spec.domain);
    }
    throw PreconditionError("spec has no invariants; extract them from the parametrization first");
}

inline RawRuledMap make_raw_map(const SurfaceSpec& spec)
{
    const auto& p = std::get<Parametrization>(spec.source);
    return RawRuledMap{VectorProfile::expressions(p.directrix[0], p.directrix[1], p.directrix[2]),
                       VectorProfile::expressions(p.direction[0], p.direction[1], p.direction[2]), spec.domain};
}

/// Validates a parsed document. Every error names the offending field.
inline SurfaceSpec parse_spec(const Json& doc)
{
    if (!doc.is_object()) {
        throw SpecError("$", "expected a JSON object");
    }
    detail::reject_unknown_keys(doc, "$", {"invariants", "parametrization", "domain", "v_range", "grid", "tol"});
    const bool has_inv = doc.contains("invariants");
    const bool has_par = doc.contains("parametrization");
    if (has_inv && has_par) {
        throw SpecError("$", "'invariants' and 'parametrization' are mutually exclusive");
    }
    if (!has_inv && !has_par) {
        throw SpecError("$", "one of 'invariants' or 'parametrization' is required");
    }

    SurfaceSpec spec;
    spec.echo = doc;
    spec.domain = detail::interval_at(detail::require_field(doc, "$", "domain"), "$.domain");
    if (doc.contains("v_range")) {
        spec.v_range = detail::interval_at(doc["v_range"], "$.v_range");
    }
    if (doc.contains("grid")) {
        const Json& grid = doc["grid"];
        if (!grid.is_array() || grid.size() != 2) {
            throw SpecError("$.grid", "expected [nu, nv]");
        }
        spec.nu = detail::count_at(grid[0], "$.grid[0]");
        spec.nv = detail::count_at(grid[1], "$.grid[1]");
    }
    if (doc.contains("tol")) {
        const Json& tol = doc["tol"];
        if (!tol.is_object()) {
            throw SpecError("$.tol", "expected an object");
        }
        detail::reject_unknown_keys(tol, "$.tol", {"fit", "predicate"});
        auto positive = [&](const char* key) -> std::optional<double> {
            if (!tol.contains(key)) {
                return std::nullopt;
            }
            const std::string path = std::string("$.tol.") + key;
            const double x = detail::number_at(tol[key], path);
            if (!(x > 0.0)) {
                throw SpecError(path, "must be positive");
            }
            return x;
        };
        spec.tol.fit = positive("fit");
        spec.tol.predicate = positive("predicate");
    }

    if (has_inv) {
        std::visit([&](auto&& s) { spec.source = std::move(s); }, detail::invariants_at(doc["invariants"]));
        try {
            make_profile(spec);
        } catch (const SpecError&) {
            throw;
        } catch (const Error& e) {
            throw SpecError("$.invariants", e.what());
        }
    } else {
        const Json& par = doc["parametrization"];
        if (!par.is_object()) {
            throw SpecError("$.parametrization", "expected an object");
        }
        detail::reject_unknown_keys(par, "$.parametrization", {"directrix", "direction"});
        spec.source = Parametrization{
            detail::vector_at(detail::require_field(par, "$.parametrization", "directrix"),
                              "$.parametrization.directrix"),
            detail::vector_at(detail::require_field(par, "$.parametrization", "direction"),
                              "$.parametrization.direction")};
    }
    return spec;
}

inline SurfaceSpec parse_spec_text(std::string_view text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError("$", "invalid JSON at byte " + std::to_string(e.byte));
    }
    return parse_spec(doc);
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SpecError("$", "cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline SurfaceSpec load_spec(const std::filesystem::path& path) { return parse_spec_text(read_file(path)); }

inline constexpr std::string_view csv_header = "u,v,w,g11,g12,g22,h11,h12,h22,K,H,k1,k2";

/// One CSV row per grid point in u-major order.
inline void write_curvature_csv(std::ostream& out, const InvariantProfile& profile, const std::vector<double>& us,
                                const std::vector<double>& vs)
{
    out << csv_header << '\n';
    for (double u : us) {
        for (double v : vs) {
            const PointGeometry p = curvature_scalars(profile, u, v);
            const std::array<double, 13> row{u,       v,       p.w,     p.g(0, 0), p.g(0, 1), p.g(1, 1), p.h(0, 0),
                                             p.h(0, 1), p.h(1, 1), p.K, p.H,       p.k1,      p.k2};
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << format_double(row[i]);
            }
            out << '\n';
        }
    }
}

inline void write_obj(std::ostream& out, const Mesh& mesh)
{
    for (const Vec3& p : mesh.vertices) {
        out << "v " << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
    }
    for (const auto& q : mesh.quads) {
        out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
    }
}

namespace detail {

inline void write_vec_rows(std::ostream& out, const char* header, const StrictionCurve& curve, bool generators)
{
    out << header << '\n';
    for (const StrictionSample& sample : curve.samples()) {
        const Vec3& p = generators ? sample.frame.e : sample.s;
        out << format_double(sample.u) << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
            << format_double(p.z()) << '\n';
    }
}

} // namespace detail

/// Striction polyline (u,x,y,z) at every integration sample.
inline void write_striction_csv(std::ostream& out, const StrictionCurve& curve)
{
    detail::write_vec_rows(out, "u,x,y,z", curve, false);
}

/// Unit generators (u,ex,ey,ez) at every integration sample.
inline void write_generators_csv(std::ostream& out, const StrictionCurve& curve)
{
    detail::write_vec_rows(out, "u,ex,ey,ez", curve, true);
}

/// Reads a CSV with a header row and four numeric columns.
inline std::vector<std::array<double, 4>> read_csv4(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::array<double, 4>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::array<double, 4> row{};
        std::size_t pos = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t next = line.find(',', pos);
            const std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[i]);
            if (ec != std::errc{} || end != cell.data() + cell.size() || cell.empty()) {
                throw SpecError(path.string(), "malformed CSV cell '" + cell + "'");
            }
            pos = next == std::string::npos ? line.size() : next + 1;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace ruled::io

#endif // RULED_SPEC_IO_HPP
