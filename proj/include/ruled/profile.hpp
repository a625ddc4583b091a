#ifndef RULED_PROFILE_HPP
#define RULED_PROFILE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ruled/error.hpp"
#include "ruled/expression.hpp"
#include "ruled/format.hpp"
#include "ruled/spline.hpp"

namespace ruled {

/// Closed parameter interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }

    bool contains(double u) const
    {
        const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
        return u >= lo - slack && u <= hi + slack;
    }

    /// n equally spaced points including both ends.
    std::vector<double> grid(std::size_t n) const
    {
        std::vector<double> pts(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        return pts;
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite-difference step used wherever no closed-form derivative exists.
inline double fd_step(double u) { return std::max(1e-5, 1e-5 * std::abs(u)); }

/// 5-point central differences, first or second order.
template <class F>
double central_difference(F&& f, double u, int order)
{
    const double h = fd_step(u);
    const double fm2 = f(u - 2.0 * h);
    const double fm1 = f(u - h);
    const double fp1 = f(u + h);
    const double fp2 = f(u + 2.0 * h);
    if (order == 1) {
        return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    }
    const double f0 = f(u);
    return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
}

/// One invariant function of u: constant, parsed expression, sampled table, or
/// an opaque callable. Immutable; copies are cheap.
class ScalarProfile {
public:
    struct ConstantForm {
        double value;
    };
    struct ExpressionForm {
        expr::Expression f;
        expr::Expression df;
        expr::Expression d2f;
    };
    struct TableForm {
        UniformCubicSpline spline;
    };
    struct FunctionForm {
        std::string name;
        std::function<double(double)> f;
        std::optional<Interval> domain;
    };

    ScalarProfile() : form_(ConstantForm{0.0}) {}

    static ScalarProfile constant(double value)
    {
        if (!std::isfinite(value)) {
            throw PreconditionError("constant profile must be finite");
        }
        return ScalarProfile(ConstantForm{value});
    }

    static ScalarProfile expression(const expr::Expression& e)
    {
        expr::Expression df = e.derivative();
        expr::Expression d2f = df.derivative();
        return ScalarProfile(ExpressionForm{e, std::move(df), std::move(d2f)});
    }

    static ScalarProfile expression(std::string_view text) { return expression(expr::Expression::parse(text)); }

    /// Uniform samples values[i] = f(u0 + i*step).
    static ScalarProfile table(double u0, double step, std::vector<double> values)
    {
        return ScalarProfile(TableForm{UniformCubicSpline(u0, step, std::move(values))});
    }

    /// Opaque callable; derivatives by central differences.
    static ScalarProfile function(std::string name, std::function<double(double)> f,
                                  std::optional<Interval> domain = std::nullopt)
    {
        return ScalarProfile(FunctionForm{std::move(name), std::move(f), domain});
    }

    double value(double u) const
    {
        return std::visit(
            expr::detail::overloaded{
                [](const ConstantForm& c) { return c.value; },
                [u](const ExpressionForm& e) { return e.f.evaluate(u); },
                [u](const TableForm& t) { return t.spline.evaluate(u); },
                [this, u](const FunctionForm& fn) {
                    require_in_domain(u);
                    const double y = fn.f(u);
                    if (!std::isfinite(y)) {
                        throw EvaluationError("profile '" + fn.name + "' is not finite at u=" + format_double(u));
                    }
                    return y;
                },
            },
            form_);
    }

    /// order 1 or 2. Expressions differentiate symbolically, tables use the
    /// spline's own derivatives, callables use central differences.
    double derivative(double u, int order) const
    {
        if (order != 1 && order != 2) {
            throw PreconditionError("derivative order must be 1 or 2");
        }
        return std::visit(
            expr::detail::overloaded{
                [](const ConstantForm&) { return 0.0; },
                [u, order](const ExpressionForm& e) { return order == 1 ? e.df.evaluate(u) : e.d2f.evaluate(u); },
                [u, order](const TableForm& t) {
                    if (t.spline.size() < 5) {
                        throw PreconditionError("table with fewer than 5 samples is not differentiable");
                    }
                    return t.spline.evaluate(u, order);
                },
                [this, u, order](const FunctionForm& fn) {
                    if (fn.domain) {
                        const double margin = 2.0 * fd_step(u);
                        if (u - margin < fn.domain->lo || u + margin > fn.domain->hi) {
                            throw DomainError("derivative of '" + fn.name + "' at u=" + format_double(u) +
                                              " needs two difference steps inside the domain");
                        }
                    }
                    return central_difference([this](double x) { return value(x); }, u, order);
                },
            },
            form_);
    }

    /// Interval on which the profile is defined; nullopt means all of R.
    std::optional<Interval> domain() const
    {
        if (const auto* t = std::get_if<TableForm>(&form_)) {
            return Interval{t->spline.x_min(), t->spline.x_max()};
        }
        if (const auto* fn = std::get_if<FunctionForm>(&form_)) {
            return fn->domain;
        }
        return std::nullopt;
    }

    /// Native sample spacing of a table profile.
    std::optional<double> sample_spacing() const
    {
        if (const auto* t = std::get_if<TableForm>(&form_)) {
            return t->spline.step();
        }
        return std::nullopt;
    }

    /// True when the value cannot depend on u.
    bool is_constant() const
    {
        if (std::holds_alternative<ConstantForm>(form_)) {
            return true;
        }
        if (const auto* e = std::get_if<ExpressionForm>(&form_)) {
            return !e->f.depends_on_u();
        }
        return false;
    }

    const std::variant<ConstantForm, ExpressionForm, TableForm, FunctionForm>& form() const { return form_; }

    std::string describe() const
    {
        return std::visit(expr::detail::overloaded{
                              [](const ConstantForm& c) { return format_double(c.value); },
                              [](const ExpressionForm& e) { return e.f.to_string(); },
                              [](const TableForm& t) {
                                  return "table[" + std::to_string(t.spline.size()) + " samples]";
                              },
                              [](const FunctionForm& fn) { return fn.name; },
                          },
                          form_);
    }

private:
    template <class Form>
    explicit ScalarProfile(Form form) : form_(std::move(form)) {}

    void require_in_domain(double u) const
    {
        const auto d = domain();
        if (d && !d->contains(u)) {
            throw DomainError("u=" + format_double(u) + " outside profile domain [" + format_double(d->lo) + ", " +
                              format_double(d->hi) + "]");
        }
    }

    std::variant<ConstantForm, ExpressionForm, TableForm, FunctionForm> form_;
};

/// The complete invariant system k(u), δ(u), σ(u) (with λ = cot σ) of a skew
/// ruled surface, on a closed parameter interval.
class InvariantProfile {
public:
    /// How the striction invariant was supplied; the other one is derived.
    enum class StrictionForm { Lambda, Sigma };

    static InvariantProfile from_lambda(ScalarProfile k, ScalarProfile delta, ScalarProfile lambda, Interval domain,
                                        std::string name = "custom")
    {
        InvariantProfile p(std::move(k), std::move(delta), std::move(lambda), StrictionForm::Lambda, domain,
                           std::move(name));
        p.validate();
        return p;
    }

    static InvariantProfile from_sigma(ScalarProfile k, ScalarProfile delta, ScalarProfile sigma, Interval domain,
                                       std::string name = "custom")
    {
        InvariantProfile p(std::move(k), std::move(delta), std::move(sigma), StrictionForm::Sigma, domain,
                           std::move(name));
        p.validate();
        return p;
    }

    const std::string& name() const { return name_; }
    const Interval& domain() const { return domain_; }
    StrictionForm striction_form() const { return striction_form_; }
    const ScalarProfile& k_profile() const { return k_; }
    const ScalarProfile& delta_profile() const { return delta_; }
    const ScalarProfile& striction_profile() const { return striction_; }

    double k(double u) const
    {
        require(u);
        return k_.value(u);
    }

    double delta(double u) const
    {
        require(u);
        return delta_.value(u);
    }

    double delta_prime(double u) const
    {
        require(u);
        return delta_.derivative(u, 1);
    }

    /// λ = cot σ; exactly 0 when σ is π/2.
    double lambda(double u) const
    {
        require(u);
        if (striction_form_ == StrictionForm::Lambda) {
            return striction_.value(u);
        }
        const double s = striction_.value(u);
        if (is_right_angle(s)) {
            return 0.0;
        }
        return std::cos(s) / std::sin(s);
    }

    /// σ in (−π/2, π/2].
    double sigma(double u) const
    {
        require(u);
        if (striction_form_ == StrictionForm::Sigma) {
            return striction_.value(u);
        }
        const double l = striction_.value(u);
        if (l == 0.0) {
            return std::numbers::pi / 2.0;
        }
        return std::atan(1.0 / l);
    }

    /// Throws DomainError when u is outside the parameter interval.
    void require(double u) const
    {
        if (!domain_.contains(u)) {
            throw DomainError("u=" + format_double(u) + " outside [" + format_double(domain_.lo) + ", " +
                              format_double(domain_.hi) + "]");
        }
    }

    /// Re-checks the standing assumptions on an n-point grid.
    void validate(std::size_t n = 100) const
    {
        if (!(domain_.lo < domain_.hi)) {
            throw PreconditionError("profile domain must satisfy lo < hi");
        }
        for (const ScalarProfile* p : {&k_, &delta_, &striction_}) {
            if (const auto d = p->domain(); d && (d->lo > domain_.lo + 1e-12 || d->hi < domain_.hi - 1e-12)) {
                throw DomainError("component profile does not cover the surface domain");
            }
        }
        double previous_delta = 0.0;
        for (double u : domain_.grid(n)) {
            const double d = delta_.value(u);
            if (d == 0.0 || !std::isfinite(d)) {
                throw InvariantViolation("drall vanishes at u=" + format_double(u) + " (torsal generator)");
            }
            if (previous_delta != 0.0 && (d > 0.0) != (previous_delta > 0.0)) {
                throw InvariantViolation("drall changes sign before u=" + format_double(u) + " (torsal generator)");
            }
            previous_delta = d;

            const double s = sigma(u);
            const double l = lambda(u);
            if (!(s > -std::numbers::pi / 2.0 && s <= std::numbers::pi / 2.0 + 1e-15)) {
                throw InvariantViolation("striction angle " + format_double(s) + " outside (-pi/2, pi/2] at u=" +
                                         format_double(u));
            }
            if (l != 0.0 && (s > 0.0) != (d > 0.0)) {
                throw InvariantViolation("sign of striction differs from sign of drall at u=" + format_double(u));
            }
            if (std::abs(l * std::sin(s) - std::cos(s)) > 1e-12) {
                throw InvariantViolation("lambda and sigma inconsistent at u=" + format_double(u));
            }
            (void)k_.value(u);
        }
    }

private:
    InvariantProfile(ScalarProfile k, ScalarProfile delta, ScalarProfile striction, StrictionForm form,
                     Interval domain, std::string name)
        : k_(std::move(k)), delta_(std::move(delta)), striction_(std::move(striction)), striction_form_(form),
          domain_(domain), name_(std::move(name))
    {
    }

    static bool is_right_angle(double s)
    {
        return std::abs(s - std::numbers::pi / 2.0) <= 4.0 * std::numeric_limits<double>::epsilon();
    }

    ScalarProfile k_;
    ScalarProfile delta_;
    ScalarProfile striction_;
    StrictionForm striction_form_;
    Interval domain_;
    std::string name_;
};

inline constexpr Interval default_builtin_domain{0.0, 2.0 * std::numbers::pi};

// Named surface classes.

inline InvariantProfile helicoid(double delta0, Interval domain = default_builtin_domain)
{
    return InvariantProfile::from_lambda(ScalarProfile::constant(0.0), ScalarProfile::constant(delta0),
                                         ScalarProfile::constant(0.0), domain, "helicoid");
}

/// δ' = 0 and kλ + 1 = 0.
inline InvariantProfile edlinger(double k0, double delta0, Interval domain = default_builtin_domain)
{
    if (k0 == 0.0) {
        throw PreconditionError("edlinger surface needs k0 != 0");
    }
    return InvariantProfile::from_lambda(ScalarProfile::constant(k0), ScalarProfile::constant(delta0),
                                         ScalarProfile::constant(-1.0 / k0), domain, "edlinger");
}

/// λ = 0, δ constant, arbitrary conical curvature.
inline InvariantProfile const_drall_orthoid(ScalarProfile k, double delta0, Interval domain = default_builtin_domain)
{
    return InvariantProfile::from_lambda(std::move(k), ScalarProfile::constant(delta0), ScalarProfile::constant(0.0),
                                         domain, "const_drall_orthoid");
}

/// k = 0, δ constant, arbitrary λ.
inline InvariantProfile const_drall_conoid(ScalarProfile lambda, double delta0,
                                           Interval domain = default_builtin_domain)
{
    return InvariantProfile::from_lambda(ScalarProfile::constant(0.0), ScalarProfile::constant(delta0),
                                         std::move(lambda), domain, "const_drall_conoid");
}

using NamedParams = std::map<std::string, ScalarProfile, std::less<>>;

namespace detail {

inline double constant_param(const NamedParams& params, std::string_view key, double fallback)
{
    const auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    if (!it->second.is_constant()) {
        throw PreconditionError("parameter '" + std::string(key) + "' must be a constant");
    }
    return it->second.value(0.0);
}

inline ScalarProfile profile_param(const NamedParams& params, std::string_view key, double fallback)
{
    const auto it = params.find(key);
    return it == params.end() ? ScalarProfile::constant(fallback) : it->second;
}

inline void reject_unknown(const NamedParams& params, std::initializer_list<std::string_view> known,
                           std::string_view builtin)
{
    for (const auto& [key, _] : params) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw PreconditionError("unknown parameter '" + key + "' for built-in '" + std::string(builtin) + "'");
        }
    }
}

} // namespace detail

/// Built-in by name. Recognized names and parameters (defaults in brackets):
///   helicoid             delta0 [1]
///   edlinger             k0 [-1], delta0 [1]
///   const_drall_orthoid  k [0.7], delta0 [1]
///   const_drall_conoid   lambda [1], delta0 [1]
///   generic              k, delta, and one of sigma | lambda (all required)
inline InvariantProfile make_builtin_profile(std::string_view name, const NamedParams& params = {},
                                             Interval domain = default_builtin_domain)
{
    using detail::constant_param;
    using detail::profile_param;
    if (name == "helicoid") {
        detail::reject_unknown(params, {"delta0"}, name);
        return helicoid(constant_param(params, "delta0", 1.0), domain);
    }
    if (name == "edlinger") {
        detail::reject_unknown(params, {"k0", "delta0"}, name);
        return edlinger(constant_param(params, "k0", -1.0), constant_param(params, "delta0", 1.0), domain);
    }
    if (name == "const_drall_orthoid") {
        detail::reject_unknown(params, {"k", "delta0"}, name);
        return const_drall_orthoid(profile_param(params, "k", 0.7), constant_param(params, "delta0", 1.0), domain);
    }
    if (name == "const_drall_conoid") {
        detail::reject_unknown(params, {"lambda", "delta0"}, name);
        return const_drall_conoid(profile_param(params, "lambda", 1.0), constant_param(params, "delta0", 1.0),
                                  domain);
    }
    if (name == "generic") {
        detail::reject_unknown(params, {"k", "delta", "sigma", "lambda"}, name);
        const bool has_sigma = params.contains("sigma");
        const bool has_lambda = params.contains("lambda");
        if (!params.contains("k") || !params.contains("delta") || has_sigma == has_lambda) {
            throw PreconditionError("generic profile needs k, delta and exactly one of sigma, lambda");
        }
        if (has_sigma) {
            return InvariantProfile::from_sigma(params.find("k")->second, params.find("delta")->second,
                                                params.find("sigma")->second, domain, "generic");
        }
        return InvariantProfile::from_lambda(params.find("k")->second, params.find("delta")->second,
                                             params.find("lambda")->second, domain, "generic");
    }
    throw PreconditionError("unknown built-in surface class '" + std::string(name) + "'");
}

} // namespace ruled

#endif // RULED_PROFILE_HPP
