#ifndef RULED_FRAME_HPP
#define RULED_FRAME_HPP

// Companion frame {e, n, z} along the striction line and its integration.
//
//   e' = n,   n' = -e + k z,   z' = -k n,   s' = δ (λ e + z)
//
// The last equation follows from ⟨s', n⟩ = 0, ⟨s', z⟩ = δ and ⟨s', e⟩ = δλ.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
// pchip.hpp in Boost 1.74 uses isnan without including its declaration.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "ruled/error.hpp"
#include "ruled/format.hpp"
#include "ruled/profile.hpp"

namespace ruled {

using Vec3 = Eigen::Vector3d;

/// Orthonormal companion frame at parameter u.
struct FrameState {
    double u = 0.0;
    Vec3 e = Vec3::UnitX(); ///< generator direction
    Vec3 n = Vec3::UnitY(); ///< central normal
    Vec3 z = Vec3::UnitZ(); ///< central tangent

    static FrameState canonical(double u) { return FrameState{u, Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}; }

    /// Largest of |⟨a,b⟩ − δ_ab| over the frame and |⟨e×n, z⟩ − 1|.
    double defect() const
    {
        const std::array<const Vec3*, 3> v{&e, &n, &z};
        double worst = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = a; b < 3; ++b) {
                const double target = a == b ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(v[a]->dot(*v[b]) - target));
            }
        }
        return std::max(worst, std::abs(e.cross(n).dot(z) - 1.0));
    }
};

/// Result of one frame step with the orthonormality defect before and after
/// re-orthonormalization.
struct FrameStep {
    FrameState state;
    double defect_before = 0.0;
    double defect_after = 0.0;
};

namespace detail {

struct MovingFrame {
    Vec3 e, n, z, s;
};

inline MovingFrame frame_rate(const MovingFrame& y, double k, double delta, double lambda)
{
    return MovingFrame{y.n, -y.e + k * y.z, -k * y.n, delta * (lambda * y.e + y.z)};
}

inline MovingFrame axpy(const MovingFrame& y, double a, const MovingFrame& d)
{
    return MovingFrame{y.e + a * d.e, y.n + a * d.n, y.z + a * d.z, y.s + a * d.s};
}

/// Classical RK4 of the frame (and striction point, when `with_striction`).
inline MovingFrame rk4(const MovingFrame& y, double u, double h, const InvariantProfile& profile, bool with_striction)
{
    auto rate = [&](const MovingFrame& state, double at) {
        const double k = profile.k(at);
        const double delta = with_striction ? profile.delta(at) : 0.0;
        const double lambda = with_striction ? profile.lambda(at) : 0.0;
        return frame_rate(state, k, delta, lambda);
    };
    const MovingFrame k1 = rate(y, u);
    const MovingFrame k2 = rate(axpy(y, 0.5 * h, k1), u + 0.5 * h);
    const MovingFrame k3 = rate(axpy(y, 0.5 * h, k2), u + 0.5 * h);
    const MovingFrame k4 = rate(axpy(y, h, k3), u + h);
    return MovingFrame{
        y.e + (h / 6.0) * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e),
        y.n + (h / 6.0) * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n),
        y.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        y.s + (h / 6.0) * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
    };
}

/// e first, then n, then z = e × n.
inline FrameState gram_schmidt(double u, const Vec3& e, const Vec3& n)
{
    FrameState f;
    f.u = u;
    f.e = e.normalized();
    f.n = (n - n.dot(f.e) * f.e).normalized();
    f.z = f.e.cross(f.n).normalized();
    return f;
}

} // namespace detail

/// One RK4 step of the frame equations followed by Gram–Schmidt.
inline FrameStep advance_frame_step(const FrameState& state, const InvariantProfile& profile, double h)
{
    if (h == 0.0) {
        return FrameStep{state, state.defect(), state.defect()};
    }
    profile.require(state.u);
    profile.require(state.u + h);
    const detail::MovingFrame y{state.e, state.n, state.z, Vec3::Zero()};
    const detail::MovingFrame next = detail::rk4(y, state.u, h, profile, false);
    const FrameState raw{state.u + h, next.e, next.n, next.z};
    FrameStep out;
    out.defect_before = raw.defect();
    out.state = detail::gram_schmidt(raw.u, raw.e, raw.n);
    out.defect_after = out.state.defect();
    return out;
}

inline FrameState advance_frame(const FrameState& state, const InvariantProfile& profile, double h)
{
    return advance_frame_step(state, profile, h).state;
}

/// Striction point and companion frame at one parameter value.
struct StrictionSample {
    double u = 0.0;
    Vec3 s = Vec3::Zero();
    FrameState frame;
};

/// Uniformly spaced samples of the striction line with their frames.
class StrictionCurve {
public:
    StrictionCurve() = default;

    StrictionCurve(std::vector<StrictionSample> samples, double step)
        : samples_(std::move(samples)), step_(step)
    {
        if (samples_.empty()) {
            throw PreconditionError("striction curve needs at least one sample");
        }
    }

    const std::vector<StrictionSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double step() const { return step_; }
    double u_min() const { return samples_.front().u; }
    double u_max() const { return samples_.back().u; }
    const StrictionSample& operator[](std::size_t i) const { return samples_[i]; }

    /// Index of the sample at or before u (clamped).
    std::size_t locate(double u) const
    {
        if (samples_.size() == 1 || step_ <= 0.0) {
            return 0;
        }
        const double pos = std::floor((u - u_min()) / step_);
        return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(samples_.size() - 2)));
    }

    /// max_i |⟨(s_{i+1} − s_{i−1})/(2h), n_i⟩|: the discrete ⟨s', e'⟩ = 0 residual.
    double max_tangent_normal_residual() const
    {
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < samples_.size(); ++i) {
            const Vec3 tangent = (samples_[i + 1].s - samples_[i - 1].s) / (2.0 * step_);
            worst = std::max(worst, std::abs(tangent.dot(samples_[i].frame.n)));
        }
        return worst;
    }

    /// Largest frame defect seen before re-orthonormalization while integrating.
    double max_defect_before = 0.0;
    /// Largest frame defect after re-orthonormalization.
    double max_defect_after = 0.0;

private:
    std::vector<StrictionSample> samples_;
    double step_ = 0.0;
};

namespace detail {

inline StrictionSample advance_sample(const StrictionSample& from, const InvariantProfile& profile, double h,
                                      double* defect_before = nullptr)
{
    const MovingFrame y{from.frame.e, from.frame.n, from.frame.z, from.s};
    const MovingFrame next = rk4(y, from.u, h, profile, true);
    if (defect_before) {
        *defect_before = FrameState{from.u + h, next.e, next.n, next.z}.defect();
    }
    StrictionSample out;
    out.u = from.u + h;
    out.s = next.s;
    out.frame = gram_schmidt(out.u, next.e, next.n);
    return out;
}

} // namespace detail

/// Integrates frame and striction line over [u0, u1] from the canonical frame
/// at the origin. The step is shrunk so that it divides u1 − u0 evenly.
inline StrictionCurve integrate_striction_frame(const InvariantProfile& profile, double u0, double u1, double h)
{
    if (!(h > 0.0)) {
        throw PreconditionError("integration step must be positive");
    }
    if (u1 < u0) {
        throw PreconditionError("integration interval must satisfy u0 <= u1");
    }
    profile.require(u0);
    profile.require(u1);

    std::vector<StrictionSample> samples;
    samples.push_back(StrictionSample{u0, Vec3::Zero(), FrameState::canonical(u0)});
    if (u1 == u0) {
        return StrictionCurve(std::move(samples), 0.0);
    }
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((u1 - u0) / h - 1e-9)));
    const double step = (u1 - u0) / static_cast<double>(steps);
    samples.reserve(steps + 1);

    double worst_before = 0.0;
    double worst_after = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        double before = 0.0;
        StrictionSample next = detail::advance_sample(samples.back(), profile, step, &before);
        next.u = i + 1 == steps ? u1 : u0 + step * static_cast<double>(i + 1);
        next.frame.u = next.u;
        if (before > 1e-6) {
            throw NumericError("frame lost orthonormality (defect " + format_double(before) + ") at u=" +
                               format_double(next.u));
        }
        if (profile.delta(next.u) == 0.0) {
            throw InvariantViolation("drall vanishes at u=" + format_double(next.u));
        }
        worst_before = std::max(worst_before, before);
        worst_after = std::max(worst_after, next.frame.defect());
        samples.push_back(next);
    }
    StrictionCurve curve(std::move(samples), step);
    curve.max_defect_before = worst_before;
    curve.max_defect_after = worst_after;
    return curve;
}

/// Three scalar profiles as one vector-valued function of u.
struct VectorProfile {
    std::array<ScalarProfile, 3> components;

    static VectorProfile expressions(std::string_view x, std::string_view y, std::string_view z)
    {
        return VectorProfile{{ScalarProfile::expression(x), ScalarProfile::expression(y), ScalarProfile::expression(z)}};
    }

    /// Samples values[i] at u0 + i*step.
    static VectorProfile table(double u0, double step, const std::vector<Vec3>& values)
    {
        std::array<std::vector<double>, 3> cols;
        for (auto& c : cols) {
            c.reserve(values.size());
        }
        for (const Vec3& v : values) {
            for (int a = 0; a < 3; ++a) {
                cols[a].push_back(v[a]);
            }
        }
        return VectorProfile{{ScalarProfile::table(u0, step, std::move(cols[0])),
                              ScalarProfile::table(u0, step, std::move(cols[1])),
                              ScalarProfile::table(u0, step, std::move(cols[2]))}};
    }

    Vec3 value(double u) const
    {
        return {components[0].value(u), components[1].value(u), components[2].value(u)};
    }

    Vec3 derivative(double u, int order) const
    {
        return {components[0].derivative(u, order), components[1].derivative(u, order),
                components[2].derivative(u, order)};
    }
};

/// A ruled surface c(u) + v d(u) in arbitrary parametrization.
struct RawRuledMap {
    VectorProfile directrix;
    VectorProfile direction;
    Interval domain;
};

/// Raw map through sampled striction points and unit generators.
inline RawRuledMap raw_map_from_samples(double u0, double step, const std::vector<Vec3>& striction,
                                        const std::vector<Vec3>& generators)
{
    if (striction.size() != generators.size() || striction.size() < 5) {
        throw PreconditionError("sampled ruled map needs matching striction and generator samples (at least 5)");
    }
    const double u1 = u0 + step * static_cast<double>(striction.size() - 1);
    return RawRuledMap{VectorProfile::table(u0, step, striction), VectorProfile::table(u0, step, generators),
                       Interval{u0, u1}};
}

inline RawRuledMap raw_map_from_striction(const StrictionCurve& curve)
{
    std::vector<Vec3> s, e;
    s.reserve(curve.size());
    e.reserve(curve.size());
    for (const StrictionSample& sample : curve.samples()) {
        s.push_back(sample.s);
        e.push_back(sample.frame.e);
    }
    return raw_map_from_samples(curve.u_min(), curve.step(), s, e);
}

struct ExtractionOptions {
    /// Output samples, uniform in the normalized parameter.
    std::size_t samples = 1025;
};

/// Invariants (as tables) and striction data of a raw map in standard form.
struct StandardForm {
    InvariantProfile profile;
    StrictionCurve striction;
    /// Raw parameter value belonging to each output sample.
    std::vector<double> raw_parameter;
};

namespace detail {

/// Unit generator and its first two raw-parameter derivatives.
struct UnitDirectionJet {
    Vec3 e, de, d2e;
};

inline UnitDirectionJet unit_direction_jet(const VectorProfile& direction, double u)
{
    const Vec3 d = direction.value(u);
    const Vec3 d1 = direction.derivative(u, 1);
    const Vec3 d2 = direction.derivative(u, 2);
    const double r = d.norm();
    if (!(r > 0.0)) {
        throw InvariantViolation("generator direction vanishes at u=" + format_double(u));
    }
    const Vec3 e = d / r;
    const double r1 = e.dot(d1);
    const double r2 = (d1.squaredNorm() + d.dot(d2) - r1 * r1) / r;
    const Vec3 de = (d1 - r1 * e) / r;
    const Vec3 d2e = (d2 - r2 * e - 2.0 * r1 * de) / r;
    return {e, de, d2e};
}

inline double spherical_speed(const VectorProfile& direction, double u)
{
    return unit_direction_jet(direction, u).de.norm();
}

} // namespace detail

/// Normalizes a raw ruled map: unit generators, spherical arc length as
/// parameter, striction line as directrix; returns k, δ, λ as tables.
inline StandardForm extract_standard_form(const RawRuledMap& raw, const ExtractionOptions& options = {})
{
    if (options.samples < 5) {
        throw PreconditionError("extraction needs at least 5 output samples");
    }
    if (!(raw.domain.lo < raw.domain.hi)) {
        throw PreconditionError("raw map domain must satisfy lo < hi");
    }
    constexpr double degenerate_speed = 1e-10;
    // |λ| below this is treated as an exact orthoid.
    constexpr double orthoid_snap = 1e-7;

    // Spherical arc length t(u) by composite Simpson on a grid 4x finer than the output.
    const std::size_t panels = 4 * (options.samples - 1);
    const double du = raw.domain.length() / static_cast<double>(panels);
    std::vector<double> u_fine(panels + 1), t_fine(panels + 1);
    auto speed = [&](double u) {
        const double rho = detail::spherical_speed(raw.direction, u);
        if (rho < degenerate_speed) {
            throw InvariantViolation("degenerate spherical image at u=" + format_double(u));
        }
        return rho;
    };
    u_fine[0] = raw.domain.lo;
    t_fine[0] = raw.domain.lo;
    double rho_left = speed(u_fine[0]);
    for (std::size_t i = 1; i <= panels; ++i) {
        u_fine[i] = i == panels ? raw.domain.hi : raw.domain.lo + du * static_cast<double>(i);
        const double a = u_fine[i - 1];
        const double b = u_fine[i];
        const double rho_right = speed(b);
        t_fine[i] = t_fine[i - 1] + (b - a) / 6.0 * (rho_left + 4.0 * speed(0.5 * (a + b)) + rho_right);
        rho_left = rho_right;
    }

    const double t_lo = t_fine.front();
    const double t_hi = t_fine.back();
    const double dt = (t_hi - t_lo) / static_cast<double>(options.samples - 1);

    // t -> u by monotone interpolation, polished with Newton on the exact arc length.
    boost::math::interpolators::pchip<std::vector<double>> inverse{std::vector<double>(t_fine),
                                                                   std::vector<double>(u_fine)};
    auto arc_length_to = [&](double u) {
        const auto pos = std::clamp(std::floor((u - raw.domain.lo) / du), 0.0, static_cast<double>(panels - 1));
        const auto i = static_cast<std::size_t>(pos);
        return t_fine[i] + boost::math::quadrature::gauss<double, 10>::integrate(speed, u_fine[i], u);
    };

    std::vector<double> raw_u(options.samples);
    std::vector<double> ks(options.samples), deltas(options.samples), lambdas(options.samples);
    std::vector<StrictionSample> samples(options.samples);
    for (std::size_t j = 0; j < options.samples; ++j) {
        const double t = j + 1 == options.samples ? t_hi : t_lo + dt * static_cast<double>(j);
        double u = std::clamp(inverse(t), raw.domain.lo, raw.domain.hi);
        for (int iter = 0; iter < 3 && j > 0 && j + 1 < options.samples; ++iter) {
            u = std::clamp(u - (arc_length_to(u) - t) / speed(u), raw.domain.lo, raw.domain.hi);
        }
        if (j == 0) u = raw.domain.lo;
        if (j + 1 == options.samples) u = raw.domain.hi;
        raw_u[j] = u;

        const auto [e, de, d2e] = detail::unit_direction_jet(raw.direction, u);
        const Vec3 c = raw.directrix.value(u);
        const Vec3 c1 = raw.directrix.derivative(u, 1);
        const Vec3 c2 = raw.directrix.derivative(u, 2);
        const double rho2 = de.squaredNorm();
        const double rho = std::sqrt(rho2);
        if (rho < degenerate_speed) {
            throw InvariantViolation("degenerate spherical image at u=" + format_double(u));
        }
        // Striction offset a(u) and its derivative.
        const double a = c1.dot(de) / rho2;
        const double a1 = (c2.dot(de) + c1.dot(d2e)) / rho2 - c1.dot(de) * 2.0 * de.dot(d2e) / (rho2 * rho2);
        const Vec3 s = c - a * e;
        const Vec3 s1 = c1 - a1 * e - a * de;

        ks[j] = e.dot(de.cross(d2e)) / (rho2 * rho);
        deltas[j] = e.dot(de.cross(s1)) / rho2;
        if (deltas[j] == 0.0) {
            throw InvariantViolation("torsal generator at u=" + format_double(u));
        }
        lambdas[j] = s1.dot(e) / (rho * deltas[j]);

        samples[j].u = t;
        samples[j].s = s;
        samples[j].frame = FrameState{t, e, de / rho, e.cross(de / rho)};
    }

    double delta_scale = 0.0;
    for (double d : deltas) {
        delta_scale = std::max(delta_scale, std::abs(d));
    }
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        if (std::abs(deltas[j]) <= 1e-8 * delta_scale || (j > 0 && (deltas[j] > 0.0) != (deltas[j - 1] > 0.0))) {
            throw InvariantViolation("torsal generator near u=" + format_double(raw_u[j]));
        }
    }

    // Orient e so that ⟨s', e⟩ >= 0 (sign σ = sign δ). Reversing e negates k
    // and λ and leaves δ unchanged.
    double orientation = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        orientation += lambdas[j] * (deltas[j] > 0.0 ? 1.0 : -1.0);
    }
    if (orientation < 0.0) {
        for (std::size_t j = 0; j < deltas.size(); ++j) {
            ks[j] = -ks[j];
            lambdas[j] = -lambdas[j];
            samples[j].frame.e = -samples[j].frame.e;
            samples[j].frame.n = -samples[j].frame.n;
        }
    }
    for (double& l : lambdas) {
        if (std::abs(l) <= orthoid_snap) {
            l = 0.0;
        }
    }

    const Interval t_domain{t_lo, t_hi};
    InvariantProfile profile = InvariantProfile::from_lambda(
        ScalarProfile::table(t_lo, dt, std::move(ks)), ScalarProfile::table(t_lo, dt, std::move(deltas)),
        ScalarProfile::table(t_lo, dt, std::move(lambdas)), t_domain, "extracted");
    return StandardForm{std::move(profile), StrictionCurve(std::move(samples), dt), std::move(raw_u)};
}

} // namespace ruled

#endif // RULED_FRAME_HPP
