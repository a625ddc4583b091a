#ifndef RULED_SPLINE_HPP
#define RULED_SPLINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ruled/error.hpp"

namespace ruled {

/// C² cubic spline through uniformly spaced samples. The end slopes are
/// taken from a fourth-order one-sided difference, which keeps the second
/// derivative O(h²)-accurate up to the boundary. Reproduces cubics exactly.
class UniformCubicSpline {
public:
    UniformCubicSpline() = default;

    UniformCubicSpline(double x0, double step, std::vector<double> values)
        : x0_(x0), step_(step), y_(std::move(values))
    {
        if (!(step_ > 0.0)) {
            throw PreconditionError("spline step must be positive");
        }
        if (y_.size() < 5) {
            throw PreconditionError("spline needs at least 5 samples, got " + std::to_string(y_.size()));
        }
        solve_second_derivatives();
    }

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + step_ * static_cast<double>(y_.size() - 1); }
    double step() const { return step_; }
    std::size_t size() const { return y_.size(); }
    const std::vector<double>& values() const { return y_; }

    /// order 0..3 derivative of the interpolant.
    double evaluate(double x, int order = 0) const
    {
        const double span = x_max() - x0_;
        const double slack = 1e-12 * std::max(1.0, std::abs(span));
        if (x < x0_ - slack || x > x_max() + slack) {
            throw DomainError("table query at " + std::to_string(x) + " outside [" + std::to_string(x0_) +
                              ", " + std::to_string(x_max()) + "]");
        }
        const double pos = (x - x0_) / step_;
        auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(y_.size() - 2)));
        const double h = step_;
        const double a = x0_ + h * static_cast<double>(i + 1) - x; // distance to right node
        const double b = x - (x0_ + h * static_cast<double>(i));   // distance to left node
        const double m0 = m_[i];
        const double m1 = m_[i + 1];
        const double y0 = y_[i];
        const double y1 = y_[i + 1];
        switch (order) {
        case 0:
            return m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a +
                   (y1 / h - m1 * h / 6.0) * b;
        case 1:
            return -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0) +
                   (y1 / h - m1 * h / 6.0);
        case 2:
            return m0 * a / h + m1 * b / h;
        case 3:
            return (m1 - m0) / h;
        default:
            return 0.0;
        }
    }

private:
    // Second derivatives M_i from
    //   M_{i-1} + 4 M_i + M_{i+1} = 6/h² (y_{i-1} - 2 y_i + y_{i+1})
    // closed by the clamped end rows
    //   2 M_0 + M_1 = 6/h ((y_1 - y_0)/h - y'_0),  M_{n-2} + 2 M_{n-1} = 6/h (y'_{n-1} - (y_{n-1} - y_{n-2})/h).
    void solve_second_derivatives()
    {
        const std::size_t n = y_.size();
        const double h = step_;
        auto one_sided = [&](std::size_t i0, double dir) {
            auto y = [&](std::size_t j) { return y_[dir > 0 ? i0 + j : i0 - j]; };
            return dir * (-25.0 / 12.0 * y(0) + 4.0 * y(1) - 3.0 * y(2) + 4.0 / 3.0 * y(3) - 0.25 * y(4)) / h;
        };
        const double slope_lo = one_sided(0, 1.0);
        const double slope_hi = one_sided(n - 1, -1.0);

        std::vector<double> lower(n, 1.0), diag(n, 4.0), upper(n, 1.0), r(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            r[i] = 6.0 / (h * h) * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]);
        }
        diag[0] = 2.0;
        r[0] = 6.0 / h * ((y_[1] - y_[0]) / h - slope_lo);
        diag[n - 1] = 2.0;
        r[n - 1] = 6.0 / h * (slope_hi - (y_[n - 1] - y_[n - 2]) / h);

        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            r[i] -= w * r[i - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = r[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            m_[i] = (r[i] - upper[i] * m_[i + 1]) / diag[i];
        }
    }

    double x0_ = 0.0;
    double step_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;
};

} // namespace ruled

#endif // RULED_SPLINE_HPP
