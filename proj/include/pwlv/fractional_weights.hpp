#pragma once

// Product-integration weights: the quadratic Newton interpolant of the drift
// integrated exactly against the Riemann-Liouville kernel (t - s)^(delta-1)/Gamma(delta).

#include <pwlv/special_functions.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pwlv {

/// Quadratic through (t0, v0), (t0+h, v1), (t0+2h, v2) in Newton forward form
/// anchored at t0:  c0 + c1 (t-t0)/h + c2 (t-t0)(t-t0-h)/h^2.
struct NewtonQuadratic {
    double anchor = 0.0;
    double step = 1.0;
    double c0 = 0.0;  // v0
    double c1 = 0.0;  // first forward difference
    double c2 = 0.0;  // half the second forward difference

    double operator()(double t) const noexcept {
        const double s = (t - anchor) / step;
        return c0 + c1 * s + c2 * s * (s - 1.0);
    }
};

/// Samples are taken at t_{j-2}, t_{j-1}, t_j; `anchor` is t_{j-2}.
inline NewtonQuadratic newton_polynomial(std::array<double, 3> samples, double h, double anchor = 0.0) {
    if (!(h > 0.0)) throw std::domain_error("newton_polynomial: step must be positive");
    const auto [e2, e1, e0] = samples;
    return {anchor, h, e2, e1 - e2, 0.5 * (e0 - 2.0 * e1 + e2)};
}

/// Coefficients multiplying (e_j, e_{j-1}, e_{j-2}) in one interval's contribution.
struct WeightTriple {
    double w0 = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;

    double sum() const noexcept { return w0 + w1 + w2; }
};

namespace detail {

/// (b^p - a^p) for 0 <= a < b, without cancellation when a is close to b.
inline double power_difference(double b, double a, double p) {
    if (a == 0.0) return std::pow(b, p);
    return std::pow(a, p) * std::expm1(p * std::log1p((b - a) / a));
}

}  // namespace detail

/// Kernel moments  J_k = int_0^1 s^k (A - s)^(order-1) ds,  k = 0, 1, 2,  A >= 1.
///
/// Small A uses the exact antiderivative in u = A - s; larger A expands
/// (1 - s/A)^(order-1) in its binomial series, which converges like A^-n and
/// avoids the cancellation the antiderivative suffers from there.
inline std::array<double, 3> kernel_moments(double order, double distance) {
    if (!(distance >= 1.0)) throw std::domain_error("kernel_moments: distance must be >= 1");
    if (!(order > 0.0 && order <= 1.0)) throw std::domain_error("kernel_moments: order outside (0, 1]");

    if (order == 1.0) return {1.0, 0.5, 1.0 / 3.0};

    const double a = distance;
    const double m = distance - 1.0;
    if (m < 4.0) {
        std::array<double, 3> i{};
        for (int k = 0; k < 3; ++k) {
            i[k] = detail::power_difference(a, m, order + k) / (order + k);
        }
        return {i[0], a * i[0] - i[1], a * a * i[0] - 2.0 * a * i[1] + i[2]};
    }

    const double x = 1.0 / a;
    std::array<double, 3> sum{1.0, 0.5, 1.0 / 3.0};
    double coeff = 1.0;  // binom(order-1, n) (-1)^n, always positive
    double xn = 1.0;
    for (int n = 1; n < 200; ++n) {
        coeff *= (n - order) / n;
        xn *= x;
        const double t = coeff * xn;
        sum[0] += t / (n + 1);
        sum[1] += t / (n + 2);
        sum[2] += t / (n + 3);
        if (t < 1e-18 * sum[2]) break;
    }
    const double scale = std::pow(a, order - 1.0);
    return {scale * sum[0], scale * sum[1], scale * sum[2]};
}

/// Weights of one interval [t_j, t_j + h] observed from t_j + distance*h, for
/// the quadratic interpolant through nodes at t_j + nodes[i]*h. Entry i
/// multiplies the drift value at nodes[i]. Includes 1/Gamma(order); the
/// caller applies h^order.
inline std::array<double, 3> interval_weights(double order, double distance,
                                              std::array<double, 3> nodes) {
    const auto jm = kernel_moments(order, distance);
    const double g = (order == 1.0) ? 1.0 : gamma(order);
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i) {
        const double b = nodes[(i + 1) % 3];
        const double c = nodes[(i + 2) % 3];
        const double denom = (nodes[i] - b) * (nodes[i] - c);
        // Lagrange basis (s - b)(s - c)/denom = (s^2 - (b+c) s + bc)/denom
        w[i] = (jm[2] - (b + c) * jm[1] + b * c * jm[0]) / (denom * g);
    }
    return w;
}

/// Extrapolating weights for lag = n - j: the interval [t_j, t_{j+1}] seen from
/// t_{n+1}, interpolant through t_{j-2}, t_{j-1}, t_j.
inline WeightTriple caputo_weights(FractionalOrder delta, std::size_t lag) {
    const auto w = interval_weights(delta.value(), static_cast<double>(lag) + 1.0, {0.0, -1.0, -2.0});
    return {w[0], w[1], w[2]};
}

/// Product-rectangle weight ((lag+1)^delta - lag^delta) / Gamma(delta + 1).
inline double rectangle_weight(FractionalOrder delta, std::size_t lag) {
    const double d = delta.value();
    const double m = static_cast<double>(lag);
    return detail::power_difference(m + 1.0, m, d) / gamma(d + 1.0);
}

/// Precomputed weights for a segment of `steps` intervals.
///
/// The first two intervals have no trailing history; they use the quadratic
/// through the segment's first three samples (t_0, t_1, t_2) instead.
class WeightTable {
public:
    WeightTable(double order, std::size_t steps) : order_(order) {
        if (!(order > 0.0 && order <= 1.0)) throw std::domain_error("WeightTable: order outside (0, 1]");
        lag_.reserve(steps);
        for (std::size_t m = 0; m < steps; ++m) {
            const auto w = interval_weights(order, static_cast<double>(m) + 1.0, {0.0, -1.0, -2.0});
            lag_.push_back({w[0], w[1], w[2]});
        }
        first_.reserve(steps);
        second_.reserve(steps);
        for (std::size_t d = 1; d <= steps; ++d) {
            first_.push_back(interval_weights(order, static_cast<double>(d), {0.0, 1.0, 2.0}));
            second_.push_back(interval_weights(order, static_cast<double>(d), {-1.0, 0.0, 1.0}));
        }
    }

    double order() const noexcept { return order_; }
    std::size_t size() const noexcept { return lag_.size(); }

    const WeightTriple& lag(std::size_t m) const { return lag_.at(m); }
    /// Interval [t_0, t_1] seen from distance d (in steps) past t_0; entries multiply e_0, e_1, e_2.
    const std::array<double, 3>& first_interval(std::size_t d) const { return first_.at(d - 1); }
    /// Interval [t_1, t_2] seen from distance d past t_1.
    const std::array<double, 3>& second_interval(std::size_t d) const { return second_.at(d - 1); }

    /// Test hook: shifts every extrapolating weight by `eps`.
    void perturb(double eps) {
        for (auto& w : lag_) {
            w.w0 += eps;
            w.w1 += eps;
            w.w2 += eps;
        }
    }

private:
    double order_;
    std::vector<WeightTriple> lag_;
    std::vector<std::array<double, 3>> first_;
    std::vector<std::array<double, 3>> second_;
};

}  // namespace pwlv
