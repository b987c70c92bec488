#pragma once

// Independent oracles for the solvers: quadrature of the kernel against the
// interpolation basis, piecewise integral operators evaluated on sampled
// data, closed-form solutions of the linear relaxation problem for each
// operator, and empirical convergence-order estimation.

#include <pwlv/fractional_weights.hpp>
#include <pwlv/model.hpp>
#include <pwlv/solvers.hpp>
#include <pwlv/special_functions.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pwlv {

/// Adaptive 31-point Gauss-Kronrod, relative tolerance 1e-10, depth capped at 15.
template <class Fn>
double adaptive_quadrature(Fn&& fn, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    return gauss_kronrod<double, 31>::integrate(std::forward<Fn>(fn), a, b, 15, 1e-10, &err);
}

/// Quadrature counterpart of interval_weights(). The substitution
/// w = (distance - s)^order turns the weakly singular kernel into a constant,
/// so the endpoint singularity is integrated analytically.
inline std::array<double, 3> interval_weights_by_quadrature(double order, double distance,
                                                            std::array<double, 3> nodes) {
    std::array<double, 3> out{};
    const double lo = std::pow(distance - 1.0, order);
    const double hi = std::pow(distance, order);
    for (int i = 0; i < 3; ++i) {
        const double a = nodes[i];
        const double b = nodes[(i + 1) % 3];
        const double c = nodes[(i + 2) % 3];
        auto basis = [=](double s) { return (s - b) * (s - c) / ((a - b) * (a - c)); };
        auto integrand = [&](double w) { return basis(distance - std::pow(w, 1.0 / order)); };
        out[i] = adaptive_quadrature(integrand, lo, hi) / (order * std::tgamma(order));
    }
    return out;
}

inline WeightTriple caputo_weights_by_quadrature(FractionalOrder delta, std::size_t lag) {
    const auto w = interval_weights_by_quadrature(delta.value(), static_cast<double>(lag) + 1.0,
                                                  {0.0, -1.0, -2.0});
    return {w[0], w[1], w[2]};
}

/// Tail operator of a piecewise integral.
enum class IntegralKind {
    RiemannLiouville,  // power-law kernel
    CaputoFabrizio,    // exponential-decay kernel
    AtanganaBaleanu,   // Mittag-Leffler kernel
};

namespace detail {

/// Product-trapezoid Riemann-Liouville integral int_0^{n h} (nh - s)^(d-1) g(s) ds
/// of the piecewise-linear interpolant of g_0..g_n (without the 1/Gamma factor).
inline double product_trapezoid(std::span<const double> g, double h, double d) {
    const std::size_t n = g.size() - 1;
    if (n == 0) return 0.0;
    const double nd = static_cast<double>(n);
    auto p = [d](double v) { return v <= 0.0 ? 0.0 : std::pow(v, d + 1.0); };
    double sum = (p(nd - 1.0) - (nd - 1.0 - d) * std::pow(nd, d)) * g[0];
    for (std::size_t j = 1; j < n; ++j) {
        const double m = nd - static_cast<double>(j);
        sum += (p(m + 1.0) - 2.0 * p(m) + p(m - 1.0)) * g[j];
    }
    sum += g[n];
    return std::pow(h, d) / (d * (d + 1.0)) * sum;
}

inline double trapezoid(std::span<const double> g, double h) {
    if (g.size() < 2) return 0.0;
    double s = 0.5 * (g.front() + g.back());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) s += g[i];
    return h * s;
}

}  // namespace detail

/// Piecewise integral of samples f_i = f(i h): trapezoid rule on [0, t_1]
/// plus the chosen fractional integral on [t_1, t], with t_1 = breakpoint*h
/// and t = eval*h. The tail integrates the piecewise-linear interpolant exactly.
inline double piecewise_integral(IntegralKind kind, std::span<const double> samples, double h,
                                 std::size_t breakpoint, std::size_t eval, FractionalOrder delta) {
    if (!(h > 0.0)) throw std::domain_error("piecewise_integral: step must be positive");
    if (breakpoint > eval || eval >= samples.size()) {
        throw std::domain_error("piecewise_integral: need breakpoint <= eval < samples.size()");
    }
    const double d = delta.value();
    const double head = detail::trapezoid(samples.subspan(0, breakpoint + 1), h);
    const auto tail_samples = samples.subspan(breakpoint, eval - breakpoint + 1);
    const double f_t = samples[eval];

    switch (kind) {
        case IntegralKind::RiemannLiouville:
            return head + detail::product_trapezoid(tail_samples, h, d) / gamma(d);
        case IntegralKind::CaputoFabrizio: {
            const double m = cf_normalization(delta);
            return head + (1.0 - d) / m * f_t + d / m * detail::trapezoid(tail_samples, h);
        }
        case IntegralKind::AtanganaBaleanu: {
            const double ab = ab_normalization(delta);
            return head + (1.0 - d) / ab * f_t +
                   d / (ab * gamma(d)) * detail::product_trapezoid(tail_samples, h, d);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Solution of the Caputo problem D^d Q = -rate Q, Q(0) = 1:  E_d(-rate t^d).
inline double analytic_caputo_relaxation(FractionalOrder delta, double rate, double t) {
    if (!(t >= 0.0)) throw std::domain_error("analytic_caputo_relaxation: t must be >= 0");
    if (t == 0.0) return 1.0;
    return mittag_leffler(delta, -rate * std::pow(t, delta.value()));
}

/// Solution of the Atangana-Baleanu (Caputo sense) problem D^d Q = -rate Q,
/// Q(0) = 1, for t > 0:  c E_d(-kappa t^d), c = AB/(AB + rate(1-d)),
/// kappa = rate d/(AB + rate(1-d)). Obtained by Laplace transform; the
/// prefactor c is the jump the operator forces at t = 0+.
inline double analytic_abc_relaxation(FractionalOrder delta, double rate, double t) {
    if (!(t >= 0.0)) throw std::domain_error("analytic_abc_relaxation: t must be >= 0");
    if (t == 0.0) return 1.0;
    const double d = delta.value();
    const double ab = ab_normalization(delta);
    const double denom = ab + rate * (1.0 - d);
    return ab / denom * mittag_leffler(delta, -rate * d / denom * std::pow(t, d));
}

/// Solution of the Caputo-Fabrizio problem D^d Q = -rate Q, Q(0) = 1, t > 0:
/// c exp(-kappa t), c = M/(M + rate(1-d)), kappa = rate d/(M + rate(1-d)).
inline double analytic_cf_relaxation(FractionalOrder delta, double rate, double t) {
    if (!(t >= 0.0)) throw std::domain_error("analytic_cf_relaxation: t must be >= 0");
    if (t == 0.0) return 1.0;
    const double d = delta.value();
    const double m = cf_normalization(delta);
    const double denom = m + rate * (1.0 - d);
    return m / denom * std::exp(-rate * d / denom * t);
}

struct OrderEstimate {
    double observed_order = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> step_pairs;  // (h, error)
    bool monotone = true;     // errors shrink as h shrinks
    bool at_roundoff = false; // errors too small to measure an order
};

/// Endpoint errors at each h (halving sequence), observed order
/// log2(err(h)/err(h/2)) averaged over the two finest pairs.
inline OrderEstimate estimate_order(const std::function<double(double)>& error_at,
                                    std::span<const double> h_list) {
    if (h_list.size() < 3) throw std::domain_error("estimate_order: need at least 3 step sizes");
    for (std::size_t i = 1; i < h_list.size(); ++i) {
        if (std::abs(h_list[i - 1] / h_list[i] - 2.0) > 1e-9) {
            throw std::domain_error("estimate_order: step sizes must form a halving sequence");
        }
    }
    OrderEstimate est;
    for (double h : h_list) est.step_pairs.emplace_back(h, std::abs(error_at(h)));

    bool all_tiny = true;
    for (std::size_t i = 0; i < est.step_pairs.size(); ++i) {
        if (est.step_pairs[i].second > 1e-13) all_tiny = false;
        if (i > 0 && est.step_pairs[i].second >= est.step_pairs[i - 1].second) est.monotone = false;
    }
    if (all_tiny) {
        est.at_roundoff = true;
        return est;
    }
    const std::size_t n = est.step_pairs.size();
    double acc = 0.0;
    for (std::size_t i = n - 2; i < n; ++i) {
        acc += std::log2(est.step_pairs[i - 1].second / est.step_pairs[i].second);
    }
    est.observed_order = acc / 2.0;
    return est;
}

/// Endpoint error of the classical AB3 segment on Q' = -Q, Q(0) = 1, over [0, 1].
inline double ab3_decay_error(double h) {
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / h));
    const auto f = [](const State& s) { return State{-s.x, 0.0}; };
    const auto q = classical_segment(f, {1.0, 0.0}, steps, h);
    return q.back().x - std::exp(-1.0);
}

/// Endpoint relative error of a single fractional segment on D^d Q = -rate Q,
/// Q(0) = 1, over [0, horizon].
inline double fractional_decay_error(SegmentKind kind, FractionalOrder delta, double rate, double h,
                                     double horizon = 1.0) {
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    const auto f = [rate](const State& s) { return State{-rate * s.x, 0.0}; };
    std::vector<State> q;
    double exact = 0.0;
    switch (kind) {
        case SegmentKind::Caputo:
            q = caputo_segment(f, {1.0, 0.0}, steps, h, delta);
            exact = analytic_caputo_relaxation(delta, rate, horizon);
            break;
        case SegmentKind::AtanganaBaleanu:
            q = abc_segment(f, {1.0, 0.0}, steps, h, delta);
            exact = analytic_abc_relaxation(delta, rate, horizon);
            break;
        case SegmentKind::CaputoFabrizio:
            q = cf_segment(f, {1.0, 0.0}, steps, h, delta);
            exact = analytic_cf_relaxation(delta, rate, horizon);
            break;
        default:
            throw std::domain_error("fractional_decay_error: kind must be fractional");
    }
    return std::abs(q.back().x - exact) / std::abs(exact);
}

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
};

struct VerifyOptions {
    /// Added to every extrapolating weight before the quadrature comparison.
    double weight_perturbation = 0.0;
};

/// The oracle suite behind `verify`.
inline std::vector<CheckResult> run_verification(const VerifyOptions& opts = {}) {
    std::vector<CheckResult> out;
    auto record = [&](std::string name, double observed, double expected, double tol) {
        const bool ok = std::isfinite(observed) && std::abs(observed - expected) <= tol;
        out.push_back({std::move(name), ok, observed, expected, tol});
    };

    for (double d : {0.5, 0.8, 0.95}) {
        const std::size_t lags = 51;
        WeightTable table(d, lags);
        if (opts.weight_perturbation != 0.0) table.perturb(opts.weight_perturbation);
        double worst = 0.0;
        for (std::size_t m = 0; m < lags; ++m) {
            const auto ref = caputo_weights_by_quadrature(FractionalOrder(d), m);
            const auto& w = table.lag(m);
            worst = std::max({worst, std::abs(w.w0 - ref.w0), std::abs(w.w1 - ref.w1), std::abs(w.w2 - ref.w2)});
        }
        record("weights vs quadrature, delta=" + std::to_string(d).substr(0, 4) + ", lags 0..50", worst, 0.0, 1e-8);

        double worst_start = 0.0;
        for (std::size_t dist = 1; dist <= 50; ++dist) {
            const auto a = table.first_interval(dist);
            const auto b = interval_weights_by_quadrature(d, static_cast<double>(dist), {0.0, 1.0, 2.0});
            const auto c = table.second_interval(dist);
            const auto e = interval_weights_by_quadrature(d, static_cast<double>(dist), {-1.0, 0.0, 1.0});
            for (int i = 0; i < 3; ++i) {
                worst_start = std::max({worst_start, std::abs(a[i] - b[i]), std::abs(c[i] - e[i])});
            }
        }
        record("start-up weights vs quadrature, delta=" + std::to_string(d).substr(0, 4), worst_start, 0.0, 1e-8);
    }

    {
        const auto w = caputo_weights(FractionalOrder(1.0), 7);
        const double dev = std::max({std::abs(w.w0 - 23.0 / 12.0), std::abs(w.w1 + 16.0 / 12.0),
                                     std::abs(w.w2 - 5.0 / 12.0)});
        record("delta=1 weights equal AB3 coefficients", dev, 0.0, 1e-12);
    }

    {
        double worst = 0.0;
        for (int i = -50; i <= 50; ++i) {
            const double z = 0.1 * i;
            const double ref = std::exp(z);
            worst = std::max(worst, std::abs(mittag_leffler(FractionalOrder(1.0), z) - ref) / ref);
        }
        record("E_1(z) = exp(z), z in [-5, 5] (relative)", worst, 0.0, 1e-8);
        record("E_0.8(0) = 1", mittag_leffler(FractionalOrder(0.8), 0.0), 1.0, 0.0);
        record("E_0.5(-1) = e erfc(1)", mittag_leffler(FractionalOrder(0.5), -1.0), std::exp(1.0) * std::erfc(1.0), 1e-12);
    }

    {
        const LotkaVolterraParams p{1.0, 2.0, 1.0, 1.5, 1.0, 0.0, 0.0};
        const auto f = [&p](const State& s) { return drift(p, s); };
        const double h = 1e-3;
        const std::size_t steps = 1000;
        const auto ref = classical_segment(f, {1.0, 2.0}, steps, h);
        const FractionalOrder one(1.0);
        auto worst_dev = [&](const std::vector<State>& q) {
            double w = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) w = std::max(w, detail::norm_inf(q[i] - ref[i]));
            return w;
        };
        record("caputo at delta=1 matches AB3", worst_dev(caputo_segment(f, {1.0, 2.0}, steps, h, one)), 0.0, 1e-8);
        record("caputo-fabrizio at delta=1 matches AB3", worst_dev(cf_segment(f, {1.0, 2.0}, steps, h, one)), 0.0, 1e-8);
        record("atangana-baleanu at delta=1 matches AB3", worst_dev(abc_segment(f, {1.0, 2.0}, steps, h, one)), 0.0, 1e-8);
    }

    for (double d : {0.5, 0.9}) {
        const std::string tag = std::to_string(d).substr(0, 3);
        record("caputo relaxation vs Mittag-Leffler, delta=" + tag,
               fractional_decay_error(SegmentKind::Caputo, FractionalOrder(d), 1.0, 1e-3), 0.0, 1e-3);
        record("atangana-baleanu relaxation vs closed form, delta=" + tag,
               fractional_decay_error(SegmentKind::AtanganaBaleanu, FractionalOrder(d), 1.0, 1e-3), 0.0, 1e-3);
        record("caputo-fabrizio relaxation vs closed form, delta=" + tag,
               fractional_decay_error(SegmentKind::CaputoFabrizio, FractionalOrder(d), 1.0, 1e-3), 0.0, 1e-3);
    }

    {
        const std::array<double, 4> hs{0.02, 0.01, 0.005, 0.0025};
        const auto est = estimate_order(ab3_decay_error, hs);
        record("AB3 observed order on Q' = -Q", est.observed_order, 3.0, 0.3);
    }

    {
        const double h = 0.01;
        std::vector<double> lin(201);
        for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = h * static_cast<double>(i);
        const std::size_t k1 = 50, n = 200;
        const double d = 0.7;
        const double t1 = h * k1, t = h * n;
        const double head = 0.5 * t1 * t1;
        const double tail = adaptive_quadrature(
            [&](double w) { return t - std::pow(w, 1.0 / d); }, 0.0, std::pow(t - t1, d)) /
            (d * std::tgamma(d));
        record("piecewise RL integral of f(t)=t vs quadrature",
               piecewise_integral(IntegralKind::RiemannLiouville, lin, h, k1, n, FractionalOrder(d)),
               head + tail, 1e-8);
    }
    return out;
}

}  // namespace pwlv
