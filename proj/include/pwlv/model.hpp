#pragma once

// Lotka-Volterra predator-prey vector field, equilibria and their linear
// stability, and the Lipschitz/uniqueness bound for the fractional system.

#include <pwlv/special_functions.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pwlv {

/// Prey/predator pair. Also used for rates (drift values).
struct State {
    double x = 0.0;
    double y = 0.0;

    State& operator+=(const State& o) noexcept { x += o.x; y += o.y; return *this; }
    State& operator-=(const State& o) noexcept { x -= o.x; y -= o.y; return *this; }
    State& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend State operator+(State a, const State& b) noexcept { return a += b; }
    friend State operator-(State a, const State& b) noexcept { return a -= b; }
    friend State operator*(State a, double s) noexcept { return a *= s; }
    friend State operator*(double s, State a) noexcept { return a *= s; }
    friend bool operator==(const State&, const State&) = default;

    bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

struct LotkaVolterraParams {
    double r = 1.0;        // prey growth rate
    double lambda1 = 0.0;  // prey self-limitation
    double lambda2 = 0.0;  // predation rate
    double lambda3 = 0.0;  // predator conversion rate
    double lambda4 = 0.0;  // predator death rate
    double sigma1 = 0.0;   // prey noise intensity
    double sigma2 = 0.0;   // predator noise intensity

    friend bool operator==(const LotkaVolterraParams&, const LotkaVolterraParams&) = default;

    /// Throws std::domain_error naming the first offending field.
    void validate() const {
        auto check = [](double v, const char* name, bool nonneg) {
            if (!std::isfinite(v)) {
                throw std::domain_error(std::string(name) + " must be finite");
            }
            if (nonneg && v < 0.0) {
                throw std::domain_error(std::string(name) + " must be >= 0, got " + std::to_string(v));
            }
        };
        check(r, "r", false);
        check(lambda1, "lambda1", true);
        check(lambda2, "lambda2", true);
        check(lambda3, "lambda3", true);
        check(lambda4, "lambda4", true);
        check(sigma1, "sigma1", true);
        check(sigma2, "sigma2", true);
    }
};

inline State drift(const LotkaVolterraParams& p, const State& s) noexcept {
    return {s.x * (p.r - p.lambda1 * s.x - p.lambda2 * s.y),
            s.y * (-p.lambda4 + p.lambda3 * s.x)};
}

/// Row-major 2x2 matrix.
using Matrix2 = std::array<std::array<double, 2>, 2>;

inline Matrix2 jacobian(const LotkaVolterraParams& p, const State& s) noexcept {
    return {{{p.r - 2.0 * p.lambda1 * s.x - p.lambda2 * s.y, -p.lambda2 * s.x},
             {p.lambda3 * s.y, -p.lambda4 + p.lambda3 * s.x}}};
}

enum class Classification {
    UnstableNode,
    StableNode,
    Saddle,
    UnstableSpiral,
    StableSpiral,
    Center,
    Degenerate,
};

inline std::string_view to_string(Classification c) noexcept {
    switch (c) {
        case Classification::UnstableNode: return "UnstableNode";
        case Classification::StableNode: return "StableNode";
        case Classification::Saddle: return "Saddle";
        case Classification::UnstableSpiral: return "UnstableSpiral";
        case Classification::StableSpiral: return "StableSpiral";
        case Classification::Center: return "Center";
        case Classification::Degenerate: return "Degenerate";
    }
    return "?";
}

inline bool is_stable(Classification c) noexcept {
    return c == Classification::StableNode || c == Classification::StableSpiral ||
           c == Classification::Center;
}

using EigenPair = std::pair<std::complex<double>, std::complex<double>>;

/// Roots of lambda^2 - trace*lambda + det. Real roots use the cancellation-free
/// form; complex roots come out as a conjugate pair.
inline EigenPair eigenvalues(const Matrix2& a) noexcept {
    const double tr = a[0][0] + a[1][1];
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double q = -0.5 * (-tr + std::copysign(std::sqrt(disc), -tr));
        if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
        double n1 = q;
        double n2 = det / q;
        if (n1 < n2) std::swap(n1, n2);
        return {{n1, 0.0}, {n2, 0.0}};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {{0.5 * tr, im}, {0.5 * tr, -im}};
}

namespace detail {
inline bool negligible(double part, double scale) noexcept {
    return std::abs(part) <= 1e-12 * std::max(1.0, scale);
}
}  // namespace detail

/// Linear-stability class of a planar equilibrium from its eigenvalues.
inline Classification classify(const EigenPair& ev) {
    const auto [v1, v2] = ev;
    if (!std::isfinite(v1.real()) || !std::isfinite(v1.imag()) ||
        !std::isfinite(v2.real()) || !std::isfinite(v2.imag())) {
        throw std::domain_error("classify: eigenvalues must be finite");
    }
    const double scale = std::max(std::abs(v1), std::abs(v2));
    if (detail::negligible(std::abs(v1), scale) || detail::negligible(std::abs(v2), scale) ||
        std::abs(v1) == 0.0 || std::abs(v2) == 0.0) {
        return Classification::Degenerate;
    }

    const bool complex_pair = !detail::negligible(v1.imag(), scale) || !detail::negligible(v2.imag(), scale);
    if (complex_pair) {
        const double re = 0.5 * (v1.real() + v2.real());
        if (detail::negligible(re, scale)) return Classification::Center;
        return re < 0.0 ? Classification::StableSpiral : Classification::UnstableSpiral;
    }

    const double a = v1.real();
    const double b = v2.real();
    if ((a > 0.0) != (b > 0.0)) return Classification::Saddle;
    return a < 0.0 ? Classification::StableNode : Classification::UnstableNode;
}

struct EquilibriumReport {
    State point;
    EigenPair eigenvalues;
    Classification classification = Classification::Degenerate;
    bool feasible = true;
    std::string label;
};

struct EquilibriaResult {
    std::vector<EquilibriumReport> points;
    /// One line per equilibrium that is undefined for these parameters.
    std::vector<std::string> omitted;
};

namespace detail {
inline EquilibriumReport make_report(const LotkaVolterraParams& p, State point, std::string label) {
    EquilibriumReport rep;
    rep.point = point;
    rep.eigenvalues = eigenvalues(jacobian(p, point));
    rep.classification = classify(rep.eigenvalues);
    rep.feasible = point.x >= 0.0 && point.y >= 0.0;
    rep.label = std::move(label);
    return rep;
}
}  // namespace detail

/// Origin, prey-only point (r/l1, 0) and the coexistence point
/// (l4/l3, (l3 r - l1 l4)/(l3 l2)). Points whose formula divides by zero are
/// omitted and listed in `omitted`; negative-coordinate points are kept with
/// feasible = false.
inline EquilibriaResult equilibria(const LotkaVolterraParams& p) {
    EquilibriaResult out;
    out.points.push_back(detail::make_report(p, {0.0, 0.0}, "origin"));

    if (p.lambda1 != 0.0) {
        out.points.push_back(detail::make_report(p, {p.r / p.lambda1, 0.0}, "prey-only"));
    } else {
        out.omitted.emplace_back("prey-only equilibrium (r/lambda1, 0) undefined: lambda1 = 0");
    }

    if (p.lambda3 != 0.0 && p.lambda2 != 0.0) {
        const State pt{p.lambda4 / p.lambda3,
                       (p.lambda3 * p.r - p.lambda1 * p.lambda4) / (p.lambda3 * p.lambda2)};
        out.points.push_back(detail::make_report(p, pt, "coexistence"));
    } else {
        out.omitted.emplace_back(
            "coexistence equilibrium undefined: lambda2 = 0 or lambda3 = 0");
    }
    return out;
}

/// Per-equation Lipschitz bounds on the unit box: k1 = r + 2 l1 + l2, k2 = l3 + l4.
inline std::pair<double, double> lipschitz_constants(const LotkaVolterraParams& p) noexcept {
    return {p.r + 2.0 * p.lambda1 + p.lambda2, p.lambda3 + p.lambda4};
}

struct UniquenessQuery {
    double k = 0.0;
    FractionalOrder delta{1.0};
    double horizon = 1.0;  // T
    double a = 1.0;
    double b = 0.0;
};

struct UniquenessResult {
    double value = 0.0;
    bool holds = false;
};

/// Evaluates k T^delta (1 + |b|/|a+b|) / Gamma(delta + 1); a unique solution
/// of the boundary value problem a y(0) + b y(T) = C is guaranteed when < 1.
inline UniquenessResult uniqueness_criterion(const UniquenessQuery& q) {
    if (q.a + q.b == 0.0) throw std::domain_error("uniqueness_criterion: a + b must be nonzero");
    if (!(q.horizon > 0.0)) throw std::domain_error("uniqueness_criterion: T must be positive");
    if (!(q.k >= 0.0)) throw std::domain_error("uniqueness_criterion: k must be >= 0");
    const double d = q.delta.value();
    const double value = q.k * std::pow(q.horizon, d) * (1.0 + std::abs(q.b) / std::abs(q.a + q.b)) /
                         gamma(d + 1.0);
    return {value, value < 1.0};
}

}  // namespace pwlv
