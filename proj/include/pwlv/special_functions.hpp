#pragma once

// Scalar special functions and the kernel normalizations shared by the
// fractional integrators.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwlv {

/// Raised when a truncated series fails to converge within its term budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    /// Magnitude of the last term evaluated before giving up.
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Fractional order, validated to lie in (0, 1].
class FractionalOrder {
public:
    explicit FractionalOrder(double delta) : delta_(delta) {
        if (!(delta > 0.0 && delta <= 1.0)) {
            throw std::domain_error("fractional order must lie in (0, 1], got " +
                                    std::to_string(delta));
        }
    }

    double value() const noexcept { return delta_; }
    bool is_classical() const noexcept { return delta_ == 1.0; }

    friend bool operator==(const FractionalOrder&, const FractionalOrder&) = default;

private:
    double delta_;
};

struct SeriesTolerance {
    double abs_tol = 1e-17;
    std::size_t max_terms = 500;

    SeriesTolerance() = default;
    SeriesTolerance(double tol, std::size_t terms) : abs_tol(tol), max_terms(terms) {
        if (!(tol > 0.0)) throw std::domain_error("series tolerance must be positive");
        if (terms < 1) throw std::domain_error("series term budget must be at least 1");
    }
};

/// Gamma function on (0, 170).
inline double gamma(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("gamma: argument must be positive, got " + std::to_string(x));
    }
    if (x >= 170.0) {
        throw std::domain_error("gamma: argument " + std::to_string(x) + " overflows double");
    }
    return std::tgamma(x);
}

/// Largest |z| accepted by the direct Mittag-Leffler series.
inline constexpr double kMittagLefflerMaxArgument = 50.0;

/// One-parameter Mittag-Leffler function E_delta(z) = sum z^n / Gamma(delta n + 1).
///
/// Direct series summed in long double. Terms are formed in log space so
/// Gamma(delta n + 1) never overflows. Summation stops once two consecutive
/// terms fall below `tol.abs_tol` past the index where the term ratio is
/// guaranteed to be decreasing (delta n >= 1).
inline double mittag_leffler(FractionalOrder order, double z, SeriesTolerance tol = {}) {
    const double delta = order.value();
    if (!std::isfinite(z) || std::abs(z) > kMittagLefflerMaxArgument) {
        throw std::domain_error("mittag_leffler: |z| must not exceed 50, got " + std::to_string(z));
    }
    if (z == 0.0) return 1.0;

    const long double log_abs_z = std::log(static_cast<long double>(std::abs(z)));
    const bool negative = z < 0.0;

    long double sum = 1.0L;
    long double last = 1.0L;
    int small_run = 0;
    for (std::size_t n = 1; n < tol.max_terms; ++n) {
        const long double nd = static_cast<long double>(n);
        const long double log_mag = nd * log_abs_z - std::lgamma(static_cast<long double>(delta) * nd + 1.0L);
        long double term = std::exp(log_mag);
        if (negative && (n % 2 == 1)) term = -term;
        sum += term;
        last = std::abs(term);

        if (last < tol.abs_tol && static_cast<double>(n) * delta >= 1.0) {
            if (++small_run >= 2) return static_cast<double>(sum);
        } else {
            small_run = 0;
        }
    }
    throw ConvergenceError("mittag_leffler: series did not converge within " +
                               std::to_string(tol.max_terms) + " terms",
                           static_cast<double>(last));
}

/// Atangana-Baleanu normalization AB(delta) = 1 - delta + delta / Gamma(delta).
inline double ab_normalization(FractionalOrder order) {
    const double delta = order.value();
    return 1.0 - delta + delta / gamma(delta);
}

/// Caputo-Fabrizio normalization M(delta). Only M(0) = M(1) = 1 is pinned
/// down; the constant choice is used everywhere.
inline double cf_normalization(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::domain_error("cf_normalization: order must lie in [0, 1], got " +
                                std::to_string(delta));
    }
    return 1.0;
}

inline double cf_normalization(FractionalOrder order) { return cf_normalization(order.value()); }

}  // namespace pwlv
