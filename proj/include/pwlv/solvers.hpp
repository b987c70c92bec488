#pragma once

// Segment integrators and the piecewise orchestrator.
//
// Every segment is integrated on a uniform grid with step h. Classical and
// stochastic segments use three-step Adams-Bashforth on the drift. The
// fractional segments solve their integral form
//
//     Q(t) = Q(t_0) + local * e(t) + scale * (memory integral of e)(t)
//
// where the memory integral is the Riemann-Liouville integral of order delta
// (Caputo, Atangana-Baleanu) or the plain integral (Caputo-Fabrizio), and the
// drift inside it is replaced piecewise by its quadratic Newton interpolant.
// Memory restarts at each segment's left endpoint.

#include <pwlv/fractional_weights.hpp>
#include <pwlv/model.hpp>
#include <pwlv/special_functions.hpp>
#include <pwlv/stochastic.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace pwlv {

/// A state became non-finite. `step()` is the grid index of the offending
/// state (segment-local until solve_piecewise rewrites it to the global row).
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(std::size_t step, std::optional<std::size_t> segment = std::nullopt)
        : std::runtime_error(message(step, segment)), step_(step), segment_(segment) {}

    std::size_t step() const noexcept { return step_; }
    std::optional<std::size_t> segment() const noexcept { return segment_; }

private:
    static std::string message(std::size_t step, std::optional<std::size_t> segment) {
        std::string m = "integration diverged at step " + std::to_string(step);
        if (segment) m += " (segment " + std::to_string(*segment) + ")";
        return m;
    }

    std::size_t step_;
    std::optional<std::size_t> segment_;
};

enum class SegmentKind { Classical, Caputo, CaputoFabrizio, AtanganaBaleanu, Stochastic };

inline std::string_view to_string(SegmentKind k) noexcept {
    switch (k) {
        case SegmentKind::Classical: return "classical";
        case SegmentKind::Caputo: return "caputo";
        case SegmentKind::CaputoFabrizio: return "caputo-fabrizio";
        case SegmentKind::AtanganaBaleanu: return "atangana-baleanu";
        case SegmentKind::Stochastic: return "stochastic";
    }
    return "?";
}

inline std::optional<SegmentKind> parse_segment_kind(std::string_view s) noexcept {
    for (auto k : {SegmentKind::Classical, SegmentKind::Caputo, SegmentKind::CaputoFabrizio,
                   SegmentKind::AtanganaBaleanu, SegmentKind::Stochastic}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

inline bool is_fractional(SegmentKind k) noexcept {
    return k == SegmentKind::Caputo || k == SegmentKind::CaputoFabrizio ||
           k == SegmentKind::AtanganaBaleanu;
}

struct SegmentSpec {
    SegmentKind kind = SegmentKind::Classical;
    double t_start = 0.0;
    double t_end = 0.0;
    FractionalOrder delta{1.0};  // ignored by Classical and Stochastic

    friend bool operator==(const SegmentSpec&, const SegmentSpec&) = default;
};

/// Consecutive segments sharing one uniform step.
class PiecewiseSchedule {
public:
    static constexpr std::size_t kMinStepsPerSegment = 3;

    PiecewiseSchedule(std::vector<SegmentSpec> segments, double step)
        : segments_(std::move(segments)), step_(step) {
        if (segments_.empty()) throw std::domain_error("schedule: at least one segment is required");
        if (!(step_ > 0.0) || !std::isfinite(step_)) {
            throw std::domain_error("schedule: step h must be positive and finite");
        }
        steps_.reserve(segments_.size());
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            const std::string where = "schedule: segment " + std::to_string(i);
            if (!(s.t_start < s.t_end)) throw std::domain_error(where + " requires t_start < t_end");
            if (i > 0 && segments_[i - 1].t_end != s.t_start) {
                throw std::domain_error(where + " does not start where segment " +
                                        std::to_string(i - 1) + " ends");
            }
            const double ratio = (s.t_end - s.t_start) / step_;
            const double n = std::round(ratio);
            if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
                throw std::domain_error(where + " length is not an integer multiple of h");
            }
            if (n < static_cast<double>(kMinStepsPerSegment)) {
                throw std::domain_error(where + " spans fewer than 3 steps");
            }
            steps_.push_back(static_cast<std::size_t>(n));
        }
    }

    const std::vector<SegmentSpec>& segments() const noexcept { return segments_; }
    double step() const noexcept { return step_; }
    std::size_t steps_in(std::size_t segment) const { return steps_.at(segment); }
    double t_start() const noexcept { return segments_.front().t_start; }
    double t_end() const noexcept { return segments_.back().t_end; }

    std::size_t total_steps() const noexcept {
        std::size_t n = 0;
        for (auto s : steps_) n += s;
        return n;
    }

    friend bool operator==(const PiecewiseSchedule& a, const PiecewiseSchedule& b) {
        return a.segments_ == b.segments_ && a.step_ == b.step_;
    }

private:
    std::vector<SegmentSpec> segments_;
    double step_;
    std::vector<std::size_t> steps_;
};

struct Trajectory {
    double h = 0.0;
    std::vector<double> times;
    std::vector<State> states;
    /// Row index of every interior breakpoint (P1, P2, ...).
    std::vector<std::size_t> segment_boundaries;

    std::size_t size() const noexcept { return states.size(); }

    /// Segment that produced `row`; a breakpoint row belongs to the segment ending there.
    std::size_t segment_of(std::size_t row) const noexcept {
        std::size_t s = 0;
        while (s < segment_boundaries.size() && row > segment_boundaries[s]) ++s;
        return s;
    }
};

template <class F>
concept VectorField = std::invocable<const F&, const State&> &&
                      std::convertible_to<std::invoke_result_t<const F&, const State&>, State>;

/// e_n, e_{n-1}, e_{n-2}.
struct DriftHistory {
    State current;
    State previous;
    State earliest;
};

/// q + (h/12)(23 e_n - 16 e_{n-1} + 5 e_{n-2})
inline State ab3_step(const DriftHistory& e, const State& q, double h) noexcept {
    const double c = h / 12.0;
    return {q.x + c * (23.0 * e.current.x - 16.0 * e.previous.x + 5.0 * e.earliest.x),
            q.y + c * (23.0 * e.current.y - 16.0 * e.previous.y + 5.0 * e.earliest.y)};
}

template <VectorField F>
State rk4_step(const F& f, const State& q, double h) {
    const State k1 = f(q);
    const State k2 = f(q + (0.5 * h) * k1);
    const State k3 = f(q + (0.5 * h) * k2);
    const State k4 = f(q + h * k3);
    return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Q_1, Q_2 from two classical fourth-order Runge-Kutta steps.
template <VectorField F>
std::array<State, 2> bootstrap_steps(const F& f, const State& initial, double h) {
    if (!(h > 0.0)) throw std::domain_error("bootstrap_steps: step must be positive");
    const State q1 = rk4_step(f, initial, h);
    return {q1, rk4_step(f, q1, h)};
}

namespace detail {

inline void require_segment(std::size_t steps, double h, const char* who) {
    if (steps < PiecewiseSchedule::kMinStepsPerSegment) {
        throw std::domain_error(std::string(who) + ": a segment needs at least 3 steps");
    }
    if (!(h > 0.0) || !std::isfinite(h)) throw std::domain_error(std::string(who) + ": step must be positive");
}

inline void require_finite(const State& s, std::size_t step) {
    if (!s.finite()) throw DivergenceError(step);
}

inline double norm_inf(const State& s) noexcept { return std::max(std::abs(s.x), std::abs(s.y)); }

inline State dot(const std::array<double, 3>& w, const State& a, const State& b, const State& c) noexcept {
    return {w[0] * a.x + w[1] * b.x + w[2] * c.x, w[0] * a.y + w[1] * b.y + w[2] * c.y};
}

/// Newton iteration for q - a f(q) = rhs with a central-difference Jacobian.
template <VectorField F>
State solve_local(const F& f, double a, const State& rhs, State q, std::size_t step) {
    if (a == 0.0) return rhs;
    for (int it = 0; it < 60; ++it) {
        const State g = q - a * f(q) - rhs;
        const double hx = 1e-7 * (1.0 + std::abs(q.x));
        const double hy = 1e-7 * (1.0 + std::abs(q.y));
        const State dfx = (f({q.x + hx, q.y}) - f({q.x - hx, q.y})) * (0.5 / hx);
        const State dfy = (f({q.x, q.y + hy}) - f({q.x, q.y - hy})) * (0.5 / hy);
        const double j00 = 1.0 - a * dfx.x, j01 = -a * dfy.x;
        const double j10 = -a * dfx.y, j11 = 1.0 - a * dfy.y;
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0 || !std::isfinite(det)) throw DivergenceError(step);
        const State dq{(j11 * g.x - j01 * g.y) / det, (j00 * g.y - j10 * g.x) / det};
        q -= dq;
        require_finite(q, step);
        if (norm_inf(dq) <= 1e-15 * (1.0 + norm_inf(q))) return q;
    }
    return q;
}

struct MemoryScheme {
    double order;  // kernel order; 1 is the plain integral
    double local;  // coefficient of the instantaneous drift term
    double scale;  // coefficient of the memory integral
};

template <VectorField F>
std::vector<State> memory_segment(const F& f, const State& q0, std::size_t steps, double h,
                                  const MemoryScheme& s, const WeightTable* weights = nullptr) {
    const bool plain = s.order == 1.0;
    std::optional<WeightTable> own;
    if (weights == nullptr) {
        own.emplace(s.order, plain ? std::size_t{2} : steps);
        weights = &*own;
    }
    const WeightTable& table = *weights;
    const double mem_coeff = s.scale * std::pow(h, s.order);

    std::vector<State> q(steps + 1);
    std::vector<State> e(steps + 1);
    q[0] = q0;
    e[0] = f(q0);
    require_finite(e[0], 0);

    // Start-up: Q_1 and Q_2 jointly satisfy the discrete integral equation
    // with the quadratic through (t_0, t_1, t_2) on both leading intervals.
    auto leading_memory = [&](std::size_t k, const State& e1, const State& e2) {
        State m = dot(table.first_interval(k), e[0], e1, e2);
        if (k >= 2) m += dot(table.second_interval(k - 1), e[0], e1, e2);
        return m;
    };
    State q1 = q0, q2 = q0;
    bool converged = false;
    for (int it = 0; it < 500 && !converged; ++it) {
        const State e1 = f(q1), e2 = f(q2);
        const State n1 = solve_local(f, s.local, q0 + mem_coeff * leading_memory(1, e1, e2), q1, 1);
        const State n2 = solve_local(f, s.local, q0 + mem_coeff * leading_memory(2, e1, e2), q2, 2);
        require_finite(n1, 1);
        require_finite(n2, 2);
        const double change = std::max(norm_inf(n1 - q1), norm_inf(n2 - q2));
        converged = change <= 1e-14 * (1.0 + std::max(norm_inf(n1), norm_inf(n2)));
        q1 = n1;
        q2 = n2;
    }
    if (!converged) throw DivergenceError(1);
    q[1] = q1;
    q[2] = q2;
    e[1] = f(q1);
    e[2] = f(q2);

    State running = leading_memory(2, e[1], e[2]);
    for (std::size_t i = 2; i < steps; ++i) {
        State mem;
        if (plain) {
            running += dot({table.lag(0).w0, table.lag(0).w1, table.lag(0).w2}, e[i], e[i - 1], e[i - 2]);
            mem = running;
        } else {
            mem = dot(table.first_interval(i + 1), e[0], e[1], e[2]) +
                  dot(table.second_interval(i), e[0], e[1], e[2]);
            for (std::size_t j = 2; j <= i; ++j) {
                const WeightTriple& w = table.lag(i - j);
                mem.x += w.w0 * e[j].x + w.w1 * e[j - 1].x + w.w2 * e[j - 2].x;
                mem.y += w.w0 * e[j].y + w.w1 * e[j - 1].y + w.w2 * e[j - 2].y;
            }
        }
        q[i + 1] = q0 + s.local * e[i] + mem_coeff * mem;
        require_finite(q[i + 1], i + 1);
        e[i + 1] = f(q[i + 1]);
        require_finite(e[i + 1], i + 1);
    }
    return q;
}

}  // namespace detail

/// Classical segment: RK4 start-up, then AB3. Returns steps + 1 states.
template <VectorField F>
std::vector<State> classical_segment(const F& f, const State& initial, std::size_t steps, double h) {
    detail::require_segment(steps, h, "classical_segment");
    std::vector<State> q(steps + 1);
    std::vector<State> e(steps + 1);
    q[0] = initial;
    const auto [q1, q2] = bootstrap_steps(f, initial, h);
    q[1] = q1;
    q[2] = q2;
    for (std::size_t i = 0; i <= 2; ++i) {
        detail::require_finite(q[i], i);
        e[i] = f(q[i]);
    }
    for (std::size_t i = 2; i < steps; ++i) {
        q[i + 1] = ab3_step({e[i], e[i - 1], e[i - 2]}, q[i], h);
        detail::require_finite(q[i + 1], i + 1);
        e[i + 1] = f(q[i + 1]);
    }
    return q;
}

/// Caputo segment of order delta: Q_{n+1} = Q_0 + h^delta * sum of product-integration weights.
template <VectorField F>
std::vector<State> caputo_segment(const F& f, const State& initial, std::size_t steps, double h,
                                  FractionalOrder delta, const WeightTable* weights = nullptr) {
    detail::require_segment(steps, h, "caputo_segment");
    return detail::memory_segment(f, initial, steps, h, {delta.value(), 0.0, 1.0}, weights);
}

/// Caputo-Fabrizio segment. For n >= 3 this is exactly the per-step update
///   Q_{n+1} = Q_n + (1-d)/M (e_n - e_{n-1}) + d/M (h/12)(23 e_n - 16 e_{n-1} + 5 e_{n-2}).
template <VectorField F>
std::vector<State> cf_segment(const F& f, const State& initial, std::size_t steps, double h,
                              FractionalOrder delta) {
    detail::require_segment(steps, h, "cf_segment");
    const double m = cf_normalization(delta);
    const double d = delta.value();
    return detail::memory_segment(f, initial, steps, h, {1.0, (1.0 - d) / m, d / m});
}

/// Atangana-Baleanu (Caputo sense) segment:
///   Q_{n+1} = Q_0 + (1-d)/AB e_n + d/AB * (Riemann-Liouville memory sum).
template <VectorField F>
std::vector<State> abc_segment(const F& f, const State& initial, std::size_t steps, double h,
                               FractionalOrder delta, const WeightTable* weights = nullptr) {
    detail::require_segment(steps, h, "abc_segment");
    const double ab = ab_normalization(delta);
    const double d = delta.value();
    return detail::memory_segment(f, initial, steps, h, {d, (1.0 - d) / ab, d / ab}, weights);
}

struct NoiseIntensity {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

/// AB3 drift plus multiplicative Euler-Maruyama noise sigma_i Q_{n,i} dB_{n,i}.
/// The first two drift steps are RK4, as in the classical segment.
template <VectorField F>
std::vector<State> stochastic_segment(const F& f, NoiseIntensity sigma, const State& initial,
                                      std::size_t steps, double h, const BrownianPath& noise) {
    detail::require_segment(steps, h, "stochastic_segment");
    if (noise.size() < steps) {
        throw std::domain_error("stochastic_segment: noise path has " + std::to_string(noise.size()) +
                                " increments, segment needs " + std::to_string(steps));
    }
    auto add_noise = [&](State next, const State& current, std::size_t i) {
        if (sigma.sigma1 != 0.0) next.x += sigma.sigma1 * current.x * noise.increments[i].db1;
        if (sigma.sigma2 != 0.0) next.y += sigma.sigma2 * current.y * noise.increments[i].db2;
        return next;
    };

    std::vector<State> q(steps + 1);
    std::vector<State> e(steps + 1);
    q[0] = initial;
    detail::require_finite(q[0], 0);
    for (std::size_t i = 0; i < 2; ++i) {
        q[i + 1] = add_noise(rk4_step(f, q[i], h), q[i], i);
        detail::require_finite(q[i + 1], i + 1);
    }
    for (std::size_t i = 0; i <= 2; ++i) e[i] = f(q[i]);
    for (std::size_t i = 2; i < steps; ++i) {
        q[i + 1] = add_noise(ab3_step({e[i], e[i - 1], e[i - 2]}, q[i], h), q[i], i);
        detail::require_finite(q[i + 1], i + 1);
        e[i + 1] = f(q[i + 1]);
    }
    return q;
}

/// Brownian path seed used by stochastic segment `segment` of a run seeded with `seed`.
inline std::uint64_t segment_noise_seed(std::uint64_t seed, std::size_t segment) noexcept {
    return derive_seed(seed, 0x100 + segment);
}

/// Integrates every segment in order; each segment starts from the previous
/// segment's terminal state.
inline Trajectory solve_piecewise(const LotkaVolterraParams& params, const PiecewiseSchedule& schedule,
                                  const State& initial, std::uint64_t seed) {
    params.validate();
    if (!initial.finite()) throw std::domain_error("solve_piecewise: initial state must be finite");

    const double h = schedule.step();
    const auto f = [&params](const State& s) { return drift(params, s); };

    Trajectory traj;
    traj.h = h;
    traj.states.reserve(schedule.total_steps() + 1);
    traj.states.push_back(initial);

    const auto& segs = schedule.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const std::size_t n = schedule.steps_in(k);
        const std::size_t offset = traj.states.size() - 1;
        const State start = traj.states.back();
        std::vector<State> part;
        try {
            switch (segs[k].kind) {
                case SegmentKind::Classical: part = classical_segment(f, start, n, h); break;
                case SegmentKind::Caputo: part = caputo_segment(f, start, n, h, segs[k].delta); break;
                case SegmentKind::CaputoFabrizio: part = cf_segment(f, start, n, h, segs[k].delta); break;
                case SegmentKind::AtanganaBaleanu: part = abc_segment(f, start, n, h, segs[k].delta); break;
                case SegmentKind::Stochastic:
                    part = stochastic_segment(f, {params.sigma1, params.sigma2}, start, n, h,
                                              generate_path(segment_noise_seed(seed, k), n, h));
                    break;
            }
        } catch (const DivergenceError& err) {
            throw DivergenceError(offset + err.step(), k);
        }
        traj.states.insert(traj.states.end(), part.begin() + 1, part.end());
        if (k + 1 < segs.size()) traj.segment_boundaries.push_back(traj.states.size() - 1);
    }

    traj.times.resize(traj.states.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        traj.times[i] = schedule.t_start() + static_cast<double>(i) * h;
    }
    return traj;
}

}  // namespace pwlv
