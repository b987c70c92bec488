#pragma once

// Run configuration: presets, JSON (de)serialization and flag overrides.
//
// Canonical JSON form:
//   {
//     "schema_version": 1,
//     "preset": "case1",                      (optional)
//     "seed": 42,
//     "params":   {"r":1, "lambda1":2, "lambda2":1, "lambda3":1.5, "lambda4":1,
//                  "sigma1":0.1, "sigma2":0.1},
//     "initial":  {"x":1, "y":2},
//     "schedule": {"h":0.01,
//                  "segments":[{"kind":"classical","t_start":0,"t_end":3.33,"delta":1}, ...]}
//   }
// Input files may omit any key (the preset, or case1 when no preset is named,
// supplies it). "schedule" additionally accepts the layout shorthands "P",
// "P1", "P2" and "delta". Unknown keys are rejected.

#include <pwlv/model.hpp>
#include <pwlv/solvers.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pwlv {

inline constexpr int kConfigSchemaVersion = 1;

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct RunConfig {
    LotkaVolterraParams params;
    State initial{1.0, 2.0};
    PiecewiseSchedule schedule{{{SegmentKind::Classical, 0.0, 1.0, FractionalOrder(1.0)}}, 0.01};
    std::uint64_t seed = 0;
    std::optional<std::string> preset_name;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Default step and horizon for the preset scenarios.
inline constexpr double kPresetStep = 0.01;
inline constexpr double kPresetHorizon = 10.0;

/// t snapped to the nearest multiple of h.
inline double snap_to_grid(double t, double h) { return std::round(t / h) * h; }

/// Classical -> `middle` -> stochastic on [0, P] with P1 = P/3, P2 = 2P/3 snapped to the grid.
inline PiecewiseSchedule three_segment_schedule(SegmentKind middle, FractionalOrder delta, double h,
                                                double horizon) {
    const double p1 = snap_to_grid(horizon / 3.0, h);
    const double p2 = snap_to_grid(2.0 * horizon / 3.0, h);
    return PiecewiseSchedule({{SegmentKind::Classical, 0.0, p1, FractionalOrder(1.0)},
                              {middle, p1, p2, delta},
                              {SegmentKind::Stochastic, p2, horizon, FractionalOrder(1.0)}},
                             h);
}

namespace detail {

struct PresetSpec {
    SegmentKind middle;
    double delta;
    LotkaVolterraParams params;
};

inline const std::map<std::string, PresetSpec, std::less<>>& preset_table() {
    static const std::map<std::string, PresetSpec, std::less<>> table = [] {
        std::map<std::string, PresetSpec, std::less<>> t;
        const LotkaVolterraParams base{1.0, 2.0, 1.0, 1.5, 1.0, 0.1, 0.1};
        auto with_noise = [](LotkaVolterraParams p, double s1, double s2) {
            p.sigma1 = s1;
            p.sigma2 = s2;
            return p;
        };

        t["case1"] = {SegmentKind::Caputo, 0.91, base};
        const auto chaotic1 = with_noise(base, 0.01, 0.02);
        t["case1-chaotic"] = {SegmentKind::Caputo, 0.6, chaotic1};
        for (const char* d : {"0.6", "0.68", "0.85", "0.97"}) {
            t[std::string("case1-chaotic-") + d] = {SegmentKind::Caputo, std::stod(d), chaotic1};
        }

        t["case2"] = {SegmentKind::AtanganaBaleanu, 0.8, with_noise(base, 0.1, 0.11)};
        auto chaotic2 = with_noise(base, 0.01, 0.02);
        chaotic2.lambda3 = 1.7;
        chaotic2.lambda4 = 1.7;
        t["case2-chaotic"] = {SegmentKind::AtanganaBaleanu, 0.75, chaotic2};
        for (const char* d : {"0.75", "0.82", "0.89", "0.98"}) {
            t[std::string("case2-chaotic-") + d] = {SegmentKind::AtanganaBaleanu, std::stod(d), chaotic2};
        }

        t["case3"] = {SegmentKind::CaputoFabrizio, 0.94, with_noise(base, 0.1, 0.11)};
        const auto chaotic3 = with_noise(base, 0.01, 0.02);
        t["case3-chaotic"] = {SegmentKind::CaputoFabrizio, 0.68, chaotic3};
        for (const char* d : {"0.68", "0.78", "0.87", "0.98"}) {
            t[std::string("case3-chaotic-") + d] = {SegmentKind::CaputoFabrizio, std::stod(d), chaotic3};
        }

        // Parameter sets of the two worked Lipschitz/uniqueness examples.
        t["lipschitz-prey"] = {SegmentKind::Caputo, 0.95, {0.0, 0.2, 0.1, 1.5, 1.0, 0.0, 0.0}};
        t["lipschitz-predator"] = {SegmentKind::Caputo, 0.95, {1.0, 2.0, 1.0, 0.1, 0.11, 0.0, 0.0}};
        return t;
    }();
    return table;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : detail::preset_table()) out.push_back(name);
    return out;
}

inline RunConfig preset(std::string_view name) {
    const auto& table = detail::preset_table();
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    RunConfig cfg;
    cfg.params = it->second.params;
    cfg.initial = {1.0, 2.0};
    cfg.schedule = three_segment_schedule(it->second.middle, FractionalOrder(it->second.delta), kPresetStep,
                                          kPresetHorizon);
    cfg.seed = 0;
    cfg.preset_name = std::string(name);
    return cfg;
}

/// Case-1 values without a preset name: the documented defaults.
inline RunConfig default_config() {
    RunConfig cfg = preset("case1");
    cfg.preset_name.reset();
    return cfg;
}

/// Schedule layout changes shared by config files and command-line flags.
/// A new horizon P puts the breakpoints of a three-segment schedule at P/3 and
/// 2P/3 (snapped to the grid) and scales other schedules proportionally; P1
/// and P2, when given, win.
struct LayoutOverrides {
    std::optional<double> h;
    std::optional<double> horizon;  // P
    std::optional<double> p1;
    std::optional<double> p2;
    std::optional<double> delta;

    bool empty() const noexcept { return !h && !horizon && !p1 && !p2 && !delta; }
};

inline PiecewiseSchedule apply_layout(const PiecewiseSchedule& base, const LayoutOverrides& o) {
    std::vector<SegmentSpec> segs = base.segments();
    const double h = o.h.value_or(base.step());
    const double t0 = segs.front().t_start;
    const double old_end = segs.back().t_end;
    const double end = o.horizon.value_or(old_end);
    const std::size_t n = segs.size();

    if ((o.p1 || o.p2) && n != 3) {
        throw ConfigError("schedule.P1", "P1/P2 apply only to three-segment schedules");
    }
    if (o.horizon && *o.horizon != old_end && n == 3) {
        segs[0].t_end = snap_to_grid(t0 + (end - t0) / 3.0, h);
        segs[1].t_end = snap_to_grid(t0 + 2.0 * (end - t0) / 3.0, h);
    } else if (o.horizon && *o.horizon != old_end) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double frac = (segs[i].t_end - t0) / (old_end - t0);
            segs[i].t_end = snap_to_grid(t0 + frac * (end - t0), h);
        }
    }
    if (o.p1) segs[0].t_end = *o.p1;
    if (o.p2) segs[1].t_end = *o.p2;
    segs.back().t_end = end;
    for (std::size_t i = 1; i < n; ++i) segs[i].t_start = segs[i - 1].t_end;

    if (o.delta) {
        try {
            const FractionalOrder d(*o.delta);
            for (auto& s : segs) {
                if (is_fractional(s.kind)) s.delta = d;
            }
        } catch (const std::domain_error& e) {
            throw ConfigError("delta", e.what());
        }
    }
    try {
        return PiecewiseSchedule(std::move(segs), h);
    } catch (const std::domain_error& e) {
        throw ConfigError("schedule", e.what());
    }
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
}

inline double get_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    const std::string field = where.empty() ? key : where + "." + key;
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field, "must be finite");
    return d;
}

template <class T>
void read_number(const json& obj, const char* key, const std::string& where, T& out) {
    if (obj.contains(key)) out = get_number(obj, key, where);
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;
    if (cfg.preset_name) j["preset"] = *cfg.preset_name;
    j["seed"] = cfg.seed;
    const auto& p = cfg.params;
    j["params"] = {{"r", p.r},           {"lambda1", p.lambda1}, {"lambda2", p.lambda2},
                   {"lambda3", p.lambda3}, {"lambda4", p.lambda4}, {"sigma1", p.sigma1},
                   {"sigma2", p.sigma2}};
    j["initial"] = {{"x", cfg.initial.x}, {"y", cfg.initial.y}};
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : cfg.schedule.segments()) {
        segs.push_back({{"kind", std::string(to_string(s.kind))},
                        {"t_start", s.t_start},
                        {"t_end", s.t_end},
                        {"delta", s.delta.value()}});
    }
    j["schedule"] = {{"h", cfg.schedule.step()}, {"segments", segs}};
    return j;
}

/// Parses a config document on top of its preset (or the defaults).
inline RunConfig from_json(const nlohmann::json& j) {
    using detail::read_number;
    detail::reject_unknown(j, {"schema_version", "preset", "seed", "params", "initial", "schedule"}, "");

    if (j.contains("schema_version")) {
        const auto& v = j.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kConfigSchemaVersion) {
            throw ConfigError("schema_version", "unsupported schema version");
        }
    }

    RunConfig cfg = default_config();
    if (j.contains("preset")) {
        if (!j.at("preset").is_string()) throw ConfigError("preset", "expected a string");
        cfg = preset(j.at("preset").get<std::string>());
    }
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            throw ConfigError("seed", "expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        detail::reject_unknown(p, {"r", "lambda1", "lambda2", "lambda3", "lambda4", "sigma1", "sigma2"}, "params");
        read_number(p, "r", "params", cfg.params.r);
        read_number(p, "lambda1", "params", cfg.params.lambda1);
        read_number(p, "lambda2", "params", cfg.params.lambda2);
        read_number(p, "lambda3", "params", cfg.params.lambda3);
        read_number(p, "lambda4", "params", cfg.params.lambda4);
        read_number(p, "sigma1", "params", cfg.params.sigma1);
        read_number(p, "sigma2", "params", cfg.params.sigma2);
    }
    if (j.contains("initial")) {
        const auto& s = j.at("initial");
        detail::reject_unknown(s, {"x", "y"}, "initial");
        read_number(s, "x", "initial", cfg.initial.x);
        read_number(s, "y", "initial", cfg.initial.y);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::reject_unknown(s, {"h", "segments", "P", "P1", "P2", "delta"}, "schedule");
        LayoutOverrides layout;
        if (s.contains("segments")) {
            const auto& arr = s.at("segments");
            if (!arr.is_array() || arr.empty()) throw ConfigError("schedule.segments", "expected a non-empty array");
            std::vector<SegmentSpec> segs;
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string where = "schedule.segments[" + std::to_string(i) + "]";
                const auto& e = arr[i];
                detail::reject_unknown(e, {"kind", "t_start", "t_end", "delta"}, where);
                if (!e.contains("kind") || !e.at("kind").is_string()) throw ConfigError(where + ".kind", "expected a string");
                const auto kind = parse_segment_kind(e.at("kind").get<std::string>());
                if (!kind) throw ConfigError(where + ".kind", "unknown segment kind");
                if (!e.contains("t_start") || !e.contains("t_end")) {
                    throw ConfigError(where, "t_start and t_end are required");
                }
                const double delta = e.contains("delta") ? detail::get_number(e, "delta", where) : 1.0;
                try {
                    segs.push_back({*kind, detail::get_number(e, "t_start", where),
                                    detail::get_number(e, "t_end", where), FractionalOrder(delta)});
                } catch (const std::domain_error& err) {
                    throw ConfigError(where + ".delta", err.what());
                }
            }
            const double h = s.contains("h") ? detail::get_number(s, "h", "schedule") : cfg.schedule.step();
            try {
                cfg.schedule = PiecewiseSchedule(std::move(segs), h);
            } catch (const std::domain_error& err) {
                throw ConfigError("schedule", err.what());
            }
        } else if (s.contains("h")) {
            layout.h = detail::get_number(s, "h", "schedule");
        }
        if (s.contains("P")) layout.horizon = detail::get_number(s, "P", "schedule");
        if (s.contains("P1")) layout.p1 = detail::get_number(s, "P1", "schedule");
        if (s.contains("P2")) layout.p2 = detail::get_number(s, "P2", "schedule");
        if (s.contains("delta")) layout.delta = detail::get_number(s, "delta", "schedule");
        if (!layout.empty()) cfg.schedule = apply_layout(cfg.schedule, layout);
    }

    try {
        cfg.params.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError("params", e.what());
    }
    if (!cfg.initial.finite()) throw ConfigError("initial", "must be finite");
    return cfg;
}

inline RunConfig parse_config_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    return from_json(j);
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

/// Command-line overrides; each set field replaces the file/preset value.
struct Overrides {
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<double> r, lambda1, lambda2, lambda3, lambda4, sigma1, sigma2;
    std::optional<double> x0, y0;
    LayoutOverrides layout;
};

/// Preset, then config file, then flags.
inline RunConfig resolve_config(const std::optional<std::string>& config_path, const Overrides& o) {
    RunConfig cfg = default_config();
    if (config_path) {
        cfg = load_config_file(*config_path);
        if (o.preset && cfg.preset_name != o.preset) {
            throw ConfigError("preset", "--preset conflicts with the preset named in the config file");
        }
    } else if (o.preset) {
        cfg = preset(*o.preset);
    }

    if (o.seed) cfg.seed = *o.seed;
    auto set = [](const std::optional<double>& v, double& dst) {
        if (v) dst = *v;
    };
    set(o.r, cfg.params.r);
    set(o.lambda1, cfg.params.lambda1);
    set(o.lambda2, cfg.params.lambda2);
    set(o.lambda3, cfg.params.lambda3);
    set(o.lambda4, cfg.params.lambda4);
    set(o.sigma1, cfg.params.sigma1);
    set(o.sigma2, cfg.params.sigma2);
    set(o.x0, cfg.initial.x);
    set(o.y0, cfg.initial.y);
    if (!o.layout.empty()) cfg.schedule = apply_layout(cfg.schedule, o.layout);

    try {
        cfg.params.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError("params", e.what());
    }
    if (!cfg.initial.finite()) throw ConfigError("initial", "must be finite");
    return cfg;
}

}  // namespace pwlv
