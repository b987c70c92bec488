#pragma once

// Command implementations behind the pwlv executable. Everything here returns
// text or writes files; argument parsing lives in tools/pwlv.cpp.

#include <pwlv/config.hpp>
#include <pwlv/model.hpp>
#include <pwlv/solvers.hpp>
#include <pwlv/stochastic.hpp>
#include <pwlv/validation.hpp>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <exception>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#ifndef PWLV_VERSION
#define PWLV_VERSION "0.0.0"
#endif

namespace pwlv {

inline constexpr int kCsvSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDivergence = 3, kExitVerify = 4 };

/// %.17g: round-trips every double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// `#` comment block shared by every CSV written for `cfg`.
inline std::string csv_header(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# pwlv " << PWLV_VERSION << "\n";
    os << "# csv_schema_version: " << kCsvSchemaVersion << "\n";
    os << "# seed: " << cfg.seed << "\n";
    os << "# noise: " << kNoiseMethod << "\n";
    if (cfg.preset_name) {
        os << "# preset: " << *cfg.preset_name
           << " (breakpoints P1=P/3, P2=2P/3 on the h grid are a convention, not given by the model)\n";
    }
    os << "# segments:";
    for (const auto& s : cfg.schedule.segments()) {
        os << " [" << to_string(s.kind) << " " << format_double(s.t_start) << " " << format_double(s.t_end);
        if (is_fractional(s.kind)) os << " delta=" << format_double(s.delta.value());
        os << "]";
    }
    os << "\n";
    os << "# breakpoint rows belong to the segment that ends there\n";
    os << "# config: " << to_json(cfg).dump() << "\n";
    return os.str();
}

/// Recovers the run configuration from a CSV written by `simulate`.
inline RunConfig config_from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    const std::string tag = "# config: ";
    for (std::string line; std::getline(in, line);) {
        if (line.rfind(tag, 0) == 0) return parse_config_text(line.substr(tag.size()));
        if (line.empty() || line[0] != '#') break;
    }
    throw ConfigError("config", "no config line in '" + path.string() + "'");
}

inline std::string timeseries_csv(const RunConfig& cfg, const Trajectory& traj) {
    std::string out = csv_header(cfg);
    out += "t,x,y,segment\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out += format_double(traj.times[i]);
        out += ',';
        out += format_double(traj.states[i].x);
        out += ',';
        out += format_double(traj.states[i].y);
        out += ',';
        out += std::to_string(traj.segment_of(i));
        out += '\n';
    }
    return out;
}

inline std::string phase_csv(const RunConfig& cfg, const Trajectory& traj) {
    std::string out = csv_header(cfg);
    out += "x,y\n";
    for (const auto& s : traj.states) {
        out += format_double(s.x);
        out += ',';
        out += format_double(s.y);
        out += '\n';
    }
    return out;
}

/// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("short write to '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

struct SimulateOptions {
    std::filesystem::path out_dir = ".";
    /// Number of seeds, cfg.seed .. cfg.seed + ensemble - 1.
    std::size_t ensemble = 1;
};

/// Runs the configuration (or an ensemble of seeds) and writes
/// timeseries.csv and phase.csv; ensemble members get a `_seed<N>` suffix.
/// All runs finish before any file is written, so a divergence leaves no output.
inline std::vector<std::filesystem::path> simulate(const RunConfig& cfg, const SimulateOptions& opts = {}) {
    if (opts.ensemble < 1) throw ConfigError("ensemble", "must be >= 1");

    std::vector<RunConfig> runs(opts.ensemble, cfg);
    for (std::size_t i = 0; i < runs.size(); ++i) runs[i].seed = cfg.seed + i;

    std::vector<std::future<Trajectory>> jobs;
    jobs.reserve(runs.size());
    for (const auto& run : runs) {
        jobs.push_back(std::async(std::launch::async, [&run] {
            return solve_piecewise(run.params, run.schedule, run.initial, run.seed);
        }));
    }
    std::vector<Trajectory> trajs;
    std::exception_ptr failure;
    for (auto& job : jobs) {
        try {
            trajs.push_back(job.get());
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::filesystem::create_directories(opts.out_dir);
    std::vector<std::filesystem::path> written;
    try {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const std::string suffix = opts.ensemble == 1 ? "" : "_seed" + std::to_string(runs[i].seed);
            const auto ts = opts.out_dir / ("timeseries" + suffix + ".csv");
            const auto ph = opts.out_dir / ("phase" + suffix + ".csv");
            write_file_atomic(ts, timeseries_csv(runs[i], trajs[i]));
            written.push_back(ts);
            write_file_atomic(ph, phase_csv(runs[i], trajs[i]));
            written.push_back(ph);
        }
    } catch (...) {
        for (const auto& p : written) std::filesystem::remove(p);
        throw;
    }
    return written;
}

inline std::string equilibria_report(const LotkaVolterraParams& p) {
    const auto res = equilibria(p);
    std::ostringstream os;
    os << "label,x,y,eig1,eig2,class,stable,feasible\n";
    auto cplx = [](std::complex<double> z) {
        if (z.imag() == 0.0) return format_double(z.real());
        return format_double(z.real()) + (z.imag() < 0 ? "-" : "+") + format_double(std::abs(z.imag())) + "i";
    };
    for (const auto& e : res.points) {
        os << e.label << ',' << format_double(e.point.x) << ',' << format_double(e.point.y) << ','
           << cplx(e.eigenvalues.first) << ',' << cplx(e.eigenvalues.second) << ','
           << to_string(e.classification) << ',' << (is_stable(e.classification) ? "yes" : "no") << ','
           << (e.feasible ? "yes" : "no") << '\n';
    }
    for (const auto& note : res.omitted) os << "# omitted: " << note << '\n';
    return os.str();
}

struct UniquenessOptions {
    std::optional<double> k;  // replaces k1/k2 from the parameters
    double delta = 0.95;
    double horizon = 1.0;
    double a = 1.0;
    double b = 0.0;
};

/// Returns the report text and whether every evaluated bound holds.
inline std::pair<std::string, bool> uniqueness_report(const LotkaVolterraParams& p, const UniquenessOptions& o) {
    const FractionalOrder delta(o.delta);
    std::vector<std::pair<std::string, double>> ks;
    if (o.k) {
        ks.emplace_back("k", *o.k);
    } else {
        const auto [k1, k2] = lipschitz_constants(p);
        ks.emplace_back("k1", k1);
        ks.emplace_back("k2", k2);
    }
    std::ostringstream os;
    os << "# delta=" << format_double(o.delta) << " T=" << format_double(o.horizon) << " a=" << format_double(o.a)
       << " b=" << format_double(o.b) << '\n';
    os << "name,k,value,holds\n";
    bool all = true;
    for (const auto& [name, k] : ks) {
        const auto r = uniqueness_criterion({k, delta, o.horizon, o.a, o.b});
        all = all && r.holds;
        os << name << ',' << format_double(k) << ',' << format_double(r.value) << ',' << (r.holds ? "holds" : "fails")
           << '\n';
    }
    return {os.str(), all};
}

inline std::pair<std::string, bool> verify_report(const VerifyOptions& opts = {}) {
    const auto results = run_verification(opts);
    std::ostringstream os;
    std::size_t failed = 0;
    for (const auto& r : results) {
        if (!r.passed) ++failed;
        os << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "  observed=" << format_double(r.observed)
           << " expected=" << format_double(r.expected) << " tol=" << format_double(r.tolerance) << '\n';
    }
    os << results.size() - failed << "/" << results.size() << " checks passed\n";
    return {os.str(), failed == 0};
}

}  // namespace pwlv
