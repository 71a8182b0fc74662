// config.hpp — run configuration: strict JSON schema, overrides, provenance
//
// Config files quote every frequency in Hz, powers in dBm (microwave) and W
// (optical), times in s, temperatures in K. Conversion to rad/s happens here,
// once.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deltasim/solver.hpp"
#include "deltasim/sweep.hpp"

namespace deltasim {

using json = nlohmann::json;

struct RunConfig {
    AtomParams atom;
    InhomogeneousSpec inhom;
    double n_eff = 1.0;
    CavityParams mw_cavity;
    CavityParams opt_cavity;
    DriveInputs drive;
    FixedPointNumerics numerics;

    Sweep2dSpec sweep2d;
    MwPowerSweepSpec mw_sweep;
    OptPowerSweepSpec opt_sweep;
    PredictSpec predict;

    json canonical;      // normalized config with defaults materialized
    std::uint64_t hash = 0;

    ConversionSystem system() const {
        return {atom, build_detuning_grid(inhom, n_eff), mw_cavity, opt_cavity, drive};
    }

    std::string hash_hex() const {
        char buf[19];
        std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(hash));
        return buf;
    }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cur = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                               prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
            prev = cur;
        }
    }
    return row[b.size()];
}

inline std::string nearest_key(const std::string& key, const std::vector<std::string>& allowed) {
    std::string best;
    std::size_t best_d = key.size() + 3;
    for (const auto& cand : allowed) {
        const std::size_t d = levenshtein(key, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best_d <= std::max<std::size_t>(3, key.size() / 2) ? best : std::string();
}

class SectionReader {
public:
    SectionReader(const json& j, std::string path) : obj_(j), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
    }

    double number(const std::string& key) {
        require_present(key);
        return as_number(key);
    }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? as_number(key) : fallback;
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = mark(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v.get<int>();
    }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = mark(key);
        if (!v.is_boolean()) throw ConfigError(path_ + "." + key + ": expected a boolean");
        return v.get<bool>();
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = mark(key);
        if (!v.is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    /// Number that may also be null or absent (both map to NaN).
    double nullable_number(const std::string& key) {
        if (!has(key)) return std::numeric_limits<double>::quiet_NaN();
        const json& v = mark(key);
        if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number or null");
        }
        return v.get<double>();
    }

    const json* object(const std::string& key, bool required) {
        if (!has(key)) {
            if (required) throw ConfigError(path_ + "." + key + ": missing required section");
            return nullptr;
        }
        const json& v = mark(key);
        if (!v.is_object()) throw ConfigError(path_ + "." + key + ": expected a JSON object");
        return &v;
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    /// Every key must have been consumed; anything else is rejected with a
    /// nearest-key suggestion.
    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (std::find(seen_.begin(), seen_.end(), key) != seen_.end()) continue;
            std::string msg = path_ + "." + key + ": unknown key";
            const std::string hint = nearest_key(key, seen_allowed_);
            if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
            throw ConfigError(msg);
        }
    }

    void allow(std::initializer_list<const char*> keys) {
        for (const char* k : keys) seen_allowed_.emplace_back(k);
    }

private:
    const json& mark(const std::string& key) {
        seen_.push_back(key);
        return obj_.at(key);
    }

    void require_present(const std::string& key) const {
        if (!obj_.contains(key)) {
            throw ConfigError(path_ + "." + key + ": missing required value");
        }
    }

    double as_number(const std::string& key) {
        const json& v = mark(key);
        if (!v.is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string> seen_;
    std::vector<std::string> seen_allowed_;
};

inline void check_positive(double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + ": must be finite and > 0");
}

inline void json_set(json& j, const std::string& key, double v) {
    if (std::isnan(v)) {
        j[key] = nullptr;
    } else {
        j[key] = v;
    }
}

} // namespace detail

/// Validates and normalizes a parsed config. Unknown keys are rejected,
/// defaults are materialized, every physical invariant is checked with the
/// offending field named.
inline RunConfig parse_config(const json& root) {
    RunConfig cfg;

    detail::SectionReader top(root, "config");
    top.allow({"physics", "cavities", "drive", "numerics", "scenario"});

    // physics
    {
        const json* phys_j = top.object("physics", true);
        detail::SectionReader phys(*phys_j, "physics");
        phys.allow({"f_mu_hz", "f_opt_hz", "t1_spin_s", "t2_spin_s", "t2_opt_s", "t1_opt_s",
                    "branching_31", "g_mu_hz", "g_s_hz", "g_p_hz", "temperature_k",
                    "spin_thermal_excitation", "n_eff", "inhomogeneous"});
        cfg.atom.f_mu = phys.number("f_mu_hz");
        cfg.atom.f_opt = phys.number("f_opt_hz");
        cfg.atom.t1_spin = phys.number("t1_spin_s");
        cfg.atom.t2_spin = phys.number("t2_spin_s");
        cfg.atom.t2_opt = phys.number("t2_opt_s");
        cfg.atom.t1_opt = phys.number_or("t1_opt_s", 11e-3);
        cfg.atom.branching_31 = phys.number_or("branching_31", 0.5);
        cfg.atom.g_mu = two_pi * phys.number("g_mu_hz");
        cfg.atom.g_s = two_pi * phys.number("g_s_hz");
        cfg.atom.g_p = two_pi * phys.number("g_p_hz");
        cfg.atom.temperature = phys.number("temperature_k");
        cfg.atom.spin_thermal_excitation = phys.boolean_or("spin_thermal_excitation", true);
        cfg.n_eff = phys.number("n_eff");
        detail::check_positive(cfg.n_eff, "physics.n_eff");

        const json* inh_j = phys.object("inhomogeneous", true);
        detail::SectionReader inh(*inh_j, "physics.inhomogeneous");
        inh.allow({"fwhm_opt_hz", "fwhm_spin_hz", "shape", "n_opt", "n_spin", "span_opt_fwhm",
                   "span_spin_fwhm"});
        cfg.inhom.fwhm_opt = inh.number("fwhm_opt_hz");
        cfg.inhom.fwhm_spin = inh.number("fwhm_spin_hz");
        const std::string shape = inh.string_or("shape", "gaussian");
        if (shape == "gaussian") {
            cfg.inhom.shape = Lineshape::gaussian;
        } else if (shape == "lorentzian-truncated") {
            cfg.inhom.shape = Lineshape::lorentzian_truncated;
        } else {
            throw ConfigError("physics.inhomogeneous.shape: expected 'gaussian' or "
                              "'lorentzian-truncated', got '" + shape + "'");
        }
        cfg.inhom.n_opt = inh.integer("n_opt", 341);
        cfg.inhom.n_spin = inh.integer("n_spin", 101);
        cfg.inhom.span_opt = inh.number_or("span_opt_fwhm", 3.0);
        cfg.inhom.span_spin = inh.number_or("span_spin_fwhm", 3.0);
        inh.finish();
        phys.finish();

        try {
            cfg.atom.validate();
            cfg.inhom.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("physics: ") + e.what());
        }
    }

    // cavities
    {
        const json* cav_j = top.object("cavities", true);
        detail::SectionReader cavs(*cav_j, "cavities");
        cavs.allow({"microwave", "optical"});
        auto read_cavity = [&](const char* name) {
            const json* c_j = cavs.object(name, true);
            detail::SectionReader c(*c_j, std::string("cavities.") + name);
            c.allow({"kappa1_hz", "kappa2_hz", "kappa_i_hz", "delta_c_hz"});
            CavityParams p;
            p.kappa1 = two_pi * c.number("kappa1_hz");
            p.kappa2 = two_pi * c.number_or("kappa2_hz", 0.0);
            p.kappai = two_pi * c.number("kappa_i_hz");
            p.delta_c = two_pi * c.number_or("delta_c_hz", 0.0);
            c.finish();
            try {
                p.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("cavities.") + name + ": " + e.what());
            }
            return p;
        };
        cfg.mw_cavity = read_cavity("microwave");
        cfg.opt_cavity = read_cavity("optical");
        cavs.finish();
    }

    // drive
    {
        const json* drv_j = top.object("drive", true);
        detail::SectionReader drv(*drv_j, "drive");
        drv.allow({"p_mw_dbm", "p_opt_w", "f_mw_hz", "f_opt_hz", "delta_o_hz", "delta_mu_hz",
                   "self_consistent_pump"});
        cfg.drive.p_mw_dbm = drv.number("p_mw_dbm");
        cfg.drive.p_opt = drv.number("p_opt_w");
        cfg.drive.f_mw = drv.number("f_mw_hz");
        cfg.drive.f_opt = drv.number("f_opt_hz");
        cfg.drive.delta_o = two_pi * drv.number_or("delta_o_hz", 0.0);
        cfg.drive.delta_mu = two_pi * drv.number_or("delta_mu_hz", 0.0);
        if (drv.boolean_or("self_consistent_pump", false)) {
            throw ConfigError("drive.self_consistent_pump: self-consistent pump depletion "
                              "is reserved and not implemented; set to false");
        }
        drv.finish();
        try {
            cfg.drive.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("drive: ") + e.what());
        }
        if (!std::isfinite(cfg.drive.p_mw_dbm)) {
            throw ConfigError("drive.p_mw_dbm: must be finite");
        }
    }

    // numerics (all defaulted)
    {
        const json empty = json::object();
        const json* num_j = top.object("numerics", false);
        detail::SectionReader num(num_j ? *num_j : empty, "numerics");
        num.allow({"damping", "tol", "max_iter"});
        cfg.numerics.damping = num.number_or("damping", 0.5);
        cfg.numerics.tol = num.number_or("tol", 1e-10);
        cfg.numerics.max_iter = num.integer("max_iter", 10000);
        num.finish();
        cfg.numerics.validate();
    }

    // scenario (all defaulted)
    {
        const json empty = json::object();
        const json* sc_j = top.object("scenario", false);
        detail::SectionReader sc(sc_j ? *sc_j : empty, "scenario");
        sc.allow({"sweep2d", "mw_sweep", "opt_sweep", "predict"});

        const json* s2_j = sc.object("sweep2d", false);
        detail::SectionReader s2(s2_j ? *s2_j : empty, "scenario.sweep2d");
        s2.allow({"span_opt_hz", "span_spin_hz", "n_opt", "n_spin"});
        cfg.sweep2d.span_opt_hz = s2.number_or("span_opt_hz", 500e6);
        cfg.sweep2d.span_spin_hz = s2.number_or("span_spin_hz", 50e6);
        cfg.sweep2d.n_opt = s2.integer("n_opt", 41);
        cfg.sweep2d.n_spin = s2.integer("n_spin", 41);
        s2.finish();
        detail::check_positive(cfg.sweep2d.span_opt_hz, "scenario.sweep2d.span_opt_hz");
        detail::check_positive(cfg.sweep2d.span_spin_hz, "scenario.sweep2d.span_spin_hz");
        if (cfg.sweep2d.n_opt < 2 || cfg.sweep2d.n_spin < 2) {
            throw ConfigError("scenario.sweep2d.n_opt/n_spin: must be >= 2");
        }

        const json* mw_j = sc.object("mw_sweep", false);
        detail::SectionReader mw(mw_j ? *mw_j : empty, "scenario.mw_sweep");
        mw.allow({"start_dbm", "stop_dbm", "count"});
        cfg.mw_sweep.start_dbm = mw.number_or("start_dbm", -60.0);
        cfg.mw_sweep.stop_dbm = mw.number_or("stop_dbm", -10.0);
        cfg.mw_sweep.count = mw.integer("count", 26);
        mw.finish();
        if (cfg.mw_sweep.count < 2) throw ConfigError("scenario.mw_sweep.count: must be >= 2");

        const json* op_j = sc.object("opt_sweep", false);
        detail::SectionReader op(op_j ? *op_j : empty, "scenario.opt_sweep");
        op.allow({"start_w", "stop_w", "count"});
        cfg.opt_sweep.start_w = op.number_or("start_w", 1e-3);
        cfg.opt_sweep.stop_w = op.number_or("stop_w", 15e-3);
        cfg.opt_sweep.count = op.integer("count", 15);
        op.finish();
        if (cfg.opt_sweep.count < 2) throw ConfigError("scenario.opt_sweep.count: must be >= 2");

        const json* pr_j = sc.object("predict", false);
        detail::SectionReader pr(pr_j ? *pr_j : empty, "scenario.predict");
        pr.allow({"low_power_dbm", "cold_temperature_k", "delta_o_hz", "delta_mu_hz"});
        cfg.predict.low_power_dbm = pr.number_or("low_power_dbm", -60.0);
        cfg.predict.cold_temperature = pr.number_or("cold_temperature_k", 0.05);
        const double pdo = pr.nullable_number("delta_o_hz");
        const double pdm = pr.nullable_number("delta_mu_hz");
        cfg.predict.delta_o = std::isnan(pdo) ? pdo : two_pi * pdo;
        cfg.predict.delta_mu = std::isnan(pdm) ? pdm : two_pi * pdm;
        pr.finish();
        if (cfg.predict.cold_temperature < 0.0) {
            throw ConfigError("scenario.predict.cold_temperature_k: must be >= 0");
        }

        sc.finish();
    }
    top.finish();

    // Canonical normalized form, used for the provenance hash. nlohmann
    // objects are key-sorted, so the dump is deterministic.
    json canon;
    canon["physics"]["f_mu_hz"] = cfg.atom.f_mu;
    canon["physics"]["f_opt_hz"] = cfg.atom.f_opt;
    canon["physics"]["t1_spin_s"] = cfg.atom.t1_spin;
    canon["physics"]["t2_spin_s"] = cfg.atom.t2_spin;
    canon["physics"]["t2_opt_s"] = cfg.atom.t2_opt;
    canon["physics"]["t1_opt_s"] = cfg.atom.t1_opt;
    canon["physics"]["branching_31"] = cfg.atom.branching_31;
    canon["physics"]["g_mu_hz"] = cfg.atom.g_mu / two_pi;
    canon["physics"]["g_s_hz"] = cfg.atom.g_s / two_pi;
    canon["physics"]["g_p_hz"] = cfg.atom.g_p / two_pi;
    canon["physics"]["temperature_k"] = cfg.atom.temperature;
    canon["physics"]["spin_thermal_excitation"] = cfg.atom.spin_thermal_excitation;
    canon["physics"]["n_eff"] = cfg.n_eff;
    canon["physics"]["inhomogeneous"]["fwhm_opt_hz"] = cfg.inhom.fwhm_opt;
    canon["physics"]["inhomogeneous"]["fwhm_spin_hz"] = cfg.inhom.fwhm_spin;
    canon["physics"]["inhomogeneous"]["shape"] = to_string(cfg.inhom.shape);
    canon["physics"]["inhomogeneous"]["n_opt"] = cfg.inhom.n_opt;
    canon["physics"]["inhomogeneous"]["n_spin"] = cfg.inhom.n_spin;
    canon["physics"]["inhomogeneous"]["span_opt_fwhm"] = cfg.inhom.span_opt;
    canon["physics"]["inhomogeneous"]["span_spin_fwhm"] = cfg.inhom.span_spin;
    auto dump_cavity = [&](const char* name, const CavityParams& p) {
        canon["cavities"][name]["kappa1_hz"] = p.kappa1 / two_pi;
        canon["cavities"][name]["kappa2_hz"] = p.kappa2 / two_pi;
        canon["cavities"][name]["kappa_i_hz"] = p.kappai / two_pi;
        canon["cavities"][name]["delta_c_hz"] = p.delta_c / two_pi;
    };
    dump_cavity("microwave", cfg.mw_cavity);
    dump_cavity("optical", cfg.opt_cavity);
    canon["drive"]["p_mw_dbm"] = cfg.drive.p_mw_dbm;
    canon["drive"]["p_opt_w"] = cfg.drive.p_opt;
    canon["drive"]["f_mw_hz"] = cfg.drive.f_mw;
    canon["drive"]["f_opt_hz"] = cfg.drive.f_opt;
    canon["drive"]["delta_o_hz"] = cfg.drive.delta_o / two_pi;
    canon["drive"]["delta_mu_hz"] = cfg.drive.delta_mu / two_pi;
    canon["drive"]["self_consistent_pump"] = false;
    canon["numerics"]["damping"] = cfg.numerics.damping;
    canon["numerics"]["tol"] = cfg.numerics.tol;
    canon["numerics"]["max_iter"] = cfg.numerics.max_iter;
    canon["scenario"]["sweep2d"]["span_opt_hz"] = cfg.sweep2d.span_opt_hz;
    canon["scenario"]["sweep2d"]["span_spin_hz"] = cfg.sweep2d.span_spin_hz;
    canon["scenario"]["sweep2d"]["n_opt"] = cfg.sweep2d.n_opt;
    canon["scenario"]["sweep2d"]["n_spin"] = cfg.sweep2d.n_spin;
    canon["scenario"]["mw_sweep"]["start_dbm"] = cfg.mw_sweep.start_dbm;
    canon["scenario"]["mw_sweep"]["stop_dbm"] = cfg.mw_sweep.stop_dbm;
    canon["scenario"]["mw_sweep"]["count"] = cfg.mw_sweep.count;
    canon["scenario"]["opt_sweep"]["start_w"] = cfg.opt_sweep.start_w;
    canon["scenario"]["opt_sweep"]["stop_w"] = cfg.opt_sweep.stop_w;
    canon["scenario"]["opt_sweep"]["count"] = cfg.opt_sweep.count;
    canon["scenario"]["predict"]["low_power_dbm"] = cfg.predict.low_power_dbm;
    canon["scenario"]["predict"]["cold_temperature_k"] = cfg.predict.cold_temperature;
    detail::json_set(canon["scenario"]["predict"], "delta_o_hz",
                     std::isnan(cfg.predict.delta_o) ? cfg.predict.delta_o
                                                     : cfg.predict.delta_o / two_pi);
    detail::json_set(canon["scenario"]["predict"], "delta_mu_hz",
                     std::isnan(cfg.predict.delta_mu) ? cfg.predict.delta_mu
                                                      : cfg.predict.delta_mu / two_pi);

    cfg.canonical = std::move(canon);
    cfg.hash = detail::fnv1a(cfg.canonical.dump());
    return cfg;
}

/// One "key.path=value" assignment, parsed like a JSON literal (falls back to
/// a plain string). The result goes through full validation again.
inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected key.path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // unquoted string
    }

    json* node = &root;
    std::size_t begin = 0;
    for (;;) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot - begin);
        if (key.empty()) throw ConfigError("override '" + assignment + "': empty path segment");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        begin = dot + 1;
    }
}

inline json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
}

inline RunConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {}) {
    json root = read_config_file(path);
    for (const auto& o : overrides) apply_override(root, o);
    return parse_config(root);
}

} // namespace deltasim
