// deltasim.cpp — command-line front end
//
// Subcommands: solve, sweep2d, mw-sweep, opt-sweep, predict, validate.
// Exit codes: 0 success, 1 configuration error, 2 solver non-convergence.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deltasim/config.hpp"
#include "deltasim/csv.hpp"
#include "deltasim/solver.hpp"
#include "deltasim/sweep.hpp"

namespace {

using namespace deltasim;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    int threads = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Path to a JSON run configuration")
        ->required();
    cmd->add_option("--out", opts.out_path, "Write results as CSV to this path");
    cmd->add_option("--threads", opts.threads,
                    "Worker threads (default: DELTA_SIM_THREADS or hardware)");
    cmd->add_option("--override", opts.overrides,
                    "Config override key.path=value; may be repeated");
}

void stamp(SweepResult& res, const RunConfig& cfg, const std::string& command) {
    SweepResult stamped;
    stamped.add_metadata("command", command);
    stamped.add_metadata("config_hash", cfg.hash_hex());
    for (auto& m : res.metadata) stamped.metadata.push_back(std::move(m));
    res.metadata = std::move(stamped.metadata);
}

void report_sweep(const SweepResult& res, const RunConfig& cfg, const std::string& command,
                  const std::string& out_path) {
    const std::size_t failed = res.failed_cells();
    std::cout << command << ": " << res.cell_count() << " cells, " << failed
              << " non-converged\n";
    for (const auto& [key, value] : res.metadata) {
        if (key != "command" && key != "config_hash") {
            std::cout << "  " << key << " = " << value << "\n";
        }
    }
    if (!out_path.empty()) {
        write_result(res, out_path);
        std::cout << "  wrote " << out_path << "\n";
    }
}

SweepResult popdiff_map_result(const SteadyStateSolution& sol) {
    SweepResult res;
    auto to_hz = [](const std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / two_pi;
        return out;
    };
    res.axes = {{"delta_o", "Hz", to_hz(sol.response.axis_o)},
                {"delta_mu", "Hz", to_hz(sol.response.axis_mu)}};
    res.columns = {{"popdiff_11_33", "dimensionless", sol.response.popdiff_grid}};
    res.converged.assign(sol.response.popdiff_grid.size(), 1);
    return res;
}

int run_solve(const RunConfig& cfg, const CommonOpts& opts, int threads) {
    const SteadyStateSolution sol = fixed_point_solve(cfg.system(), cfg.numerics, threads);
    std::printf("eta             = %.6e\n", sol.eta);
    std::printf("|a|^2           = %.6e photons\n", std::norm(sol.fields.a));
    std::printf("|b|^2           = %.6e photons\n", std::norm(sol.fields.b));
    std::printf("omega_o         = %.6e rad/s\n", std::abs(sol.fields.omega_o));
    std::printf("kappa_abs       = %.6e rad/s\n", sol.kappa_abs);
    std::printf("mw photon flux  = %.6e 1/s\n", sol.mw_photon_flux);
    std::printf("iterations      = %d\n", sol.iterations);
    std::printf("residual        = %.3e\n", sol.residual);
    if (!opts.out_path.empty()) {
        SweepResult map = popdiff_map_result(sol);
        stamp(map, cfg, "solve");
        write_result(map, opts.out_path);
        std::printf("wrote %s\n", opts.out_path.c_str());
    }
    return 0;
}

int run_predict(const RunConfig& cfg, const CommonOpts& opts, int threads) {
    const PredictionReport rep =
        impedance_match_prediction(cfg.system(), cfg.numerics, cfg.predict, threads);
    std::printf("low-power operating point: %.1f dBm, delta_o = %.4e Hz, delta_mu = %.4e Hz\n",
                rep.power_dbm, rep.delta_o / two_pi, rep.delta_mu / two_pi);
    std::printf("eta (current cavity, %.2f K)  = %.6e\n", rep.warm_temperature,
                rep.eta_unmatched_warm);
    std::printf("eta (matched,        %.2f K)  = %.6e\n", rep.warm_temperature,
                rep.eta_matched_warm);
    std::printf("eta (current cavity, %.3f K) = %.6e\n", rep.cold_temperature,
                rep.eta_unmatched_cold);
    std::printf("eta (matched,        %.3f K) = %.6e\n", rep.cold_temperature,
                rep.eta_matched_cold);
    std::printf("impedance-matching boost      = %.3f\n", rep.matching_boost);
    std::printf("predicted low-power eta       = %.6e\n", rep.eta_predicted);
    std::printf("matched kappa1 (microwave)    = %.6e Hz\n", rep.kappa1_matched / two_pi);
    std::printf("|r|^2 on resonance, current   = %.4f (energy-decay-rate convention)\n",
                rep.reflection_power_unmatched);
    std::printf("|r|^2 on resonance, matched   = %.4f\n", rep.reflection_power_matched);
    std::printf("ground-state occupation at %.3f K = %.6f\n", rep.cold_temperature,
                rep.ground_state_occupation_cold);
    if (!opts.out_path.empty()) {
        std::ofstream out(opts.out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + opts.out_path);
        out << "# deltasim result\n# command: predict\n# config_hash: " << cfg.hash_hex()
            << "\n# constants: " << constants_version << "\n# columns: quantity,value\n";
        out << "eta_unmatched_warm," << format_double(rep.eta_unmatched_warm) << "\n";
        out << "eta_matched_warm," << format_double(rep.eta_matched_warm) << "\n";
        out << "eta_unmatched_cold," << format_double(rep.eta_unmatched_cold) << "\n";
        out << "eta_matched_cold," << format_double(rep.eta_matched_cold) << "\n";
        out << "matching_boost," << format_double(rep.matching_boost) << "\n";
        out << "eta_predicted," << format_double(rep.eta_predicted) << "\n";
        out << "reflection_power_unmatched," << format_double(rep.reflection_power_unmatched)
            << "\n";
        out << "ground_state_occupation_cold,"
            << format_double(rep.ground_state_occupation_cold) << "\n";
        std::printf("wrote %s\n", opts.out_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deltasim: steady-state simulator for cavity-enhanced microwave-to-optical "
                 "conversion in rare-earth-doped crystals"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string command;
    for (const auto& [name, desc] :
         std::initializer_list<std::pair<const char*, const char*>>{
             {"solve", "Solve the steady state at the configured operating point"},
             {"sweep2d", "Efficiency map over pump and microwave drive detunings"},
             {"mw-sweep", "Efficiency and reabsorption versus microwave power"},
             {"opt-sweep", "Efficiency versus pump laser power"},
             {"predict", "Impedance-matching and low-temperature estimates"},
             {"validate", "Load and validate a configuration, then exit"}}) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, opts);
        cmd->callback([&command, name = std::string(name)]() { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const deltasim::RunConfig cfg = deltasim::load_config(opts.config_path, opts.overrides);
        const int threads = deltasim::resolve_thread_count(opts.threads);

        if (command == "validate") {
            std::cout << "config OK, hash " << cfg.hash_hex() << "\n";
            return 0;
        }
        if (command == "solve") return run_solve(cfg, opts, threads);
        if (command == "predict") return run_predict(cfg, opts, threads);

        deltasim::SweepResult res;
        if (command == "sweep2d") {
            res = deltasim::sweep_2d(cfg.system(), cfg.numerics, cfg.sweep2d, threads);
        } else if (command == "mw-sweep") {
            res = deltasim::microwave_power_sweep(cfg.system(), cfg.numerics, cfg.mw_sweep,
                                                  threads);
        } else if (command == "opt-sweep") {
            res = deltasim::optical_power_sweep(cfg.system(), cfg.numerics, cfg.opt_sweep,
                                                threads);
        }
        stamp(res, cfg, command);
        report_sweep(res, cfg, command, opts.out_path);
        return res.failed_cells() == 0 ? 0 : 2;
    } catch (const deltasim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const deltasim::NonConvergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const deltasim::DivergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
