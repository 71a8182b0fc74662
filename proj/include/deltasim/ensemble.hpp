// ensemble.hpp — inhomogeneous averaging: per-ion steady states, collective
// polarizations, population-difference maps, signal reabsorption
#pragma once

#include <complex>
#include <sstream>
#include <vector>

#include "deltasim/atom.hpp"
#include "deltasim/grid.hpp"
#include "deltasim/threads.hpp"

namespace deltasim {

struct EnsembleResponse {
    // Collective polarizations feeding the two cavity modes:
    //   pol_mu = n_eff * sum_k w_k g_mu rho21_k   (rho21 = <2|rho|1>)
    //   pol_s  = n_eff * sum_k w_k g_s  rho31_k   (rho31 = <3|rho|1>)
    // Accumulated in fixed node order so results are bit-reproducible.
    complexd pol_mu{0.0, 0.0};
    complexd pol_s{0.0, 0.0};

    std::vector<DensityMatrix> rho_grid;  // per-node steady states
    std::vector<double> popdiff_grid;     // rho11 - rho33 per node
    std::vector<double> popdiff12_grid;   // rho11 - rho22 per node

    // Lattice metadata mirrored from the grid the response was computed on.
    int n_opt = 0;
    int n_spin = 0;
    std::vector<double> axis_o;
    std::vector<double> axis_mu;
};

inline EnsembleResponse ensemble_response(const DetuningGrid& grid, const AtomParams& params,
                                          const FieldState& fields, int threads = 1) {
    params.validate();
    grid.validate();
    if (!fields.finite()) {
        throw std::invalid_argument("ensemble_response: non-finite field amplitudes");
    }

    const std::size_t n = grid.size();
    EnsembleResponse resp;
    resp.rho_grid.resize(n);
    resp.popdiff_grid.resize(n);
    resp.popdiff12_grid.resize(n);
    resp.n_opt = grid.n_opt;
    resp.n_spin = grid.n_spin;
    resp.axis_o = grid.axis_o;
    resp.axis_mu = grid.axis_mu;

    const AtomRates rates = AtomRates::from(params);

    parallel_for(n, threads, [&](std::size_t k) {
        const auto& node = grid.nodes[k];
        const AtomDetunings det{node.delta_mu, node.delta_o};
        try {
            resp.rho_grid[k] = steady_state_atom_fast(params, rates, det, fields);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "ensemble node " << k << " (delta_o=" << node.delta_o
                << " rad/s, delta_mu=" << node.delta_mu << " rad/s): " << e.what();
            throw SingularSystemError(msg.str());
        }
        const auto& rho = resp.rho_grid[k].rho;
        resp.popdiff_grid[k] = (rho(0, 0) - rho(2, 2)).real();
        resp.popdiff12_grid[k] = (rho(0, 0) - rho(1, 1)).real();
    });

    complexd pol_mu{0.0, 0.0};
    complexd pol_s{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        pol_mu += grid.weights[k] * resp.rho_grid[k].rho(1, 0);
        pol_s += grid.weights[k] * resp.rho_grid[k].rho(2, 0);
    }
    resp.pol_mu = grid.n_eff * params.g_mu * pol_mu;
    resp.pol_s = grid.n_eff * params.g_s * pol_s;
    return resp;
}

struct Map2D {
    std::vector<double> axis_o;   // rad/s
    std::vector<double> axis_mu;  // rad/s
    std::vector<double> values;   // row-major, index = io * n_spin + imu

    int n_opt() const { return static_cast<int>(axis_o.size()); }
    int n_spin() const { return static_cast<int>(axis_mu.size()); }
    double at(int io, int imu) const { return values[static_cast<std::size_t>(io) * axis_mu.size() + imu]; }
};

/// rho11 - rho33 over the detuning lattice, the quantity that controls
/// reabsorption of the upconverted light.
inline Map2D population_difference_map(const EnsembleResponse& resp) {
    Map2D map;
    map.axis_o = resp.axis_o;
    map.axis_mu = resp.axis_mu;
    map.values = resp.popdiff_grid;
    return map;
}

/// Effective energy-decay rate the ensemble adds to the signal mode
/// (negative for gain): the imaginary part of the linearized susceptibility,
///   kappa_abs = 2 N sum_k w_k g_s^2 (rho11-rho33)_k gamma31 / (gamma31^2 + delta_s^2).
inline double signal_absorption_rate(const EnsembleResponse& resp, const AtomParams& params,
                                     const DetuningGrid& grid) {
    const double gamma31 = 1.0 / params.t2_opt;
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double ds = grid.nodes[k].delta_o + grid.nodes[k].delta_mu;
        sum += grid.weights[k] * resp.popdiff_grid[k] * gamma31 / (gamma31 * gamma31 + ds * ds);
    }
    return 2.0 * grid.n_eff * params.g_s * params.g_s * sum;
}

/// Linearized medium response seen by one cavity mode, as the complex rate
/// kappa_abs/2 + i delta_disp entering the mode's steady-state denominator.
struct ModeSusceptibility {
    double kappa_abs = 0.0;    // energy decay rate added by the medium (rad/s)
    double delta_disp = 0.0;   // dispersive frequency pull (rad/s)
    complexd denominator_term() const { return {0.5 * kappa_abs, delta_disp}; }
};

namespace detail {

inline ModeSusceptibility linearized_susceptibility(const DetuningGrid& grid,
                                                    const std::vector<double>& popdiff,
                                                    double g, double gamma, bool signal_mode) {
    double abs_sum = 0.0;
    double disp_sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = signal_mode ? grid.nodes[k].delta_o + grid.nodes[k].delta_mu
                                     : grid.nodes[k].delta_mu;
        const double lor = grid.weights[k] * popdiff[k] / (gamma * gamma + d * d);
        abs_sum += lor * gamma;
        disp_sum += lor * d;
    }
    ModeSusceptibility chi;
    chi.kappa_abs = 2.0 * grid.n_eff * g * g * abs_sum;
    chi.delta_disp = -grid.n_eff * g * g * disp_sum;
    return chi;
}

} // namespace detail

inline ModeSusceptibility signal_mode_susceptibility(const EnsembleResponse& resp,
                                                     const AtomParams& params,
                                                     const DetuningGrid& grid) {
    return detail::linearized_susceptibility(grid, resp.popdiff_grid, params.g_s,
                                             1.0 / params.t2_opt, true);
}

inline ModeSusceptibility microwave_mode_susceptibility(const EnsembleResponse& resp,
                                                        const AtomParams& params,
                                                        const DetuningGrid& grid) {
    return detail::linearized_susceptibility(grid, resp.popdiff12_grid, params.g_mu,
                                             1.0 / params.t2_spin, false);
}

} // namespace deltasim
