// solver.hpp — self-consistent steady state of atoms + both cavity modes
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deltasim/cavity.hpp"
#include "deltasim/ensemble.hpp"

namespace deltasim {

struct FixedPointNumerics {
    double damping = 0.5;  // relaxation factor once the update stops contracting
    double tol = 1e-10;    // max relative field update at convergence
    int max_iter = 10000;
    bool trace = false;    // log per-iteration residuals to stderr (debugging)

    void validate() const {
        if (!(damping > 0.0 && damping <= 1.0)) {
            throw ConfigError("FixedPointNumerics.damping: must lie in (0, 1]");
        }
        if (!(tol > 0.0)) throw ConfigError("FixedPointNumerics.tol: must be > 0");
        if (max_iter < 1) throw ConfigError("FixedPointNumerics.max_iter: must be >= 1");
    }
};

struct ConversionSystem {
    AtomParams atom;
    DetuningGrid grid;        // node detunings relative to the line centers
    CavityParams mw_cavity;
    CavityParams opt_cavity;
    DriveInputs drive;

    void validate() const {
        atom.validate();
        grid.validate();
        mw_cavity.validate();
        opt_cavity.validate();
        drive.validate();
    }
};

struct SteadyStateSolution {
    FieldState fields;
    EnsembleResponse response;  // at the converged fields
    double eta = 0.0;           // photon-number conversion efficiency
    int iterations = 0;
    double residual = 0.0;      // final relative update norm
    double kappa_abs = 0.0;     // ensemble absorption at the signal frequency (rad/s)
    double mw_photon_flux = 0.0;
};

namespace detail {

inline double relative_update(complexd next, complexd prev) {
    const double scale = std::max({std::abs(next), std::abs(prev), 1e-300});
    return std::abs(next - prev) / scale;
}

} // namespace detail

/// Two-step iteration: (1) per-ion steady states at trial field amplitudes,
/// (2) cavity amplitudes updated from the integrated coherences; repeated to
/// joint convergence.
///
/// The mode update is preconditioned with the linearized ensemble
/// susceptibility: writing pol(a) ~ pol(a_cur) + chi (a - a_cur) and solving
/// the mode equation with the chi term implicit. The preconditioner cancels
/// identically at the fixed point, so the solution is the plain Picard one;
/// it only removes the stability ceiling kappa_abs < (2/alpha - 1) kappa_tot
/// and cuts the iteration count. Updates run undamped while the residual
/// contracts; after the first growth the configured damping applies.
inline SteadyStateSolution fixed_point_solve(const ConversionSystem& system,
                                             const FixedPointNumerics& numerics,
                                             int threads = 1) {
    system.validate();
    numerics.validate();

    const double phi_mw = system.drive.mw_photon_flux();
    const complexd mw_drive_amp(std::sqrt(phi_mw), 0.0);
    const DetuningGrid grid = system.grid.shifted(system.drive.delta_o, system.drive.delta_mu);

    FieldState fields;
    fields.omega_o = pump_rabi(system.drive.p_opt, system.opt_cavity, system.atom.g_p,
                               system.drive.f_opt);

    double residual = std::numeric_limits<double>::infinity();
    double prev_residual = std::numeric_limits<double>::infinity();
    bool contracting = true;
    int iterations = 0;
    bool converged = false;

    // Update differences of the two previous plain steps, for the guarded
    // geometric extrapolation below.
    complexd da_prev, db_prev;
    bool have_prev_update = false;
    int plain_steps = 0;

    for (int it = 1; it <= numerics.max_iter; ++it) {
        iterations = it;
        const EnsembleResponse resp = ensemble_response(grid, system.atom, fields, threads);
        const complexd chi_mu =
            microwave_mode_susceptibility(resp, system.atom, grid).denominator_term();
        const complexd chi_s =
            signal_mode_susceptibility(resp, system.atom, grid).denominator_term();

        const complexd i_unit(0.0, 1.0);
        const complexd b_new = (std::sqrt(system.mw_cavity.kappa1) * mw_drive_amp -
                                i_unit * resp.pol_mu + chi_mu * fields.b) /
                               (complexd(0.5 * system.mw_cavity.kappa_total(),
                                         system.mw_cavity.delta_c) + chi_mu);
        const complexd a_new = (-i_unit * resp.pol_s + chi_s * fields.a) /
                               (complexd(0.5 * system.opt_cavity.kappa_total(),
                                         system.opt_cavity.delta_c) + chi_s);

        residual = std::max(detail::relative_update(a_new, fields.a),
                            detail::relative_update(b_new, fields.b));
        if (contracting && it > 1 && residual > prev_residual) contracting = false;
        const double alpha = contracting ? 1.0 : numerics.damping;

        const complexd da = a_new - fields.a;
        const complexd db = b_new - fields.b;

        // Aitken-style extrapolation when consecutive plain updates form a
        // stable geometric sequence; convergence is still certified by the
        // plain residual, the jump only shortens the tail.
        bool accelerated = false;
        if (contracting && residual >= numerics.tol && have_prev_update && plain_steps >= 2) {
            const double den = std::norm(da_prev) + std::norm(db_prev);
            if (den > 0.0) {
                const complexd ratio = (da * std::conj(da_prev) + db * std::conj(db_prev)) / den;
                const complexd gain = ratio / (1.0 - ratio);
                if (std::abs(ratio) < 0.95 && std::abs(gain) < 20.0) {
                    fields.a = a_new + gain * da;
                    fields.b = b_new + gain * db;
                    accelerated = true;
                    have_prev_update = false;
                    plain_steps = 0;
                }
            }
        }
        if (!accelerated) {
            fields.a += alpha * da;
            fields.b += alpha * db;
            da_prev = da;
            db_prev = db;
            have_prev_update = true;
            ++plain_steps;
        }
        if (numerics.trace) {
            std::fprintf(stderr, "  it %3d residual %.3e alpha %.2f%s |a|=%.4e |b|=%.4e\n", it,
                         residual, alpha, accelerated ? " aitken" : "", std::abs(fields.a),
                         std::abs(fields.b));
        }
        prev_residual = residual;

        if (!fields.finite()) {
            throw DivergenceError("fixed_point_solve: non-finite field amplitude at iteration " +
                                  std::to_string(it));
        }
        if (std::abs(fields.a) > 1e12 || std::abs(fields.b) > 1e12) {
            throw DivergenceError("fixed_point_solve: field amplitude exceeded 1e12 at iteration " +
                                  std::to_string(it));
        }
        if (residual < numerics.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fixed_point_solve: no convergence after " << numerics.max_iter
            << " iterations, last residual " << residual
            << " (possible multistability at high drive)";
        throw NonConvergenceError(msg.str(), residual);
    }

    SteadyStateSolution sol;
    sol.fields = fields;
    sol.response = ensemble_response(grid, system.atom, fields, threads);
    sol.iterations = iterations;
    sol.residual = residual;
    sol.mw_photon_flux = phi_mw;
    sol.kappa_abs = signal_absorption_rate(sol.response, system.atom, grid);
    sol.eta = phi_mw > 0.0 ? conversion_efficiency(fields.a, system.opt_cavity, phi_mw) : 0.0;
    return sol;
}

} // namespace deltasim
