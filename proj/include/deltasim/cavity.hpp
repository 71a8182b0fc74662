// cavity.hpp — classical input-output relations for the two resonators
//
// Convention fixed here and enforced by tests: every kappa is an energy
// (photon-number) decay rate; amplitude decay is kappa/2; photon flux emitted
// through a port is kappa_port * |amp|^2.
#pragma once

#include <complex>

#include "deltasim/constants.hpp"
#include "deltasim/errors.hpp"

namespace deltasim {

using complexd = std::complex<double>;

struct CavityParams {
    double kappa1 = 0.0;   // input/output port coupling rate (rad/s)
    double kappa2 = 0.0;   // second port coupling rate (rad/s)
    double kappai = 0.0;   // intrinsic loss rate (rad/s)
    double delta_c = 0.0;  // cavity detuning from its drive/signal reference (rad/s)

    double kappa_total() const { return kappa1 + kappa2 + kappai; }

    void validate() const {
        if (kappa1 < 0.0 || kappa2 < 0.0 || kappai < 0.0) {
            throw ConfigError("CavityParams: kappa rates must be >= 0");
        }
        if (!(kappa_total() > 0.0)) {
            throw ConfigError("CavityParams: total loss rate must be > 0");
        }
    }

    /// Impedance-matched variant: port coupling equal to all other losses.
    CavityParams impedance_matched() const {
        CavityParams out = *this;
        out.kappa1 = kappa2 + kappai;
        return out;
    }
};

struct DriveInputs {
    double p_mw_dbm = -9.5;      // microwave input power (dBm)
    double p_opt = 6.48e-3;      // pump laser power (W)
    double f_mw = 5.186e9;       // microwave frequency (Hz)
    double f_opt = 195113.30e9;  // pump optical frequency (Hz)
    double delta_o = 0.0;        // pump detuning from the optical line center (rad/s)
    double delta_mu = 0.0;       // microwave detuning from the spin line center (rad/s)

    void validate() const {
        if (!(p_opt >= 0.0)) throw ConfigError("DriveInputs.p_opt: must be >= 0 W");
        if (!(f_mw > 0.0)) throw ConfigError("DriveInputs.f_mw: must be > 0 Hz");
        if (!(f_opt > 0.0)) throw ConfigError("DriveInputs.f_opt: must be > 0 Hz");
    }

    double mw_photon_flux() const { return input_photon_flux(dbm_to_watts(p_mw_dbm), f_mw); }
};

/// Steady intracavity amplitude for drive amplitude in sqrt(photons/s) and a
/// collective polarization source:
///   amp = (sqrt(kappa1) drive - i pol) / (i delta_c + kappa_total/2)
inline complexd cavity_steady_amplitude(const CavityParams& cav, complexd drive_amp,
                                        complexd pol) {
    return (std::sqrt(cav.kappa1) * drive_amp - complexd(0.0, 1.0) * pol) /
           complexd(0.5 * cav.kappa_total(), cav.delta_c);
}

/// Field reflection coefficient at port 1 of the empty cavity.
inline complexd reflection_coefficient(const CavityParams& cav, double delta) {
    return 1.0 - cav.kappa1 / complexd(0.5 * cav.kappa_total(), delta);
}

/// Pump Rabi frequency from the resonant empty-cavity buildup
///   n_p = 4 kappa1 Phi_in / kappa_total^2,  omega_o = g_p sqrt(n_p).
/// The pump is a fixed classical drive; it is not solved self-consistently.
inline complexd pump_rabi(double p_opt, const CavityParams& opt_cavity, double g_p,
                          double f_opt) {
    opt_cavity.validate();
    if (!(p_opt >= 0.0)) throw ConfigError("pump_rabi: pump power must be >= 0 W");
    const double flux = input_photon_flux(p_opt, f_opt);
    const double kt = opt_cavity.kappa_total();
    const double n_p = 4.0 * opt_cavity.kappa1 * flux / (kt * kt);
    return complexd(g_p * std::sqrt(n_p), 0.0);
}

/// Photon-number conversion efficiency: signal flux through the optical
/// input/output port over the input microwave photon flux.
inline double conversion_efficiency(complexd a, const CavityParams& opt_cavity,
                                    double mw_photon_flux) {
    if (!(mw_photon_flux > 0.0)) {
        throw std::invalid_argument("conversion_efficiency: undefined for zero input flux");
    }
    return opt_cavity.kappa1 * std::norm(a) / mw_photon_flux;
}

} // namespace deltasim
