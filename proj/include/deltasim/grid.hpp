// grid.hpp — inhomogeneous broadening: 2D detuning quadrature grid
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "deltasim/constants.hpp"
#include "deltasim/errors.hpp"

namespace deltasim {

enum class Lineshape { gaussian, lorentzian_truncated };

inline std::string to_string(Lineshape s) {
    return s == Lineshape::gaussian ? "gaussian" : "lorentzian-truncated";
}

struct InhomogeneousSpec {
    double fwhm_opt = 340e6;   // optical inhomogeneous FWHM (Hz)
    double fwhm_spin = 50e6;   // spin inhomogeneous FWHM (Hz)
    Lineshape shape = Lineshape::gaussian;
    int n_opt = 341;           // grid points on the optical axis (odd)
    int n_spin = 101;          // grid points on the spin axis (odd)
    double span_opt = 3.0;     // truncation half-width, units of fwhm_opt
    double span_spin = 3.0;    // truncation half-width, units of fwhm_spin

    void validate() const {
        if (!(fwhm_opt > 0.0) || !(fwhm_spin > 0.0)) {
            throw ConfigError("InhomogeneousSpec.fwhm_opt/fwhm_spin: must be > 0 Hz");
        }
        if (n_opt < 3 || n_opt % 2 == 0) {
            throw ConfigError("InhomogeneousSpec.n_opt: must be odd and >= 3");
        }
        if (n_spin < 3 || n_spin % 2 == 0) {
            throw ConfigError("InhomogeneousSpec.n_spin: must be odd and >= 3");
        }
        if (!(span_opt > 0.0) || !(span_spin > 0.0)) {
            throw ConfigError("InhomogeneousSpec.span_opt/span_spin: must be > 0");
        }
    }
};

/// Unnormalized lineshape value at detuning x for a given FWHM (same units).
inline double lineshape_value(Lineshape s, double x, double fwhm) {
    const double u = x / fwhm;
    if (s == Lineshape::gaussian) return std::exp(-4.0 * M_LN2 * u * u);
    return 1.0 / (1.0 + 4.0 * u * u);
}

struct DetuningGrid {
    struct Node {
        double delta_o;   // rad/s
        double delta_mu;  // rad/s
    };

    // Row-major over (optical, spin): node index = io * n_spin + imu.
    std::vector<Node> nodes;
    std::vector<double> weights;  // probability weights, sum 1
    double n_eff = 1.0;           // effective number of coupled ions
    int n_opt = 0;
    int n_spin = 0;
    std::vector<double> axis_o;   // distinct optical detunings (rad/s)
    std::vector<double> axis_mu;  // distinct spin detunings (rad/s)

    std::size_t size() const { return nodes.size(); }

    /// Same grid seen by a drive detuned from the line centers: all node
    /// detunings shift by minus the drive detunings.
    DetuningGrid shifted(double drive_delta_o, double drive_delta_mu) const {
        DetuningGrid out = *this;
        for (auto& n : out.nodes) {
            n.delta_o -= drive_delta_o;
            n.delta_mu -= drive_delta_mu;
        }
        for (auto& v : out.axis_o) v -= drive_delta_o;
        for (auto& v : out.axis_mu) v -= drive_delta_mu;
        return out;
    }

    void validate() const {
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ConfigError("DetuningGrid: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw ConfigError("DetuningGrid: weights sum to " + std::to_string(sum));
        }
        if (!(n_eff > 0.0)) throw ConfigError("DetuningGrid: n_eff must be > 0");
    }
};

namespace detail {

// Uniform nodes over [-span, span] with trapezoidal lineshape weights,
// normalized to sum exactly 1. Node values are in rad/s.
inline void lineshape_axis(Lineshape shape, double fwhm_hz, int n, double span_fwhm,
                           std::vector<double>& axis, std::vector<double>& weights) {
    const double half_width = span_fwhm * fwhm_hz * two_pi;
    const double fwhm = fwhm_hz * two_pi;
    const int c = (n - 1) / 2;
    const double h = half_width / static_cast<double>(c);
    axis.resize(n);
    weights.resize(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i - c) * h;
        axis[i] = x;
        double w = lineshape_value(shape, x, fwhm);
        if (i == 0 || i == n - 1) w *= 0.5;  // trapezoid endpoints
        weights[i] = w;
        sum += w;
    }
    for (double& w : weights) w /= sum;
}

} // namespace detail

inline DetuningGrid build_detuning_grid(const InhomogeneousSpec& spec, double n_eff) {
    spec.validate();
    if (!(n_eff > 0.0)) throw ConfigError("build_detuning_grid: n_eff must be > 0");

    DetuningGrid grid;
    grid.n_eff = n_eff;
    grid.n_opt = spec.n_opt;
    grid.n_spin = spec.n_spin;

    std::vector<double> w_o, w_mu;
    detail::lineshape_axis(spec.shape, spec.fwhm_opt, spec.n_opt, spec.span_opt, grid.axis_o, w_o);
    detail::lineshape_axis(spec.shape, spec.fwhm_spin, spec.n_spin, spec.span_spin, grid.axis_mu, w_mu);

    grid.nodes.reserve(static_cast<std::size_t>(spec.n_opt) * spec.n_spin);
    grid.weights.reserve(grid.nodes.capacity());
    double sum = 0.0;
    for (int io = 0; io < spec.n_opt; ++io) {
        for (int imu = 0; imu < spec.n_spin; ++imu) {
            grid.nodes.push_back({grid.axis_o[io], grid.axis_mu[imu]});
            const double w = w_o[io] * w_mu[imu];
            grid.weights.push_back(w);
            sum += w;
        }
    }
    for (double& w : grid.weights) w /= sum;
    grid.validate();
    return grid;
}

} // namespace deltasim
