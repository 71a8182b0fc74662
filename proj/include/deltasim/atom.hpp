// atom.hpp — single-ion Δ-system: Hamiltonian, Lindblad generator, steady state
//
// Basis ordering {|1>, |2>, |3>}: |1>, |2> are the magnetically split ground
// doublet (spin transition at f_mu), |3> is the optically excited level.
// Drives close the Δ loop: microwave mode b on 1<->2, classical pump Rabi
// frequency omega_o on 2<->3, intracavity signal mode a on 1<->3.
//
// All dynamics live in the rotating frame in which the Hamiltonian is time
// independent (rad/s units, hbar = 1):
//
//   H = delta_mu s22 + delta_s s33
//       + (omega_o s32 + g_s a s31 + g_mu b s21 + h.c.),  s_ij = |i><j|
//
// Density matrices are vectorized column-major: vec index = row + 3*col.
//
// Coherence convention used by the ensemble and cavity modules: the mode
// amplitude obeys  d<m>/dt = -(i delta_c + kappa_tot/2)<m> - i pol + input,
// where the polarization sums matrix elements <j|rho|1>, i.e. rho(1,0) feeds
// the microwave mode and rho(2,0) feeds the signal mode.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

#include "deltasim/constants.hpp"
#include "deltasim/errors.hpp"

namespace deltasim {

using complexd = std::complex<double>;
using Matrix3cd = Eigen::Matrix3cd;
using Matrix9cd = Eigen::Matrix<complexd, 9, 9>;
using Vector9cd = Eigen::Matrix<complexd, 9, 1>;

/// Boltzmann occupation ratio p_upper/p_lower for a transition at f (Hz).
inline double thermal_ratio(double temperature, double f) {
    if (temperature < 0.0) {
        throw std::invalid_argument("thermal_ratio: temperature must be >= 0 K");
    }
    if (!(f > 0.0)) {
        throw std::invalid_argument("thermal_ratio: frequency must be > 0 Hz");
    }
    if (temperature == 0.0) return 0.0;
    return std::exp(-planck_h * f / (boltzmann_k * temperature));
}

// ------------------------------- parameters --------------------------------

struct AtomParams {
    double f_mu = 5.186e9;       // spin transition frequency (Hz)
    double f_opt = 195113.30e9;  // pump optical transition frequency (Hz)
    double t1_spin = 1e-3;       // |2> -> |1> population lifetime (s)
    double t2_spin = 1e-6;       // spin coherence time (s)
    double t2_opt = 1e-6;        // optical coherence time (s)
    double t1_opt = 11e-3;       // |3> population lifetime (s)
    double branching_31 = 0.5;   // fraction of |3> decay going to |1>
    double g_mu = 0.0;           // single-ion microwave coupling (rad/s)
    double g_s = 0.0;            // single-ion signal-mode coupling (rad/s)
    double g_p = 0.0;            // single-ion pump coupling (rad/s)
    double temperature = 4.6;    // bath temperature (K)

    // Detailed-balance reverse rate on the spin channel. With it the undriven
    // steady state is the Boltzmann state at `temperature`; switchable because
    // a plain T1 decay is the other defensible reading.
    bool spin_thermal_excitation = true;

    double gamma_spin_down() const { return 1.0 / t1_spin; }
    double gamma_spin_up() const {
        return spin_thermal_excitation ? thermal_ratio(temperature, f_mu) / t1_spin : 0.0;
    }
    double gamma_opt() const { return 1.0 / t1_opt; }

    // Pure dephasing rates fixed so that the total decay of rho21 is exactly
    // 1/t2_spin and of rho31 exactly 1/t2_opt.
    double dephasing_spin() const {
        return 2.0 / t2_spin - gamma_spin_down() - gamma_spin_up();
    }
    double dephasing_opt() const {
        return 2.0 / t2_opt - gamma_opt() - gamma_spin_up();
    }

    void validate() const {
        auto require_pos = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError(std::string("AtomParams.") + name + ": must be finite and > 0");
            }
        };
        require_pos(f_mu, "f_mu");
        require_pos(f_opt, "f_opt");
        require_pos(t1_spin, "t1_spin");
        require_pos(t2_spin, "t2_spin");
        require_pos(t2_opt, "t2_opt");
        require_pos(t1_opt, "t1_opt");
        if (!(branching_31 >= 0.0 && branching_31 <= 1.0)) {
            throw ConfigError("AtomParams.branching_31: must lie in [0, 1]");
        }
        if (!(g_mu >= 0.0 && g_s >= 0.0 && g_p >= 0.0)) {
            throw ConfigError("AtomParams.g_mu/g_s/g_p: couplings must be >= 0");
        }
        if (temperature < 0.0) {
            throw ConfigError("AtomParams.temperature: must be >= 0 K");
        }
        if (dephasing_spin() < 0.0) {
            throw ConfigError("AtomParams.t2_spin: 1/T2 below the population-decay "
                              "contribution implies negative pure dephasing");
        }
        if (dephasing_opt() < 0.0) {
            throw ConfigError("AtomParams.t2_opt: 1/T2 below the population-decay "
                              "contribution implies negative pure dephasing");
        }
    }
};

struct AtomDetunings {
    double delta_mu = 0.0;  // microwave detuning of this ion (rad/s)
    double delta_o = 0.0;   // pump optical detuning of this ion (rad/s)

    // Detuning of the upconverted light; derived, never stored.
    double delta_s() const { return delta_o + delta_mu; }
};

struct FieldState {
    complexd a{0.0, 0.0};        // signal-mode amplitude, |a|^2 = photon number
    complexd b{0.0, 0.0};        // microwave-mode amplitude, |b|^2 = photon number
    complexd omega_o{0.0, 0.0};  // pump Rabi frequency (rad/s)

    bool finite() const {
        return std::isfinite(a.real()) && std::isfinite(a.imag()) &&
               std::isfinite(b.real()) && std::isfinite(b.imag()) &&
               std::isfinite(omega_o.real()) && std::isfinite(omega_o.imag());
    }
};

// ----------------------------- density matrix ------------------------------

/// Smallest eigenvalue of a 3x3 Hermitian matrix, closed form. Absolute
/// accuracy is only ~sqrt(eps) when the small eigenvalues are clustered;
/// callers that need certified signs must fall back to an iterative solve
/// below that resolution (see DensityMatrix::validate).
inline double eigmin_hermitian3(const Matrix3cd& m) {
    const double p1 = std::norm(m(0, 1)) + std::norm(m(0, 2)) + std::norm(m(1, 2));
    const double d0 = m(0, 0).real(), d1 = m(1, 1).real(), d2 = m(2, 2).real();
    if (p1 == 0.0) return std::min({d0, d1, d2});
    const double q = (d0 + d1 + d2) / 3.0;
    const double p2 = (d0 - q) * (d0 - q) + (d1 - q) * (d1 - q) + (d2 - q) * (d2 - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Matrix3cd b = (m - q * Matrix3cd::Identity()) / p;
    const double r = std::clamp(0.5 * b.determinant().real(), -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    // cos(phi + 2pi/3) is the smallest of the three roots for phi in [0, pi/3]
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

struct DensityMatrix {
    Matrix3cd rho = Matrix3cd::Zero();

    static constexpr double trace_tol = 1e-12;
    static constexpr double herm_tol = 1e-12;
    static constexpr double positivity_floor = -1e-10;

    double population(int level) const { return rho(level - 1, level - 1).real(); }
    double population_difference_13() const { return (rho(0, 0) - rho(2, 2)).real(); }

    void validate() const {
        if (!rho.allFinite()) {
            throw InvariantViolation("DensityMatrix: non-finite entries");
        }
        const double tr_err = std::abs(rho.trace() - complexd(1.0, 0.0));
        if (tr_err > trace_tol) {
            throw InvariantViolation("DensityMatrix: |trace - 1| = " + std::to_string(tr_err));
        }
        const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        if (herm_err > herm_tol) {
            throw InvariantViolation("DensityMatrix: Hermiticity error " + std::to_string(herm_err));
        }
        // Certified positivity: Cholesky of rho - floor*I succeeds iff
        // lambda_min >= floor up to machine error. The closed-form eigenvalue
        // formula cannot resolve clustered near-zero pairs, so it is not used
        // here.
        Matrix3cd shifted = rho;
        shifted.diagonal().array() -= positivity_floor;
        if (Eigen::LLT<Matrix3cd>(shifted).info() != Eigen::Success) {
            Eigen::SelfAdjointEigenSolver<Matrix3cd> es(rho, Eigen::EigenvaluesOnly);
            std::ostringstream msg;
            msg << "DensityMatrix: negative eigenvalue " << es.eigenvalues()(0);
            throw InvariantViolation(msg.str());
        }
    }
};

/// Thermal state of the spin doublet: diag(p1, p2, 0) with p2/p1 the
/// Boltzmann factor at f_mu. The optical level is frozen out for every
/// temperature in scope.
inline DensityMatrix thermal_state(double temperature, double f_mu) {
    const double r = thermal_ratio(temperature, f_mu);
    DensityMatrix out;
    out.rho(0, 0) = 1.0 / (1.0 + r);
    out.rho(1, 1) = r / (1.0 + r);
    return out;
}

// ------------------------------ superoperator ------------------------------

struct Superoperator {
    Matrix9cd L = Matrix9cd::Zero();
};

inline Matrix9cd kron3(const Matrix3cd& a, const Matrix3cd& b) {
    Matrix9cd k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return k;
}

/// vec(J rho J^dag - {J^dag J, rho}/2) = D vec(rho)
inline Matrix9cd dissipator_superop(const Matrix3cd& j) {
    const Matrix3cd jdj = j.adjoint() * j;
    const Matrix3cd eye = Matrix3cd::Identity();
    return kron3(j.conjugate(), j) - 0.5 * kron3(eye, jdj) - 0.5 * kron3(jdj.transpose(), eye);
}

/// vec(-i [H, rho]) = C vec(rho)
inline Matrix9cd commutator_superop(const Matrix3cd& h) {
    const Matrix3cd eye = Matrix3cd::Identity();
    const complexd mi(0.0, -1.0);
    return mi * (kron3(eye, h) - kron3(h.transpose(), eye));
}

inline Matrix3cd delta_system_hamiltonian(const AtomParams& p, const AtomDetunings& det,
                                          const FieldState& f) {
    Matrix3cd h = Matrix3cd::Zero();
    h(1, 1) = det.delta_mu;
    h(2, 2) = det.delta_s();
    h(2, 1) = f.omega_o;
    h(2, 0) = p.g_s * f.a;
    h(1, 0) = p.g_mu * f.b;
    h(1, 2) = std::conj(h(2, 1));
    h(0, 2) = std::conj(h(2, 0));
    h(0, 1) = std::conj(h(1, 0));
    return h;
}

/// Decay/dephasing part of the generator. Independent of detunings and
/// fields, so callers iterating over many ions can build it once.
inline Matrix9cd dissipative_superop(const AtomParams& p) {
    Matrix3cd j = Matrix3cd::Zero();
    Matrix9cd d = Matrix9cd::Zero();

    j.setZero(); j(0, 1) = std::sqrt(p.gamma_spin_down());  // |2> -> |1>
    d += dissipator_superop(j);
    if (p.gamma_spin_up() > 0.0) {
        j.setZero(); j(1, 0) = std::sqrt(p.gamma_spin_up());  // |1> -> |2>, thermal
        d += dissipator_superop(j);
    }
    j.setZero(); j(0, 2) = std::sqrt(p.branching_31 * p.gamma_opt());  // |3> -> |1>
    d += dissipator_superop(j);
    j.setZero(); j(1, 2) = std::sqrt((1.0 - p.branching_31) * p.gamma_opt());  // |3> -> |2>
    d += dissipator_superop(j);
    j.setZero(); j(1, 1) = std::sqrt(p.dephasing_spin());
    d += dissipator_superop(j);
    j.setZero(); j(2, 2) = std::sqrt(p.dephasing_opt());
    d += dissipator_superop(j);
    return d;
}

inline Superoperator build_liouvillian(const AtomParams& p, const AtomDetunings& det,
                                       const FieldState& f) {
    p.validate();
    Superoperator out;
    out.L = commutator_superop(delta_system_hamiltonian(p, det, f)) + dissipative_superop(p);
    return out;
}

/// Trace preservation: the vectorized-identity row annihilates L.
inline double trace_preservation_error(const Superoperator& s) {
    Eigen::Matrix<complexd, 1, 9> tr_row = Eigen::Matrix<complexd, 1, 9>::Zero();
    tr_row(0) = tr_row(4) = tr_row(8) = 1.0;
    const double scale = s.L.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (tr_row * s.L).cwiseAbs().maxCoeff() / scale;
}

inline bool is_trace_preserving(const Superoperator& s, double tol = 1e-10) {
    return trace_preservation_error(s) < tol;
}

// ------------------------------- steady state ------------------------------

/// Unique steady state of a trace-preserving Liouvillian: one row of the 9x9
/// system is replaced by the trace constraint and the dense system is solved
/// by LU with partial pivoting.
inline DensityMatrix steady_state_atom(const Superoperator& s) {
    const double scale = s.L.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        throw SingularSystemError("steady_state_atom: zero Liouvillian has no unique steady state");
    }
    Matrix9cd m = s.L / scale;
    m.row(0).setZero();
    m(0, 0) = m(0, 4) = m(0, 8) = 1.0;
    Vector9cd rhs = Vector9cd::Zero();
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Matrix9cd> lu(m);
    const auto udiag = lu.matrixLU().diagonal().cwiseAbs();
    if (!(udiag.minCoeff() > udiag.maxCoeff() * 1e-13)) {
        throw SingularSystemError("steady_state_atom: rank-deficient system, steady state "
                                  "is not unique (degenerate or undriven subspace)");
    }
    Vector9cd x = lu.solve(rhs);
    // Iterative refinement with extended-precision residuals; keeps the
    // forward error near machine level even for stiff detuning/rate ratios.
    for (int pass = 0; pass < 2; ++pass) {
        using cld = std::complex<long double>;
        Vector9cd r;
        for (int i = 0; i < 9; ++i) {
            cld acc = -cld(rhs(i));
            for (int j = 0; j < 9; ++j) acc += cld(m(i, j)) * cld(x(j));
            r(i) = complexd(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
        }
        const Vector9cd dx = lu.solve(r);
        x -= dx;
        if (dx.cwiseAbs().maxCoeff() <= 1e-15 * x.cwiseAbs().maxCoeff()) break;
    }

    DensityMatrix out;
    out.rho = Eigen::Map<const Matrix3cd>(x.data());
    out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
    const double tr = out.rho.trace().real();
    if (!(std::abs(tr) > 0.5)) {
        throw SingularSystemError("steady_state_atom: degenerate solution, trace " +
                                  std::to_string(tr));
    }
    out.rho /= tr;
    out.validate();
    return out;
}

// ------------------------------ fast real path -----------------------------

/// Decay and coherence rates derived once from AtomParams.
struct AtomRates {
    double gamma_down = 0.0;  // |2> -> |1>
    double gamma_up = 0.0;    // |1> -> |2>, thermal
    double gamma_opt = 0.0;   // |3> total decay
    double branching = 0.5;
    double gamma21 = 0.0;     // rho21 decay, equals 1/t2_spin
    double gamma31 = 0.0;     // rho31 decay, equals 1/t2_opt
    double gamma32 = 0.0;

    static AtomRates from(const AtomParams& p) {
        AtomRates r;
        r.gamma_down = p.gamma_spin_down();
        r.gamma_up = p.gamma_spin_up();
        r.gamma_opt = p.gamma_opt();
        r.branching = p.branching_31;
        r.gamma21 = 0.5 * (r.gamma_down + r.gamma_up) + 0.5 * p.dephasing_spin();
        r.gamma31 = 0.5 * (r.gamma_up + r.gamma_opt) + 0.5 * p.dephasing_opt();
        r.gamma32 = 0.5 * (r.gamma_down + r.gamma_opt) +
                    0.5 * (p.dephasing_spin() + p.dephasing_opt());
        return r;
    }
};

/// Steady state via the real Bloch parameterization
/// u = (p1, p2, p3, Re/Im rho21, Re/Im rho31, Re/Im rho32).
///
/// Algebraically identical to steady_state_atom(build_liouvillian(...)); the
/// equivalence is pinned by tests. This is the ensemble hot path: the real
/// 9x9 elimination is about 4x cheaper than the complex one.
inline DensityMatrix steady_state_atom_fast(const AtomParams& p, const AtomRates& r,
                                            const AtomDetunings& det, const FieldState& f) {
    using Matrix9d = Eigen::Matrix<double, 9, 9>;
    using Vector9d = Eigen::Matrix<double, 9, 1>;

    const complexd b1 = p.g_mu * f.b;    // drive on 1 <-> 2
    const complexd b2 = p.g_s * f.a;     // drive on 1 <-> 3
    const complexd b3 = f.omega_o;       // drive on 2 <-> 3
    const double bx1 = b1.real(), by1 = b1.imag();
    const double bx2 = b2.real(), by2 = b2.imag();
    const double bx3 = b3.real(), by3 = b3.imag();
    const double dmu = det.delta_mu, ds = det.delta_s();

    Matrix9d m = Matrix9d::Zero();
    // d p1/dt; enters the scale estimate, then gets replaced by the trace row
    m(0, 0) = -r.gamma_up; m(0, 1) = r.gamma_down; m(0, 2) = r.branching * r.gamma_opt;
    m(0, 3) = -2 * by1; m(0, 4) = 2 * bx1; m(0, 5) = -2 * by2; m(0, 6) = 2 * bx2;
    // d p2/dt
    m(1, 0) = r.gamma_up; m(1, 1) = -r.gamma_down; m(1, 2) = (1.0 - r.branching) * r.gamma_opt;
    m(1, 3) = 2 * by1; m(1, 4) = -2 * bx1; m(1, 7) = -2 * by3; m(1, 8) = 2 * bx3;
    // d p3/dt
    m(2, 2) = -r.gamma_opt;
    m(2, 5) = 2 * by2; m(2, 6) = -2 * bx2; m(2, 7) = 2 * by3; m(2, 8) = -2 * bx3;
    // d Re rho21 / dt
    m(3, 0) = by1; m(3, 1) = -by1; m(3, 3) = -r.gamma21; m(3, 4) = dmu;
    m(3, 5) = -by3; m(3, 6) = bx3; m(3, 7) = -by2; m(3, 8) = bx2;
    // d Im rho21 / dt
    m(4, 0) = -bx1; m(4, 1) = bx1; m(4, 3) = -dmu; m(4, 4) = -r.gamma21;
    m(4, 5) = -bx3; m(4, 6) = -by3; m(4, 7) = bx2; m(4, 8) = by2;
    // d Re rho31 / dt
    m(5, 0) = by2; m(5, 2) = -by2; m(5, 3) = by3; m(5, 4) = bx3;
    m(5, 5) = -r.gamma31; m(5, 6) = ds; m(5, 7) = -by1; m(5, 8) = -bx1;
    // d Im rho31 / dt
    m(6, 0) = -bx2; m(6, 2) = bx2; m(6, 3) = -bx3; m(6, 4) = by3;
    m(6, 5) = -ds; m(6, 6) = -r.gamma31; m(6, 7) = bx1; m(6, 8) = -by1;
    // d Re rho32 / dt
    m(7, 1) = by3; m(7, 2) = -by3; m(7, 3) = by2; m(7, 4) = -bx2;
    m(7, 5) = by1; m(7, 6) = -bx1; m(7, 7) = -r.gamma32; m(7, 8) = ds - dmu;
    // d Im rho32 / dt
    m(8, 1) = -bx3; m(8, 2) = bx3; m(8, 3) = -bx2; m(8, 4) = -by2;
    m(8, 5) = bx1; m(8, 6) = by1; m(8, 7) = -(ds - dmu); m(8, 8) = -r.gamma32;

    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        throw SingularSystemError("steady_state_atom_fast: zero generator");
    }
    m /= scale;
    m.row(0) << 1, 1, 1, 0, 0, 0, 0, 0, 0;
    Vector9d rhs = Vector9d::Zero();
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Matrix9d> lu(m);
    const auto udiag = lu.matrixLU().diagonal().cwiseAbs();
    if (!(udiag.minCoeff() > udiag.maxCoeff() * 1e-13)) {
        throw SingularSystemError("steady_state_atom_fast: rank-deficient system, steady "
                                  "state is not unique");
    }
    Vector9d u = lu.solve(rhs);
    // Extended-precision residual refinement, as in steady_state_atom.
    for (int pass = 0; pass < 2; ++pass) {
        Vector9d resid;
        for (int i = 0; i < 9; ++i) {
            long double acc = -static_cast<long double>(rhs(i));
            for (int j = 0; j < 9; ++j) {
                acc += static_cast<long double>(m(i, j)) * static_cast<long double>(u(j));
            }
            resid(i) = static_cast<double>(acc);
        }
        const Vector9d du = lu.solve(resid);
        u -= du;
        if (du.cwiseAbs().maxCoeff() <= 1e-15 * u.cwiseAbs().maxCoeff()) break;
    }

    DensityMatrix out;
    out.rho(0, 0) = u(0);
    out.rho(1, 1) = u(1);
    out.rho(2, 2) = u(2);
    out.rho(1, 0) = complexd(u(3), u(4));
    out.rho(2, 0) = complexd(u(5), u(6));
    out.rho(2, 1) = complexd(u(7), u(8));
    out.rho(0, 1) = std::conj(out.rho(1, 0));
    out.rho(0, 2) = std::conj(out.rho(2, 0));
    out.rho(1, 2) = std::conj(out.rho(2, 1));
    const double tr = u(0) + u(1) + u(2);
    out.rho /= tr;
    out.validate();
    return out;
}

// ------------------------------- RK4 oracle --------------------------------

/// Classic fixed-step RK4 integration of d(vec rho)/dt = L vec(rho).
///
/// For a constant generator one RK4 step is the degree-4 Taylor polynomial
/// S = sum_k (hL)^k / k!, so n steps equal S^n. The power is evaluated with
/// a squaring ladder capped at 2^20 steps per matrix (long squaring chains
/// amplify rounding); the capped chunk is then applied sequentially. All
/// factors are powers of S and commute, so the application order is free.
inline DensityMatrix propagate_oracle(const Superoperator& s, const DensityMatrix& rho0,
                                      double t_final, double dt) {
    if (t_final < 0.0 || !(dt > 0.0)) {
        throw std::invalid_argument("propagate_oracle: need t_final >= 0 and dt > 0");
    }
    if (t_final == 0.0) return rho0;
    if (!(dt * s.L.norm() < 0.1)) {
        throw std::invalid_argument("propagate_oracle: dt * ||L|| must be < 0.1");
    }
    const auto n = static_cast<long long>(std::ceil(t_final / dt - 1e-12));
    const double h = t_final / static_cast<double>(n);

    const Matrix9cd hl = h * s.L;
    const Matrix9cd eye = Matrix9cd::Identity();
    const Matrix9cd step = eye + hl * (eye + 0.5 * hl * (eye + (hl / 3.0) * (eye + 0.25 * hl)));

    constexpr int max_squarings = 20;
    std::vector<Matrix9cd> ladder{step};
    while (static_cast<int>(ladder.size()) <= max_squarings &&
           (1ll << ladder.size()) <= n) {
        ladder.push_back(ladder.back() * ladder.back());
    }

    Vector9cd x = Eigen::Map<const Vector9cd>(rho0.rho.data());
    const int top = static_cast<int>(ladder.size()) - 1;
    long long chunks = n >> top;
    for (long long c = 0; c < chunks; ++c) x = ladder[top] * x;
    long long rest = n - (chunks << top);
    for (int bit = 0; bit < top; ++bit) {
        if (rest & (1ll << bit)) x = ladder[bit] * x;
    }
    DensityMatrix out;
    out.rho = Eigen::Map<const Matrix3cd>(x.data());
    const double drift = std::abs(out.rho.trace() - rho0.rho.trace());
    if (drift > 1e-6) {
        std::ostringstream msg;
        msg << "propagate_oracle: trace drifted by " << drift << ", reduce dt";
        throw std::runtime_error(msg.str());
    }
    return out;
}

} // namespace deltasim
