#pragma once

// Semiclassical response of a Lambda-type three-level condensate probed
// near the |2> -> |3> line while |1> -> |3> is driven by a coupling laser.
//
// All rates and detunings are angular frequencies (rad/s). Field
// amplitudes are in V/m, intensities in W/m^2, dipoles in C m.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "linalg.hpp"
#include "units.hpp"

namespace lambec {

struct MediumParams {
    double gamma31 = hz_to_rad(5e6);
    double gamma32 = hz_to_rad(5e6);
    double gamma12 = hz_to_rad(38e3);
    double mu31 = 22e-30;
    double mu32 = 22e-30;
    double omega12 = hz_to_rad(1772e6);
    double omega = two_pi * si.c / 589e-9;
    double density = per_cm3_to_per_m3(3.3e12);
    double n_atoms = 1000.0;
    std::optional<double> volume;

    double gamma_opt() const { return 0.5 * (gamma32 + gamma31); }
    double gamma_mag() const { return gamma12; }
    double quantization_volume() const { return volume ? *volume : n_atoms / density; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError(std::string(name) + " must be positive and finite");
        };
        positive(gamma31, "gamma31");
        positive(gamma32, "gamma32");
        positive(gamma12, "gamma12");
        positive(mu31, "mu31");
        positive(mu32, "mu32");
        positive(omega12, "omega12");
        positive(omega, "omega");
        positive(density, "density");
        positive(n_atoms, "n_atoms");
        if (volume) positive(*volume, "volume");
    }
};

inline double amplitude_from_intensity(double intensity, const PhysicalConstants& k = si) {
    if (intensity < 0.0) throw DomainError("intensity must be non-negative");
    return std::sqrt(2.0 * intensity / (k.c * k.epsilon0));
}

inline double rabi_from_intensity(double intensity, double dipole, const PhysicalConstants& k = si) {
    if (!(dipole > 0.0)) throw DomainError("dipole moment must be positive");
    return std::abs(dipole) * amplitude_from_intensity(intensity, k) / k.hbar;
}

// Drive settings after the config boundary has resolved which of the
// equivalent inputs (Rabi frequency or intensity, amplitude or intensity)
// was authoritative.
struct DriveParams {
    double g1 = 0.0;
    double delta_p = 0.0;
    double delta_c = 0.0;
    double probe_amplitude = 0.0;

    static DriveParams from_intensities(const MediumParams& m, double coupling_intensity,
                                        double probe_intensity, double delta_p,
                                        double delta_c = 0.0,
                                        const PhysicalConstants& k = si) {
        DriveParams d;
        d.g1 = rabi_from_intensity(coupling_intensity, m.mu31, k);
        d.probe_amplitude = amplitude_from_intensity(probe_intensity, k);
        d.delta_p = delta_p;
        d.delta_c = delta_c;
        return d;
    }

    DriveParams with_detuning(double d) const {
        DriveParams out = *this;
        out.delta_p = d;
        return out;
    }
};

inline cplx gamma_factor(const MediumParams& m, double g1, double delta) {
    const double go = m.gamma_opt();
    const double gm = m.gamma_mag();
    return cplx(delta, -2.0 * go) + (g1 * g1) / cplx(-delta, gm);
}

struct Rho32Coefficients {
    cplx rho1;
    cplx rho3;
    cplx gamma_factor;
};

inline Rho32Coefficients rho32_coefficients_at(const MediumParams& m, double g1, double delta) {
    const cplx G = gamma_factor(m, g1, delta);
    if (std::abs(G) < 1e-6 * m.gamma_opt()) {
        std::ostringstream os;
        os << "Gamma vanishes at delta = " << delta << " rad/s";
        throw SingularityError(os.str(), delta);
    }
    const double mag2 = std::norm(G);
    const double bracket = 1.0 / (2.0 * m.gamma_opt()) + 1.0 / m.gamma_mag();
    const cplx rho3 = (I / G) * ((std::conj(G) - G) / (2.0 * mag2)) * bracket;
    return {1.0 / G, rho3, G};
}

inline Rho32Coefficients rho32_coefficients(const MediumParams& m, const DriveParams& d) {
    return rho32_coefficients_at(m, d.g1, d.delta_p);
}

// ---------------------------------------------------------------------------
// Steady state of the averaged Liouville equations.

struct SteadyState {
    Eigen::Matrix3cd rho;
    double residual = 0.0;
    double condition = 0.0;
};

namespace detail {

// Time derivative of the averaged density matrix for real g1, g2.
// Levels are indexed 0, 1, 2 for |1>, |2>, |3>.
inline Eigen::Matrix3cd liouville_rhs(const MediumParams& m, const DriveParams& d, double g2,
                                      const Eigen::Matrix3cd& r) {
    const double g1 = d.g1;
    const double D = d.delta_p;
    const double dl = d.delta_c;
    const double y12 = m.gamma12, y31 = m.gamma31, y32 = m.gamma32;
    auto rho = [&](int i, int j) { return r(i - 1, j - 1); };

    Eigen::Matrix3cd out = Eigen::Matrix3cd::Zero();
    const cplx d11 = -I * g1 * rho(1, 3) + I * g1 * rho(3, 1) - 2.0 * y12 * rho(1, 1) +
                     2.0 * y31 * rho(3, 3);
    const cplx d22 = -I * g2 * rho(2, 3) + I * g2 * rho(3, 2) + 2.0 * y12 * rho(1, 1) +
                     2.0 * y32 * rho(3, 3);
    const cplx d33 = I * g1 * rho(1, 3) - I * g1 * rho(3, 1) + I * g2 * rho(2, 3) -
                     I * g2 * rho(3, 2) - 2.0 * (y32 + y31) * rho(3, 3);
    const cplx d21 = -I * (dl - D) * rho(2, 1) - I * g1 * rho(2, 3) + I * g2 * rho(3, 1) -
                     y12 * rho(2, 1);
    const cplx d31 = -I * dl * rho(3, 1) + I * g1 * (rho(1, 1) - rho(3, 3)) +
                     I * g2 * rho(2, 1) - (y12 + y32 + y31) * rho(3, 1);
    const cplx d32 = -I * D * rho(3, 2) + I * g2 * (rho(2, 2) - rho(3, 3)) +
                     I * g1 * rho(1, 2) - (y32 + y31) * rho(3, 2);
    out(0, 0) = d11;
    out(1, 1) = d22;
    out(2, 2) = d33;
    out(1, 0) = d21;
    out(2, 0) = d31;
    out(2, 1) = d32;
    out(0, 1) = std::conj(d21);
    out(0, 2) = std::conj(d31);
    out(1, 2) = std::conj(d32);
    return out;
}

// Real parametrisation: rho11, rho22, rho33, Re/Im rho21, rho31, rho32.
inline Eigen::Matrix3cd unpack(const Eigen::Matrix<double, 9, 1>& p) {
    Eigen::Matrix3cd r = Eigen::Matrix3cd::Zero();
    r(0, 0) = p(0);
    r(1, 1) = p(1);
    r(2, 2) = p(2);
    r(1, 0) = cplx(p(3), p(4));
    r(2, 0) = cplx(p(5), p(6));
    r(2, 1) = cplx(p(7), p(8));
    r(0, 1) = std::conj(r(1, 0));
    r(0, 2) = std::conj(r(2, 0));
    r(1, 2) = std::conj(r(2, 1));
    return r;
}

inline Eigen::Matrix<double, 9, 1> pack(const Eigen::Matrix3cd& r) {
    Eigen::Matrix<double, 9, 1> p;
    p << r(0, 0).real(), r(1, 1).real(), r(2, 2).real(), r(1, 0).real(), r(1, 0).imag(),
        r(2, 0).real(), r(2, 0).imag(), r(2, 1).real(), r(2, 1).imag();
    return p;
}

}  // namespace detail

inline SteadyState steady_state_oracle(const MediumParams& m, const DriveParams& d, double g2) {
    m.validate();
    using Mat9 = Eigen::Matrix<double, 9, 9>;
    Mat9 L;
    for (int j = 0; j < 9; ++j) {
        Eigen::Matrix<double, 9, 1> e = Eigen::Matrix<double, 9, 1>::Zero();
        e(j) = 1.0;
        L.col(j) = detail::pack(detail::liouville_rhs(m, d, g2, detail::unpack(e)));
    }
    const double scale = m.gamma_opt();
    Eigen::Matrix<double, 10, 9> A;
    A.topRows<9>() = L / scale;
    A.row(9).setZero();
    A(9, 0) = A(9, 1) = A(9, 2) = 1.0;
    Eigen::Matrix<double, 10, 1> b = Eigen::Matrix<double, 10, 1>::Zero();
    b(9) = 1.0;

    Eigen::JacobiSVD<Eigen::Matrix<double, 10, 9>> svd(A);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
    if (!(cond < 1e14))
        throw NumericalError("steady-state system is singular", cond);

    const Eigen::Matrix<double, 9, 1> p = A.colPivHouseholderQr().solve(b);
    SteadyState s;
    s.rho = detail::unpack(p);
    s.condition = cond;
    s.residual = (L * p).norm() / std::max(L.norm() * p.norm(), 1e-300);
    return s;
}

// Least-squares fit of rho32(g2) = c1 g2 + c2 g2^2 + c3 g2^3 over the
// oracle, on a geometric grid of probe Rabi frequencies.
struct OracleFit {
    cplx rho1;
    cplx rho2;
    cplx rho3;
    std::vector<double> g2_grid;
    double max_residual = 0.0;
};

inline OracleFit steady_state_fit(const MediumParams& m, const DriveParams& d,
                                  double lo_over_gamma = 1e-3, double hi_over_gamma = 1e-2,
                                  int points = 8) {
    if (points < 4) throw DomainError("cubic fit needs at least four grid points");
    const double go = m.gamma_opt();
    OracleFit f;
    Eigen::MatrixXd X(points, 3);
    Eigen::MatrixXd Y(points, 2);
    for (int i = 0; i < points; ++i) {
        const double x =
            lo_over_gamma * std::pow(hi_over_gamma / lo_over_gamma, double(i) / (points - 1));
        const double g2 = x * go;
        f.g2_grid.push_back(g2);
        const SteadyState s = steady_state_oracle(m, d, g2);
        f.max_residual = std::max(f.max_residual, s.residual);
        X(i, 0) = x;
        X(i, 1) = x * x;
        X(i, 2) = x * x * x;
        Y(i, 0) = s.rho(2, 1).real();
        Y(i, 1) = s.rho(2, 1).imag();
    }
    const Eigen::MatrixXd c = X.colPivHouseholderQr().solve(Y);
    f.rho1 = cplx(c(0, 0), c(0, 1)) / go;
    f.rho2 = cplx(c(1, 0), c(1, 1)) / (go * go);
    f.rho3 = cplx(c(2, 0), c(2, 1)) / (go * go * go);
    return f;
}

// ---------------------------------------------------------------------------

struct SusceptibilityResult {
    cplx chi1;
    cplx chi3;  // m^2/V^2
    cplx gamma_factor;
};

inline SusceptibilityResult susceptibilities(const MediumParams& m, const DriveParams& d,
                                             const PhysicalConstants& k = si) {
    const Rho32Coefficients c = rho32_coefficients(m, d);
    const double mu2 = m.mu32 * m.mu32;
    const double n = m.density;
    const cplx chi1 = n * mu2 / (k.epsilon0 * k.hbar) * c.rho1;
    const cplx chi3 = (4.0 / 3.0) * n * mu2 * mu2 / (k.epsilon0 * std::pow(k.hbar, 3)) * c.rho3;
    return {chi1, chi3, c.gamma_factor};
}

struct OpticalResponse {
    double n_p0 = 1.0;
    double n_p2 = 0.0;
    double eta_p0 = 0.0;
    double eta_p2 = 0.0;
    double n_p = 1.0;
    double eta_p = 0.0;
    double n_g = 1.0;
    std::optional<double> v_g;
    double n_g_half_step_change = 0.0;
};

namespace detail {

inline double refraction(const MediumParams& m, const DriveParams& d, const PhysicalConstants& k) {
    const SusceptibilityResult s = susceptibilities(m, d, k);
    const double a2 = d.probe_amplitude * d.probe_amplitude;
    return 1.0 + 0.5 * s.chi1.real() + 0.375 * s.chi3.real() * a2;
}

inline double group_index(const MediumParams& m, const DriveParams& d, const PhysicalConstants& k,
                          double n_p, double step) {
    const double np_plus = refraction(m, d.with_detuning(d.delta_p + step), k);
    const double np_minus = refraction(m, d.with_detuning(d.delta_p - step), k);
    const double omega_p = m.omega - d.delta_p;
    // omega_p = omega - Delta, so d/d omega_p = -d/d Delta.
    return n_p - omega_p * (np_plus - np_minus) / (2.0 * step);
}

}  // namespace detail

inline OpticalResponse optical_response(const MediumParams& m, const DriveParams& d,
                                        double step = hz_to_rad(10e3),
                                        const PhysicalConstants& k = si) {
    if (step == 0.0) throw DomainError("derivative step must be nonzero");
    const SusceptibilityResult s = susceptibilities(m, d, k);
    const double omega_p = m.omega - d.delta_p;
    const double a2 = d.probe_amplitude * d.probe_amplitude;
    OpticalResponse r;
    r.n_p0 = 1.0 + 0.5 * s.chi1.real();
    r.n_p2 = 0.375 * s.chi3.real();
    r.eta_p0 = omega_p / k.c * s.chi1.imag();
    r.eta_p2 = 0.75 * omega_p / k.c * s.chi3.imag();
    r.n_p = r.n_p0 + r.n_p2 * a2;
    r.eta_p = r.eta_p0 + r.eta_p2 * a2;
    r.n_g = detail::group_index(m, d, k, r.n_p, std::abs(step));
    const double n_g_half = detail::group_index(m, d, k, r.n_p, 0.5 * std::abs(step));
    r.n_g_half_step_change = std::abs(n_g_half - r.n_g) / std::max(std::abs(r.n_g), 1e-300);
    if (std::abs(r.n_g) > 1e-6) r.v_g = k.c / r.n_g;
    return r;
}

inline double total_absorption(const MediumParams& m, const DriveParams& d,
                               const PhysicalConstants& k = si) {
    const SusceptibilityResult s = susceptibilities(m, d, k);
    const double omega_p = m.omega - d.delta_p;
    const double a2 = d.probe_amplitude * d.probe_amplitude;
    return omega_p / k.c * (s.chi1.imag() + 0.75 * s.chi3.imag() * a2);
}

// Zeros of the total absorption bracketed on a uniform grid and refined
// by bisection.
inline std::vector<double> find_transparency_points(const MediumParams& m, const DriveParams& d,
                                                    double delta_lo, double delta_hi,
                                                    int grid_points,
                                                    const PhysicalConstants& k = si) {
    if (grid_points < 2) throw DomainError("grid_points must be at least 2");
    if (!(delta_hi > delta_lo)) throw DomainError("empty detuning interval");
    auto eta = [&](double x) { return total_absorption(m, d.with_detuning(x), k); };

    std::vector<double> roots;
    const double h = (delta_hi - delta_lo) / (grid_points - 1);
    double x0 = delta_lo;
    double f0 = eta(x0);
    for (int i = 1; i < grid_points; ++i) {
        const double x1 = (i == grid_points - 1) ? delta_hi : delta_lo + i * h;
        const double f1 = eta(x1);
        if (f0 == 0.0) {
            roots.push_back(x0);
        } else if (f0 * f1 < 0.0) {
            double a = x0, b = x1, fa = f0;
            double mid = 0.5 * (a + b);
            for (int it = 0; it < 200; ++it) {
                mid = 0.5 * (a + b);
                const double fm = eta(mid);
                if (std::abs(fm) < 1e-6 || b - a < 1e-12 * std::max(1.0, std::abs(mid))) break;
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(mid);
        }
        x0 = x1;
        f0 = f1;
    }
    if (f0 == 0.0) roots.push_back(x0);
    std::sort(roots.begin(), roots.end());
    return roots;
}

// ---------------------------------------------------------------------------

struct CouplingConstants {
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    cplx L_l{1.0, 0.0};
    cplx L_nl{0.0, 0.0};
    double phase = 0.0;
    double k2_discarded_imag = 0.0;
};

inline double single_photon_rabi(const MediumParams& m, const PhysicalConstants& k = si) {
    return m.mu32 * std::sqrt(m.omega / (2.0 * k.hbar * k.epsilon0 * m.quantization_volume()));
}

inline CouplingConstants coupling_constants(const MediumParams& m, const DriveParams& d,
                                            const PhysicalConstants& k = si) {
    m.validate();
    const Rho32Coefficients bare = rho32_coefficients_at(m, 0.0, d.delta_p);
    if (std::abs(bare.rho1) < 1e-300)
        throw SingularityError("bare linear response vanishes", d.delta_p);
    const Rho32Coefficients dressed = rho32_coefficients(m, d);

    CouplingConstants c;
    c.k0 = single_photon_rabi(m, k);
    c.L_l = dressed.rho1 / bare.rho1;
    c.L_nl = dressed.rho3 / bare.rho1;
    c.phase = std::arg(c.L_l);
    const cplx rotated = std::exp(-I * c.phase) * c.L_nl;
    const double k0_3 = c.k0 * c.k0 * c.k0;
    c.k1 = c.k0 * std::abs(c.L_l);
    c.k2 = k0_3 * rotated.real();
    c.k2_discarded_imag = k0_3 * rotated.imag();
    return c;
}

}  // namespace lambec
