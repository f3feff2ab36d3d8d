#pragma once

// Fifth-order polynomial algebra of excitations for the Kerr-extended
// Tavis-Cummings model, and its realization on a spin r~ irrep.
//
// Basis convention for every matrix produced here and in the spectral
// module: index i = m~ + r~, i.e. m~ ascending from -r~. In that ordering
// the raising operator s_plus has its entries at (i + 1, i).

#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "units.hpp"

namespace lambec {

enum class Zone { remote, nearby, boundary };

inline const char* zone_name(Zone z) {
    switch (z) {
        case Zone::remote: return "remote";
        case Zone::nearby: return "nearby";
        case Zone::boundary: return "boundary";
    }
    return "?";
}

struct IrrepSector {
    int M = 0;
    HalfInteger r;
    Zone zone = Zone::nearby;
    HalfInteger r_tilde;
    int dim = 1;
    double k1 = 0.0;
    double k2 = 0.0;
    double alpha = 0.0;
    double gamma_param = 1.0;
    double k_eff = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool valid = true;
    std::optional<double> delta;
    std::optional<double> psi0;
    std::optional<double> omega_R;

    double kappa() const { return k2 / k1; }

    // Lowest photon number in the block and the photon number carried by
    // basis index i.
    int photons_at(int i) const { return M - i; }

    IrrepSector with_detuning(double d) const {
        IrrepSector s = *this;
        s.delta = d;
        s.psi0 = std::atan2(k_eff, d);
        s.omega_R = std::hypot(d, k_eff);
        return s;
    }
};

inline IrrepSector classify_sector(int M, HalfInteger r, double k1, double k2) {
    if (M < 0) throw DomainError("excitation number M must be non-negative");
    if (r.twice() < 0) throw DomainError("Dicke index r must be non-negative");
    if (!(k1 > 0.0)) throw DomainError("k1 must be positive");
    if (M == r.twice())
        throw UnsupportedZoneError("boundary zone M = 2r = " + std::to_string(M) +
                                   " is not supported");

    IrrepSector s;
    s.M = M;
    s.r = r;
    s.k1 = k1;
    s.k2 = k2;
    const double rv = r.value();
    const double kappa = k2 / k1;
    if (M > r.twice()) {
        s.zone = Zone::remote;
        s.r_tilde = r;
        s.alpha = 1.0 / (M - rv + 0.5);
        s.gamma_param = 1.0 + kappa * (M - rv + 0.5);
    } else {
        s.zone = Zone::nearby;
        s.r_tilde = HalfInteger::from_twice(M);
        s.alpha = 2.0 / (4.0 * rv - M + 1.0);
        s.gamma_param = 1.0 + kappa * (M + 1.0) / 2.0;
    }
    s.dim = s.r_tilde.twice() + 1;
    s.k_eff = k1 * s.gamma_param * 2.0 / std::sqrt(s.alpha);
    s.beta1 = s.alpha * (1.0 + kappa * 2.0 / (s.gamma_param * s.alpha));
    s.beta2 = s.alpha * s.alpha * (0.125 - kappa / (2.0 * s.gamma_param * s.alpha));
    s.valid = (k2 == 0.0) || (M + 1.0 < std::abs(k1 / k2));
    return s;
}

inline IrrepSector require_valid(const IrrepSector& s) {
    if (!s.valid)
        throw InvalidSectorError("sector M = " + std::to_string(s.M) +
                                 " violates the validity bound M + 1 < |k1/k2|");
    return s;
}

struct StructurePolynomial {
    double c0 = 0.0;
    std::optional<double> q0;  // double root, absent when k2 = 0
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    int M = 0;
    double r = 0.0;
    double kappa = 0.0;

    double operator()(double x) const {
        const double h = 0.5 * (M - r);
        const double f = 1.0 + kappa * (x + h);
        return -(x + h) * f * f * (x - (0.5 * (M - 3.0 * r))) * (x - 0.5 * (M + r + 2.0));
    }

    // Closed interval on which the physical irrep lives.
    std::pair<double, double> physical_interval() const {
        return (2.0 * r < M) ? std::pair{q2, q3} : std::pair{q1, q3};
    }
};

inline StructurePolynomial structure_polynomial(int M, HalfInteger r, double k1, double k2) {
    StructurePolynomial p;
    const double rv = r.value();
    p.M = M;
    p.r = rv;
    p.kappa = k2 / k1;
    p.c0 = -p.kappa * p.kappa;
    if (k2 != 0.0) p.q0 = -(k1 / k2 + 0.5 * (M - rv));
    p.q1 = -0.5 * (M - rv);
    p.q2 = 0.5 * (M - rv) - rv;
    p.q3 = 0.5 * (M - rv) + rv + 1.0;
    return p;
}

inline StructurePolynomial structure_polynomial(const IrrepSector& s) {
    return structure_polynomial(s.M, s.r, s.k1, s.k2);
}

struct SpinMatrices {
    HalfInteger r_tilde;
    CMatrix s3, s_plus, s_minus, sx, sy;

    int dim() const { return static_cast<int>(s3.rows()); }
    double m_at(int i) const { return i - r_tilde.value(); }
};

inline SpinMatrices spin_matrices(HalfInteger r_tilde) {
    if (r_tilde.twice() < 0) throw DomainError("spin must be non-negative");
    const int d = r_tilde.twice() + 1;
    const double j = r_tilde.value();
    SpinMatrices s;
    s.r_tilde = r_tilde;
    s.s3 = CMatrix::Zero(d, d);
    s.s_plus = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = i - j;
        s.s3(i, i) = m;
        if (i + 1 < d) s.s_plus(i + 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    s.s_minus = s.s_plus.adjoint();
    s.sx = 0.5 * (s.s_plus + s.s_minus);
    s.sy = (s.s_plus - s.s_minus) / (2.0 * I);
    return s;
}

inline SpinMatrices spin_matrices(double r_tilde) {
    return spin_matrices(HalfInteger::from_double(r_tilde));
}

struct PaeGenerators {
    CMatrix m0, m_plus, m_minus;
};

inline PaeGenerators pae_generators(const IrrepSector& s) {
    require_valid(s);
    if (s.zone == Zone::boundary) throw UnsupportedZoneError("boundary zone");
    const SpinMatrices sp = spin_matrices(s.r_tilde);
    const double rv = s.r.value();
    const double kappa = s.kappa();
    double offset, root_shift, linear_shift;
    if (s.zone == Zone::remote) {
        offset = 0.5 * (s.M - rv);
        root_shift = s.M - rv + 1.0;
        linear_shift = s.M - rv + 1.0;
    } else {
        offset = 0.5 * rv;
        root_shift = 0.5 * (4.0 * rv - s.M) + 1.0;
        linear_shift = 0.5 * s.M + 1.0;
    }
    const int d = sp.dim();
    CVector f(d);
    for (int i = 0; i < d; ++i) {
        const double m = sp.m_at(i);
        const double arg = root_shift - m;
        if (arg < 0.0)
            throw DomainError("negative square-root argument in sector M = " +
                              std::to_string(s.M));
        f(i) = std::sqrt(arg) * (1.0 + kappa * (linear_shift - m));
    }
    PaeGenerators g;
    g.m0 = offset * CMatrix::Identity(d, d) - sp.s3;
    g.m_plus = sp.s_minus * f.asDiagonal();
    g.m_minus = g.m_plus.adjoint();
    return g;
}

}  // namespace lambec
