#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "pae_algebra.hpp"
#include "units.hpp"

namespace lambec {

// One fixed-M block of the Hamiltonian in the joint basis |n, m> with
// m = M - n - r, ordered by n = M, M-1, ..., i.e. m ascending.
//
// `matrix` holds Delta * m plus the field-atom couplings. The free term
// omega_p (M - r + N/2) is kept aside in `free_energy` so that the fast
// global phase never enters the dynamics.
struct SectorHamiltonian {
    std::optional<IrrepSector> sector;
    int M = 0;
    HalfInteger r;
    CMatrix matrix;
    double free_energy = 0.0;
    double constant_term = 0.0;
    double delta = 0.0;

    int dim() const { return static_cast<int>(matrix.rows()); }
    int lowest_photons() const { return std::max(0, M - r.twice()); }
    int photons_at(int i) const { return M - i; }
    CMatrix full_matrix() const {
        return matrix + free_energy * CMatrix::Identity(dim(), dim());
    }
};

inline void check_dicke_index(HalfInteger r, double n_atoms) {
    const int n = static_cast<int>(std::lround(n_atoms));
    if (n < 0 || std::abs(n - n_atoms) > 1e-9)
        throw DomainError("atom number must be a non-negative integer");
    if (r.twice() > n || (n - r.twice()) % 2 != 0)
        throw DomainError("Dicke index r = " + std::to_string(r.value()) +
                          " is not allowed for N = " + std::to_string(n));
}

inline SectorHamiltonian build_block(int M, HalfInteger r, double omega_p, double delta,
                                     double k1, double k2, double n_atoms) {
    if (M < 0) throw DomainError("excitation number M must be non-negative");
    check_dicke_index(r, n_atoms);
    const double rv = r.value();
    const int n_min = std::max(0, M - r.twice());
    const int d = M - n_min + 1;

    SectorHamiltonian h;
    h.M = M;
    h.r = r;
    h.delta = delta;
    h.free_energy = omega_p * (M - rv + 0.5 * n_atoms);
    h.constant_term = h.free_energy;
    h.matrix = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const int n = M - i;
        const double m = M - n - rv;
        h.matrix(i, i) = delta * m;
        if (i + 1 < d) {
            const double c = (k1 + k2 * n) * std::sqrt(double(n)) *
                             std::sqrt(rv * (rv + 1.0) - m * (m + 1.0));
            h.matrix(i + 1, i) = c;
            h.matrix(i, i + 1) = c;
        }
    }
    return h;
}

inline SectorHamiltonian build_sector_hamiltonian(const IrrepSector& s, double omega_p,
                                                  double delta, double n_atoms) {
    require_valid(s);
    SectorHamiltonian h = build_block(s.M, s.r, omega_p, delta, s.k1, s.k2, n_atoms);
    h.sector = s.with_detuning(delta);
    h.constant_term = h.free_energy + delta * (s.r_tilde.value() - s.r.value());
    return h;
}

struct SectorSpectrum {
    RVector exact;
    CMatrix eigenvectors;
    double mean_splitting = 0.0;
    std::array<std::optional<RVector>, 3> perturbative;
};

inline SectorSpectrum exact_spectrum(const SectorHamiltonian& h) {
    const double herm = hermiticity_residual(h.matrix);
    if (herm > 1e-12) throw DomainError("sector matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix);
    if (es.info() != Eigen::Success) {
        const Eigen::JacobiSVD<CMatrix> svd(h.matrix);
        const auto& sv = svd.singularValues();
        throw NumericalError("eigensolver did not converge for sector M = " +
                                 std::to_string(h.M),
                             sv(0) / std::max(sv(sv.size() - 1), 1e-300));
    }
    SectorSpectrum s;
    s.exact = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();
    const int d = h.dim();
    if (d >= 2) s.mean_splitting = (s.exact(d - 1) - s.exact(0)) / (d - 1);
    return s;
}

// Second-order rearranged Hamiltonian in the spin r~ basis, without C0.
inline CMatrix effective_hamiltonian(const IrrepSector& s, double delta) {
    const SpinMatrices sp = spin_matrices(s.r_tilde);
    return delta * sp.s3 +
           s.k_eff * (sp.sx - 0.25 * s.beta1 * (sp.s3 * sp.sx + sp.sx * sp.s3) -
                      s.beta2 * (sp.s3 * sp.sx * sp.s3 + 0.25 * sp.sx));
}

// Exact block re-expressed in the spin r~ basis, shifted by the same
// constant as the effective Hamiltonian so the two can be compared.
inline CMatrix block_in_spin_basis(const SectorHamiltonian& h) {
    if (!h.sector) throw DomainError("block has no classified sector");
    const double shift = h.delta * (h.sector->r_tilde.value() - h.r.value());
    return h.matrix - shift * CMatrix::Identity(h.dim(), h.dim());
}

inline RVector perturbative_spectrum(const IrrepSector& s, double delta, int order) {
    require_valid(s);
    if (order < 0 || order > 2) throw DomainError("perturbative order must be 0, 1 or 2");
    const double k = s.k_eff;
    const double W = std::hypot(delta, k);
    if (!(W > 0.0)) throw DegenerateError("Rabi frequency vanishes (delta = 0 and k = 0)");
    const double rt = s.r_tilde.value();
    const double R = rt * (rt + 1.0);
    const double D2 = delta * delta, k2 = k * k;
    const double W2 = W * W, W4 = W2 * W2;
    const double b1 = 0.25 * s.beta1;
    const double shift = delta * (rt - s.r.value());

    RVector e(s.dim);
    for (int i = 0; i < s.dim; ++i) {
        const double m = i - rt;
        double v = shift + W * m;
        if (order >= 1) v -= b1 * (k2 * delta / W2) * (3.0 * m * m - R);
        if (order >= 2) {
            v += b1 * b1 * (k2 / W) * m *
                 ((4 * D2 * D2 - 9 * D2 * k2 + 4 * k2 * k2) / W4 * m * m -
                  (2 * D2 * D2 - 5 * D2 * k2 + 2 * k2 * k2) / W4 * R +
                  0.5 * (D2 * D2 + D2 * k2 + k2 * k2) / W4);
            v -= 0.5 * s.beta2 * (k2 / W) * m *
                 ((4 * D2 - k2) / W2 * m * m - (2 * D2 - k2) / W2 * R + 0.5 * (D2 - k2) / W2);
        }
        e(i) = v;
    }
    return e;
}

// max |E_exact - E^(n)| / mean splitting for n = 0, 1, 2 with both lists
// sorted ascending before pairing.
inline std::array<double, 3> relative_errors(const SectorSpectrum& exact, const IrrepSector& s,
                                             double delta) {
    std::array<double, 3> out{};
    const double split = exact.mean_splitting;
    if (!(split > 0.0)) throw DegenerateError("mean splitting vanishes");
    for (int order = 0; order <= 2; ++order) {
        RVector p = perturbative_spectrum(s, delta, order);
        std::sort(p.begin(), p.end());
        double worst = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i)
            worst = std::max(worst, std::abs(exact.exact(i) - p(i)));
        out[order] = worst / split;
    }
    return out;
}

enum class U2Form { derived, printed };

struct DressingTransform {
    CMatrix u0;
    std::optional<CMatrix> u1;
    std::optional<CMatrix> u2;
    int order = 0;

    CMatrix combined() const {
        CMatrix u = u0;
        if (u1) u = (*u1) * u;
        if (u2) u = (*u2) * u;
        return u;
    }
};

namespace detail {

inline CMatrix u1_generator(const SpinMatrices& sp, const IrrepSector& s, double psi) {
    const CMatrix& S3 = sp.s3;
    const CMatrix& Sx = sp.sx;
    const CMatrix& Sy = sp.sy;
    return 0.25 * s.beta1 * std::sin(psi) *
           ((S3 * Sy + Sy * S3) * std::cos(2 * psi) - 0.25 * (Sx * Sy + Sy * Sx) * std::sin(2 * psi));
}

inline CMatrix u2_printed_generator(const SpinMatrices& sp, const IrrepSector& s, double psi) {
    const CMatrix& S3 = sp.s3;
    const CMatrix& Sx = sp.sx;
    const CMatrix& Sy = sp.sy;
    const int d = sp.dim();
    const CMatrix Id = CMatrix::Identity(d, d);
    const double rt = s.r_tilde.value();
    const double R = rt * (rt + 1.0);
    const double sn = std::sin(psi), cs = std::cos(psi);
    const double a = 0.25 * s.beta1 * sn;

    const CMatrix first =
        0.75 * sn * sn * (Sx * S3 * Sy + Sy * S3 * Sx) +
        0.5 * std::sin(4 * psi) *
            (Sy * Sy * Sy / 3.0 - 8.0 * S3 * Sy * S3 + 0.5 * R * Sy - 31.0 / 12.0 * Sy);
    const CMatrix second =
        2.0 * std::cos(3 * psi) * S3 * Sy * S3 + 0.5 * cs * Sy +
        0.5 * sn * cs * cs * (Sy * S3 * Sx + Sx * S3 * Sy) -
        0.5 * std::sin(3 * psi) * (Sy * S3 * Sx + Sx * S3 * Sy) -
        cs * sn * sn * Sy * (2.0 / 3.0 * Sy * Sy - 2.0 * R * Id + 10.0 / 3.0 * Id);
    return a * a * first - 0.5 * s.beta2 * sn * second;
}

// Generator G with exp(iG) removing the off-diagonal part of h to first
// order, given that h is diagonal to zeroth order with level spacing W.
inline CMatrix removal_generator(const CMatrix& h, double W) {
    const int d = static_cast<int>(h.rows());
    CMatrix g = CMatrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            if (a != b) g(a, b) = I * h(a, b) / (W * double(b - a));
    return g;
}

}  // namespace detail

inline DressingTransform dressing_transform(const IrrepSector& s, double delta, int order,
                                            U2Form form = U2Form::derived) {
    require_valid(s);
    if (order < 0 || order > 2) throw DomainError("dressing order must be 0, 1 or 2");
    const SpinMatrices sp = spin_matrices(s.r_tilde);
    const double psi = std::atan2(s.k_eff, delta);
    const double W = std::hypot(delta, s.k_eff);

    DressingTransform t;
    t.order = order;
    t.u0 = expi_hermitian(psi * sp.sy);
    if (order >= 1) t.u1 = expi_hermitian(-detail::u1_generator(sp, s, psi));
    if (order >= 2) {
        if (form == U2Form::printed) {
            t.u2 = expi_hermitian(detail::u2_printed_generator(sp, s, psi));
        } else {
            if (!(W > 0.0)) throw DegenerateError("Rabi frequency vanishes");
            const CMatrix u10 = (*t.u1) * t.u0;
            const CMatrix h1 = u10 * effective_hamiltonian(s, delta) * u10.adjoint();
            t.u2 = expi_hermitian(detail::removal_generator(h1, W));
        }
    }
    return t;
}

// Off-diagonal norm of u h u^+ relative to the dressed Rabi frequency.
inline double dressed_offdiagonal_residual(const DressingTransform& t, const CMatrix& h,
                                           double scale) {
    const CMatrix u = t.combined();
    return offdiagonal_norm(u * h * u.adjoint()) / scale;
}

// Relative errors of the three perturbative orders for M in [m_lo, m_hi].
struct SpectrumErrorRow {
    int M = 0;
    std::array<double, 3> error{};
};

inline std::vector<SpectrumErrorRow> spectrum_error_study(int m_lo, int m_hi, HalfInteger r,
                                                          double omega_p, double delta,
                                                          double k1, double k2,
                                                          double n_atoms) {
    std::vector<SpectrumErrorRow> rows;
    for (int M = m_lo; M <= m_hi; ++M) {
        const IrrepSector s = require_valid(classify_sector(M, r, k1, k2));
        const SectorHamiltonian h = build_sector_hamiltonian(s, omega_p, delta, n_atoms);
        const SectorSpectrum sp = exact_spectrum(h);
        rows.push_back({M, relative_errors(sp, s, delta)});
    }
    return rows;
}

}  // namespace lambec
