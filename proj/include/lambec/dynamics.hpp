#pragma once

// Photon statistics of the probe: coherent input, collective atoms in
// the ground state, evolution sector by sector.
//
// Times are in seconds and all energies are angular frequencies.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "pae_algebra.hpp"
#include "spectral.hpp"
#include "units.hpp"

namespace lambec {

struct QuantumState {
    // M -> amplitudes in the block basis (index i carries M - i photons).
    std::map<int, CVector> sectors;
    double n0 = 0.0;
    int m_cutoff = 0;
    HalfInteger r;
    double n_atoms = 0.0;
    double truncated_mass = 0.0;
    bool truncation_warning = false;

    double norm2() const {
        double s = 0.0;
        for (const auto& [M, v] : sectors) s += v.squaredNorm();
        return s;
    }
};

inline int default_cutoff(double n0, double k1, double k2) {
    int c = 60;
    if (k2 != 0.0) c = std::min(c, static_cast<int>(std::floor(std::abs(k1 / k2))) - 2);
    c = std::min(c, static_cast<int>(std::floor(n0 + 10.0 * std::sqrt(n0))));
    return std::max(c, 0);
}

inline double poisson_weight(double n0, int n) {
    return std::exp(-n0 + n * std::log(n0) - std::lgamma(n + 1.0));
}

inline QuantumState initial_state(double n0, double n_atoms, std::optional<int> m_cutoff = {},
                                  double k1 = 1.0, double k2 = 0.0) {
    if (!(n0 > 0.0)) throw DomainError("mean photon number must be positive");
    const int cutoff = m_cutoff ? *m_cutoff : default_cutoff(n0, k1, k2);
    if (cutoff < 0) throw DomainError("photon cutoff must be non-negative");
    if (k2 != 0.0 && !(cutoff + 1.0 < std::abs(k1 / k2)))
        throw InvalidSectorError("cutoff M = " + std::to_string(cutoff) +
                                 " violates the validity bound M + 1 < |k1/k2|");

    QuantumState s;
    s.n0 = n0;
    s.m_cutoff = cutoff;
    s.n_atoms = n_atoms;
    s.r = HalfInteger::from_double(0.5 * n_atoms);
    double kept = 0.0;
    for (int M = 0; M <= cutoff; ++M) {
        const double p = poisson_weight(n0, M);
        kept += p;
        const int dim = std::min(M, s.r.twice()) + 1;
        CVector v = CVector::Zero(dim);
        v(0) = std::sqrt(p);
        s.sectors.emplace(M, std::move(v));
    }
    s.truncated_mass = std::max(0.0, 1.0 - kept);
    if (s.truncated_mass > 0.05) {
        std::ostringstream os;
        os << "truncated Poisson mass " << s.truncated_mass << " exceeds 0.05";
        throw TruncationError(os.str());
    }
    s.truncation_warning = s.truncated_mass > 1e-3;
    const double scale = 1.0 / std::sqrt(kept);
    for (auto& [M, v] : s.sectors) v *= scale;
    return s;
}

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> n_mean;
    std::vector<double> n2_mean;
    std::vector<std::optional<double>> q;

    std::size_t size() const { return times.size(); }
};

inline std::optional<double> mandel_q(double n_mean, double n2_mean) {
    if (n_mean <= 1e-12) return std::nullopt;
    return (n2_mean - n_mean * n_mean) / n_mean - 1.0;
}

inline std::vector<double> uniform_times(double t0, double t1, int samples) {
    if (samples < 1) throw DomainError("at least one time sample is required");
    std::vector<double> t(samples);
    if (samples == 1) {
        t[0] = t0;
        return t;
    }
    for (int i = 0; i < samples; ++i) t[i] = t0 + (t1 - t0) * double(i) / (samples - 1);
    return t;
}

enum class Propagation { exact, order0, order1, order2 };

inline int propagation_order(Propagation p) {
    switch (p) {
        case Propagation::order0: return 0;
        case Propagation::order1: return 1;
        case Propagation::order2: return 2;
        default: return -1;
    }
}

// psi(t) = W^+ exp(-i E t) W psi(0) within one block.
struct SectorPropagator {
    int M = 0;
    CMatrix W;
    RVector energies;
    RVector photons;
};

struct QuantumModel {
    double omega_p = 0.0;
    double delta = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double n_atoms = 0.0;
};

inline RVector block_photon_numbers(int M, int dim) {
    RVector n(dim);
    for (int i = 0; i < dim; ++i) n(i) = M - i;
    return n;
}

inline SectorPropagator exact_propagator(const SectorHamiltonian& h, const SectorSpectrum& sp) {
    return {h.M, sp.eigenvectors.adjoint(), sp.exact, block_photon_numbers(h.M, h.dim())};
}

inline SectorPropagator dressed_propagator(const IrrepSector& s, const DressingTransform& t,
                                           double delta, int order) {
    return {s.M, t.u0, perturbative_spectrum(s, delta, order), block_photon_numbers(s.M, s.dim)};
}

inline std::map<int, SectorPropagator> make_propagators(const QuantumState& state,
                                                        const QuantumModel& model,
                                                        Propagation how) {
    std::map<int, SectorPropagator> out;
    for (const auto& [M, amp] : state.sectors) {
        if (how == Propagation::exact) {
            const SectorHamiltonian h = build_block(M, state.r, model.omega_p, model.delta,
                                                    model.k1, model.k2, model.n_atoms);
            out.emplace(M, exact_propagator(h, exact_spectrum(h)));
        } else {
            const IrrepSector s =
                require_valid(classify_sector(M, state.r, model.k1, model.k2));
            const DressingTransform t = dressing_transform(s, model.delta, 0);
            out.emplace(M, dressed_propagator(s, t, model.delta, propagation_order(how)));
        }
    }
    return out;
}

namespace detail {

// Adds w * <psi(t)| A |psi(t)> for each observable A and time.
inline void accumulate_sector(const SectorPropagator& p, const CVector& psi0,
                              const std::vector<CMatrix>& observables,
                              const std::vector<double>& times,
                              std::vector<std::vector<double>>& acc) {
    const CVector c0 = p.W * psi0;
    std::vector<CMatrix> dressed;
    dressed.reserve(observables.size());
    for (const CMatrix& a : observables) dressed.push_back(p.W * a * p.W.adjoint());
    CVector v(c0.size());
    for (std::size_t t = 0; t < times.size(); ++t) {
        for (Eigen::Index j = 0; j < c0.size(); ++j)
            v(j) = c0(j) * std::exp(-I * (p.energies(j) * times[t]));
        for (std::size_t o = 0; o < dressed.size(); ++o)
            acc[o][t] += v.dot(dressed[o] * v).real();
    }
}

inline void check_coverage(const QuantumState& state,
                           const std::map<int, SectorPropagator>& props) {
    std::vector<int> missing;
    for (const auto& [M, v] : state.sectors) {
        auto it = props.find(M);
        if (it == props.end() || it->second.W.rows() != v.size()) missing.push_back(M);
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "missing sector data for M =";
        for (int M : missing) os << ' ' << M;
        throw MissingSectorError(os.str());
    }
}

}  // namespace detail

inline TimeSeries evolve_expectations(const QuantumState& state,
                                      const std::map<int, SectorPropagator>& props,
                                      const std::vector<double>& times) {
    detail::check_coverage(state, props);
    std::vector<std::vector<double>> acc(2, std::vector<double>(times.size(), 0.0));
    // std::map iterates in ascending M, which fixes the reduction order.
    for (const auto& [M, psi0] : state.sectors) {
        const SectorPropagator& p = props.at(M);
        const RVector& n = p.photons;
        const CMatrix N = n.cast<cplx>().asDiagonal();
        const CMatrix N2 = n.array().square().matrix().cast<cplx>().asDiagonal();
        detail::accumulate_sector(p, psi0, {N, N2}, times, acc);
    }
    TimeSeries ts;
    ts.times = times;
    ts.n_mean = std::move(acc[0]);
    ts.n2_mean = std::move(acc[1]);
    ts.q.reserve(times.size());
    for (std::size_t t = 0; t < times.size(); ++t)
        ts.q.push_back(mandel_q(ts.n_mean[t], ts.n2_mean[t]));
    return ts;
}

inline TimeSeries evolve_expectations(const QuantumState& state, const QuantumModel& model,
                                      const std::vector<double>& times, Propagation how) {
    return evolve_expectations(state, make_propagators(state, model, how), times);
}

// Mean energy (without the free term) along the evolution.
inline std::vector<double> energy_expectation(const QuantumState& state,
                                              const QuantumModel& model,
                                              const std::map<int, SectorPropagator>& props,
                                              const std::vector<double>& times) {
    detail::check_coverage(state, props);
    std::vector<std::vector<double>> acc(1, std::vector<double>(times.size(), 0.0));
    for (const auto& [M, psi0] : state.sectors) {
        const SectorHamiltonian h = build_block(M, state.r, model.omega_p, model.delta,
                                                model.k1, model.k2, model.n_atoms);
        detail::accumulate_sector(props.at(M), psi0, {h.matrix}, times, acc);
    }
    return acc[0];
}

// ---------------------------------------------------------------------------
// Zero-order closed forms.

namespace detail {

struct ZeroOrderSector {
    double weight;
    double M;
    double r_tilde;
    double psi;
    double omega;
};

inline std::vector<ZeroOrderSector> zero_order_sectors(const QuantumState& state,
                                                       const QuantumModel& model) {
    std::vector<ZeroOrderSector> out;
    for (const auto& [M, v] : state.sectors) {
        for (Eigen::Index i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > 1e-14)
                throw UnsupportedStateError(
                    "closed forms require unexcited atoms; sector M = " + std::to_string(M) +
                    " has excited-atom amplitude");
        const double w = std::norm(v(0));
        const IrrepSector s = require_valid(classify_sector(M, state.r, model.k1, model.k2));
        out.push_back({w, double(M), s.r_tilde.value(), std::atan2(s.k_eff, model.delta),
                       std::hypot(model.delta, s.k_eff)});
    }
    return out;
}

}  // namespace detail

inline TimeSeries zero_order_expectations(const QuantumState& state, const QuantumModel& model,
                                          const std::vector<double>& times) {
    const auto sectors = detail::zero_order_sectors(state, model);
    TimeSeries ts;
    ts.times = times;
    ts.n_mean.assign(times.size(), 0.0);
    ts.n2_mean.assign(times.size(), 0.0);
    for (const auto& z : sectors) {
        const double s2 = std::pow(std::sin(z.psi), 2);
        const double c2 = std::pow(std::cos(z.psi), 2);
        const double c2psi = std::cos(2.0 * z.psi);
        const double n = z.M;  // photon number of the initial basis state
        const double mr = z.M - z.r_tilde;
        const double R = z.r_tilde * (z.r_tilde + 1.0);
        for (std::size_t t = 0; t < times.size(); ++t) {
            const double wt = z.omega * times[t];
            const double cw = std::cos(wt);
            const double sh2 = std::pow(std::sin(0.5 * wt), 2);
            const double mean = mr * (1.0 - cw) * s2 + n * (c2 + s2 * cw);
            const double sq =
                n * n *
                    (c2 * c2 + c2 * s2 * (3.0 * cw - 1.0) +
                     0.25 * s2 * s2 * (1.0 + 3.0 * std::cos(2.0 * wt))) +
                n * (mr * s2 * sh2 * (5.0 + 3.0 * c2psi + 6.0 * s2 * cw)) +
                0.5 * s2 * sh2 *
                    (3.0 * R - mr * mr + (R - 3.0 * mr * mr) * (c2psi + 2.0 * cw * s2));
            ts.n_mean[t] += z.weight * mean;
            ts.n2_mean[t] += z.weight * sq;
        }
    }
    ts.q.reserve(times.size());
    for (std::size_t t = 0; t < times.size(); ++t)
        ts.q.push_back(mandel_q(ts.n_mean[t], ts.n2_mean[t]));
    return ts;
}

struct DirectSumParams {
    double n0 = 25.0;
    double r = 500.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double delta = 0.0;
    int n_max = 60;
};

inline double k_n(double n, double r, double k1, double k2) {
    return (k1 + k2 * (n + 1.0) / 2.0) * std::sqrt(2.0 * (4.0 * r - n + 1.0));
}

// Mean photon number from the Poisson sum over Fock components, and the
// modulus of its oscillating part.
struct DirectSum {
    std::vector<double> times;
    std::vector<double> n_mean;
    std::vector<double> envelope;
};

inline DirectSum direct_sum(const DirectSumParams& p, const std::vector<double>& times) {
    if (!(p.n0 > 0.0)) throw DomainError("mean photon number must be positive");
    const double D2 = p.delta * p.delta;
    DirectSum out;
    out.times = times;
    out.n_mean.assign(times.size(), 0.0);
    out.envelope.assign(times.size(), 0.0);
    std::vector<cplx> osc(times.size(), 0.0);
    for (int n = 0; n <= p.n_max; ++n) {
        const double P = poisson_weight(p.n0, n);
        const double k = k_n(n, p.r, p.k1, p.k2);
        const double W2 = k * k + D2;
        if (!(W2 > 0.0)) continue;
        const double W = std::sqrt(W2);
        const double base = P * n * (k * k + 2.0 * D2) / (2.0 * W2);
        const double amp = P * n * k * k / (2.0 * W2);
        for (std::size_t t = 0; t < times.size(); ++t) {
            const cplx e = std::exp(I * (W * times[t]));
            out.n_mean[t] += base + amp * e.real();
            osc[t] += amp * e;
        }
    }
    for (std::size_t t = 0; t < times.size(); ++t) out.envelope[t] = std::abs(osc[t]);
    return out;
}

struct EnvelopeFeatures {
    std::optional<double> collapse;       // first drop to 1/e of the initial amplitude
    std::optional<double> revival_onset;  // first return above half the initial amplitude
    std::optional<double> revival_peak;   // first local maximum after the onset
};

inline EnvelopeFeatures envelope_features(const std::vector<double>& times,
                                          const std::vector<double>& env) {
    EnvelopeFeatures f;
    if (env.empty()) return f;
    const double a0 = env.front();
    std::size_t i = 0;
    for (; i < env.size(); ++i)
        if (env[i] <= a0 / std::exp(1.0)) {
            f.collapse = times[i];
            break;
        }
    if (!f.collapse) return f;
    for (; i < env.size(); ++i)
        if (env[i] >= 0.5 * a0) {
            f.revival_onset = times[i];
            break;
        }
    if (!f.revival_onset) return f;
    for (; i + 1 < env.size(); ++i)
        if (env[i + 1] < env[i]) {
            f.revival_peak = times[i];
            break;
        }
    return f;
}

// ---------------------------------------------------------------------------

struct Timescales {
    double t_rabi = 0.0;
    double t_col_small_k2 = 0.0;
    std::optional<double> t_col_large_k2;
    std::optional<double> t_revival;
    bool large_k2_applicable = false;

    // Correction terms, present only when requested.
    std::optional<double> t_col_small_k2_corrected;
    std::optional<double> t_col_large_k2_corrected;

    double t_collapse() const {
        return large_k2_applicable ? *t_col_large_k2 : t_col_small_k2;
    }
};

inline Timescales timescales(double n0, double r, double m0, double k1, double k2, double delta,
                             bool with_corrections = false) {
    if (!(n0 > 0.0)) throw DomainError("n0 must be positive");
    if (!(r > 0.0)) throw DomainError("r must be positive");
    if (!(k1 > 0.0)) throw DomainError("k1 must be positive");
    const double D2 = delta * delta;
    const double kn0 = k_n(n0, r, k1, k2);
    const double kn1 = k_n(n0 + 1.0, r, k1, k2);
    const double W0 = std::sqrt(kn0 * kn0 + D2);
    const double W1 = std::sqrt(kn1 * kn1 + D2);
    const double sn0 = std::sqrt(n0);

    Timescales ts;
    ts.t_rabi = two_pi / W0;
    if (W1 != W0) ts.t_revival = std::abs(two_pi / (W1 - W0));
    const double k1_2 = k1 * k1, k1_4 = k1_2 * k1_2;
    const double lead = (4.0 * (3.0 * r - m0 + 1.0) * k1_2 + D2) / (k1_4 * sn0);
    ts.t_col_small_k2 = std::sqrt(lead);
    if (k2 != 0.0) ts.t_col_large_k2 = 1.0 / (std::abs(k2) * std::sqrt(sn0 * r));
    ts.large_k2_applicable = ts.t_col_large_k2 && *ts.t_col_large_k2 < ts.t_col_small_k2;

    if (with_corrections) {
        const double corr = 4.0 * k2 *
                            (k1_2 * (8.0 * r - n0 + 1.0) * (4.0 * r + 1.0) - (2.0 * r - n0) * D2) /
                            (k1_4 * k1 * sn0);
        if (lead + corr >= 0.0) ts.t_col_small_k2_corrected = std::sqrt(lead + corr);
        if (k2 != 0.0) {
            const double k2_2 = k2 * k2;
            const double num = 8.0 * k1_4 + 6.0 * k1_2 * k2_2 * (2.0 * n0 + 1.0) +
                               4.0 * k1_2 * k1 * k2 * (2.0 * n0 + 3.0) +
                               k1 * k2 * k2_2 * (D2 / k2_2 + 6.0 * n0 + 1.0) +
                               k2_2 * k2_2 * (n0 - D2 / k2_2 * (n0 - 0.5));
            const double den = 2.0 * r * k2 * std::pow(2.0 * k1 + k2, 3);
            const double rad = 1.0 + num / den;
            if (rad >= 0.0) ts.t_col_large_k2_corrected = *ts.t_col_large_k2 * std::sqrt(rad);
        }
    }
    return ts;
}

}  // namespace lambec
