#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lambec/lambda_medium.hpp"

using namespace lambec;

namespace {

MediumParams sodium() { return MediumParams{}; }

DriveParams resonant_drive(double delta = 0.0) {
    DriveParams d;
    d.g1 = hz_to_rad(21.4e6);
    d.delta_p = delta;
    return d;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Intensity, CouplingRabiFrequency) {
    const double g1 = rabi_from_intensity(mw_per_cm2_to_w_per_m2(55.0), 22e-30);
    EXPECT_NEAR(rad_to_hz(g1) / 21.4e6, 1.0, 0.01);
}

TEST(Intensity, ZeroFieldAndSquareRootScaling) {
    EXPECT_EQ(rabi_from_intensity(0.0, 22e-30), 0.0);
    const double a = rabi_from_intensity(123.0, 22e-30);
    const double b = rabi_from_intensity(4.0 * 123.0, 22e-30);
    EXPECT_NEAR(b / a, 2.0, 1e-14);
}

TEST(Intensity, NegativeIntensityRejected) {
    EXPECT_THROW(amplitude_from_intensity(-1.0), DomainError);
}

TEST(GammaFactor, NoCouplingOnResonance) {
    const MediumParams m = sodium();
    const auto c = rho32_coefficients_at(m, 0.0, 0.0);
    EXPECT_NEAR(std::abs(c.gamma_factor - cplx(0.0, -2.0 * m.gamma_opt())), 0.0,
                1e-12 * m.gamma_opt());
    EXPECT_LT(rel(c.rho1, I / (2.0 * m.gamma_opt())), 1e-14);
}

TEST(GammaFactor, CouplingOnResonanceIsImaginary) {
    const MediumParams m = sodium();
    const double g1 = hz_to_rad(21.4e6);
    const cplx G = gamma_factor(m, g1, 0.0);
    const double expected = -(2.0 * m.gamma_opt() + g1 * g1 / m.gamma_mag());
    EXPECT_EQ(G.real(), 0.0);
    EXPECT_NEAR(G.imag() / expected, 1.0, 1e-14);
}

TEST(SteadyState, PropertiesOverRandomParameters) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        MediumParams m;
        m.gamma31 = hz_to_rad(1e6 + 9e6 * u(rng));
        m.gamma32 = hz_to_rad(1e6 + 9e6 * u(rng));
        m.gamma12 = hz_to_rad(1e3 + 1e6 * u(rng));
        DriveParams d;
        d.g1 = hz_to_rad(30e6 * u(rng));
        d.delta_p = hz_to_rad(-20e6 + 40e6 * u(rng));
        d.delta_c = hz_to_rad(-5e6 + 10e6 * u(rng));
        const double g2 = m.gamma_opt() * u(rng);
        const SteadyState s = steady_state_oracle(m, d, g2);
        EXPECT_NEAR(std::abs(s.rho.trace() - 1.0), 0.0, 1e-10);
        EXPECT_LT((s.rho - s.rho.adjoint()).norm(), 1e-10);
        for (int i = 0; i < 3; ++i) {
            EXPECT_GE(s.rho(i, i).real(), -1e-10);
            EXPECT_LE(s.rho(i, i).real(), 1.0 + 1e-10);
        }
    }
}

TEST(SteadyState, NoDrivePopulatesLevelTwo) {
    DriveParams d;
    const SteadyState s = steady_state_oracle(sodium(), d, 0.0);
    Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
    expected(1, 1) = 1.0;
    EXPECT_LT((s.rho - expected).norm(), 1e-12);
}

TEST(SteadyState, ProbeCoherenceVanishesWithProbe) {
    const MediumParams m = sodium();
    const DriveParams d = resonant_drive(hz_to_rad(1e6));
    double previous = std::abs(steady_state_oracle(m, d, 1e-2 * m.gamma_opt()).rho(2, 1));
    for (double x : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double now = std::abs(steady_state_oracle(m, d, x * m.gamma_opt()).rho(2, 1));
        EXPECT_LT(now, 0.2 * previous);
        previous = now;
    }
    EXPECT_LT(std::abs(steady_state_oracle(m, d, 0.0).rho(2, 1)), 1e-15);
}

TEST(SteadyState, CubicFitMatchesLinearCoefficient) {
    const MediumParams m = sodium();
    for (int i = 0; i < 20; ++i) {
        const double delta = hz_to_rad(-2e6 + 4e6 * i / 19.0);
        const DriveParams d = resonant_drive(delta);
        const OracleFit f = steady_state_fit(m, d);
        const Rho32Coefficients c = rho32_coefficients(m, d);
        EXPECT_LT(rel(f.rho1, c.rho1), 1e-2) << "delta/2pi = " << rad_to_hz(delta);
    }
}

TEST(SteadyState, QuadraticTermNegligible) {
    const MediumParams m = sodium();
    const double g2 = 1e-2 * m.gamma_opt();
    for (double f_hz : {-2e6, -1e6, 0.0, 1e6, 2e6}) {
        const OracleFit f = steady_state_fit(m, resonant_drive(hz_to_rad(f_hz)));
        EXPECT_LT(10.0 * std::abs(f.rho2) * g2 * g2, std::abs(f.rho3) * g2 * g2 * g2);
    }
}

TEST(Susceptibility, LinearInDensity) {
    MediumParams a = sodium();
    MediumParams b = sodium();
    b.density = 3.0 * a.density;
    const DriveParams d = resonant_drive(hz_to_rad(0.7e6));
    const auto sa = susceptibilities(a, d);
    const auto sb = susceptibilities(b, d);
    EXPECT_LT(rel(sb.chi1, 3.0 * sa.chi1), 1e-14);
    EXPECT_LT(rel(sb.chi3, 3.0 * sa.chi3), 1e-14);
}

TEST(Susceptibility, BareLorentzianWithoutCoupling) {
    const MediumParams m = sodium();
    DriveParams d;
    d.delta_p = hz_to_rad(3e6);
    const cplx chi1 = susceptibilities(m, d).chi1;
    const cplx lorentz = m.density * m.mu32 * m.mu32 /
                         (si.epsilon0 * si.hbar * cplx(d.delta_p, -2.0 * m.gamma_opt()));
    EXPECT_LT(rel(chi1, lorentz), 1e-13);
}

TEST(Susceptibility, CubicAbsorptionHasOneSignOverSweep) {
    const MediumParams m = sodium();
    for (int i = 0; i <= 40; ++i) {
        const double delta = hz_to_rad(-2e6 + 4e6 * i / 40.0);
        EXPECT_LT(susceptibilities(m, resonant_drive(delta)).chi3.imag(), 0.0);
    }
}

TEST(Susceptibility, LinearAbsorptionNonNegative) {
    const MediumParams m = sodium();
    for (int i = 0; i <= 200; ++i) {
        const double delta = hz_to_rad(-50e6 + 100e6 * i / 200.0);
        EXPECT_GE(optical_response(m, resonant_drive(delta)).eta_p0, 0.0);
    }
}

TEST(OpticalResponse, SlowLightOnResonance) {
    const OpticalResponse r = optical_response(sodium(), resonant_drive());
    ASSERT_TRUE(r.v_g.has_value());
    EXPECT_NEAR(*r.v_g / 2000.0, 1.0, 0.15);
    EXPECT_NEAR(r.eta_p / 242.0, 1.0, 0.15);
}

TEST(OpticalResponse, VacuumLimit) {
    MediumParams m = sodium();
    m.density = 1e-12;
    const OpticalResponse r = optical_response(m, resonant_drive(hz_to_rad(1e6)));
    EXPECT_NEAR(r.n_p, 1.0, 1e-15);
    EXPECT_NEAR(r.eta_p, 0.0, 1e-15);
    EXPECT_NEAR(r.n_g, 1.0, 1e-12);
    ASSERT_TRUE(r.v_g.has_value());
    EXPECT_NEAR(*r.v_g / si.c, 1.0, 1e-12);
}

TEST(OpticalResponse, HalfStepConvergence) {
    const OpticalResponse r = optical_response(sodium(), resonant_drive());
    EXPECT_LT(r.n_g_half_step_change, 1e-3);
}

TEST(OpticalResponse, StepSignFlipInvariant) {
    for (double f_hz : {-1.3e6, 0.0, 0.4e6}) {
        DriveParams d = resonant_drive(hz_to_rad(f_hz));
        d.probe_amplitude = amplitude_from_intensity(uw_per_cm2_to_w_per_m2(80.0));
        const double h = hz_to_rad(10e3);
        const OpticalResponse a = optical_response(sodium(), d, h);
        const OpticalResponse b = optical_response(sodium(), d, -h);
        EXPECT_EQ(a.n_g, b.n_g);
        EXPECT_EQ(a.n_p, b.n_p);
        EXPECT_EQ(a.eta_p, b.eta_p);
    }
}

TEST(OpticalResponse, ZeroStepRejected) {
    EXPECT_THROW(optical_response(sodium(), resonant_drive(), 0.0), DomainError);
}

TEST(Transparency, NoRootsWithoutProbe) {
    const MediumParams m = sodium();
    const DriveParams d = resonant_drive();
    const auto roots =
        find_transparency_points(m, d, hz_to_rad(-40e6), hz_to_rad(40e6), 801);
    EXPECT_TRUE(roots.empty());

    // The linear absorption dip sits at two-photon resonance.
    double best = 0.0, best_eta = 1e300;
    for (int i = -500; i <= 500; ++i) {
        const double delta = hz_to_rad(10.0 * i);
        const double eta = total_absorption(m, d.with_detuning(delta));
        if (eta < best_eta) {
            best_eta = eta;
            best = delta;
        }
    }
    EXPECT_LE(std::abs(rad_to_hz(best)), 10.0);
}

TEST(Transparency, NonlinearRootsStableUnderRefinement) {
    const MediumParams m = sodium();
    DriveParams d = resonant_drive();
    d.probe_amplitude = amplitude_from_intensity(uw_per_cm2_to_w_per_m2(80.0));
    const double lo = hz_to_rad(-40e6), hi = hz_to_rad(40e6);
    const auto coarse = find_transparency_points(m, d, lo, hi, 801);
    const auto fine = find_transparency_points(m, d, lo, hi, 8010);
    ASSERT_FALSE(coarse.empty());
    ASSERT_EQ(coarse.size(), fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        EXPECT_GT(std::abs(coarse[i]), hz_to_rad(1e6));
        EXPECT_NEAR(coarse[i], fine[i], hz_to_rad(10.0));
        EXPECT_LT(std::abs(total_absorption(m, d.with_detuning(coarse[i]))), 1e-3);
    }
}

TEST(Couplings, WeakCouplingLimit) {
    const MediumParams m = sodium();
    DriveParams d;
    d.g1 = 1e-3;
    const CouplingConstants c = coupling_constants(m, d);
    EXPECT_NEAR(std::abs(c.L_l - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(c.k1 / c.k0, 1.0, 1e-12);
}

TEST(Couplings, VolumeDoublingAtFixedDensity) {
    MediumParams a = sodium();
    MediumParams b = sodium();
    b.n_atoms = 2.0 * a.n_atoms;
    const DriveParams d = resonant_drive(hz_to_rad(0.2e6));
    const CouplingConstants ca = coupling_constants(a, d);
    const CouplingConstants cb = coupling_constants(b, d);
    EXPECT_EQ(ca.L_l, cb.L_l);
    EXPECT_EQ(ca.L_nl, cb.L_nl);
    EXPECT_NEAR(cb.k0 / ca.k0, 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Couplings, NonlinearCouplingWithoutDrive) {
    const MediumParams m = sodium();
    const CouplingConstants c = coupling_constants(m, DriveParams{});
    const double B = 1.0 / (2.0 * m.gamma_opt()) + 1.0 / m.gamma_mag();
    const double expected = -std::pow(c.k0, 3) * B / (2.0 * m.gamma_opt());
    EXPECT_NEAR(c.k2 / expected, 1.0, 1e-12);
    EXPECT_NEAR(c.k2_discarded_imag, 0.0, 1e-12 * std::abs(expected));
}

TEST(Couplings, PhaseConventionGivesPositiveK1) {
    const MediumParams m = sodium();
    for (double f_hz : {-5e6, -0.3e6, 0.0, 2e6}) {
        const CouplingConstants c = coupling_constants(m, resonant_drive(hz_to_rad(f_hz)));
        EXPECT_GE(c.k1, 0.0);
        EXPECT_NEAR(std::arg(std::exp(-I * c.phase) * c.L_l), 0.0, 1e-12);
    }
}
