#include <gtest/gtest.h>

#include <cmath>

#include "brute_force.hpp"
#include "lambec/dynamics.hpp"
#include "lambec/lambda_medium.hpp"

using namespace lambec;

namespace {

const double kOmega = MediumParams{}.omega;

QuantumModel reference_model() {
    QuantumModel m;
    m.omega_p = kOmega;
    m.delta = 2.4e-8 * kOmega;
    m.k1 = 3.04e-7 * kOmega;
    m.k2 = -3.01e-9 * kOmega;
    m.n_atoms = 1000.0;
    return m;
}

QuantumState reference_state(const QuantumModel& m) {
    return initial_state(25.0, m.n_atoms, std::nullopt, m.k1, m.k2);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

}  // namespace

TEST(InitialState, CoherentMoments) {
    const QuantumModel m = reference_model();
    const QuantumState s = reference_state(m);
    EXPECT_EQ(s.m_cutoff, 60);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    EXPECT_LT(s.truncated_mass, 1e-6);
    EXPECT_FALSE(s.truncation_warning);
    const TimeSeries ts = evolve_expectations(s, m, {0.0}, Propagation::exact);
    EXPECT_NEAR(ts.n_mean[0], 25.0, 1e-6);
    EXPECT_NEAR(ts.n2_mean[0], 650.0, 1e-4);
    ASSERT_TRUE(ts.q[0].has_value());
    EXPECT_NEAR(*ts.q[0], 0.0, 1e-6);
}

TEST(InitialState, NearVacuum) {
    const QuantumState s = initial_state(1e-8, 1000.0);
    ASSERT_TRUE(s.sectors.count(0));
    EXPECT_NEAR(std::norm(s.sectors.at(0)(0)), 1.0, 1e-7);
}

TEST(InitialState, TruncationReporting) {
    EXPECT_THROW(initial_state(25.0, 1000.0, 20), TruncationError);
    const QuantumState warned = initial_state(25.0, 1000.0, 35);
    EXPECT_TRUE(warned.truncation_warning);
    EXPECT_GT(warned.truncated_mass, 1e-3);
    EXPECT_NEAR(warned.norm2(), 1.0, 1e-12);
}

TEST(InitialState, CutoffRespectsValidity) {
    EXPECT_EQ(default_cutoff(25.0, 3.04e-7, -3.01e-9), 60);
    EXPECT_EQ(default_cutoff(4.0, 1.0, 0.0), 24);
    EXPECT_EQ(default_cutoff(400.0, 1.0, -0.02), 48);
    EXPECT_THROW(initial_state(25.0, 1000.0, 99, 1.0, -0.01), InvalidSectorError);
    EXPECT_THROW(initial_state(0.0, 1000.0), DomainError);
}

TEST(Mandel, ReferenceStatistics) {
    EXPECT_NEAR(*mandel_q(7.0, 49.0 + 7.0), 0.0, 1e-15);
    EXPECT_NEAR(*mandel_q(7.0, 49.0), -1.0, 1e-15);
    EXPECT_NEAR(*mandel_q(7.0, 2.0 * 49.0 + 7.0), 7.0, 1e-14);
    EXPECT_FALSE(mandel_q(0.0, 0.0).has_value());
    EXPECT_FALSE(mandel_q(1e-13, 0.0).has_value());
}

TEST(ZeroOrder, CoherentMomentsAtStart) {
    const QuantumModel m = reference_model();
    const TimeSeries ts = zero_order_expectations(reference_state(m), m, {0.0});
    EXPECT_NEAR(ts.n_mean[0], 25.0, 1e-6);
    EXPECT_NEAR(ts.n2_mean[0], 650.0, 1e-4);
    EXPECT_NEAR(*ts.q[0], 0.0, 1e-6);
}

TEST(ZeroOrder, ClosedFormMatchesOperatorEvolution) {
    const QuantumModel m = reference_model();
    const QuantumState s = reference_state(m);
    const auto times = uniform_times(0.0, 1e-9, 301);
    const TimeSeries a = zero_order_expectations(s, m, times);
    const TimeSeries b = evolve_expectations(s, m, times, Propagation::order0);
    EXPECT_LT(max_abs_diff(a.n_mean, b.n_mean), 1e-12 * 25.0);
    EXPECT_LT(max_abs_diff(a.n2_mean, b.n2_mean), 1e-12 * 650.0);
}

TEST(ZeroOrder, ClosedFormMatchesOperatorEvolutionOffResonance) {
    QuantumModel m = reference_model();
    m.delta = 0.8 * m.k1 * 50.0;
    const QuantumState s = initial_state(6.0, 40.0, 20, m.k1, m.k2);
    const auto times = uniform_times(0.0, 2e-9, 211);
    const TimeSeries a = zero_order_expectations(s, m, times);
    const TimeSeries b = evolve_expectations(s, m, times, Propagation::order0);
    EXPECT_LT(max_abs_diff(a.n_mean, b.n_mean), 1e-11);
    EXPECT_LT(max_abs_diff(a.n2_mean, b.n2_mean), 1e-10);
}

TEST(ZeroOrder, ResonantLimitIsDirectSum) {
    QuantumModel m = reference_model();
    m.delta = 0.0;
    const QuantumState s = reference_state(m);
    const auto times = uniform_times(0.0, 5e-9, 401);
    const TimeSeries a = zero_order_expectations(s, m, times);
    DirectSumParams p;
    p.n0 = 25.0;
    p.r = 500.0;
    p.k1 = m.k1;
    p.k2 = m.k2;
    p.delta = 0.0;
    p.n_max = s.m_cutoff;
    DirectSum d = direct_sum(p, times);
    // The state carries renormalized Poisson weights; the sum does not.
    for (double& v : d.n_mean) v /= 1.0 - s.truncated_mass;
    EXPECT_LT(max_abs_diff(a.n_mean, d.n_mean), 1e-10);
}

TEST(ZeroOrder, ExcitedAtomsUnsupported) {
    const QuantumModel m = reference_model();
    QuantumState s = reference_state(m);
    s.sectors.at(5)(1) = 0.1;
    EXPECT_THROW(zero_order_expectations(s, m, {0.0}), UnsupportedStateError);
}

TEST(Evolution, MissingSectorReported) {
    const QuantumModel m = reference_model();
    const QuantumState s = initial_state(2.0, 1000.0, 10, m.k1, m.k2);
    auto props = make_propagators(s, m, Propagation::exact);
    props.erase(3);
    props.erase(7);
    try {
        evolve_expectations(s, props, {0.0});
        FAIL() << "expected MissingSectorError";
    } catch (const MissingSectorError& e) {
        EXPECT_NE(std::string(e.what()).find("3 7"), std::string::npos);
    }
}

TEST(Evolution, RabiPeriodOfReferenceSector) {
    const QuantumModel m = reference_model();
    const IrrepSector s = classify_sector(25, HalfInteger::from_twice(1000), m.k1, m.k2)
                              .with_detuning(m.delta);
    EXPECT_NEAR(s.gamma_param, 0.871, 1e-3);
    EXPECT_NEAR(s.k_eff / m.k1, 54.8, 0.1);
    EXPECT_NEAR(two_pi / *s.omega_R * 1e9, 0.12, 0.012);
}

TEST(Evolution, NormAndEnergyConserved) {
    const QuantumModel m = reference_model();
    const QuantumState s = reference_state(m);
    const auto times = uniform_times(0.0, 2e-9, 97);
    const auto props = make_propagators(s, m, Propagation::exact);
    std::vector<std::vector<double>> acc(1, std::vector<double>(times.size(), 0.0));
    for (const auto& [M, psi] : s.sectors) {
        const int d = static_cast<int>(psi.size());
        detail::accumulate_sector(props.at(M), psi, {CMatrix::Identity(d, d)}, times, acc);
    }
    for (double v : acc[0]) EXPECT_NEAR(v, 1.0, 1e-12);
    const auto e = energy_expectation(s, m, props, times);
    for (double v : e) EXPECT_NEAR(v, e.front(), 1e-9 * std::abs(e.front()));
}

TEST(Evolution, VarianceBounds) {
    const QuantumModel m = reference_model();
    const QuantumState s = reference_state(m);
    const auto times = uniform_times(0.0, 1e-9, 257);
    for (Propagation how : {Propagation::exact, Propagation::order1, Propagation::order2}) {
        const TimeSeries ts = evolve_expectations(s, m, times, how);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            EXPECT_GE(ts.n_mean[i], 0.0);
            EXPECT_GE(ts.n2_mean[i], ts.n_mean[i] * ts.n_mean[i] * (1.0 - 1e-9));
            ASSERT_TRUE(ts.q[i].has_value());
            EXPECT_GE(*ts.q[i], -1.0 - 1e-9);
        }
    }
}

TEST(Evolution, DressedOrdersConvergeAsNonlinearityVanishes) {
    // Shrinking k2 and alpha together pulls the order-2 evolution onto the
    // order-0 evolution over the first three Rabi periods.
    double previous = 1e300;
    for (double scale : {1.0, 4.0, 16.0}) {
        QuantumModel m = reference_model();
        m.n_atoms = 1000.0 * scale;
        m.k2 = -3.01e-9 * kOmega / scale;
        m.delta = 2.4e-8 * kOmega * std::sqrt(scale);
        const QuantumState s = initial_state(25.0, m.n_atoms, std::nullopt, m.k1, m.k2);
        const IrrepSector sec =
            classify_sector(25, s.r, m.k1, m.k2).with_detuning(m.delta);
        const double tr = two_pi / *sec.omega_R;
        const auto times = uniform_times(0.0, 3.0 * tr, 241);
        const TimeSeries a = evolve_expectations(s, m, times, Propagation::order0);
        const TimeSeries b = evolve_expectations(s, m, times, Propagation::order2);
        const double gap = max_abs_diff(a.n_mean, b.n_mean) / 25.0;
        EXPECT_LT(gap, previous);
        previous = gap;
    }
    EXPECT_LT(previous, 0.02);
}

TEST(Evolution, MatchesBruteForceFourAtoms) {
    bf::Model model{4, 12, 3.0, 0.31, 1.0, -0.02};
    QuantumModel m{model.omega_p, model.delta, model.k1, model.k2, 4.0};
    const QuantumState s = initial_state(2.0, 4.0, 8, m.k1, m.k2);

    CVector psi0 = CVector::Zero(bf::full_dim(model));
    for (const auto& [M, v] : s.sectors) psi0(bf::index_of(model, M, 0)) = v(0);

    const IrrepSector sec = classify_sector(2, s.r, m.k1, m.k2).with_detuning(m.delta);
    const auto times = uniform_times(0.0, 10.0 * two_pi / *sec.omega_R, 400);
    const bf::Moments ref = bf::evolve(model, psi0, times);
    const TimeSeries ts = evolve_expectations(s, m, times, Propagation::exact);
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_NEAR(ts.n_mean[i], ref.n[i], 1e-8);
        const double qref = (ref.n2[i] - ref.n[i] * ref.n[i]) / ref.n[i] - 1.0;
        EXPECT_NEAR(*ts.q[i], qref, 1e-8);
    }
}

TEST(DirectSum, EnvelopeAtStart) {
    DirectSumParams p;
    p.k1 = 3e-7 * kOmega;
    p.k2 = -3e-9 * kOmega;
    p.delta = 2.4e-8 * kOmega;
    const DirectSum d = direct_sum(p, {0.0});
    double expected = 0.0;
    for (int n = 0; n <= p.n_max; ++n) {
        const double k = k_n(n, p.r, p.k1, p.k2);
        expected += poisson_weight(p.n0, n) * n * k * k / (2.0 * (k * k + p.delta * p.delta));
    }
    EXPECT_NEAR(d.envelope[0], expected, 1e-12 * expected);
    EXPECT_NEAR(d.n_mean[0], 25.0, 1e-6);
}

TEST(DirectSum, FeaturesOfSyntheticEnvelope) {
    std::vector<double> t, env;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(i * 0.01);
        const double x = i * 0.01;
        env.push_back(std::exp(-x) + std::exp(-(x - 7.0) * (x - 7.0)));
    }
    const EnvelopeFeatures f = envelope_features(t, env);
    ASSERT_TRUE(f.collapse && f.revival_onset && f.revival_peak);
    EXPECT_NEAR(*f.collapse, 1.0, 0.02);
    EXPECT_NEAR(*f.revival_peak, 7.0, 0.02);
    EXPECT_LT(*f.revival_onset, 7.0);
}

TEST(Timescales, TableRowA) {
    const double w = kOmega;
    const Timescales ts = timescales(25.0, 500.0, -500.0, 3e-7 * w, -3e-9 * w, 2.4e-8 * w);
    EXPECT_NEAR(ts.t_rabi * 1e9 / 0.12, 1.0, 0.05);
    EXPECT_NEAR(ts.t_col_small_k2 * 1e9 / 41.1, 1.0, 0.05);
    ASSERT_TRUE(ts.t_col_large_k2 && ts.t_revival);
    EXPECT_NEAR(*ts.t_col_large_k2 * 1e9 / 2.1, 1.0, 0.05);
    EXPECT_NEAR(*ts.t_revival * 1e9 / 19.9, 1.0, 0.05);
    EXPECT_TRUE(ts.large_k2_applicable);
    EXPECT_EQ(ts.t_collapse(), *ts.t_col_large_k2);
}

TEST(Timescales, TableRowC) {
    const double w = kOmega;
    const Timescales ts = timescales(25.0, 500.0, -500.0, 3e-6 * w, -3e-10 * w, 2.4e-8 * w);
    EXPECT_NEAR(ts.t_rabi * 1e9 / 0.01, 1.0, 0.05);
    EXPECT_NEAR(ts.t_col_small_k2 * 1e9 / 4.1, 1.0, 0.05);
    EXPECT_NEAR(*ts.t_revival * 1e9 / 34.0, 1.0, 0.05);
}

TEST(Timescales, SmallNonlinearityCollapseFormula) {
    const double k1 = 0.7, D = 0.05, n0 = 9.0, r = 20.0, m0 = -20.0;
    const Timescales ts = timescales(n0, r, m0, k1, 0.0, D);
    const double expected =
        std::sqrt((4.0 * (3.0 * r - m0 + 1.0) * k1 * k1 + D * D) / (std::pow(k1, 4) * std::sqrt(n0)));
    EXPECT_DOUBLE_EQ(ts.t_col_small_k2, expected);
    EXPECT_FALSE(ts.t_col_large_k2.has_value());
    EXPECT_FALSE(ts.large_k2_applicable);
}

TEST(Timescales, DegenerateRevival) {
    // Pick k2 so that k_{n0} and k_{n0+1} coincide.
    const double k1 = 1.0, r = 10.0, n0 = 4.0;
    const double a = std::sqrt(2.0 * (4.0 * r - n0 + 1.0));
    const double b = std::sqrt(2.0 * (4.0 * r - n0));
    const double k2 = k1 * (a - b) / ((n0 + 2.0) / 2.0 * b - (n0 + 1.0) / 2.0 * a);
    const Timescales ts = timescales(n0, r, -r, k1, k2, 0.0);
    if (ts.t_revival) {
        EXPECT_GT(*ts.t_revival, 1e8 * ts.t_rabi);
    }
}

TEST(Timescales, CorrectionsAreOptional) {
    const double w = kOmega;
    const Timescales plain = timescales(25.0, 500.0, -500.0, 3e-7 * w, -3e-9 * w, 2.4e-8 * w);
    EXPECT_FALSE(plain.t_col_small_k2_corrected.has_value());
    EXPECT_FALSE(plain.t_col_large_k2_corrected.has_value());
    const Timescales corr =
        timescales(25.0, 500.0, -500.0, 3e-7 * w, -3e-9 * w, 2.4e-8 * w, true);
    // The correction drives the radicand negative for this row.
    EXPECT_FALSE(corr.t_col_small_k2_corrected.has_value());
    for (const Timescales* t : {&plain, &corr}) {
        EXPECT_GT(t->t_rabi, 0.0);
        EXPECT_TRUE(std::isfinite(t->t_col_small_k2));
    }
}
