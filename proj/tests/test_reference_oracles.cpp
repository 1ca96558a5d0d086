#include "support.hpp"

#include "chatterlift/errors.hpp"
#include "chatterlift/reference_oracles.hpp"
#include "chatterlift/scenario.hpp"
#include "chatterlift/stability.hpp"
#include "chatterlift/surface_error.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace chatterlift;
using namespace testsupport;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

namespace {

double free_monodromy_radius(const MillingScenario& s) {
    const StateSpaceModel m = to_angle_domain(s.structure(), s.conditions.spindle_speed);
    const MatrixXd period = series_exp(m.A * s.tool.tooth_passing_angle());
    return period.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(BuildDde, ZeroDepthIsFreeStructure) {
    MillingScenario s = reference_scenario();
    s.conditions.axial_depth = 0.0;
    const DDESystem d = build_dde(s);
    Rng rng(71);
    for (int t = 0; t < 100; ++t) {
        const double th = uniform(rng, 0, 10);
        EXPECT_TRUE(d.coupling(th).isZero(0.0));
        EXPECT_TRUE(d.forcing(th).isZero(0.0));
    }
    EXPECT_NEAR(d.delay, pi, 1e-15);
}

TEST(BuildDde, PeriodicAndIndependentlyAssembled) {
    Rng rng(72);
    for (int t = 0; t < 100; ++t) {
        MillingScenario s = reference_scenario(uniform_int(rng, 1, 2), uniform(rng, 0.05, 1.0),
                                               t % 2 ? MillingDirection::Up : MillingDirection::Down);
        s.conditions.axial_depth = uniform(rng, 1e-4, 4e-3);
        s.conditions.spindle_speed = uniform(rng, 3000, 23000);
        s.conditions.feed_per_tooth = Eigen::Vector2d(uniform(rng, 0, 3e-4), uniform(rng, -5e-5, 5e-5));
        const DDESystem d = build_dde(s);
        const StateSpaceModel m = to_angle_domain(s.structure(), s.conditions.spindle_speed);
        const double th = uniform(rng, 0, 2 * pi);
        const DirectionalTerms dc = directional_coefficients(th, s.coefficients, s.window(), s.tool.teeth_count);
        const double ap = s.conditions.axial_depth;
        const VectorXd w = ap * m.B * (dc.edge - dc.directional * s.conditions.feed_per_tooth);
        const MatrixXd bp = ap * m.B * dc.directional * m.C;
        EXPECT_LT(relative_max_error(d.forcing(th), w), 1e-12);
        EXPECT_LT(relative_max_error(d.coupling(th), bp), 1e-12);
        // away from engagement switches the coefficients are Θ-periodic
        bool near = false;
        for (int j = 0; j < s.tool.teeth_count; ++j) {
            const double phi = wrap_angle(th + 2 * pi * j / s.tool.teeth_count);
            near |= std::abs(phi - s.window().start_angle) < 1e-9 || std::abs(phi - s.window().exit_angle) < 1e-9;
        }
        if (!near) {
            EXPECT_LT(relative_max_error(d.coupling(th + d.delay), d.coupling(th)), 1e-12);
            EXPECT_LT(relative_max_error(d.forcing(th + d.delay), d.forcing(th)), 1e-12);
        }
        // the forcing term itself is linear in depth
        MillingScenario s2 = s;
        s2.conditions.axial_depth = 2 * ap;
        EXPECT_LT(relative_max_error(build_dde(s2).forcing(th), 2 * d.forcing(th)), 1e-14);
    }
}

TEST(SimulateDde, FreeResponseDecays) {
    MillingScenario s = reference_scenario();
    s.conditions.axial_depth = 0.0;
    SimulationOptions opt;
    opt.periods = 21;
    opt.substeps = 500;
    const DDETrajectory tr = simulate_dde(build_dde(s), opt);
    EXPECT_EQ(tr.periods(), 21);
    EXPECT_LT(tr.period_amplitude(20), tr.period_amplitude(0));
    EXPECT_GT(tr.period_amplitude(0), 0.0);
}

TEST(SimulateDde, RequiresFineSubsteps) {
    SimulationOptions opt;
    opt.substeps = 499;
    EXPECT_THROW(simulate_dde(build_dde(reference_scenario()), opt), DomainError);
}

TEST(SimulateDde, UnstableCellGrows) {
    MillingScenario s = reference_scenario();
    s.conditions.spindle_speed = 9667.0;
    s.conditions.axial_depth = 5e-3;
    ASSERT_GT(assess_stability(s, 9667.0, 5e-3, Discretization{60, Hold::Imp}).spectral_radius, 1.2);
    SimulationOptions opt;
    opt.periods = 20;
    opt.substeps = 500;
    opt.include_forcing = false;
    const DDETrajectory tr = simulate_dde(build_dde(s), opt);
    EXPECT_GT(tr.period_amplitude(19) / tr.period_amplitude(18), 1.0);
    EXPECT_GT(tr.period_amplitude(19), 100 * tr.period_amplitude(1));
}

TEST(SimulateDde, BlowUpReportsPeriod) {
    MillingScenario s = reference_scenario();
    s.conditions.spindle_speed = 9667.0;
    s.conditions.axial_depth = 60e-3;
    SimulationOptions opt;
    opt.periods = 400;
    opt.substeps = 500;
    try {
        simulate_dde(build_dde(s), opt);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.period_index(), 0);
        EXPECT_LT(e.period_index(), 400);
    }
}

TEST(SimulateDde, StablePointMatchesLiftedSteadyState) {
    const MillingScenario s = reference_scenario();
    SimulationOptions opt;
    opt.periods = 50;
    opt.substeps = 1000;
    const DDETrajectory tr = simulate_dde(build_dde(s), opt);
    const int m = 40;
    const auto sim = tr.period_samples(49, m);
    const LiftedProblem p = build_lifted_problem(s, s.conditions.spindle_speed, Discretization{200, Hold::Imp});
    const SteadyStateVibration v = steady_state_vibration(p.structure, p.force, s.conditions.axial_depth);
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < m; ++k) {
        const Eigen::Vector2d ref = v.samples[static_cast<std::size_t>(k * 200 / m)];
        worst = std::max(worst, (sim[static_cast<std::size_t>(k)] - ref).cwiseAbs().maxCoeff());
        scale = std::max(scale, ref.cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst / scale, 0.01);
}

TEST(SimulateDde, TrajectoryCsv) {
    MillingScenario s = reference_scenario();
    SimulationOptions opt;
    opt.periods = 2;
    opt.substeps = 500;
    const DDETrajectory tr = simulate_dde(build_dde(s), opt);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "period_index,theta_rad,x_m,y_m");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, static_cast<int>(tr.theta.size()));
}

TEST(ClassicalSdm, Dimensions) {
    Rng rng(73);
    for (int r : {1, 2})
        for (int n : {1, 2, 3})
            for (int m : {10, 20, 40}) {
                MillingScenario s = reference_scenario();
                s.axes.clear();
                for (int a = 0; a < r; ++a) s.axes.push_back(random_axis(rng, n));
                const ClassicalMonodromy cm = classical_sdm(s, m);
                EXPECT_EQ(cm.Phi_a.rows(), r * 2 * n * (m + 1));
                EXPECT_EQ(cm.Phi_a.cols(), r * 2 * n * (m + 1));
                EXPECT_EQ(cm.sigma_a.size(), r * 2 * n * (m + 1));
            }
    EXPECT_EQ(classical_sdm(reference_scenario(), 20).Phi_a.rows(), 168);
}

TEST(ClassicalSdm, ZeroDepthIsFreeStructure) {
    MillingScenario s = reference_scenario();
    s.conditions.axial_depth = 0.0;
    const ClassicalMonodromy cm = classical_sdm(s, 20);
    const double rho = spectral_radius(cm.Phi_a).radius;
    EXPECT_NEAR(rho, free_monodromy_radius(s), 1e-10);
    EXPECT_LT(rho, 1.0);
    EXPECT_TRUE(cm.sigma_a.isZero(0.0));
    for (const auto& z : classical_steady_state(cm)) EXPECT_TRUE(z.isZero(0.0));
}

TEST(ClassicalSdm, ConvergesTowardLiftedReference) {
    MillingScenario s = reference_scenario(2, 1.0);
    s.conditions.spindle_speed = 4000.0;
    s.conditions.axial_depth = 0.9e-3;
    const double ref = assess_stability(s, 4000.0, 0.9e-3, Discretization{400, Hold::Imp}).spectral_radius;
    double prev_gap = 1e9, prev_ref_gap = 1e9;
    for (int m : {20, 40, 80}) {
        const double sdm = spectral_radius(classical_sdm(s, m).Phi_a).radius;
        const double lifted = assess_stability(s, 4000.0, 0.9e-3, Discretization{m, Hold::Imp}).spectral_radius;
        const double gap = std::abs(sdm - lifted);
        const double ref_gap = std::abs(sdm - ref);
        EXPECT_LT(gap, prev_gap) << "m = " << m;
        EXPECT_LT(ref_gap, prev_ref_gap) << "m = " << m;
        prev_gap = gap;
        prev_ref_gap = ref_gap;
    }
}

TEST(ClassicalSdm, SteadyStateAgreesWithLifted) {
    const MillingScenario s = reference_scenario();
    const int m = 200;
    const auto sdm = classical_steady_state(classical_sdm(s, m));
    const LiftedProblem p = build_lifted_problem(s, s.conditions.spindle_speed, Discretization{m, Hold::Imp});
    const SteadyStateVibration v = steady_state_vibration(p.structure, p.force, s.conditions.axial_depth);
    ASSERT_EQ(static_cast<int>(sdm.size()), m);
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < m; ++k) {
        worst = std::max(worst, (sdm[static_cast<std::size_t>(k)] - v.samples[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
        scale = std::max(scale, v.samples[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst / scale, 0.02);
}

TEST(ClassicalSdm, SingularFixedPointRejected) {
    ClassicalMonodromy cm;
    cm.steps = 1;
    cm.state_dim = 2;
    cm.Phi_a = MatrixXd::Identity(4, 4);
    cm.sigma_a = VectorXd::Ones(4);
    cm.C = MatrixXd::Identity(2, 2);
    EXPECT_THROW(classical_steady_state(cm), SingularityError);
}
