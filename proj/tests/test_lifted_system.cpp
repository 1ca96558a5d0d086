#include "support.hpp"

#include "chatterlift/errors.hpp"
#include "chatterlift/lifted_system.hpp"
#include "chatterlift/scenario.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace chatterlift;
using namespace testsupport;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DiscreteModel random_discrete(Rng& rng, int axes, int modes, int steps, Hold hold) {
    const StateSpaceModel m = to_angle_domain(random_structure(rng, axes, modes), uniform(rng, 2000.0, 25000.0));
    return discretize(m, 2 * std::numbers::pi / uniform_int(rng, 1, 4) / steps, hold);
}

// Random S_k and r_k of realistic magnitude; roughly a third of the slots idle.
PeriodicCoefficients random_coefficients(Rng& rng, int steps) {
    PeriodicCoefficients p;
    p.steps = steps;
    p.step_angle = 0.1;
    for (int k = 0; k < steps; ++k) {
        const bool idle = uniform(rng, 0.0, 1.0) < 0.3;
        p.edge_terms.push_back(idle ? Eigen::Vector2d::Zero() : Eigen::Vector2d(random_vector(rng, 2, 3e4)));
        p.directional_terms.push_back(idle ? Eigen::Matrix2d::Zero()
                                           : Eigen::Matrix2d(random_matrix(rng, 2, 2, 8e8)));
    }
    return p;
}

MatrixXd dense_block_diag(const LiftedForce& f) {
    const Index r = f.axes;
    MatrixXd s = MatrixXd::Zero(r * f.steps, r * f.steps);
    for (int k = 0; k < f.steps; ++k) s.block(k * r, k * r, r, r) = f.blocks[static_cast<std::size_t>(k)];
    return s;
}

// Closed loop written out with explicit dense inverses, state [p_K; dz_{K-1}].
ClosedLoopSystem dense_closed_loop(const LiftedModel& lm, const LiftedForce& lf, double a) {
    const Index ns = lm.state_dim();
    const Index no = lm.D_L.rows();
    const MatrixXd s = dense_block_diag(lf);
    const MatrixXd i = MatrixXd::Identity(no, no);
    const MatrixXd m_inv = (i + a * s * lm.D_L).inverse();
    const MatrixXd n_inv = (i + a * lm.D_L * s).inverse();
    const VectorXd rt = lf.r_bar - s * lf.s_bar;
    ClosedLoopSystem out;
    out.Phi = MatrixXd::Zero(ns + no, ns + no);
    out.Phi.topLeftCorner(ns, ns) = lm.A_L - a * lm.B_L * m_inv * s * lm.C_L;
    out.Phi.topRightCorner(ns, no) = a * lm.B_L * m_inv * s;
    out.Phi.bottomLeftCorner(no, ns) = n_inv * lm.C_L;
    out.Phi.bottomRightCorner(no, no) = a * n_inv * lm.D_L * s;
    out.sigma.resize(ns + no);
    out.sigma.head(ns) = a * lm.B_L * m_inv * rt;
    out.sigma.tail(no) = a * n_inv * lm.D_L * rt;
    return out;
}

double block_error(const MatrixXd& est, const MatrixXd& ref, Index ns) {
    const Index no = ref.rows() - ns;
    double worst = 0.0;
    auto cmp = [&](Index r0, Index rows, Index c0, Index cols) {
        if (rows == 0 || cols == 0) return;
        worst = std::max(worst, relative_max_error(est.block(r0, c0, rows, cols), ref.block(r0, c0, rows, cols)));
    };
    cmp(0, ns, 0, ns);
    cmp(0, ns, ns, no);
    cmp(ns, no, 0, ns);
    cmp(ns, no, ns, no);
    return worst;
}

}  // namespace

TEST(LiftStructure, SingleStepDegenerates) {
    Rng rng(31);
    for (Hold hold : {Hold::Imp, Hold::Zoh}) {
        const DiscreteModel d = random_discrete(rng, 2, 2, 10, hold);
        const LiftedModel l = lift_structure(d, 1);
        EXPECT_EQ(l.A_L, d.A_d);
        EXPECT_EQ(l.B_L, d.B_d);
        EXPECT_EQ(l.C_L, d.C_d);
        EXPECT_EQ(l.D_L, d.D_d);
    }
}

TEST(LiftStructure, TwoStepBlocks) {
    Rng rng(32);
    const DiscreteModel d = random_discrete(rng, 2, 2, 10, Hold::Zoh);
    const LiftedModel l = lift_structure(d, 2);
    MatrixXd b(8, 4);
    b << d.A_d * d.B_d, d.B_d;
    MatrixXd dl = MatrixXd::Zero(4, 4);
    dl.topLeftCorner(2, 2) = d.D_d;
    dl.bottomLeftCorner(2, 2) = d.C_d * d.B_d;
    dl.bottomRightCorner(2, 2) = d.D_d;
    EXPECT_LT(relative_max_error(l.B_L, b), 1e-15);
    EXPECT_LT(relative_max_error(l.D_L, dl), 1e-15);
    EXPECT_LT(relative_max_error(l.A_L, d.A_d * d.A_d), 1e-15);
}

TEST(LiftStructure, ImpulseHoldIsStrictlyLowerTriangular) {
    Rng rng(33);
    const DiscreteModel d = random_discrete(rng, 2, 2, 12, Hold::Imp);
    const LiftedModel l = lift_structure(d, 12);
    for (int k = 0; k < 12; ++k) EXPECT_TRUE(l.D_L.block(2 * k, 2 * k, 2, 2 * (12 - k)).isZero(0.0));
}

// One lifted step against m iterations of the per-sample model.
TEST(LiftStructure, EquivalentToIteratedSteps) {
    Rng rng(34);
    for (int t = 0; t < 100; ++t) {
        const int axes = uniform_int(rng, 1, 2);
        const int m = t < 50 ? 16 : uniform_int(rng, 1, 40);
        const Hold hold = t % 2 ? Hold::Zoh : Hold::Imp;
        const DiscreteModel d = random_discrete(rng, axes, uniform_int(rng, 1, 3), m, hold);
        const LiftedModel l = lift_structure(d, m);
        VectorXd p = random_vector(rng, d.state_dim(), 1e-5);
        const VectorXd f = random_vector(rng, axes * m, 100.0);

        const VectorXd p_lift = l.A_L * p + l.B_L * f;
        const VectorXd z_lift = l.C_L * p + l.D_L * f;
        VectorXd z(axes * m);
        for (int k = 0; k < m; ++k) {
            const VectorXd fk = f.segment(k * axes, axes);
            z.segment(k * axes, axes) = d.C_d * p + d.D_d * fk;
            p = d.A_d * p + d.B_d * fk;
        }
        EXPECT_LT(relative_max_error(p_lift, p), 1e-10) << "trial " << t;
        EXPECT_LT(relative_max_error(z_lift, z), 1e-10) << "trial " << t;
    }
}

TEST(LiftForce, StackingAndSingleStep) {
    Rng rng(35);
    const PeriodicCoefficients p1 = random_coefficients(rng, 1);
    const Eigen::Vector2d feed(2e-4, 1e-5);
    const LiftedForce f1 = lift_force(p1, feed);
    EXPECT_EQ(f1.r_bar, VectorXd(p1.edge_terms[0]));
    EXPECT_EQ(f1.S_bar, MatrixXd(p1.directional_terms[0]));

    PeriodicCoefficients zero = p1;
    zero.directional_terms[0].setZero();
    const LiftedForce fz = lift_force(zero, feed);
    const VectorXd v = random_vector(rng, 2, 1e-4);
    EXPECT_EQ(evaluate_lifted_force(fz, 1e-3, v, random_vector(rng, 2, 1e-4)), VectorXd(1e-3 * fz.r_bar));
}

TEST(LiftForce, MatchesPerSampleForceLaw) {
    Rng rng(36);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 1, 30);
        const int axes = uniform_int(rng, 1, 2);
        const PeriodicCoefficients p = random_coefficients(rng, m);
        const Eigen::Vector2d feed(uniform(rng, 0, 3e-4), uniform(rng, -1e-4, 1e-4));
        const LiftedForce lf = lift_force(p, feed, axes);
        const double ap = uniform(rng, 0, 5e-3);
        const VectorXd z = random_vector(rng, axes * m, 1e-5);
        const VectorXd z_old = random_vector(rng, axes * m, 1e-5);
        const VectorXd f = evaluate_lifted_force(lf, ap, z, z_old);
        for (int k = 0; k < m; ++k) {
            const MatrixXd s = p.directional(k).topLeftCorner(axes, axes);
            const VectorXd r = p.edge(k).head(axes);
            const VectorXd v = feed.head(axes) + z.segment(k * axes, axes) - z_old.segment(k * axes, axes);
            const VectorXd ref = ap * (r - s * v);
            const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
            EXPECT_LT((f.segment(k * axes, axes) - ref).cwiseAbs().maxCoeff() / scale, 1e-12);
        }
        EXPECT_EQ(lf.S_bar.rows(), axes * m);
        EXPECT_TRUE(lf.S_bar.isApprox(dense_block_diag(lf)));
    }
}

TEST(LiftForce, BlockDiagonalProductsMatchDense) {
    Rng rng(37);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 1, 20);
        const LiftedForce lf = lift_force(random_coefficients(rng, m), Eigen::Vector2d(1e-4, 0));
        const MatrixXd x = random_matrix(rng, 2 * m, uniform_int(rng, 1, 9));
        const MatrixXd y = random_matrix(rng, uniform_int(rng, 1, 9), 2 * m);
        const MatrixXd s = dense_block_diag(lf);
        EXPECT_LT(relative_max_error(block_diagonal_left_multiply(lf, x), s * x), 1e-14);
        EXPECT_LT(relative_max_error(block_diagonal_right_multiply(y, lf), y * s), 1e-14);
    }
}

TEST(ClosedLoop, ZeroDepthDecouples) {
    const MillingScenario s = reference_scenario();
    for (Hold hold : {Hold::Imp, Hold::Zoh}) {
        const LiftedProblem p = build_lifted_problem(s, 12500.0, Discretization{20, hold});
        const ClosedLoopSystem c = assemble_closed_loop(p.structure, p.force, 0.0);
        const Index ns = 8, no = 40;
        EXPECT_EQ(c.Phi.topLeftCorner(ns, ns), p.structure.A_L);
        EXPECT_TRUE(c.Phi.topRightCorner(ns, no).isZero(0.0));
        EXPECT_EQ(c.Phi.bottomLeftCorner(no, ns), p.structure.C_L);
        EXPECT_TRUE(c.Phi.bottomRightCorner(no, no).isZero(0.0));
        EXPECT_TRUE(c.sigma.isZero(0.0));
    }
}

TEST(ClosedLoop, DimensionLaw) {
    Rng rng(38);
    for (int r : {1, 2})
        for (int n : {1, 2, 3})
            for (int m : {1, 10, 20, 40}) {
                MillingScenario s = reference_scenario();
                s.axes.clear();
                for (int a = 0; a < r; ++a) s.axes.push_back(random_axis(rng, n));
                const LiftedProblem p = build_lifted_problem(s, 9000.0, Discretization{m, Hold::Imp});
                const ClosedLoopSystem c = assemble_closed_loop(p.structure, p.force, 1e-3);
                EXPECT_EQ(c.Phi.rows(), r * (2 * n + m));
                EXPECT_EQ(c.Phi.cols(), r * (2 * n + m));
                EXPECT_EQ(c.sigma.size(), r * (2 * n + m));
                EXPECT_EQ(c.structural_dim, 2 * n * r);
                EXPECT_EQ(c.output_dim, r * m);
            }
    const LiftedProblem p = build_lifted_problem(reference_scenario(), 9000.0, Discretization{20, Hold::Imp});
    EXPECT_EQ(assemble_closed_loop(p.structure, p.force, 1e-3).Phi.rows(), 48);
}

TEST(ClosedLoop, MatchesDenseAssembly) {
    Rng rng(39);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 1, 24);
        const int axes = uniform_int(rng, 1, 2);
        const Hold hold = t % 2 ? Hold::Zoh : Hold::Imp;
        const LiftedModel lm = lift_structure(random_discrete(rng, axes, uniform_int(rng, 1, 2), m, hold), m);
        const LiftedForce lf = lift_force(random_coefficients(rng, m), Eigen::Vector2d(2e-4, 3e-5), axes);
        const double ap = uniform(rng, 0.0, 3e-3);
        const ClosedLoopSystem got = assemble_closed_loop(lm, lf, ap);
        const ClosedLoopSystem ref = dense_closed_loop(lm, lf, ap);
        EXPECT_LT(block_error(got.Phi, ref.Phi, lm.state_dim()), 1e-10) << "trial " << t;
        const Index ns = lm.state_dim();
        if (ref.sigma.head(ns).cwiseAbs().maxCoeff() > 0)
            EXPECT_LT(relative_max_error(got.sigma.head(ns), ref.sigma.head(ns)), 1e-10);
        if (ref.sigma.tail(ref.sigma.size() - ns).cwiseAbs().maxCoeff() > 0)
            EXPECT_LT(relative_max_error(got.sigma.tail(ref.sigma.size() - ns), ref.sigma.tail(ref.sigma.size() - ns)), 1e-10);
    }
}

TEST(ClosedLoop, PushThroughIdentity) {
    Rng rng(40);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 1, 24);
        const Hold hold = t % 2 ? Hold::Zoh : Hold::Imp;
        const LiftedModel lm = lift_structure(random_discrete(rng, 2, 2, m, hold), m);
        const LiftedForce lf = lift_force(random_coefficients(rng, m), Eigen::Vector2d(2e-4, 0));
        const double a = uniform(rng, 0.0, 3e-3);
        const MatrixXd s = dense_block_diag(lf);
        const MatrixXd i = MatrixXd::Identity(2 * m, 2 * m);
        const MatrixXd left = lm.B_L * (i + a * s * lm.D_L).partialPivLu().solve(s);
        const MatrixXd right = lm.B_L * s * (i + a * lm.D_L * s).inverse();
        if (left.cwiseAbs().maxCoeff() == 0.0) continue;
        EXPECT_LT(relative_max_error(left, right), 1e-12) << "trial " << t;
        const ClosedLoopSystem c = assemble_closed_loop(lm, lf, a);
        EXPECT_LT(relative_max_error(c.Phi.topRightCorner(8, 2 * m), a * left), 1e-12) << "trial " << t;
    }
}

TEST(ClosedLoop, ImpulseHoldNeumannSeriesIsExact) {
    Rng rng(41);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 1, 8);
        const LiftedModel lm = lift_structure(random_discrete(rng, 2, 2, m, Hold::Imp), m);
        const LiftedForce lf = lift_force(random_coefficients(rng, m), Eigen::Vector2d(2e-4, 0));
        const double a = uniform(rng, 0.0, 3e-3);
        const MatrixXd s = dense_block_diag(lf);
        const MatrixXd x = -a * s * lm.D_L;
        MatrixXd inv = MatrixXd::Identity(2 * m, 2 * m), term = inv;
        for (int k = 1; k < m; ++k) {
            term = term * x;
            inv += term;
        }
        EXPECT_TRUE((term * x).isZero(0.0));  // nilpotent of index <= m
        const MatrixXd top_right = a * lm.B_L * inv * s;
        const ClosedLoopSystem c = assemble_closed_loop(lm, lf, a);
        if (top_right.cwiseAbs().maxCoeff() > 0)
            EXPECT_LT(relative_max_error(c.Phi.topRightCorner(8, 2 * m), top_right), 1e-12);
        const VectorXd sig = a * lm.B_L * inv * (lf.r_bar - s * lf.s_bar);
        if (sig.cwiseAbs().maxCoeff() > 0)
            EXPECT_LT(relative_max_error(c.sigma.head(8), sig), 1e-12);
    }
}

// Ten periods of the closed loop against a sample-by-sample feedback simulation.
TEST(ClosedLoop, MatchesAlternatingSimulation) {
    Rng rng(42);
    for (int t = 0; t < 100; ++t) {
        const int m = uniform_int(rng, 2, 20);
        const int axes = 2;
        const Hold hold = t % 2 ? Hold::Zoh : Hold::Imp;
        const DiscreteModel d = random_discrete(rng, axes, 2, m, hold);
        const LiftedModel lm = lift_structure(d, m);
        const PeriodicCoefficients pc = random_coefficients(rng, m);
        const Eigen::Vector2d feed(2e-4, 0);
        const LiftedForce lf = lift_force(pc, feed, axes);
        const double a = uniform(rng, 0.0, 1e-3);
        const ClosedLoopSystem c = assemble_closed_loop(lm, lf, a);

        VectorXd p = random_vector(rng, 8, 1e-6);
        VectorXd z_prev = random_vector(rng, axes * m, 1e-6);
        VectorXd xi(8 + axes * m);
        xi << p, z_prev;
        for (int period = 0; period < 10; ++period) {
            VectorXd z(axes * m);
            for (int k = 0; k < m; ++k) {
                const Eigen::Matrix2d s = pc.directional(k);
                const Eigen::Vector2d rk = pc.edge(k);
                const Eigen::Vector2d zp = z_prev.segment(2 * k, 2);
                // z_k = C p + D f_k with f_k = a (r - S (feed + z_k - zp))
                const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() + a * d.D_d * s;
                const Eigen::Vector2d rhs = d.C_d * p + a * d.D_d * (rk - s * (feed - zp));
                const Eigen::Vector2d zk = lhs.partialPivLu().solve(rhs);
                const Eigen::Vector2d fk = a * (rk - s * (feed + zk - zp));
                z.segment(2 * k, 2) = zk;
                p = d.A_d * p + d.B_d * fk;
            }
            z_prev = z;
            xi = c.Phi * xi + c.sigma;
        }
        VectorXd ref(8 + axes * m);
        ref << p, z_prev;
        EXPECT_LT(relative_max_error(xi.head(8), ref.head(8)), 1e-9) << "trial " << t;
        EXPECT_LT(relative_max_error(xi.tail(2 * m), ref.tail(2 * m)), 1e-9) << "trial " << t;
    }
}

TEST(ClosedLoop, SingularPerturbedIdentityReported) {
    // one ZOH step, one axis: 1 + a S D = 0 when S = -1 / (a D)
    StateSpaceModel m;
    m.A = MatrixXd(2, 2);
    m.A << 0.0, 1.0, -1.0, -0.2;
    m.B = MatrixXd(2, 1);
    m.B << 0.0, 1.0;
    m.C = MatrixXd(1, 2);
    m.C << 1.0, 0.0;
    m.domain = Domain::Angle;
    m.mode_labels = {"x1"};
    const DiscreteModel d = discretize(m, 0.5, Hold::Zoh);
    const LiftedModel lm = lift_structure(d, 1);
    const double a = 1e-3;
    PeriodicCoefficients pc;
    pc.steps = 1;
    pc.step_angle = 0.5;
    pc.edge_terms = {Eigen::Vector2d(1.0, 0.0)};
    pc.directional_terms = {Eigen::Matrix2d::Zero()};
    pc.directional_terms[0](0, 0) = -1.0 / (a * d.D_d(0, 0));
    const LiftedForce lf = lift_force(pc, Eigen::Vector2d(1e-4, 0), 1);
    try {
        assemble_closed_loop(lm, lf, a);
        FAIL() << "expected ConditioningError";
    } catch (const ConditioningError& e) {
        EXPECT_DOUBLE_EQ(e.axial_depth(), a);
        EXPECT_LT(e.reciprocal_condition(), 1e-13);
    }
}

TEST(ClosedLoop, RejectsNegativeDepthAndMismatch) {
    const LiftedProblem p = build_lifted_problem(reference_scenario(), 9000.0, Discretization{10, Hold::Imp});
    EXPECT_THROW(assemble_closed_loop(p.structure, p.force, -1e-3), DomainError);
    const LiftedProblem q = build_lifted_problem(reference_scenario(), 9000.0, Discretization{12, Hold::Imp});
    EXPECT_THROW(assemble_closed_loop(p.structure, q.force, 1e-3), DomainError);
}
