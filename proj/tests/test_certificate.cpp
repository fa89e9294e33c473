#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "wdrc/certificate.hpp"
#include "wdrc/rng.hpp"

using namespace wdrc;
using namespace wdrc::certificate;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE_BEGIN("certificate");

TEST_CASE("theoretical bound") {
    model::BoxSupport box(VectorXd::Constant(1, -0.2), VectorXd::Constant(1, 0.2));
    model::AffineGrowthModel growth(VectorXd::Zero(1), 0.0, 1);

    SUBCASE("affine utility is exact: zero bound") {
        CHECK(theoretical_bound(growth, model::Utility::affine(2.0, 0.1),
                                VectorXd::Constant(1, 0.7), box) == 0.0);
        CHECK(theoretical_bound_apriori(growth, model::Utility::affine(1.0, 0.0),
                                        model::ControlSet::long_only(1, 1.0, 0.5), box) == 0.0);
    }
    SUBCASE("a-priori log bound: |u|inf = 1, eta = 0.5, D = 0.4 gives 0.32") {
        const double B = theoretical_bound_apriori(growth, model::Utility::log(),
                                                   model::ControlSet::long_only(1, 1.0, 0.5), box);
        CHECK(B == doctest::Approx(0.32).epsilon(1e-12));
    }
    SUBCASE("zero control") {
        CHECK(theoretical_bound(growth, model::Utility::log(), VectorXd::Zero(1), box) == 0.0);
    }
    SUBCASE("non-viable control throws in a-posteriori mode") {
        model::BoxSupport wide(VectorXd::Constant(1, -1.5), VectorXd::Constant(1, 0.2));
        CHECK_THROWS(theoretical_bound(growth, model::Utility::log(), VectorXd::Constant(1, 1.0),
                                       wide));
    }
}

TEST_CASE("primal value") {
    auto make_problem = [](model::Utility util) {
        dro::RelaxationProblem pb;
        MatrixXd samples(1, 1);
        samples << 0.0;
        pb.empirical = transport::EmpiricalDistribution(samples);
        pb.support = model::BoxSupport(VectorXd::Constant(1, -0.1), VectorXd::Constant(1, 0.1));
        pb.growth = model::AffineGrowthModel(VectorXd::Zero(1), 0.0, 1);
        pb.utility = util;
        pb.control = model::ControlSet::long_only(1, 1.0, 0.5);
        pb.epsilon = 0.0;
        return pb;
    };

    SUBCASE("lambda = 0: penalty vanishes, min over vertices") {
        auto pb = make_problem(model::Utility::log());
        const VectorXd u = VectorXd::Constant(1, 0.5);
        const double expected = std::log(1.0 + 0.5 * -0.1);
        CHECK(primal_value(u, 0.0, 0, pb) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("affine, penalty dominating (lambda > |u|): minimum at the sample") {
        // min over x of (x + 1) + 2|x| is 1.0 at x = 0.
        auto pb = make_problem(model::Utility::affine(1.0, 0.0));
        CHECK(primal_value(VectorXd::Constant(1, 1.0), 2.0, 0, pb) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("affine, slope dominating (lambda < |u|): minimum at lo") {
        // min over x of (x + 1) + 0.5|x| is 0.95 at x = -0.1.
        auto pb = make_problem(model::Utility::affine(1.0, 0.0));
        CHECK(primal_value(VectorXd::Constant(1, 1.0), 0.5, 0, pb) ==
              doctest::Approx(0.95).epsilon(1e-12));
    }
}

TEST_CASE("affine primal agrees with exhaustive grid search") {
    auto eng = wdrc::rng::engine(909);
    for (int trial = 0; trial < 10; ++trial) {
        auto pb = fixtures::random_problem(300 + trial, 2, 4, 0.01, /*affine=*/true);
        VectorXd u(2);
        u << 0.3 * wdrc::rng::uniform01(eng), 0.4 * wdrc::rng::uniform01(eng);
        const double lambda = wdrc::rng::uniform01(eng);
        const int j = trial % pb.sample_count();
        const double fast = primal_value(u, lambda, j, pb);

        const int G = 100;  // 100x100 grid = 1e4 points
        double brute = 1e300;
        const VectorXd xhat = pb.empirical.samples.row(j).transpose();
        for (int a = 0; a <= G; ++a)
            for (int b = 0; b <= G; ++b) {
                VectorXd x(2);
                x[0] = pb.support.lo[0] + (pb.support.hi[0] - pb.support.lo[0]) * a / G;
                x[1] = pb.support.lo[1] + (pb.support.hi[1] - pb.support.lo[1]) * b / G;
                const double val = pb.utility(model::growth_factor(pb.growth, u, x)) +
                                   lambda * (x - xhat).cwiseAbs().sum();
                brute = std::min(brute, val);
            }
        // The exact per-coordinate minimum can only undercut any grid value.
        CHECK(fast <= brute + 1e-12);
        CHECK(fast >= brute - 1e-3);  // grid resolution slack
    }
}

TEST_CASE("bound does not depend on epsilon or p") {
    auto pb = fixtures::random_problem(404, 2, 6, 0.0);
    const VectorXd u = VectorXd::Constant(2, 0.2);
    const double ref = theoretical_bound(pb.growth, pb.utility, u, pb.support);
    for (double eps : {0.0, 0.01, 0.1})
        for (double p : {1.0, 2.0}) {
            auto pb2 = pb;
            pb2.epsilon = eps;
            pb2.p = p;
            CHECK(theoretical_bound(pb2.growth, pb2.utility, u, pb2.support) == ref);
        }
}

TEST_CASE("empirical gap reports") {
    SUBCASE("affine instance: exact, zero bound, satisfied, zero utilization") {
        auto pb = fixtures::random_problem(21, 2, 8, 0.02, /*affine=*/true);
        auto sol = dro::cutting_plane(pb);
        REQUIRE(sol.status == dro::SolveStatus::optimal);
        auto report = empirical_gap(sol, pb);
        CHECK(report.bound == 0.0);
        CHECK(report.delta_max <= 1e-6);
        CHECK(report.satisfied);
        CHECK(report.utilization == 0.0);
    }
    SUBCASE("kelly log instance: satisfied") {
        auto pb = fixtures::kelly_problem();
        auto sol = dro::cutting_plane(pb);
        auto report = empirical_gap(sol, pb);
        CHECK(report.satisfied);
        CHECK(report.delta_max <= report.bound + kGapTolerance);
    }
    SUBCASE("u* = 0 solution: zero gaps and zero bound") {
        auto pb = fixtures::kelly_problem();
        dro::RelaxationSolution sol;
        sol.u_star = VectorXd::Zero(1);
        sol.lambda_star = 0.0;
        sol.z = MatrixXd::Zero(2, 1);
        sol.s = VectorXd::Zero(2);
        sol.status = dro::SolveStatus::optimal;
        auto report = empirical_gap(sol, pb);
        CHECK(report.bound == 0.0);
        CHECK(report.delta_max <= 1e-12);
        CHECK(report.delta.minCoeff() >= -1e-12);
        CHECK(report.utilization == 0.0);
        CHECK(report.satisfied);
    }
    SUBCASE("log instances: gaps nonnegative and within the bound") {
        for (std::uint64_t seed = 500; seed < 510; ++seed) {
            auto pb = fixtures::random_problem(seed, 2, 10, 0.015);
            auto sol = dro::cutting_plane(pb);
            REQUIRE(sol.status == dro::SolveStatus::optimal);
            auto report = empirical_gap(sol, pb);
            CHECK(report.delta.minCoeff() >= -1e-8);
            CHECK(report.delta_max <= report.bound + 1e-6);
            CHECK(report.satisfied);
        }
    }
}

TEST_SUITE_END();
