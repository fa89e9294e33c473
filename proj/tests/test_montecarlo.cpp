#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "wdrc/montecarlo.hpp"

using namespace wdrc;
using namespace wdrc::montecarlo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE_BEGIN("montecarlo");

TEST_CASE("u* = 0 gives the deterministic risk-free rate, zero stderr") {
    dro::RelaxationProblem pb = fixtures::kelly_problem();
    pb.growth.riskfree_n = 0.01;
    pb.growth.period = 5;
    // Fixture solution with the all-cash control.
    dro::RelaxationSolution sol;
    sol.u_star = VectorXd::Zero(1);
    sol.lambda_star = 0.0;
    sol.z = MatrixXd::Zero(2, 1);
    sol.s = VectorXd::Constant(2, std::log(1.01));
    sol.value = std::log(1.01) / 5.0;
    sol.status = dro::SolveStatus::optimal;

    auto stream = SyntheticStream::from_empirical(pb.empirical, 7);
    auto report = verify_long_run(pb, sol, stream, 5000);
    CHECK(report.realized_rate == std::log(1.01) / 5.0);  // exact
    CHECK(report.stderr_rate == 0.0);
    CHECK(report.log_wealth_rate == doctest::Approx(std::log(1.01) / 5.0).epsilon(1e-15));
    CHECK(report.pass);
}

TEST_CASE("kelly fixture: realized rate clears the certified floor") {
    auto pb = fixtures::kelly_problem();
    auto sol = dro::cutting_plane(pb);
    REQUIRE(sol.status == dro::SolveStatus::optimal);
    auto stream = SyntheticStream::from_empirical(pb.empirical, 11);
    auto report = verify_long_run(pb, sol, stream, 20000);
    CHECK(report.distance_to_empirical <= 1e-12);
    CHECK(report.pass);
    CHECK(report.realized_rate >= report.j_cvx - 3.0 * report.stderr_rate);
}

TEST_CASE("coverage gate refuses out-of-ball streams") {
    auto pb = fixtures::kelly_problem();  // epsilon = 0
    auto sol = dro::cutting_plane(pb);
    MatrixXd atoms(1, 1);
    atoms << 0.05;  // inside the box but not the empirical
    SyntheticStream stream(atoms, VectorXd::Constant(1, 1.0), 3);
    CHECK_THROWS_AS(verify_long_run(pb, sol, stream, 100), CoverageError);
}

TEST_CASE("doubling the draw count moves the estimate by less than 5 stderr") {
    auto pb = fixtures::kelly_problem();
    auto sol = dro::cutting_plane(pb);
    auto stream = SyntheticStream::from_empirical(pb.empirical, 23);
    auto a = verify_long_run(pb, sol, stream, 20000);
    auto b = verify_long_run(pb, sol, stream, 40000);
    CHECK(std::abs(a.realized_rate - b.realized_rate) <= 5.0 * a.stderr_rate);
}

TEST_CASE("viability harness") {
    model::BoxSupport box(VectorXd::Constant(1, -0.09), VectorXd::Constant(1, 0.10));
    model::AffineGrowthModel growth(VectorXd::Zero(1), 0.0, 1);
    model::ControlSet controls = model::ControlSet::long_only(1, 1.0, 0.9);
    MatrixXd atoms(2, 1);
    atoms << 0.10, -0.09;
    SyntheticStream stream(atoms, VectorXd::Constant(2, 0.5), 31);

    SUBCASE("viable control: zero violations") {
        const VectorXd u = VectorXd::Constant(1, 0.5);
        REQUIRE(model::is_viable(growth, u, box, controls));
        auto report = verify_viability(growth, u, box, controls.eta, stream, 100000);
        CHECK(report.pass);
        CHECK(report.violations == 0);
        CHECK(report.min_growth >= controls.eta);
    }
    SUBCASE("non-viable control caught by the adversarial atom") {
        const VectorXd u = VectorXd::Constant(1, 0.95);  // margin 1 - 0.0855 = 0.9145 < 0.95
        model::ControlSet tight = model::ControlSet::long_only(1, 1.0, 0.95);
        REQUIRE_FALSE(model::is_viable(growth, u, box, tight));
        auto report = verify_viability(growth, u, box, tight.eta, stream, 5000);
        CHECK_FALSE(report.pass);
        CHECK(report.violations > 0);
        CHECK(report.first_violation >= 0);
        CHECK(report.offending_draw[0] == doctest::Approx(-0.09));
    }
    SUBCASE("all-cash control grows at exactly 1 + rf") {
        model::AffineGrowthModel drift(VectorXd::Zero(1), 0.02, 1);
        auto report = verify_viability(drift, VectorXd::Zero(1), box, 0.9, stream, 1000);
        CHECK(report.pass);
        CHECK(report.min_growth == doctest::Approx(1.02));
    }
}

TEST_CASE("draw frequencies track the probabilities") {
    MatrixXd atoms(3, 1);
    atoms << -0.05, 0.0, 0.08;
    VectorXd probs(3);
    probs << 0.2, 0.5, 0.3;
    SyntheticStream stream(atoms, probs, 123);
    const long K = 100000;
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (long k = 0; k < K; ++k) {
        const double x = stream.draw(static_cast<std::uint64_t>(k))[0];
        if (x < -0.01)
            counts[0] += 1;
        else if (x < 0.01)
            counts[1] += 1;
        else
            counts[2] += 1;
    }
    for (int i = 0; i < 3; ++i) {
        const double freq = counts[i] / static_cast<double>(K);
        const double sigma = std::sqrt(probs[i] * (1 - probs[i]) / static_cast<double>(K));
        CHECK(std::abs(freq - probs[i]) <= 5.0 * sigma);
    }
}

TEST_CASE("stream construction guards") {
    MatrixXd atoms(2, 1);
    atoms << 0.1, -0.1;
    VectorXd bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(SyntheticStream(atoms, bad, 0), CoverageError);
    VectorXd ok(2);
    ok << 0.5, 0.5;
    CHECK_NOTHROW(SyntheticStream(atoms, ok, 0));
    // Draws are deterministic functions of (seed, index).
    SyntheticStream s(atoms, ok, 99);
    CHECK(s.draw(5) == s.draw(5));
}

TEST_SUITE_END();
