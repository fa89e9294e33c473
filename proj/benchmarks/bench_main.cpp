#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "wdrc/calibrate.hpp"
#include "wdrc/dro.hpp"
#include "wdrc/model.hpp"
#include "wdrc/rng.hpp"
#include "wdrc/transport.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_cloud(std::uint64_t seed, int n, int d) {
    auto eng = wdrc::rng::engine(seed);
    MatrixXd s(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) s(i, k) = 0.1 * (2.0 * wdrc::rng::uniform01(eng) - 1.0);
    return s;
}

wdrc::dro::RelaxationProblem make_problem(int d, int n_samples, double eps) {
    auto eng = wdrc::rng::engine(7);
    wdrc::dro::RelaxationProblem pb;
    VectorXd half = VectorXd::Constant(d, 0.08);
    pb.support = wdrc::model::BoxSupport(-half, half);
    MatrixXd samples(n_samples, d);
    for (int j = 0; j < n_samples; ++j)
        for (int i = 0; i < d; ++i)
            samples(j, i) = half[i] * (2.0 * wdrc::rng::uniform01(eng) - 1.0);
    pb.empirical = wdrc::transport::EmpiricalDistribution(samples);
    pb.growth = wdrc::model::AffineGrowthModel(VectorXd::Constant(d, 0.001), 0.002, 21);
    pb.utility = wdrc::model::Utility::log();
    pb.control = wdrc::model::ControlSet::long_only(d, 1.0, 0.5);
    pb.epsilon = eps;
    pb.p = 1.0;
    return pb;
}

void BM_Wasserstein(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    wdrc::transport::EmpiricalDistribution A(random_cloud(1, n, 3));
    wdrc::transport::EmpiricalDistribution B(random_cloud(2, n, 3));
    for (auto _ : state)
        benchmark::DoNotOptimize(wdrc::transport::wasserstein_p(A, B, 1.0).distance);
}
BENCHMARK(BM_Wasserstein)->Arg(32)->Arg(64)->Arg(128)->Arg(232);

void BM_CuttingPlane(benchmark::State& state) {
    const auto pb = make_problem(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)), 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(wdrc::dro::cutting_plane(pb).value);
}
BENCHMARK(BM_CuttingPlane)->Args({2, 50})->Args({3, 100})->Args({4, 200})->Args({6, 232})
    ->Unit(benchmark::kMillisecond);

void BM_SeparationOracle(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const auto pb = make_problem(d, 4, 0.0);
    const VectorXd u = VectorXd::Constant(d, 0.5 / d);
    const VectorXd z = VectorXd::Constant(d, 0.01);
    const VectorXd xhat = pb.empirical.samples.row(0).transpose();
    for (auto _ : state)
        benchmark::DoNotOptimize(wdrc::dro::separation_oracle(u, z, pb.support, pb.growth,
                                                              pb.utility, xhat)
                                     .second);
}
BENCHMARK(BM_SeparationOracle)->Arg(8)->Arg(12)->Arg(16)->Arg(20);

void BM_Calibrate(benchmark::State& state) {
    auto eng = wdrc::rng::engine(5);
    const int T = static_cast<int>(state.range(0));
    MatrixXd daily(T, 2);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < 2; ++i)
            daily(t, i) = 0.0005 + 0.01 * wdrc::rng::normal(eng);
    wdrc::calibrate::CalibrationConfig cfg;
    cfg.beta = 0.1;
    cfg.horizons = {5};
    cfg.bootstrap_reps = 16;
    cfg.seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(wdrc::calibrate::calibrate_radii(daily, cfg).rows[0].epsilon);
}
BENCHMARK(BM_Calibrate)->Arg(60)->Arg(120)->Arg(252)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
