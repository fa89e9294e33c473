#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wdrc/rng.hpp"

namespace fixtures {

using wdrc::dro::RelaxationProblem;

RelaxationProblem kelly_problem() {
    RelaxationProblem pb;
    MatrixXd samples(2, 1);
    samples << 0.10, -0.09;
    pb.empirical = wdrc::transport::EmpiricalDistribution(samples);
    pb.support = wdrc::model::BoxSupport(VectorXd::Constant(1, -0.09), VectorXd::Constant(1, 0.10));
    pb.growth = wdrc::model::AffineGrowthModel(VectorXd::Zero(1), 0.0, 1);
    pb.utility = wdrc::model::Utility::log();
    pb.control = wdrc::model::ControlSet::long_only(1, 1.0, 0.5);
    pb.epsilon = 0.0;
    pb.p = 1.0;
    return pb;
}

RelaxationProblem random_problem(std::uint64_t seed, int d, int n_samples, double epsilon,
                                 bool affine_utility, double p) {
    auto eng = wdrc::rng::engine(wdrc::rng::substream(seed, 0xF1));
    RelaxationProblem pb;

    VectorXd half(d);
    for (int i = 0; i < d; ++i) half[i] = 0.03 + 0.08 * wdrc::rng::uniform01(eng);
    VectorXd center(d);
    for (int i = 0; i < d; ++i) center[i] = 0.01 * (wdrc::rng::uniform01(eng) - 0.3);
    pb.support = wdrc::model::BoxSupport(center - half, center + half);

    MatrixXd samples(n_samples, d);
    for (int j = 0; j < n_samples; ++j)
        for (int i = 0; i < d; ++i)
            samples(j, i) = center[i] + half[i] * (2.0 * wdrc::rng::uniform01(eng) - 1.0);
    pb.empirical = wdrc::transport::EmpiricalDistribution(samples);

    VectorXd kappa = VectorXd::Constant(d, 0.001);
    pb.growth = wdrc::model::AffineGrowthModel(kappa, 0.002, 1);
    pb.utility = affine_utility ? wdrc::model::Utility::affine(1.0, 0.0) : wdrc::model::Utility::log();
    pb.control = wdrc::model::ControlSet::long_only(d, 1.0, 0.5);
    pb.epsilon = epsilon;
    pb.p = p;
    return pb;
}

MatrixXd synthetic_daily_returns(std::uint64_t seed, int T, int d, double drift, double vol) {
    auto eng = wdrc::rng::engine(wdrc::rng::substream(seed, 0xDA));
    MatrixXd r(T, d);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < d; ++i) {
            double x = drift + vol * wdrc::rng::normal(eng);
            r(t, i) = std::clamp(x, -0.35, 0.35);
        }
    return r;
}

std::string synthetic_panel_csv(std::uint64_t seed, int days, int assets, double drift, double vol,
                                double rf_annual) {
    MatrixXd returns = synthetic_daily_returns(seed, days - 1, assets, drift, vol);
    std::string csv = "date";
    for (int i = 0; i < assets; ++i) csv += ",A" + std::to_string(i);
    csv += ",RF_ANNUAL\n";

    std::vector<double> px(static_cast<size_t>(assets), 100.0);
    // Synthetic trading calendar: plain consecutive day numbering inside a
    // month/year grid keeps dates ISO and strictly increasing.
    int y = 2020, mo = 1, dd = 1;
    char buf[64];
    for (int t = 0; t < days; ++t) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, mo, dd);
        csv += buf;
        for (int i = 0; i < assets; ++i) {
            if (t > 0) px[static_cast<size_t>(i)] *= 1.0 + returns(t - 1, i);
            std::snprintf(buf, sizeof(buf), ",%.10f", px[static_cast<size_t>(i)]);
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.6f\n", rf_annual);
        csv += buf;
        if (++dd > 28) {
            dd = 1;
            if (++mo > 12) {
                mo = 1;
                ++y;
            }
        }
    }
    return csv;
}

std::string write_temp(const std::string& dir_hint, const std::string& filename,
                       const std::string& text) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("wdrc_" + dir_hint);
    fs::create_directories(dir);
    fs::path full = dir / filename;
    std::ofstream out(full);
    out << text;
    out.close();
    return full.string();
}

}  // namespace fixtures
