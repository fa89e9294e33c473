#include "wdrc/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wdrc/data.hpp"
#include "wdrc/rng.hpp"
#include "wdrc/transport.hpp"

namespace wdrc::calibrate {

double CalibrationConfig::per_horizon_level() const {
    if (horizons.empty()) throw CalibrateError("calibration: empty horizon set");
    return 1.0 - beta / static_cast<double>(horizons.size());
}

const RadiusRow& RadiusTable::at(int n) const {
    for (const auto& row : rows)
        if (row.n == n) return row;
    throw CalibrateError("radius table has no horizon " + std::to_string(n));
}

double quantile(std::vector<double> values, double level, QuantileRule rule) {
    if (values.empty()) throw CalibrateError("quantile of empty sequence");
    if (level < 0.0 || level > 1.0) throw CalibrateError("quantile level outside [0,1]");
    std::sort(values.begin(), values.end());
    const auto K = static_cast<long>(values.size());
    double pos = level * static_cast<double>(K);
    long idx = rule == QuantileRule::lower ? static_cast<long>(std::ceil(pos)) - 1
                                           : static_cast<long>(std::floor(pos));
    idx = std::clamp(idx, long{0}, K - 1);
    return values[static_cast<size_t>(idx)];
}

namespace {

// Circular block resample of the daily matrix: blocks of `n` consecutive
// rows starting at engine() % T, concatenated and truncated to T rows.
MatrixXd block_resample(const MatrixXd& daily, int n, std::mt19937_64& eng) {
    const int T = static_cast<int>(daily.rows());
    MatrixXd out(T, daily.cols());
    int filled = 0;
    while (filled < T) {
        const int start = static_cast<int>(rng::index(eng, static_cast<size_t>(T)));
        for (int k = 0; k < n && filled < T; ++k, ++filled)
            out.row(filled) = daily.row((start + k) % T);
    }
    return out;
}

}  // namespace

RadiusTable calibrate_radii(const MatrixXd& daily, const CalibrationConfig& config, int jobs) {
    if (config.beta <= 0.0 || config.beta >= 1.0)
        throw CalibrateError("calibration: beta must lie in (0,1)");
    if (config.bootstrap_reps < 1) throw CalibrateError("calibration: bootstrap_reps must be >= 1");
    const double level = config.per_horizon_level();

    const int T = static_cast<int>(daily.rows());
    RadiusTable table;
    for (int n : config.horizons) {
        if (n < 1) throw CalibrateError("calibration: horizons must be positive");
        if (T < n + 1)
            throw CalibrateError("calibration: insufficient history for horizon " + std::to_string(n));

        const MatrixXd base_windows = data::compound_returns(daily, n);
        const transport::EmpiricalDistribution base(base_windows);

        const std::uint64_t horizon_seed = rng::substream(config.seed, static_cast<std::uint64_t>(n));
        std::vector<double> distances(static_cast<size_t>(config.bootstrap_reps));
        auto run_range = [&](int lo, int hi) {
            for (int r = lo; r < hi; ++r) {
                auto eng = rng::engine(rng::substream(horizon_seed, static_cast<std::uint64_t>(r)));
                MatrixXd resampled = block_resample(daily, n, eng);
                transport::EmpiricalDistribution boot(data::compound_returns(resampled, n));
                distances[static_cast<size_t>(r)] =
                    transport::wasserstein_p(boot, base, config.p).distance;
            }
        };
        const int workers = std::max(1, std::min(jobs, config.bootstrap_reps));
        if (workers == 1) {
            run_range(0, config.bootstrap_reps);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (config.bootstrap_reps + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                int lo = w * chunk, hi = std::min(config.bootstrap_reps, lo + chunk);
                if (lo < hi) pool.emplace_back(run_range, lo, hi);
            }
            for (auto& th : pool) th.join();
        }

        RadiusRow row;
        row.n = n;
        row.samples = static_cast<int>(base_windows.rows());
        row.level = level;
        row.epsilon = quantile(distances, level, config.quantile_rule);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace wdrc::calibrate
