#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wdrc::calibrate {

using Eigen::MatrixXd;

struct CalibrateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class QuantileRule { lower, higher };

struct CalibrationConfig {
    double beta = 0.1;             // global confidence, in (0,1)
    std::vector<int> horizons;     // candidate set N
    int bootstrap_reps = 200;      // B_boot
    std::uint64_t seed = 0;
    double p = 1.0;                // Wasserstein order
    QuantileRule quantile_rule = QuantileRule::lower;

    double per_horizon_level() const;  // 1 - beta/|N|
};

struct RadiusRow {
    int n = 0;
    double epsilon = 0.0;
    int samples = 0;    // N_n used for the horizon's empirical
    double level = 0.0;
};

struct RadiusTable {
    std::vector<RadiusRow> rows;
    const RadiusRow& at(int n) const;
};

/// Lower empirical quantile: sorted value at index ceil(level*K)-1, clamped
/// to [0, K-1]. QuantileRule::higher rounds the index up instead.
double quantile(std::vector<double> values, double level,
                QuantileRule rule = QuantileRule::lower);

/// Per-horizon ambiguity radii by circular block bootstrap with block length
/// n. For each horizon: build the overlapping n-period empirical of `daily`
/// (T x d daily returns), draw B_boot resamples of the daily series (blocks
/// of length n, circular wrap, replicate r seeded by
/// substream(substream(seed, n), r)), recompute each resample's n-period
/// empirical, and take the 1-beta/|N| quantile of the W_p distances to the
/// original empirical. Deterministic given the seed; replicates may run
/// concurrently without changing the result.
RadiusTable calibrate_radii(const MatrixXd& daily, const CalibrationConfig& config, int jobs = 1);

}  // namespace wdrc::calibrate
