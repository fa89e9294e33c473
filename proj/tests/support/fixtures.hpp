#pragma once

#include <cstdint>
#include <string>

#include "wdrc/data.hpp"
#include "wdrc/dro.hpp"

namespace fixtures {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Two-sample growth-optimal fixture: samples {+0.10, -0.09} in d = 1,
// epsilon = 0, log utility, zero friction and risk-free. Closed-form
// optimum u* = (a - b)/(2ab) = 0.5556 with a = 0.10, b = 0.09.
wdrc::dro::RelaxationProblem kelly_problem();

// Seeded random instance: box support around zero, samples inside, long-only
// control set. Utility is log unless affine_utility is set.
wdrc::dro::RelaxationProblem random_problem(std::uint64_t seed, int d, int n_samples,
                                            double epsilon, bool affine_utility = false,
                                            double p = 1.0);

// Seeded synthetic daily-return matrix (T x d), mildly clipped Gaussian.
MatrixXd synthetic_daily_returns(std::uint64_t seed, int T, int d, double drift = 0.0005,
                                 double vol = 0.01);

// Synthetic price panel with persistent positive drift; used by the
// transaction-cost sweep and CLI tests. Returns the CSV text.
std::string synthetic_panel_csv(std::uint64_t seed, int days, int assets, double drift = 0.0008,
                                double vol = 0.009, double rf_annual = 0.02);

// Write text to a file under a fresh temp directory; returns the full path.
std::string write_temp(const std::string& dir_hint, const std::string& filename,
                       const std::string& text);

}  // namespace fixtures
