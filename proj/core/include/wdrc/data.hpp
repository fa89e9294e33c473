#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdrc/model.hpp"

namespace wdrc::data {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Daily price panel: adjusted closes for d tickers plus an annualized
/// risk-free yield column, strictly increasing ISO dates, no gaps.
struct PricePanel {
    std::vector<std::string> dates;   // ISO YYYY-MM-DD, strictly increasing
    std::vector<std::string> tickers;
    MatrixXd prices;                  // T x d, all > 0
    VectorXd riskfree_annual;         // length T, decimal annualized yield

    int days() const { return static_cast<int>(prices.rows()); }
    int assets() const { return static_cast<int>(prices.cols()); }
    /// Simple daily returns, (T-1) x d; row t is the return from day t to t+1.
    MatrixXd daily_returns() const;
};

/// Overlapping n-period excess-return samples from one look-back window.
struct WindowSamples {
    int horizon = 1;          // n
    MatrixXd samples;         // N_n x d arithmetic excess returns
    double r_fn = 0.0;        // n-period risk-free return at the window end
    model::BoxSupport support;

    int count() const { return static_cast<int>(samples.rows()); }
};

/// Strict wide-CSV loader: header `date,<TICKER>...,RF_ANNUAL`. Rows sorted
/// by date; duplicate dates, malformed numbers, nonpositive prices and
/// missing columns are distinct errors. Rows with empty cells are dropped.
PricePanel load_csv(const std::string& path);

/// n-period simple risk-free return from an annualized yield:
/// (1 + r_annual/252)^n - 1.
double riskfree_n(double r_annual, int n);

/// Gross n-period compound returns minus one over every overlapping window
/// of the daily return matrix: (T-n+1) x d.
MatrixXd compound_returns(const MatrixXd& daily, int n);

/// The look-back construction: N_n = L-n+1 overlapping n-period excess
/// returns ending at `end_index` (inclusive), support box fitted to the
/// samples and inflated by `rho` about its midpoint.
WindowSamples compound_windows(const PricePanel& panel, int end_index, int lookback, int n,
                               double rho = 0.0);

/// One sample per row, full double precision; reload is bit-exact.
void write_samples_csv(const WindowSamples& ws, const std::string& path);
WindowSamples read_samples_csv(const std::string& path);

}  // namespace wdrc::data
