#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wdrc/calibrate.hpp"
#include "wdrc/data.hpp"
#include "wdrc/dro.hpp"

namespace wdrc::backtest {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BacktestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme { static_n, adaptive, buy_and_hold, equal_weight_daily };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct BacktestConfig {
    Scheme scheme = Scheme::adaptive;
    int lookback = 252;                       // L
    std::vector<int> horizons = {5, 21, 42, 63};
    double beta = 0.1;
    double eta = 0.5;
    double tc_rate = 0.001;                   // uniform proportional cost
    VectorXd friction;                        // optional per-asset override
    double leverage_cap = 1.0;
    double initial_wealth = 1.0;
    double p = 1.0;
    int bootstrap_reps = 200;
    double support_inflation = 0.0;
    std::uint64_t seed = 0;
    dro::Tolerances tol;
    bool certify = true;                      // per-rebalance gap report
    int jobs = 1;

    VectorXd friction_vector(int assets) const;
};

struct RebalanceEvent {
    int day_index = 0;
    std::string date;
    int horizon = 0;
    VectorXd weights;
    double j_cvx = 0.0;
    double epsilon = 0.0;
    double model_tc = 0.0;        // planner's kappa'|u| charge per period
    double executed_cost = 0.0;   // cost actually paid on turnover
    double turnover = 0.0;
    // Gap certificate fields (certify = true).
    double delta_max = 0.0;
    double bound = 0.0;
    double utilization = 0.0;
    bool gap_satisfied = true;
};

struct MetricBlock {
    double fv = 1.0;
    double tr = 0.0;
    double cagr = 0.0;
    double mdd = 0.0;
    double sharpe = 0.0;
    double vol = 0.0;
    double best_day = 0.0;
    double worst_day = 0.0;
    double tc_total = 0.0;
    int n_rebalances = 0;
    bool sharpe_defined = true;
};

struct BacktestLedger {
    std::vector<std::string> dates;  // out-of-sample days
    VectorXd wealth;                 // daily marks, wealth[0] at the first date
    std::vector<RebalanceEvent> events;
    double tc_total = 0.0;
    MetricBlock metrics;
};

/// Rolling-window out-of-sample engine: at each rebalance build the
/// per-horizon window samples, calibrate radii, solve the robust program,
/// execute to the target weights charging proportional costs on turnover,
/// hold for n days marking to market daily. Deterministic given the seed.
BacktestLedger run_backtest(const data::PricePanel& panel, const BacktestConfig& config);

/// Table 2 style metric block from a daily wealth path. `daily_rf` holds the
/// per-day risk-free returns aligned with the wealth increments; `years` is
/// the span in years used by the CAGR.
MetricBlock compute_metrics(const VectorXd& wealth, const VectorXd& daily_rf, double years);

struct TcSweepRow {
    double rate = 0.0;
    double fv = 1.0;
    double mean_horizon = 0.0;
    int n_rebalances = 0;
    std::map<int, double> selection_frequency;
};

/// Rerun the adaptive backtest per cost rate.
std::vector<TcSweepRow> tc_sensitivity(const data::PricePanel& panel,
                                       const BacktestConfig& config,
                                       const std::vector<double>& rates);

}  // namespace wdrc::backtest
