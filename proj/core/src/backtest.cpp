#include "wdrc/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wdrc/certificate.hpp"
#include "wdrc/rng.hpp"

namespace wdrc::backtest {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::static_n: return "static";
        case Scheme::adaptive: return "adaptive";
        case Scheme::buy_and_hold: return "buy_and_hold";
        case Scheme::equal_weight_daily: return "equal_weight_daily";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "static") return Scheme::static_n;
    if (s == "adaptive") return Scheme::adaptive;
    if (s == "buy_and_hold") return Scheme::buy_and_hold;
    if (s == "equal_weight_daily") return Scheme::equal_weight_daily;
    throw BacktestError("unknown scheme: " + s);
}

VectorXd BacktestConfig::friction_vector(int assets) const {
    if (friction.size() == 0) return VectorXd::Constant(assets, tc_rate);
    if (friction.size() != assets) throw BacktestError("friction vector length mismatch");
    return friction;
}

namespace {

struct Book {
    double cash = 0.0;
    VectorXd holdings;

    double value() const { return cash + holdings.sum(); }

    // Move to target weights, charging kappa on |target - current| currency
    // turnover; the cost feeds back into the investable wealth, resolved by
    // a short fixed point (contraction rate ~ kappa).
    std::pair<double, double> execute(const VectorXd& weights, const VectorXd& kappa) {
        const double gross = value();
        double net = gross;
        double cost = 0.0;
        for (int pass = 0; pass < 4; ++pass) {
            cost = 0.0;
            for (int i = 0; i < holdings.size(); ++i)
                cost += kappa[i] * std::abs(weights[i] * net - holdings[i]);
            net = gross - cost;
        }
        double turnover = 0.0;
        for (int i = 0; i < holdings.size(); ++i)
            turnover += std::abs(weights[i] * net - holdings[i]);
        holdings = weights * net;
        cash = net - holdings.sum();
        return {cost, turnover};
    }
};

struct DroContext {
    const data::PricePanel& panel;
    const BacktestConfig& cfg;
    MatrixXd daily;       // full panel daily returns
    VectorXd kappa;

    dro::RelaxationProblem build_problem(int t, int n, double epsilon) const {
        dro::RelaxationProblem pb;
        const auto ws = data::compound_windows(panel, t, cfg.lookback, n, cfg.support_inflation);
        pb.support = ws.support;
        pb.empirical = transport::EmpiricalDistribution(ws.samples);
        pb.growth = model::AffineGrowthModel(kappa, ws.r_fn, n);
        pb.utility = model::Utility::log();
        pb.control = model::ControlSet::long_only(panel.assets(), cfg.leverage_cap, cfg.eta);
        pb.epsilon = epsilon;
        pb.p = cfg.p;
        pb.tol = cfg.tol;
        return pb;
    }

    calibrate::RadiusTable calibrate_at(int t, const std::vector<int>& horizons) const {
        calibrate::CalibrationConfig cal;
        // The union-bound split stays 1 - beta/|N| for the *configured*
        // candidate set even when only a subset is recomputed (static scheme
        // after selection), so static and adaptive radii agree per (t, n).
        cal.beta = cfg.beta * static_cast<double>(horizons.size()) /
                   static_cast<double>(cfg.horizons.size());
        cal.horizons = horizons;
        cal.bootstrap_reps = cfg.bootstrap_reps;
        cal.p = cfg.p;
        cal.seed = rng::substream(cfg.seed, static_cast<std::uint64_t>(t));
        const MatrixXd window = daily.middleRows(t - cfg.lookback, cfg.lookback);
        return calibrate::calibrate_radii(window, cal, cfg.jobs);
    }
};

}  // namespace

MetricBlock compute_metrics(const VectorXd& wealth, const VectorXd& daily_rf, double years) {
    if (wealth.size() < 1 || wealth[0] <= 0.0)
        throw BacktestError("compute_metrics: empty path or nonpositive initial wealth");
    MetricBlock m;
    m.fv = wealth[wealth.size() - 1] / wealth[0];
    m.tr = m.fv - 1.0;
    m.cagr = years > 0.0 ? std::pow(m.fv, 1.0 / years) - 1.0 : 0.0;

    double peak = wealth[0];
    double mdd = 0.0;
    for (int t = 0; t < wealth.size(); ++t) {
        peak = std::max(peak, wealth[t]);
        mdd = std::max(mdd, (peak - wealth[t]) / peak);
    }
    m.mdd = mdd;

    const int R = static_cast<int>(wealth.size()) - 1;
    if (R < 1) {
        m.sharpe_defined = false;
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    VectorXd r(R), excess(R);
    for (int t = 0; t < R; ++t) {
        r[t] = wealth[t + 1] / wealth[t] - 1.0;
        excess[t] = r[t] - (daily_rf.size() == R ? daily_rf[t] : 0.0);
    }
    m.best_day = r.maxCoeff();
    m.worst_day = r.minCoeff();
    const double mean = r.mean();
    const double var = R > 1 ? (r.array() - mean).square().sum() / (R - 1) : 0.0;
    const double sd = std::sqrt(var);
    m.vol = sd * std::sqrt(252.0);
    if (sd > 0.0) {
        m.sharpe = excess.mean() / sd * std::sqrt(252.0);
        m.sharpe_defined = true;
    } else {
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
        m.sharpe_defined = false;
    }
    return m;
}

BacktestLedger run_backtest(const data::PricePanel& panel, const BacktestConfig& config) {
    const int T = panel.days();
    const int d = panel.assets();
    const int L = config.lookback;
    const bool dro_scheme =
        config.scheme == Scheme::static_n || config.scheme == Scheme::adaptive;
    if (dro_scheme) {
        if (L < *std::max_element(config.horizons.begin(), config.horizons.end()))
            throw BacktestError("lookback shorter than the largest horizon");
        if (T < L + 2) throw BacktestError("panel too short for the lookback window");
    } else if (T < 2) {
        throw BacktestError("panel too short");
    }
    if (config.initial_wealth <= 0.0) throw BacktestError("initial wealth must be positive");

    DroContext ctx{panel, config, panel.daily_returns(), config.friction_vector(d)};
    const int t0 = dro_scheme ? L : 0;

    BacktestLedger ledger;
    const int days_out = T - t0;
    ledger.wealth.resize(days_out);
    ledger.dates.assign(panel.dates.begin() + t0, panel.dates.end());

    Book book;
    book.cash = config.initial_wealth;
    book.holdings = VectorXd::Zero(d);

    int next_rebalance = t0;
    int static_horizon = -1;

    for (int t = t0; t < T; ++t) {
        if (t > t0) {
            for (int i = 0; i < d; ++i) book.holdings[i] *= 1.0 + ctx.daily(t - 1, i);
            book.cash *= 1.0 + panel.riskfree_annual[t - 1] / 252.0;
        }

        const bool last_day = t + 1 >= T;
        if (!last_day) {
            if (config.scheme == Scheme::buy_and_hold) {
                if (t == t0) {
                    // Initial equal split, cost-free, not counted as a rebalance.
                    const double v = book.value();
                    book.holdings = VectorXd::Constant(d, v / d);
                    book.cash = 0.0;
                }
            } else if (config.scheme == Scheme::equal_weight_daily) {
                auto [cost, turnover] = book.execute(VectorXd::Constant(d, 1.0 / d), ctx.kappa);
                ledger.tc_total += cost;
                RebalanceEvent ev;
                ev.day_index = t;
                ev.date = panel.dates[static_cast<size_t>(t)];
                ev.horizon = 1;
                ev.weights = VectorXd::Constant(d, 1.0 / d);
                ev.executed_cost = cost;
                ev.turnover = turnover;
                ledger.events.push_back(std::move(ev));
            } else if (t == next_rebalance) {
                std::vector<int> horizons = config.horizons;
                if (config.scheme == Scheme::static_n && static_horizon > 0)
                    horizons = {static_horizon};
                calibrate::RadiusTable radii;
                try {
                    radii = ctx.calibrate_at(t, horizons);
                } catch (const std::exception& e) {
                    throw BacktestError("calibration failed at " +
                                        panel.dates[static_cast<size_t>(t)] + ": " + e.what());
                }

                std::map<int, dro::RelaxationProblem> problems;
                for (int n : horizons)
                    problems.emplace(n, ctx.build_problem(t, n, radii.at(n).epsilon));
                dro::HorizonSelection sel;
                try {
                    sel = dro::select_horizon(problems, config.jobs);
                } catch (const std::exception& e) {
                    throw BacktestError("solve failed at " + panel.dates[static_cast<size_t>(t)] +
                                        ": " + e.what());
                }
                const int n_pick = config.scheme == Scheme::static_n && static_horizon > 0
                                       ? static_horizon
                                       : sel.n_star;
                if (config.scheme == Scheme::static_n && static_horizon < 0) static_horizon = n_pick;
                const auto& sol = sel.solutions.at(n_pick);

                auto [cost, turnover] = book.execute(sol.u_star, ctx.kappa);
                ledger.tc_total += cost;

                RebalanceEvent ev;
                ev.day_index = t;
                ev.date = panel.dates[static_cast<size_t>(t)];
                ev.horizon = n_pick;
                ev.weights = sol.u_star;
                ev.j_cvx = sol.value;
                ev.epsilon = radii.at(n_pick).epsilon;
                ev.model_tc = ctx.kappa.dot(sol.u_star.cwiseAbs()) * book.value();
                ev.executed_cost = cost;
                ev.turnover = turnover;
                if (config.certify) {
                    const auto report = certificate::empirical_gap(sol, problems.at(n_pick));
                    ev.delta_max = report.delta_max;
                    ev.bound = report.bound;
                    ev.utilization = report.utilization;
                    ev.gap_satisfied = report.satisfied;
                }
                ledger.events.push_back(std::move(ev));
                next_rebalance = t + n_pick;
            }
        }

        const double v = book.value();
        if (!(v > 0.0))
            throw BacktestError("wealth became nonpositive on " +
                                panel.dates[static_cast<size_t>(t)]);
        ledger.wealth[t - t0] = v;
    }

    VectorXd daily_rf(days_out - 1);
    for (int t = 0; t + 1 < days_out; ++t) daily_rf[t] = panel.riskfree_annual[t0 + t] / 252.0;
    const double years = static_cast<double>(days_out - 1) / 252.0;
    ledger.metrics = compute_metrics(ledger.wealth, daily_rf, years);
    ledger.metrics.tc_total = ledger.tc_total;
    ledger.metrics.n_rebalances = static_cast<int>(ledger.events.size());
    return ledger;
}

std::vector<TcSweepRow> tc_sensitivity(const data::PricePanel& panel,
                                       const BacktestConfig& config,
                                       const std::vector<double>& rates) {
    if (config.scheme != Scheme::adaptive)
        throw BacktestError("tc_sensitivity requires the adaptive scheme");
    std::vector<TcSweepRow> rows;
    for (double rate : rates) {
        BacktestConfig cfg = config;
        cfg.tc_rate = rate;
        cfg.friction.resize(0);
        const auto ledger = run_backtest(panel, cfg);
        TcSweepRow row;
        row.rate = rate;
        row.fv = ledger.metrics.fv;
        row.n_rebalances = static_cast<int>(ledger.events.size());
        double sum_n = 0.0;
        for (int n : config.horizons) row.selection_frequency[n] = 0.0;
        for (const auto& ev : ledger.events) {
            sum_n += ev.horizon;
            row.selection_frequency[ev.horizon] += 1.0;
        }
        if (!ledger.events.empty()) {
            row.mean_horizon = sum_n / static_cast<double>(ledger.events.size());
            for (auto& [n, f] : row.selection_frequency)
                f /= static_cast<double>(ledger.events.size());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace wdrc::backtest
