#include "wdrc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "wdrc/backtest.hpp"
#include "wdrc/calibrate.hpp"
#include "wdrc/certificate.hpp"
#include "wdrc/data.hpp"
#include "wdrc/dro.hpp"
#include "wdrc/json_io.hpp"
#include "wdrc/montecarlo.hpp"
#include "wdrc/rng.hpp"
#include "wdrc/svg.hpp"

namespace fs = std::filesystem;

namespace wdrc::cli {

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + where + it.key() + "'");
}

void check_range(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
}

json defaults() {
    return json{
        {"horizons", {5, 21, 42, 63}},
        {"lookback", 252},
        {"beta", 0.1},
        {"eta", 0.5},
        {"p", 1.0},
        {"tc_rate", 0.001},
        {"leverage_cap", 1.0},
        {"support_inflation", 0.0},
        {"scheme", "adaptive"},
        {"initial_wealth", 1.0},
        {"seed", 0},
        {"jobs", 1},
        {"certify", true},
        {"bootstrap", {{"replicates", 200}, {"quantile", "lower"}}},
        {"tolerances", {{"feasibility", 1e-7}, {"optimality", 1e-7}, {"iteration_cap", 200}}},
    };
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    require_keys(doc, "",
                 {"data", "problem", "horizons", "lookback", "beta", "eta", "p", "tc_rate",
                  "friction", "leverage_cap", "support_inflation", "bootstrap", "scheme",
                  "initial_wealth", "seed", "jobs", "tolerances", "certify", "tc_sweep",
                  "simulate"});
    json eff = defaults();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "bootstrap" || it.key() == "tolerances") {
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
                eff[it.key()][jt.key()] = jt.value();
        } else {
            eff[it.key()] = it.value();
        }
    }

    if (eff.contains("data")) require_keys(eff["data"], "data.", {"prices_csv"});
    require_keys(eff["bootstrap"], "bootstrap.", {"replicates", "quantile"});
    require_keys(eff["tolerances"], "tolerances.", {"feasibility", "optimality", "iteration_cap"});
    if (eff.contains("tc_sweep")) require_keys(eff["tc_sweep"], "tc_sweep.", {"rates_bps"});
    if (eff.contains("simulate"))
        require_keys(eff["simulate"], "simulate.",
                     {"source", "atoms", "probabilities", "draws", "seed"});

    const double beta = eff["beta"].get<double>();
    check_range(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
    check_range(eff["eta"].get<double>() > 0.0, "eta must be positive");
    check_range(eff["p"].get<double>() >= 1.0, "p must be >= 1");
    check_range(eff["lookback"].get<int>() >= 2, "lookback must be >= 2");
    check_range(eff["tc_rate"].get<double>() >= 0.0 && eff["tc_rate"].get<double>() < 1.0,
                "tc_rate must lie in [0,1)");
    check_range(eff["leverage_cap"].get<double>() >= 0.0, "leverage_cap must be >= 0");
    check_range(eff["initial_wealth"].get<double>() > 0.0, "initial_wealth must be positive");
    check_range(eff["bootstrap"]["replicates"].get<int>() >= 1, "bootstrap.replicates must be >= 1");
    const std::string qr = eff["bootstrap"]["quantile"].get<std::string>();
    check_range(qr == "lower" || qr == "higher", "bootstrap.quantile must be lower|higher");
    check_range(!eff["horizons"].empty(), "horizons must be nonempty");
    for (const auto& n : eff["horizons"])
        check_range(n.get<int>() >= 1, "horizons must be positive integers");
    try {
        backtest::scheme_from_string(eff["scheme"].get<std::string>());
    } catch (const backtest::BacktestError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_range(eff["jobs"].get<int>() >= 1, "jobs must be >= 1");

    RunConfig cfg;
    cfg.effective = std::move(eff);
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(doc);
}

namespace {

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir);
}

void echo_config(const RunConfig& cfg, const std::string& out_dir) {
    json_io::write_json_file(cfg.effective, out_dir + "/effective_config.json");
}

data::PricePanel load_panel(const RunConfig& cfg) {
    if (!cfg.effective.contains("data") || !cfg.effective["data"].contains("prices_csv"))
        throw ConfigError("config: data.prices_csv is required for this command");
    return data::load_csv(cfg.effective["data"]["prices_csv"].get<std::string>());
}

backtest::BacktestConfig backtest_config(const RunConfig& cfg) {
    const json& e = cfg.effective;
    backtest::BacktestConfig bt;
    bt.scheme = backtest::scheme_from_string(e["scheme"].get<std::string>());
    bt.lookback = e["lookback"].get<int>();
    bt.horizons.clear();
    for (const auto& n : e["horizons"]) bt.horizons.push_back(n.get<int>());
    bt.beta = e["beta"].get<double>();
    bt.eta = e["eta"].get<double>();
    bt.tc_rate = e["tc_rate"].get<double>();
    if (e.contains("friction")) {
        bt.friction.resize(static_cast<int>(e["friction"].size()));
        for (int i = 0; i < bt.friction.size(); ++i)
            bt.friction[i] = e["friction"][static_cast<size_t>(i)].get<double>();
    }
    bt.leverage_cap = e["leverage_cap"].get<double>();
    bt.initial_wealth = e["initial_wealth"].get<double>();
    bt.p = e["p"].get<double>();
    bt.bootstrap_reps = e["bootstrap"]["replicates"].get<int>();
    bt.support_inflation = e["support_inflation"].get<double>();
    bt.seed = e["seed"].get<std::uint64_t>();
    bt.tol.feasibility = e["tolerances"]["feasibility"].get<double>();
    bt.tol.optimality = e["tolerances"]["optimality"].get<double>();
    bt.tol.iteration_cap = e["tolerances"]["iteration_cap"].get<int>();
    bt.certify = e["certify"].get<bool>();
    bt.jobs = e["jobs"].get<int>();
    return bt;
}

calibrate::CalibrationConfig calibration_config(const RunConfig& cfg) {
    const json& e = cfg.effective;
    calibrate::CalibrationConfig cal;
    cal.beta = e["beta"].get<double>();
    for (const auto& n : e["horizons"]) cal.horizons.push_back(n.get<int>());
    cal.bootstrap_reps = e["bootstrap"]["replicates"].get<int>();
    cal.seed = e["seed"].get<std::uint64_t>();
    cal.p = e["p"].get<double>();
    cal.quantile_rule = e["bootstrap"]["quantile"] == "lower" ? calibrate::QuantileRule::lower
                                                              : calibrate::QuantileRule::higher;
    return cal;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

// Per-horizon window problems at the last panel day, radii freshly
// calibrated; shared by solve and simulate-from-data.
struct SolveBundle {
    calibrate::RadiusTable radii;
    std::map<int, dro::RelaxationProblem> problems;
};

SolveBundle build_solve_bundle(const RunConfig& cfg, const data::PricePanel& panel) {
    const json& e = cfg.effective;
    const int L = e["lookback"].get<int>();
    const int t = panel.days() - 1;
    if (t < L) throw data::DataError("panel shorter than the lookback window");

    SolveBundle bundle;
    const Eigen::MatrixXd daily = panel.daily_returns();
    calibrate::CalibrationConfig cal = calibration_config(cfg);
    cal.seed = rng::substream(cal.seed, static_cast<std::uint64_t>(t));
    bundle.radii = calibrate::calibrate_radii(daily.middleRows(t - L, L), cal,
                                              e["jobs"].get<int>());
    auto bt = backtest_config(cfg);
    for (int n : bt.horizons) {
        const auto ws = data::compound_windows(panel, t, L, n, bt.support_inflation);
        dro::RelaxationProblem pb;
        pb.support = ws.support;
        pb.empirical = transport::EmpiricalDistribution(ws.samples);
        pb.growth = model::AffineGrowthModel(bt.friction_vector(panel.assets()), ws.r_fn, n);
        pb.utility = model::Utility::log();
        pb.control = model::ControlSet::long_only(panel.assets(), bt.leverage_cap, bt.eta);
        pb.epsilon = bundle.radii.at(n).epsilon;
        pb.p = bt.p;
        pb.tol = bt.tol;
        bundle.problems.emplace(n, pb);
    }
    return bundle;
}

}  // namespace

void cmd_calibrate(const RunConfig& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    echo_config(cfg, out_dir);
    const auto panel = load_panel(cfg);
    const int L = cfg.effective["lookback"].get<int>();
    const int t = panel.days() - 1;
    if (t < L) throw data::DataError("panel shorter than the lookback window");
    calibrate::CalibrationConfig cal = calibration_config(cfg);
    const auto daily = panel.daily_returns();
    const auto table = calibrate::calibrate_radii(daily.middleRows(t - L, L), cal,
                                                  cfg.effective["jobs"].get<int>());
    json_io::write_json_file(json_io::radius_table_to_json(table, cal.beta),
                             out_dir + "/radii.json");
}

void cmd_solve(const RunConfig& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    echo_config(cfg, out_dir);

    json solutions;
    json gaps;
    if (cfg.effective.contains("problem")) {
        const auto pb = json_io::problem_from_json(
            json_io::load_json_file(cfg.effective["problem"].get<std::string>()));
        auto sol = dro::cutting_plane(pb);
        if (sol.status == dro::SolveStatus::infeasible)
            throw dro::InfeasibleError("problem is infeasible");
        const int n = pb.growth.period;
        solutions["n_star"] = n;
        solutions["solutions"][std::to_string(n)] = json_io::solution_to_json(sol);
        gaps[std::to_string(n)] = json_io::gap_report_to_json(certificate::empirical_gap(sol, pb));
    } else {
        const auto panel = load_panel(cfg);
        const auto bundle = build_solve_bundle(cfg, panel);

        // Window artifacts per horizon: samples CSV plus support JSON.
        for (const auto& [n, pb] : bundle.problems) {
            data::WindowSamples ws;
            ws.horizon = n;
            ws.samples = pb.empirical.samples;
            ws.r_fn = pb.growth.riskfree_n;
            ws.support = pb.support;
            data::write_samples_csv(ws, out_dir + "/windows_" + std::to_string(n) + ".csv");
            json_io::write_json_file(json_io::support_to_json(pb.support),
                                     out_dir + "/support_" + std::to_string(n) + ".json");
        }

        const auto sel = dro::select_horizon(bundle.problems, cfg.effective["jobs"].get<int>());
        solutions["n_star"] = sel.n_star;
        for (const auto& [n, sol] : sel.solutions) {
            json js = json_io::solution_to_json(sol);
            if (bundle.problems.at(n).epsilon == 0.0) {
                // Inline cross-check: at epsilon = 0 the value must equal the
                // sample average of stage rewards at u*.
                double mean = 0.0;
                const auto& pb = bundle.problems.at(n);
                for (int j = 0; j < pb.sample_count(); ++j)
                    mean += pb.utility(model::growth_factor(
                        pb.growth, sol.u_star, pb.empirical.samples.row(j).transpose()));
                mean /= pb.sample_count() * pb.growth.period;
                if (std::abs(mean - sol.value) > 1e-6)
                    throw dro::SolverError("SAA cross-check failed at horizon " +
                                           std::to_string(n));
                js["saa_check"] = mean;
            }
            solutions["solutions"][std::to_string(n)] = std::move(js);
            gaps[std::to_string(n)] = json_io::gap_report_to_json(
                certificate::empirical_gap(sol, bundle.problems.at(n)));
        }
        json_io::write_json_file(json_io::radius_table_to_json(bundle.radii,
                                                               cfg.effective["beta"].get<double>()),
                                 out_dir + "/radii.json");
    }
    json_io::write_json_file(solutions, out_dir + "/solutions.json");
    json_io::write_json_file(gaps, out_dir + "/gaps.json");
}

namespace {

void write_ledger_files(const backtest::BacktestLedger& ledger, const std::string& out_dir) {
    std::string csv = "date,wealth\n";
    for (int t = 0; t < ledger.wealth.size(); ++t)
        csv += ledger.dates[static_cast<size_t>(t)] + "," + fmt_full(ledger.wealth[t]) + "\n";
    write_text(out_dir + "/ledger.csv", csv);

    const int d = ledger.events.empty() ? 0 : static_cast<int>(ledger.events.front().weights.size());
    std::string ev = "date,day_index,n,j_cvx,epsilon,model_tc,executed_cost,turnover,delta_max,"
                     "bound,utilization,gap_satisfied";
    for (int i = 0; i < d; ++i) ev += ",u_" + std::to_string(i);
    ev += "\n";
    for (const auto& e : ledger.events) {
        ev += e.date + "," + std::to_string(e.day_index) + "," + std::to_string(e.horizon) + "," +
              fmt_full(e.j_cvx) + "," + fmt_full(e.epsilon) + "," + fmt_full(e.model_tc) + "," +
              fmt_full(e.executed_cost) + "," + fmt_full(e.turnover) + "," + fmt_full(e.delta_max) +
              "," + fmt_full(e.bound) + "," + fmt_full(e.utilization) + "," +
              (e.gap_satisfied ? "1" : "0");
        for (int i = 0; i < d; ++i) ev += "," + fmt_full(e.weights[i]);
        ev += "\n";
    }
    write_text(out_dir + "/events.csv", ev);

    std::string gaps = "date,n,delta_max,bound,utilization\n";
    for (const auto& e : ledger.events)
        gaps += e.date + "," + std::to_string(e.horizon) + "," + fmt_full(e.delta_max) + "," +
                fmt_full(e.bound) + "," + fmt_full(e.utilization) + "\n";
    write_text(out_dir + "/gaps.csv", gaps);

    json metrics = json_io::metrics_to_json(ledger.metrics);
    json_io::write_json_file(metrics, out_dir + "/metrics.json");
}

}  // namespace

void cmd_backtest(const RunConfig& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    echo_config(cfg, out_dir);
    const auto panel = load_panel(cfg);
    const auto ledger = backtest::run_backtest(panel, backtest_config(cfg));
    write_ledger_files(ledger, out_dir);
}

void cmd_tc_sweep(const RunConfig& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    echo_config(cfg, out_dir);
    if (!cfg.effective.contains("tc_sweep"))
        throw ConfigError("config: tc_sweep.rates_bps is required");
    if (cfg.effective["scheme"].get<std::string>() != "adaptive")
        throw ConfigError("config: tc-sweep requires scheme = adaptive");
    const auto panel = load_panel(cfg);
    auto bt = backtest_config(cfg);
    std::vector<double> rates;
    for (const auto& bps : cfg.effective["tc_sweep"]["rates_bps"])
        rates.push_back(bps.get<double>() / 1e4);
    const auto rows = backtest::tc_sensitivity(panel, bt, rates);

    json out = json::array();
    std::string csv = "rate_bps,final_value,mean_horizon,n_rebalances";
    for (int n : bt.horizons) csv += ",freq_" + std::to_string(n);
    csv += "\n";
    for (const auto& row : rows) {
        json jr{{"rate_bps", row.rate * 1e4},
                {"final_value", row.fv},
                {"mean_horizon", row.mean_horizon},
                {"n_rebalances", row.n_rebalances}};
        for (const auto& [n, f] : row.selection_frequency)
            jr["selection_frequency"][std::to_string(n)] = f;
        out.push_back(std::move(jr));
        csv += fmt_full(row.rate * 1e4) + "," + fmt_full(row.fv) + "," +
               fmt_full(row.mean_horizon) + "," + std::to_string(row.n_rebalances);
        for (int n : bt.horizons) csv += "," + fmt_full(row.selection_frequency.at(n));
        csv += "\n";
    }
    json_io::write_json_file(out, out_dir + "/tc_sweep.json");
    write_text(out_dir + "/tc_sweep.csv", csv);
}

void cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    echo_config(cfg, out_dir);
    if (!cfg.effective.contains("problem"))
        throw ConfigError("config: simulate requires a problem file");
    if (!cfg.effective.contains("simulate"))
        throw ConfigError("config: simulate block is required");
    const json& sim = cfg.effective["simulate"];
    const long draws = sim.value("draws", 100000L);
    const std::uint64_t seed = sim.value("seed", cfg.effective["seed"].get<std::uint64_t>());

    const auto pb = json_io::problem_from_json(
        json_io::load_json_file(cfg.effective["problem"].get<std::string>()));
    const auto sol = dro::cutting_plane(pb);
    if (sol.status != dro::SolveStatus::optimal)
        throw dro::SolverError("simulate: solve did not reach optimal status");

    montecarlo::SyntheticStream stream;
    const std::string source = sim.value("source", std::string("empirical"));
    if (source == "empirical") {
        stream = montecarlo::SyntheticStream::from_empirical(pb.empirical, seed);
    } else if (source == "atoms") {
        if (!sim.contains("atoms") || !sim.contains("probabilities"))
            throw ConfigError("config: simulate.atoms and simulate.probabilities are required");
        const auto& ja = sim["atoms"];
        Eigen::MatrixXd atoms(static_cast<int>(ja.size()), pb.dim());
        for (size_t r = 0; r < ja.size(); ++r)
            for (int c = 0; c < pb.dim(); ++c)
                atoms(static_cast<int>(r), c) = ja[r][static_cast<size_t>(c)].get<double>();
        Eigen::VectorXd probs(static_cast<int>(sim["probabilities"].size()));
        for (int i = 0; i < probs.size(); ++i)
            probs[i] = sim["probabilities"][static_cast<size_t>(i)].get<double>();
        stream = montecarlo::SyntheticStream(atoms, probs, seed);
    } else {
        throw ConfigError("config: simulate.source must be empirical|atoms");
    }

    const auto long_run = montecarlo::verify_long_run(pb, sol, stream, draws);
    const auto viability = montecarlo::verify_viability(pb.growth, sol.u_star, pb.support,
                                                        pb.control.eta, stream, draws);
    json out;
    out["long_run"] = json_io::long_run_to_json(long_run);
    out["viability"] = json_io::viability_to_json(viability);
    out["u_star"] = json_io::solution_to_json(sol)["u_star"];
    json_io::write_json_file(out, out_dir + "/simulate.json");
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data::DataError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        fields.push_back(cur);
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

void cmd_report(const std::string& dir) {
    const std::string ledger_path = dir + "/ledger.csv";
    if (!fs::exists(ledger_path))
        throw data::DataError("report: no ledger.csv in " + dir);

    const auto ledger_rows = read_csv_rows(ledger_path);
    if (ledger_rows.size() < 2) throw data::DataError("report: empty ledger");
    svg::Chart wealth_chart;
    wealth_chart.title = "Out-of-sample wealth";
    wealth_chart.x_label = "trading day";
    wealth_chart.y_label = "wealth";
    svg::Series wealth_series;
    wealth_series.name = "wealth";
    for (size_t r = 1; r < ledger_rows.size(); ++r) {
        wealth_series.x.push_back(static_cast<double>(r - 1));
        wealth_series.y.push_back(std::stod(ledger_rows[r][1]));
    }
    wealth_chart.series.push_back(std::move(wealth_series));
    svg::write(wealth_chart, dir + "/wealth.svg");

    const auto event_rows = read_csv_rows(dir + "/events.csv");
    svg::Chart n_chart;
    n_chart.title = "Selected sampling period";
    n_chart.x_label = "trading day";
    n_chart.y_label = "n (days)";
    svg::Series n_series;
    n_series.name = "n*";
    n_series.step = true;
    svg::Chart gap_chart;
    gap_chart.title = "Interchange gap vs bound";
    gap_chart.x_label = "trading day";
    gap_chart.y_label = "value";
    svg::Series gap_series, bound_series;
    gap_series.name = "delta_max";
    bound_series.name = "bound";
    for (size_t r = 1; r < event_rows.size(); ++r) {
        const double day = std::stod(event_rows[r][1]);
        n_series.x.push_back(day);
        n_series.y.push_back(std::stod(event_rows[r][2]));
        gap_series.x.push_back(day);
        gap_series.y.push_back(std::stod(event_rows[r][8]));
        bound_series.x.push_back(day);
        bound_series.y.push_back(std::stod(event_rows[r][9]));
    }
    n_chart.series.push_back(std::move(n_series));
    svg::write(n_chart, dir + "/chosen_n.svg");
    gap_chart.series.push_back(std::move(gap_series));
    gap_chart.series.push_back(std::move(bound_series));
    svg::write(gap_chart, dir + "/gap_timeseries.svg");

    // Metrics summary table.
    const json metrics = json_io::load_json_file(dir + "/metrics.json");
    std::ostringstream md;
    md << "# Backtest summary\n\n| metric | value |\n|---|---|\n";
    for (const auto& key : {"fv", "tr", "cagr", "mdd", "sharpe", "vol", "best_day", "worst_day",
                            "tc_total", "n_rebalances"})
        md << "| " << key << " | " << metrics.at(key).dump() << " |\n";
    write_text(dir + "/summary.md", md.str());
}

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& out_dir, std::optional<std::uint64_t> seed_override,
             std::optional<int> jobs_override) {
    try {
        if (command == "report") {
            cmd_report(out_dir);
            return kExitOk;
        }
        RunConfig cfg = RunConfig::load(config_path);
        if (seed_override) cfg.effective["seed"] = *seed_override;
        if (jobs_override) cfg.effective["jobs"] = *jobs_override;
        if (command == "calibrate")
            cmd_calibrate(cfg, out_dir);
        else if (command == "solve")
            cmd_solve(cfg, out_dir);
        else if (command == "backtest")
            cmd_backtest(cfg, out_dir);
        else if (command == "tc-sweep")
            cmd_tc_sweep(cfg, out_dir);
        else if (command == "simulate")
            cmd_simulate(cfg, out_dir);
        else
            throw ConfigError("unknown command: " + command);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const data::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverError;
    }
}

}  // namespace wdrc::cli
