#include "wdrc/json_io.hpp"

#include <fstream>

namespace wdrc::json_io {

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<int>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& a) {
    const int rows = static_cast<int>(a.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const int cols = static_cast<int>(a[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(a[static_cast<size_t>(r)].size()) != cols)
            throw dro::SolverError("json: ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = a[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace

json radius_table_to_json(const calibrate::RadiusTable& table, double beta) {
    json rows = json::array();
    for (const auto& row : table.rows)
        rows.push_back(json{{"n", row.n},
                            {"epsilon", row.epsilon},
                            {"samples", row.samples},
                            {"level", row.level}});
    return json{{"beta", beta}, {"radii", rows}};
}

calibrate::RadiusTable radius_table_from_json(const json& j) {
    calibrate::RadiusTable table;
    for (const auto& row : j.at("radii")) {
        calibrate::RadiusRow r;
        r.n = row.at("n").get<int>();
        r.epsilon = row.at("epsilon").get<double>();
        r.samples = row.at("samples").get<int>();
        r.level = row.at("level").get<double>();
        table.rows.push_back(r);
    }
    return table;
}

json support_to_json(const model::BoxSupport& support) {
    return json{{"lo", vec_to_json(support.lo)},
                {"hi", vec_to_json(support.hi)},
                {"diameter_l1", support.diameter()}};
}

model::BoxSupport support_from_json(const json& j) {
    return model::BoxSupport(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
}

json problem_to_json(const dro::RelaxationProblem& pb) {
    json j;
    j["model"] = {{"friction", vec_to_json(pb.growth.friction)},
                  {"riskfree_n", pb.growth.riskfree_n},
                  {"period", pb.growth.period}};
    j["support"] = {{"lo", vec_to_json(pb.support.lo)}, {"hi", vec_to_json(pb.support.hi)}};
    j["samples"] = mat_to_json(pb.empirical.samples);
    j["weights"] = vec_to_json(pb.empirical.weights);
    j["epsilon"] = pb.epsilon;
    j["p"] = pb.p;
    j["utility"] = pb.utility.is_log()
                       ? json{{"kind", "log"}}
                       : json{{"kind", "affine"}, {"a", pb.utility.a}, {"b", pb.utility.b}};
    j["control"] = {{"lower", vec_to_json(pb.control.lower)},
                    {"leverage_cap", pb.control.leverage_cap},
                    {"eta", pb.control.eta}};
    j["tolerances"] = {{"feasibility", pb.tol.feasibility},
                       {"optimality", pb.tol.optimality},
                       {"iteration_cap", pb.tol.iteration_cap}};
    return j;
}

dro::RelaxationProblem problem_from_json(const json& j) {
    dro::RelaxationProblem pb;
    const auto& m = j.at("model");
    pb.growth = model::AffineGrowthModel(vec_from_json(m.at("friction")),
                                         m.at("riskfree_n").get<double>(),
                                         m.at("period").get<int>());
    pb.support = model::BoxSupport(vec_from_json(j.at("support").at("lo")),
                                   vec_from_json(j.at("support").at("hi")));
    Eigen::MatrixXd samples = mat_from_json(j.at("samples"));
    if (j.contains("weights"))
        pb.empirical = transport::EmpiricalDistribution(samples, vec_from_json(j.at("weights")));
    else
        pb.empirical = transport::EmpiricalDistribution(samples);
    pb.epsilon = j.at("epsilon").get<double>();
    pb.p = j.value("p", 1.0);
    const auto& u = j.at("utility");
    if (u.at("kind") == "log")
        pb.utility = model::Utility::log();
    else if (u.at("kind") == "affine")
        pb.utility = model::Utility::affine(u.at("a").get<double>(), u.at("b").get<double>());
    else
        throw dro::SolverError("json: unknown utility kind");
    const auto& c = j.at("control");
    pb.control = model::ControlSet(vec_from_json(c.at("lower")),
                                   c.at("leverage_cap").get<double>(), c.at("eta").get<double>());
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        pb.tol.feasibility = t.value("feasibility", pb.tol.feasibility);
        pb.tol.optimality = t.value("optimality", pb.tol.optimality);
        pb.tol.iteration_cap = t.value("iteration_cap", pb.tol.iteration_cap);
    }
    pb.validate();
    return pb;
}

json solution_to_json(const dro::RelaxationSolution& sol) {
    json j;
    j["u_star"] = vec_to_json(sol.u_star);
    j["lambda_star"] = sol.lambda_star;
    j["s"] = vec_to_json(sol.s);
    j["z"] = mat_to_json(sol.z);
    j["value"] = sol.value;
    j["status"] = dro::to_string(sol.status);
    j["iterations"] = sol.iterations;
    j["active_set_sizes"] = sol.active_set_sizes;
    j["max_residual"] = sol.max_residual;
    return j;
}

json gap_report_to_json(const certificate::GapReport& report) {
    json j;
    j["delta"] = vec_to_json(report.delta);
    j["delta_max"] = report.delta_max;
    j["bound"] = report.bound;
    j["utilization"] = report.utilization;
    j["satisfied"] = report.satisfied;
    return j;
}

json metrics_to_json(const backtest::MetricBlock& m) {
    json j;
    j["fv"] = m.fv;
    j["tr"] = m.tr;
    j["cagr"] = m.cagr;
    j["mdd"] = m.mdd;
    j["sharpe"] = m.sharpe_defined ? json(m.sharpe) : json();
    j["sharpe_defined"] = m.sharpe_defined;
    j["vol"] = m.vol;
    j["best_day"] = m.best_day;
    j["worst_day"] = m.worst_day;
    j["tc_total"] = m.tc_total;
    j["n_rebalances"] = m.n_rebalances;
    return j;
}

json long_run_to_json(const montecarlo::LongRunReport& r) {
    return json{{"J_cvx", r.j_cvx},
                {"realized_rate", r.realized_rate},
                {"log_wealth_rate", r.log_wealth_rate},
                {"stderr", r.stderr_rate},
                {"pass", r.pass},
                {"K", r.draws},
                {"distance_to_empirical", r.distance_to_empirical}};
}

json viability_to_json(const montecarlo::ViabilityReport& r) {
    json j{{"K", r.draws},
           {"violations", r.violations},
           {"pass", r.pass},
           {"min_growth", r.min_growth}};
    if (r.first_violation >= 0) {
        j["first_violation"] = r.first_violation;
        j["offending_draw"] = vec_to_json(r.offending_draw);
    }
    return j;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace wdrc::json_io
