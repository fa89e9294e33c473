// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one [PASS]/[FAIL] line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "wdrc/backtest.hpp"
#include "wdrc/certificate.hpp"
#include "wdrc/cli.hpp"
#include "wdrc/dro.hpp"
#include "wdrc/json_io.hpp"
#include "wdrc/montecarlo.hpp"
#include "wdrc/rng.hpp"
#include "wdrc/transport.hpp"

using namespace wdrc;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool check(bool ok, std::string& detail, const std::string& msg) {
    if (!ok && detail.empty()) detail = msg;
    return ok;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// 1. SAA reduction at epsilon = 0 against the independent projected-gradient
//    maximizer, 20 seeded instances, d <= 3, N <= 50, log utility, < 60 s.
bool criterion_saa(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int d = 1 + static_cast<int>(seed % 3);
        const int N = 10 + static_cast<int>((seed * 7) % 41);
        auto pb = fixtures::random_problem(seed, d, N, 0.0);
        auto sol = dro::cutting_plane(pb);
        ok &= check(sol.status == dro::SolveStatus::optimal, detail,
                    "seed " + std::to_string(seed) + ": status not optimal");
        const double ref = oracle::saa_maximize(pb).value;
        worst = std::max(worst, std::abs(sol.value - ref));
        ok &= check(std::abs(sol.value - ref) <= 1e-6, detail,
                    "seed " + std::to_string(seed) + ": |J - SAA| = " + fmt(std::abs(sol.value - ref)));
    }
    const double secs = elapsed_s(t0);
    ok &= check(secs < 60.0, detail, "runtime " + fmt(secs) + " s exceeds 60 s");
    if (ok) detail = "max |J - SAA| = " + fmt(worst) + ", " + fmt(secs) + " s";
    return ok;
}

// 2. Kelly closed form on the two-sample fixture.
bool criterion_kelly(std::string& detail) {
    auto sol = dro::cutting_plane(fixtures::kelly_problem());
    const double err = std::abs(sol.u_star[0] - 0.5556);
    detail = "u* = " + std::to_string(sol.u_star[0]);
    return sol.status == dro::SolveStatus::optimal && err <= 1e-4;
}

// 3. Affine exactness: relaxation value equals the exact worst case computed
//    by the brute-force primal oracle, and all per-sample gaps vanish.
bool criterion_affine(std::string& detail) {
    bool ok = true;
    double worst_v = 0.0, worst_d = 0.0;
    for (std::uint64_t seed = 101; seed <= 120; ++seed) {
        const int d = 1 + static_cast<int>(seed % 3);
        auto pb = fixtures::random_problem(seed, d, 8 + static_cast<int>(seed % 9), 0.02,
                                           /*affine=*/true);
        auto sol = dro::cutting_plane(pb);
        ok &= check(sol.status == dro::SolveStatus::optimal, detail, "status not optimal");
        const double exact = oracle::affine_worst_case_at(pb, sol.u_star);
        worst_v = std::max(worst_v, std::abs(sol.value - exact));
        ok &= check(std::abs(sol.value - exact) <= 1e-6, detail,
                    "seed " + std::to_string(seed) + ": |J - exact| = " +
                        fmt(std::abs(sol.value - exact)));
        const auto report = certificate::empirical_gap(sol, pb);
        worst_d = std::max(worst_d, report.delta_max);
        ok &= check(report.delta_max <= 1e-6, detail,
                    "seed " + std::to_string(seed) + ": delta_max = " + fmt(report.delta_max));
    }
    if (ok) detail = "max |J - exact| = " + fmt(worst_v) + ", max delta = " + fmt(worst_d);
    return ok;
}

// 4. Cutting plane equals the one-shot solve over all 2^d vertices, with the
//    outer iteration budget 2^d * N.
bool criterion_full_enum(std::string& detail) {
    bool ok = true;
    double worst = 0.0;
    for (std::uint64_t seed = 201; seed <= 208; ++seed) {
        const int d = 1 + static_cast<int>(seed % 4);
        auto pb = fixtures::random_problem(seed, d, 10, 0.01);
        auto sol = dro::cutting_plane(pb);
        ok &= check(sol.status == dro::SolveStatus::optimal, detail, "status not optimal");
        dro::ActiveSets all(static_cast<size_t>(pb.sample_count()));
        for (auto& sets : all)
            for (std::uint64_t mask = 0; mask < pb.support.vertex_count(); ++mask)
                sets.push_back(mask);
        const double one_shot = dro::master_solve(pb, all).objective;
        worst = std::max(worst, std::abs(sol.value - one_shot));
        ok &= check(std::abs(sol.value - one_shot) <= 1e-6, detail,
                    "seed " + std::to_string(seed) + ": |J - one-shot| = " +
                        fmt(std::abs(sol.value - one_shot)));
        ok &= check(sol.iterations <= (1 << d) * pb.sample_count(), detail,
                    "iteration budget exceeded");
    }
    if (ok) detail = "max |J - one-shot| = " + fmt(worst);
    return ok;
}

// 5. Gap certificate on 50 seeded log instances with optimal status.
bool criterion_gap(std::string& detail) {
    bool ok = true;
    int satisfied = 0;
    double max_util = 0.0;
    for (std::uint64_t seed = 301; seed <= 350; ++seed) {
        const int d = 1 + static_cast<int>(seed % 3);
        const double eps = 0.002 + 0.002 * static_cast<double>(seed % 8);
        auto pb = fixtures::random_problem(seed, d, 6 + static_cast<int>(seed % 12), eps);
        auto sol = dro::cutting_plane(pb);
        ok &= check(sol.status == dro::SolveStatus::optimal, detail,
                    "seed " + std::to_string(seed) + ": status not optimal");
        const auto report = certificate::empirical_gap(sol, pb);
        if (report.delta_max <= report.bound + 1e-6) ++satisfied;
        if (std::isfinite(report.utilization)) max_util = std::max(max_util, report.utilization);
        ok &= check(report.delta_max <= report.bound + 1e-6, detail,
                    "seed " + std::to_string(seed) + ": delta_max " + fmt(report.delta_max) +
                        " > bound " + fmt(report.bound));
    }
    detail = std::to_string(satisfied) + "/50 satisfied, max utilization = " + fmt(max_util) +
             (detail.empty() ? "" : ("; first failure: " + detail));
    return ok;
}

// 6. Value nonincreasing over the radius grid.
bool criterion_monotone(std::string& detail) {
    auto base = fixtures::random_problem(42, 2, 20, 0.0);
    double prev = std::numeric_limits<double>::infinity();
    std::string values;
    for (double eps : {0.0, 1e-3, 1e-2, 1e-1}) {
        auto pb = base;
        pb.epsilon = eps;
        auto sol = dro::cutting_plane(pb);
        if (sol.status != dro::SolveStatus::optimal) {
            detail = "status not optimal at eps = " + fmt(eps);
            return false;
        }
        if (sol.value > prev + 1e-8) {
            detail = "J increased at eps = " + fmt(eps);
            return false;
        }
        values += fmt(sol.value) + " ";
        prev = sol.value;
    }
    detail = "J(eps) = " + values;
    return true;
}

// 7. Transport oracle on 100 seeded small instances.
bool criterion_transport(std::string& detail) {
    auto eng = rng::engine(1234);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int na = 1 + static_cast<int>(rng::index(eng, 4));
        const int nb = 1 + static_cast<int>(rng::index(eng, 4));
        const int d = 1 + static_cast<int>(rng::index(eng, 3));
        MatrixXd a(na, d), b(nb, d);
        for (int i = 0; i < na; ++i)
            for (int k = 0; k < d; ++k) a(i, k) = 2.0 * rng::uniform01(eng) - 1.0;
        for (int i = 0; i < nb; ++i)
            for (int k = 0; k < d; ++k) b(i, k) = 2.0 * rng::uniform01(eng) - 1.0;
        transport::EmpiricalDistribution A(a), B(b);
        const double p = trial % 3 == 0 ? 2.0 : 1.0;
        const double fast = transport::wasserstein_p(A, B, p).distance;
        const double brute = oracle::transport_bruteforce(A, B, p);
        worst = std::max(worst, std::abs(fast - brute));
        if (std::abs(fast - brute) > 1e-8) {
            detail = "trial " + std::to_string(trial) + ": |W - brute| = " +
                     fmt(std::abs(fast - brute));
            return false;
        }
    }
    detail = "max |W - brute| = " + fmt(worst);
    return true;
}

// 8. Long-run floor on the Kelly fixture, K = 1e5 draws, < 30 s.
bool criterion_long_run(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    auto pb = fixtures::kelly_problem();
    auto sol = dro::cutting_plane(pb);
    auto stream = montecarlo::SyntheticStream::from_empirical(pb.empirical, 2024);
    const auto report = montecarlo::verify_long_run(pb, sol, stream, 100000);
    const double secs = elapsed_s(t0);
    detail = "realized = " + fmt(report.realized_rate) + ", floor = " +
             fmt(report.j_cvx - 3 * report.stderr_rate) + ", " + fmt(secs) + " s";
    return report.pass && secs < 30.0;
}

// 9. Viability invariance over 1e6 simulated steps.
bool criterion_viability(std::string& detail) {
    auto pb = fixtures::kelly_problem();
    auto sol = dro::cutting_plane(pb);
    if (!model::is_viable(pb.growth, sol.u_star, pb.support, pb.control)) {
        detail = "solved control not viable";
        return false;
    }
    auto stream = montecarlo::SyntheticStream::from_empirical(pb.empirical, 77);
    const auto report = montecarlo::verify_viability(pb.growth, sol.u_star, pb.support,
                                                     pb.control.eta, stream, 1000000);
    detail = std::to_string(report.violations) + " violations in 1e6 steps, min growth = " +
             fmt(report.min_growth);
    return report.violations == 0;
}

// 10. CAGR consistency with the reported FV/T pairs.
bool criterion_cagr(std::string& detail) {
    VectorXd w(2);
    w << 1.0, 1.2352;
    const double c1 = backtest::compute_metrics(w, VectorXd::Zero(1), 3.404).cagr;
    w << 1.0, 1.1451;
    const double c2 = backtest::compute_metrics(w, VectorXd::Zero(1), 3.404).cagr;
    detail = "CAGR(1.2352) = " + fmt(c1) + ", CAGR(1.1451) = " + fmt(c2);
    return std::abs(c1 - 0.0641) <= 2e-4 && std::abs(c2 - 0.0406) <= 2e-4;
}

// 11. Transaction-cost sweep: mean chosen horizon nondecreasing from 5 bps
//     to 50 bps on the seeded drifting panel.
bool criterion_tc_sweep(std::string& detail) {
    const auto csv = fixtures::synthetic_panel_csv(2718, 170, 2, 0.0012, 0.008);
    const auto path = fixtures::write_temp("acceptance", "tc_panel.csv", csv);
    const auto panel = data::load_csv(path);
    backtest::BacktestConfig cfg;
    cfg.scheme = backtest::Scheme::adaptive;
    cfg.lookback = 40;
    cfg.horizons = {5, 21};
    cfg.beta = 0.2;
    cfg.eta = 0.5;
    cfg.bootstrap_reps = 8;
    cfg.seed = 31;
    const auto rows = backtest::tc_sensitivity(panel, cfg, {5e-4, 50e-4});
    detail = "mean n: " + fmt(rows[0].mean_horizon) + " @5bps -> " + fmt(rows[1].mean_horizon) +
             " @50bps";
    return rows[1].mean_horizon >= rows[0].mean_horizon && rows[0].n_rebalances > 0;
}

// 12. Byte-identical outputs across two runs of the same configuration.
bool criterion_determinism(std::string& detail) {
    const auto csv = fixtures::synthetic_panel_csv(99, 90, 2);
    const auto data_path = fixtures::write_temp("acceptance", "det_panel.csv", csv);
    nlohmann::json cfg_doc{{"data", {{"prices_csv", data_path}}},
                           {"horizons", {5, 10}},
                           {"lookback", 40},
                           {"beta", 0.2},
                           {"bootstrap", {{"replicates", 8}}},
                           {"seed", 12}};
    const auto cfg = fixtures::write_temp("acceptance", "det_config.json", cfg_doc.dump(2));
    auto run = [&](const std::string& tag) {
        const auto out = (fs::temp_directory_path() / ("wdrc_acc_" + tag)).string();
        fs::remove_all(out);
        if (cli::dispatch("backtest", cfg, out, {}, {}) != 0) return std::string();
        if (cli::dispatch("report", "", out, {}, {}) != 0) return std::string();
        return out;
    };
    const auto a = run("a"), b = run("b");
    if (a.empty() || b.empty()) {
        detail = "pipeline failed";
        return false;
    }
    for (const char* f : {"/ledger.csv", "/events.csv", "/gaps.csv", "/metrics.json",
                          "/wealth.svg", "/chosen_n.svg", "/gap_timeseries.svg", "/summary.md"}) {
        std::ifstream fa(a + f, std::ios::binary), fb(b + f, std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str().empty() || sa.str() != sb.str()) {
            detail = std::string("mismatch in ") + f;
            return false;
        }
    }
    detail = "8 artifacts byte-identical";
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. SAA reduction at eps = 0", criterion_saa},
        {"2. Kelly closed form", criterion_kelly},
        {"3. Affine exactness", criterion_affine},
        {"4. Full-enumeration equivalence", criterion_full_enum},
        {"5. Gap certificate", criterion_gap},
        {"6. Monotonicity in eps", criterion_monotone},
        {"7. Transport oracle", criterion_transport},
        {"8. Long-run floor", criterion_long_run},
        {"9. Viability invariance", criterion_viability},
        {"10. CAGR consistency", criterion_cagr},
        {"11. TC-sweep direction", criterion_tc_sweep},
        {"12. Determinism", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", c.name,
                    detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
