#include "wdrc/dro.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "solver_detail.hpp"

namespace wdrc::dro {

namespace {
constexpr int kSeparationDimCap = 20;
}

void RelaxationProblem::validate() const {
    const int d = support.dim();
    if (growth.dim() != d) throw SolverError("problem: model/support dimension mismatch");
    if (control.dim() != d) throw SolverError("problem: control/support dimension mismatch");
    if (empirical.dim() != d) throw SolverError("problem: sample/support dimension mismatch");
    if (epsilon < 0.0) throw SolverError("problem: negative ambiguity radius");
    if (!(p >= 1.0) || !std::isfinite(p)) throw SolverError("problem: Wasserstein order must be >= 1");
    if (tol.iteration_cap < 1) throw SolverError("problem: iteration cap must be >= 1");
    if (!(tol.feasibility > 0.0) || !(tol.optimality > 0.0))
        throw SolverError("problem: tolerances must be positive");
    if (d > kSeparationDimCap)
        throw SolverError("problem: dimension " + std::to_string(d) +
                          " exceeds the exact-separation cap of 20");
    for (int j = 0; j < empirical.size(); ++j)
        if (!support.contains(empirical.samples.row(j).transpose(), 1e-9))
            throw SolverError("problem: sample " + std::to_string(j) + " outside the support box");
    if (utility.is_log() && control.eta <= 0.0)
        throw SolverError("problem: log utility requires a positive viability margin");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::iteration_cap: return "iteration_cap";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

double omega_p(const VectorXd& z, double lambda, double p) {
    const double zinf = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
    if (p == 1.0)
        return zinf <= lambda ? 0.0 : std::numeric_limits<double>::infinity();
    if (lambda == 0.0)
        return zinf == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double q = p / (p - 1.0);
    return (1.0 / q) * std::pow(p * lambda, 1.0 - q) * std::pow(zinf, q);
}

namespace {

// Gray-code scan over the 2^d vertices, tracking u'v and z'v incrementally.
std::pair<std::uint64_t, double> separate_mask(const VectorXd& u, const VectorXd& z,
                                               const model::BoxSupport& support,
                                               const model::AffineGrowthModel& growth,
                                               const model::Utility& utility,
                                               const VectorXd& xhat) {
    const int d = support.dim();
    if (d > kSeparationDimCap)
        throw SolverError("separation_oracle: dimension exceeds the exact-enumeration cap of 20");
    const double cash = growth.cash_growth(u);
    const double z_off = z.dot(xhat);

    double dot_u = u.dot(support.lo);
    double dot_z = z.dot(support.lo);
    std::uint64_t mask = 0;
    auto value_at = [&](double du, double dz) {
        return utility(du + cash) + dz - z_off;
    };
    double best_val = value_at(dot_u, dot_z);
    std::uint64_t best_mask = 0;

    const std::uint64_t count = support.vertex_count();
    for (std::uint64_t gidx = 1; gidx < count; ++gidx) {
        const int bit = std::countr_zero(gidx);
        const std::uint64_t flip = std::uint64_t{1} << bit;
        const double width = support.hi[bit] - support.lo[bit];
        if (mask & flip) {
            dot_u -= u[bit] * width;
            dot_z -= z[bit] * width;
            mask &= ~flip;
        } else {
            dot_u += u[bit] * width;
            dot_z += z[bit] * width;
            mask |= flip;
        }
        const double val = value_at(dot_u, dot_z);
        if (val < best_val) {
            best_val = val;
            best_mask = mask;
        }
    }
    return {best_mask, best_val};
}

double residual_over_active(const RelaxationProblem& pb, const detail::IpmResult& cand,
                            const ActiveSets& active) {
    double worst = 0.0;
    for (int j = 0; j < pb.sample_count(); ++j) {
        const VectorXd xhat = pb.empirical.samples.row(j).transpose();
        const double om = omega_p(cand.z.row(j).transpose(), cand.lambda, pb.p);
        for (std::uint64_t mask : active[static_cast<size_t>(j)]) {
            const VectorXd v = pb.support.vertex(mask);
            const double phi = model::growth_factor(pb.growth, cand.u, v);
            const double lhs = pb.utility(phi) + cand.z.row(j).transpose().dot(v - xhat) - om;
            worst = std::max(worst, cand.s[j] - lhs);
        }
    }
    return worst;
}

ActiveSets initial_active_sets(const RelaxationProblem& pb) {
    // Sign-selected worst vertex of the unpenalized reward at u = 0; ties at
    // zero pick the all-lo vertex.
    const std::uint64_t mask = model::worst_vertex_mask(VectorXd::Zero(pb.dim()));
    return ActiveSets(static_cast<size_t>(pb.sample_count()), std::vector<std::uint64_t>{mask});
}

}  // namespace

std::pair<VectorXd, double> separation_oracle(const VectorXd& u, const VectorXd& z,
                                              const model::BoxSupport& support,
                                              const model::AffineGrowthModel& growth,
                                              const model::Utility& utility,
                                              const VectorXd& xhat) {
    auto [mask, value] = separate_mask(u, z, support, growth, utility, xhat);
    return {support.vertex(mask), value};
}

MasterCandidate master_solve(const RelaxationProblem& problem, const ActiveSets& active) {
    problem.validate();
    if (active.size() != static_cast<size_t>(problem.sample_count()))
        throw SolverError("master_solve: active set count must match the sample count");
    for (const auto& sets : active)
        if (sets.empty()) throw SolverError("master_solve: empty active set");

    auto res = detail::solve_master(problem, active);
    MasterCandidate cand;
    cand.u = res.u;
    cand.lambda = res.lambda;
    cand.s = res.s;
    cand.z = res.z;
    cand.objective = res.objective / problem.growth.period;
    if (problem.epsilon == 0.0) {
        // Objective-flat lambda; pin the smallest feasible value.
        cand.lambda = problem.p == 1.0 ? res.z.cwiseAbs().maxCoeff() : res.lambda;
    }
    return cand;
}

RelaxationSolution cutting_plane(const RelaxationProblem& problem) {
    problem.validate();
    const int N = problem.sample_count();
    const int n = problem.growth.period;
    RelaxationSolution sol;

    if (problem.epsilon == 0.0) {
        // Singleton ambiguity ball: the problem is the exact sample average
        // maximization; lambda = 0 forces z = 0 and a zero interchange gap.
        detail::SaaResult saa;
        try {
            saa = detail::solve_saa(problem);
        } catch (const InfeasibleError&) {
            sol.status = SolveStatus::infeasible;
            sol.value = std::numeric_limits<double>::quiet_NaN();
            return sol;
        }
        sol.u_star = saa.u;
        sol.lambda_star = 0.0;
        sol.z = MatrixXd::Zero(N, problem.dim());
        sol.s.resize(N);
        for (int j = 0; j < N; ++j)
            sol.s[j] = problem.utility(
                model::growth_factor(problem.growth, saa.u, problem.empirical.samples.row(j).transpose()));
        sol.value = sol.s.mean() / n;
        sol.status = saa.converged ? SolveStatus::optimal : SolveStatus::iteration_cap;
        sol.iterations = 1;
        sol.active_set_sizes.assign(static_cast<size_t>(N), 1);
        sol.max_residual = 0.0;
        return sol;
    }

    ActiveSets active = initial_active_sets(problem);
    detail::IpmResult cand;
    int outer = 0;
    bool clean = false;
    double worst_violation = 0.0;
    for (outer = 1; outer <= problem.tol.iteration_cap; ++outer) {
        try {
            cand = detail::solve_master(problem, active);
        } catch (const InfeasibleError&) {
            sol.status = SolveStatus::infeasible;
            sol.value = std::numeric_limits<double>::quiet_NaN();
            return sol;
        }
        int added = 0;
        worst_violation = 0.0;
        for (int j = 0; j < N; ++j) {
            const VectorXd zj = cand.z.row(j).transpose();
            auto [mask, phi_star] =
                separate_mask(cand.u, zj, problem.support, problem.growth, problem.utility,
                              problem.empirical.samples.row(j).transpose());
            const double om = omega_p(zj, cand.lambda, problem.p);
            const double slack = phi_star - om - cand.s[j];
            if (slack < -problem.tol.feasibility) {
                worst_violation = std::max(worst_violation, -slack);
                auto& sets = active[static_cast<size_t>(j)];
                if (std::find(sets.begin(), sets.end(), mask) == sets.end()) {
                    sets.push_back(mask);
                    ++added;
                }
            }
        }
        if (added == 0) {
            clean = worst_violation <= 10.0 * problem.tol.feasibility;
            break;
        }
    }

    sol.u_star = cand.u;
    sol.lambda_star = cand.lambda;
    sol.s = cand.s;
    sol.z = cand.z;
    sol.value = cand.objective / n;
    sol.iterations = std::min(outer, problem.tol.iteration_cap);
    sol.active_set_sizes.clear();
    for (const auto& sets : active) sol.active_set_sizes.push_back(static_cast<int>(sets.size()));
    sol.max_residual = std::max(residual_over_active(problem, cand, active), worst_violation);
    sol.status = (clean && outer <= problem.tol.iteration_cap) ? SolveStatus::optimal
                                                               : SolveStatus::iteration_cap;
    return sol;
}

HorizonSelection select_horizon(const std::map<int, RelaxationProblem>& problems, int jobs) {
    if (problems.empty()) throw SolverError("select_horizon: empty horizon set");
    std::vector<int> horizons;
    for (const auto& [n, pb] : problems) horizons.push_back(n);

    std::vector<RelaxationSolution> solutions(horizons.size());
    std::vector<std::string> failures(horizons.size());
    auto solve_one = [&](size_t idx) {
        try {
            solutions[idx] = cutting_plane(problems.at(horizons[idx]));
        } catch (const std::exception& e) {
            failures[idx] = e.what();
        }
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(horizons.size())));
    if (workers == 1) {
        for (size_t i = 0; i < horizons.size(); ++i) solve_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                size_t i;
                while ((i = next.fetch_add(1)) < horizons.size()) solve_one(i);
            });
        for (auto& th : pool) th.join();
    }

    HorizonSelection out;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < horizons.size(); ++i) {
        if (!failures[i].empty())
            throw SolverError("horizon " + std::to_string(horizons[i]) + ": " + failures[i]);
        if (solutions[i].status == SolveStatus::infeasible)
            throw InfeasibleError("horizon " + std::to_string(horizons[i]) + ": infeasible");
        out.solutions.emplace(horizons[i], solutions[i]);
        if (solutions[i].value > best) {  // strict: ties keep the smaller n
            best = solutions[i].value;
            out.n_star = horizons[i];
        }
    }
    return out;
}

}  // namespace wdrc::dro
