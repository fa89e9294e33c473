#include "wdrc/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace wdrc::certificate {

namespace {

// max over the viable polytope of u_i, exact for the long-only structure:
// at an optimum every other coordinate sits at its lower bound except at
// most one helper raised to satisfy the margin row, so enumerate pairs.
double max_coordinate(int i, const model::ControlSet& control, const VectorXd& gamma, double rhs,
                      double cap) {
    const VectorXd& lower = control.lower;
    const int m = control.dim();
    const double slack0 = gamma.dot(lower) - rhs;  // margin slack with all-lower
    double best = -std::numeric_limits<double>::infinity();

    auto try_pair = [&](int helper) {
        // Raise u_i (and optionally u_helper) from the lower bounds.
        double budget = cap - lower.sum();
        if (budget < 0) return;
        if (helper < 0) {
            double ui = budget;
            if (gamma[i] < 0) ui = std::min(ui, slack0 / -gamma[i]);
            if (ui >= -1e-15 && slack0 + gamma[i] * std::max(ui, 0.0) >= -1e-12)
                best = std::max(best, lower[i] + std::max(ui, 0.0));
            return;
        }
        if (helper == i || gamma[helper] <= 0) return;
        // Margin binding: gamma_i ui + gamma_h uh = -slack0, spend the rest
        // of the budget greedily on u_i.
        // Solve with budget binding too: ui + uh = budget.
        const double det = gamma[i] - gamma[helper];
        if (std::abs(det) < 1e-18) return;
        const double ui = (-slack0 - gamma[helper] * budget) / det;
        const double uh = budget - ui;
        if (ui >= -1e-12 && uh >= -1e-12 &&
            gamma[i] * ui + gamma[helper] * uh >= -slack0 - 1e-9)
            best = std::max(best, lower[i] + std::max(ui, 0.0));
    };
    try_pair(-1);
    for (int h = 0; h < m; ++h) try_pair(h);
    return best;
}

}  // namespace

double theoretical_bound(const model::AffineGrowthModel& growth, const model::Utility& utility,
                         const VectorXd& u, const model::BoxSupport& support) {
    if (!utility.is_log()) return 0.0;
    const double L = model::smoothness_constant(growth, utility, u, support);
    const double D = support.diameter();
    return 0.5 * L * D * D;
}

double theoretical_bound_apriori(const model::AffineGrowthModel& growth,
                                 const model::Utility& utility, const model::ControlSet& control,
                                 const model::BoxSupport& support) {
    if (!utility.is_log()) return 0.0;
    const VectorXd gamma = support.lo - growth.friction;
    const double rhs = control.eta - (1.0 + growth.riskfree_n);  // gamma'u >= rhs
    double uinf = 0.0;
    for (int i = 0; i < control.dim(); ++i)
        uinf = std::max(uinf, max_coordinate(i, control, gamma, rhs, control.leverage_cap));
    uinf = std::max(uinf, 0.0);
    const double D = support.diameter();
    return 0.5 * (uinf * uinf) / (control.eta * control.eta) * D * D;
}

namespace {

double penalty(const VectorXd& x, const VectorXd& xhat, double lambda, double p) {
    const double l1 = (x - xhat).cwiseAbs().sum();
    return lambda * (p == 1.0 ? l1 : std::pow(l1, p));
}

double objective(const dro::RelaxationProblem& pb, const VectorXd& u, double lambda,
                 const VectorXd& xhat, const VectorXd& x) {
    return pb.utility(model::growth_factor(pb.growth, u, x)) + penalty(x, xhat, lambda, pb.p);
}

// Exact per-coordinate minimization for affine utility with p = 1.
double affine_exact(const dro::RelaxationProblem& pb, const VectorXd& u, double lambda,
                    const VectorXd& xhat) {
    const double base = pb.utility.a * pb.growth.cash_growth(u) + pb.utility.b;
    double acc = base;
    for (int i = 0; i < pb.dim(); ++i) {
        const double c = pb.utility.a * u[i];
        auto val = [&](double x) { return c * x + lambda * std::abs(x - xhat[i]); };
        double best = std::min(val(pb.support.lo[i]), val(pb.support.hi[i]));
        if (xhat[i] > pb.support.lo[i] && xhat[i] < pb.support.hi[i])
            best = std::min(best, val(xhat[i]));
        acc += best;
    }
    return acc;
}

// Exact cell-vertex enumeration for concave-plus-l1 objectives: within each
// orthant cell around xhat the penalty is affine, so the cell minimum sits
// at a point with coordinates in {lo_i, xhat_i, hi_i}.
double log_p1_exact(const dro::RelaxationProblem& pb, const VectorXd& u, double lambda,
                    const VectorXd& xhat) {
    const int d = pb.dim();
    VectorXd x(d);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<size_t>(d), 0);
    while (true) {
        for (int i = 0; i < d; ++i) {
            const int c = idx[static_cast<size_t>(i)];
            x[i] = c == 0 ? pb.support.lo[i] : (c == 1 ? xhat[i] : pb.support.hi[i]);
        }
        best = std::min(best, objective(pb, u, lambda, xhat, x));
        int k = 0;
        while (k < d && ++idx[static_cast<size_t>(k)] == 3) idx[static_cast<size_t>(k++)] = 0;
        if (k == d) break;
    }
    return best;
}

// Spec'd candidate scheme: vertices + sample + per-coordinate 33-point grids,
// then coordinate-descent refinement by golden section.
double multistart_estimate(const dro::RelaxationProblem& pb, const VectorXd& u, double lambda,
                           const VectorXd& xhat) {
    constexpr int kGrid = 33;
    const int d = pb.dim();
    auto value = [&](const VectorXd& x) { return objective(pb, u, lambda, xhat, x); };

    VectorXd best_x = xhat;
    double best = value(xhat);
    for (std::uint64_t mask = 0; mask < pb.support.vertex_count(); ++mask) {
        const VectorXd v = pb.support.vertex(mask);
        const double val = value(v);
        if (val < best) {
            best = val;
            best_x = v;
        }
    }
    for (int i = 0; i < d; ++i) {
        VectorXd x = xhat;
        for (int g = 0; g < kGrid; ++g) {
            x[i] = pb.support.lo[i] + (pb.support.hi[i] - pb.support.lo[i]) * g / (kGrid - 1.0);
            const double val = value(x);
            if (val < best) {
                best = val;
                best_x = x;
            }
        }
    }

    // Coordinate descent from the best candidate.
    VectorXd x = best_x;
    const double gr = 0.6180339887498949;
    for (int sweep = 0; sweep < 40; ++sweep) {
        double improved = 0.0;
        for (int i = 0; i < d; ++i) {
            double a = pb.support.lo[i], b = pb.support.hi[i];
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            auto coord = [&](double t) {
                VectorXd y = x;
                y[i] = t;
                return value(y);
            };
            double f1 = coord(x1), f2 = coord(x2);
            for (int k = 0; k < 80; ++k) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = coord(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = coord(x2);
                }
            }
            const double cand = std::min(f1, f2);
            const double t = f1 < f2 ? x1 : x2;
            if (cand < best - 1e-15) {
                improved += best - cand;
                best = cand;
                x[i] = t;
            }
        }
        if (improved < 1e-13) break;
    }
    return best;
}

}  // namespace

double primal_value(const VectorXd& u, double lambda, int sample_index,
                    const dro::RelaxationProblem& problem) {
    if (lambda < 0.0) throw dro::SolverError("primal_value: lambda must be >= 0");
    const VectorXd xhat = problem.empirical.samples.row(sample_index).transpose();
    if (!problem.utility.is_log() && problem.p == 1.0)
        return affine_exact(problem, u, lambda, xhat);
    if (problem.utility.is_log() && problem.p == 1.0 && problem.dim() <= 11)
        return std::min(log_p1_exact(problem, u, lambda, xhat),
                        multistart_estimate(problem, u, lambda, xhat));
    return multistart_estimate(problem, u, lambda, xhat);
}

GapReport empirical_gap(const dro::RelaxationSolution& solution,
                        const dro::RelaxationProblem& problem) {
    const int N = problem.sample_count();
    GapReport report;
    report.delta.resize(N);
    for (int j = 0; j < N; ++j) {
        const VectorXd zj = solution.z.row(j).transpose();
        const VectorXd xhat = problem.empirical.samples.row(j).transpose();
        double dual = std::numeric_limits<double>::infinity();
        for (std::uint64_t mask = 0; mask < problem.support.vertex_count(); ++mask) {
            const VectorXd v = problem.support.vertex(mask);
            const double phi = model::growth_factor(problem.growth, solution.u_star, v);
            dual = std::min(dual, problem.utility(phi) + zj.dot(v - xhat));
        }
        dual -= dro::omega_p(zj, solution.lambda_star, problem.p);
        report.delta[j] = primal_value(solution.u_star, solution.lambda_star, j, problem) - dual;
    }
    report.delta_max = report.delta.size() ? report.delta.maxCoeff() : 0.0;
    report.bound = theoretical_bound(problem.growth, problem.utility, solution.u_star,
                                     problem.support);
    if (report.bound == 0.0)
        report.utilization = report.delta_max <= kGapTolerance
                                 ? 0.0
                                 : std::numeric_limits<double>::infinity();
    else
        report.utilization = report.delta_max / report.bound;
    report.satisfied = report.delta_max <= report.bound + kGapTolerance;
    return report;
}

}  // namespace wdrc::certificate
