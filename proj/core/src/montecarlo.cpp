#include "wdrc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wdrc/rng.hpp"
#include "wdrc/transport.hpp"

namespace wdrc::montecarlo {

SyntheticStream::SyntheticStream(MatrixXd atoms_, VectorXd probs_, std::uint64_t seed_)
    : atoms(std::move(atoms_)), probs(std::move(probs_)), seed(seed_) {
    if (atoms.rows() < 1 || atoms.rows() != probs.size())
        throw CoverageError("stream: atom/probability mismatch");
    double sum = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) throw CoverageError("stream: negative probability");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw CoverageError("stream: probabilities must sum to 1");
}

SyntheticStream SyntheticStream::from_empirical(const transport::EmpiricalDistribution& emp,
                                                std::uint64_t seed_) {
    return SyntheticStream(emp.samples, emp.weights, seed_);
}

VectorXd SyntheticStream::draw(std::uint64_t k) const {
    auto eng = rng::engine(rng::substream(seed, k));
    const double t = rng::uniform01(eng);
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (t < acc) return atoms.row(i).transpose();
    }
    return atoms.row(atoms.rows() - 1).transpose();
}

LongRunReport verify_long_run(const dro::RelaxationProblem& problem,
                              const dro::RelaxationSolution& solution,
                              const SyntheticStream& stream, long draws) {
    if (solution.status != dro::SolveStatus::optimal)
        throw CoverageError("verify_long_run: solution status is not optimal");
    if (draws < 1) throw CoverageError("verify_long_run: need at least one draw");

    LongRunReport report;
    report.j_cvx = solution.value;
    report.draws = draws;
    report.distance_to_empirical =
        transport::wasserstein_p(transport::EmpiricalDistribution(stream.atoms, stream.probs),
                                 problem.empirical, problem.p)
            .distance;
    if (report.distance_to_empirical > problem.epsilon + 1e-12)
        throw CoverageError("verify_long_run: coverage violated, W_p = " +
                            std::to_string(report.distance_to_empirical) + " > epsilon = " +
                            std::to_string(problem.epsilon));

    const int n = problem.growth.period;
    double mean = 0.0, m2 = 0.0, log_sum = 0.0;
    for (long k = 0; k < draws; ++k) {
        const VectorXd x = stream.draw(static_cast<std::uint64_t>(k));
        const double phi = model::growth_factor(problem.growth, solution.u_star, x);
        const double util = problem.utility(phi);
        const double delta = util - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (util - mean);
        log_sum += std::log(phi);
    }
    const double var = draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
    report.realized_rate = mean / n;
    report.log_wealth_rate = log_sum / (static_cast<double>(draws) * n);
    report.stderr_rate = std::sqrt(std::max(var, 0.0) / static_cast<double>(draws)) / n;
    report.pass = report.realized_rate >= report.j_cvx - 3.0 * report.stderr_rate;
    return report;
}

ViabilityReport verify_viability(const model::AffineGrowthModel& growth, const VectorXd& u,
                                 const model::BoxSupport& support, double eta,
                                 const SyntheticStream& stream, long draws) {
    ViabilityReport report;
    report.draws = draws;
    report.min_growth = std::numeric_limits<double>::infinity();
    for (long k = 0; k < draws; ++k) {
        const VectorXd x = stream.draw(static_cast<std::uint64_t>(k));
        if (!support.contains(x))
            throw CoverageError("verify_viability: draw outside the declared support");
        const double phi = model::growth_factor(growth, u, x);
        report.min_growth = std::min(report.min_growth, phi);
        if (!(phi >= eta) || !(phi > 0.0)) {
            ++report.violations;
            if (report.first_violation < 0) {
                report.first_violation = k;
                report.offending_draw = x;
            }
        }
    }
    report.pass = report.violations == 0;
    return report;
}

}  // namespace wdrc::montecarlo
