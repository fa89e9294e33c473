#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "wdrc/dro.hpp"
#include "wdrc/model.hpp"

namespace wdrc::montecarlo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Discrete i.i.d. disturbance generator: atoms inside a box support with
/// probabilities summing to one. Draw k of replicate streams derives from
/// (seed, k) via the documented substream recipe.
struct SyntheticStream {
    MatrixXd atoms;       // K_atoms x d
    VectorXd probs;
    std::uint64_t seed = 0;

    SyntheticStream() = default;
    SyntheticStream(MatrixXd atoms_, VectorXd probs_, std::uint64_t seed_);
    static SyntheticStream from_empirical(const transport::EmpiricalDistribution& emp,
                                          std::uint64_t seed);

    int dim() const { return static_cast<int>(atoms.cols()); }
    /// Draw index k of the stream (stateless; any order, any concurrency).
    VectorXd draw(std::uint64_t k) const;
};

struct LongRunReport {
    double j_cvx = 0.0;
    double realized_rate = 0.0;    // (1/(Kn)) sum U(Phi(u*, X_k))
    double log_wealth_rate = 0.0;  // (1/(Kn)) log V_K
    double stderr_rate = 0.0;
    bool pass = false;             // realized_rate >= j_cvx - 3 stderr
    long draws = 0;
    double distance_to_empirical = 0.0;
};

/// Long-run floor check: requires the coverage event (stream distribution
/// within epsilon of the problem empirical) and an optimal solution, draws K
/// disturbances and compares the realized average utility rate with J*_cvx.
LongRunReport verify_long_run(const dro::RelaxationProblem& problem,
                              const dro::RelaxationSolution& solution,
                              const SyntheticStream& stream, long draws);

struct ViabilityReport {
    long draws = 0;
    long violations = 0;
    long first_violation = -1;
    VectorXd offending_draw;
    double min_growth = 0.0;
    bool pass = false;
};

/// Trajectory invariance check: V_{k+1} >= eta V_k and V_{k+1} > 0 exactly,
/// no tolerance (algebraic given support membership of the draws).
ViabilityReport verify_viability(const model::AffineGrowthModel& growth, const VectorXd& u,
                                 const model::BoxSupport& support, double eta,
                                 const SyntheticStream& stream, long draws);

}  // namespace wdrc::montecarlo
