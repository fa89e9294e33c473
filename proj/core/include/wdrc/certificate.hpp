#pragma once

#include <Eigen/Dense>

#include "wdrc/dro.hpp"
#include "wdrc/model.hpp"

namespace wdrc::certificate {

using Eigen::VectorXd;

/// Per-sample interchange-gap diagnostics against the a-priori bound
/// B = (1/2) L_n D^2.
struct GapReport {
    VectorXd delta;           // per-sample gap estimates
    double delta_max = 0.0;
    double bound = 0.0;       // B
    double utilization = 0.0; // delta_max / B; 0 when both vanish
    bool satisfied = false;   // delta_max <= B + tau_gap
};

inline constexpr double kGapTolerance = 1e-6;  // tau_gap, absorbs solver noise

/// A-posteriori bound at a given viable control:
/// (1/2)(|u|_inf^2 / margin(u)^2) D^2 for log utility, 0 for affine.
/// Throws when the control is not viable.
double theoretical_bound(const model::AffineGrowthModel& growth, const model::Utility& utility,
                         const VectorXd& u, const model::BoxSupport& support);

/// A-priori envelope over the whole viable set:
/// (1/2)(sup |u|_inf^2 / eta^2) D^2 for log utility, 0 for affine.
double theoretical_bound_apriori(const model::AffineGrowthModel& growth,
                                 const model::Utility& utility, const model::ControlSet& control,
                                 const model::BoxSupport& support);

/// Brute-force primal value of the inner problem for sample j:
///   inf_x [ U(Phi(u,x)) + lambda |x - xhat_j|_1^p ].
/// Affine utility with p = 1 is exact by per-coordinate minimization; log
/// utility with p = 1 is exact by cell-vertex enumeration while 3^d stays
/// small; otherwise an upper estimate from vertices, the sample point, a
/// 33-point per-coordinate grid and coordinate-descent refinement.
double primal_value(const VectorXd& u, double lambda, int sample_index,
                    const dro::RelaxationProblem& problem);

/// Empirical gap report at a solved point: per sample,
///   delta_j = P_j(u*, lambda*) - [min over all vertices of the dual cut at
///             z*_j] which upper-bounds the true interchange gap, so
/// delta_max <= B is a conservative pass of the bound check.
GapReport empirical_gap(const dro::RelaxationSolution& solution,
                        const dro::RelaxationProblem& problem);

}  // namespace wdrc::certificate
