#pragma once

#include "wdrc/dro.hpp"

namespace wdrc::dro::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Strictly interior point of {u >= lower, sum u <= cap, margin(u) > eta}.
// Returns false when the viable set has no interior.
bool interior_control(const RelaxationProblem& pb, VectorXd& u0);

struct IpmResult {
    VectorXd u;
    double lambda = 0.0;
    VectorXd s;
    MatrixXd z;          // N x d
    double objective = 0.0;  // unscaled: -eps^p*lambda + mean(s)
    double gap = 0.0;        // final complementarity surrogate
    bool converged = false;
    int iterations = 0;
};

// Primal-dual Newton solver for the master problem on the given active sets.
IpmResult solve_master(const RelaxationProblem& pb, const ActiveSets& active);

struct SaaResult {
    VectorXd u;
    double mean_utility = 0.0;  // (1/N) sum_j U(Phi(u, xhat_j))
    bool converged = false;
    int iterations = 0;
};

// Exact sample-average problem (the epsilon = 0 degenerate ball).
SaaResult solve_saa(const RelaxationProblem& pb);

}  // namespace wdrc::dro::detail
