#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdrc/model.hpp"
#include "wdrc/transport.hpp"

namespace wdrc::dro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : SolverError {
    using SolverError::SolverError;
};

struct Tolerances {
    double feasibility = 1e-7;   // tau_feas
    double optimality = 1e-7;    // tau_opt
    int iteration_cap = 200;     // outer cutting-plane iterations
};

/// One fixed-horizon robust instance: empirical distribution, ambiguity
/// radius, growth model and the admissible control set.
struct RelaxationProblem {
    model::AffineGrowthModel growth;
    model::Utility utility;
    model::BoxSupport support;
    transport::EmpiricalDistribution empirical;
    double epsilon = 0.0;
    double p = 1.0;
    model::ControlSet control;
    Tolerances tol;

    int dim() const { return support.dim(); }
    int sample_count() const { return empirical.size(); }
    void validate() const;
};

enum class SolveStatus { optimal, iteration_cap, infeasible };
std::string to_string(SolveStatus s);

/// Active vertex sets, one list of vertex bit masks per sample index.
using ActiveSets = std::vector<std::vector<std::uint64_t>>;

struct RelaxationSolution {
    VectorXd u_star;
    double lambda_star = 0.0;
    VectorXd s;        // per-sample epigraph values
    MatrixXd z;        // N x d dual slopes
    double value = 0.0;  // J*_cvx(n), per-day rate (already divided by n)
    SolveStatus status = SolveStatus::optimal;
    int iterations = 0;
    std::vector<int> active_set_sizes;
    double max_residual = 0.0;
};

/// Candidate returned by one master solve over the current active sets.
struct MasterCandidate {
    VectorXd u;
    double lambda = 0.0;
    VectorXd s;
    MatrixXd z;
    double objective = 0.0;  // per-day rate
};

/// Dual regularizer of the Wasserstein penalty. Extended-valued: for p = 1
/// it is 0 when |z|_inf <= lambda and +inf otherwise; for p > 1 it is
/// (1/q)(p*lambda)^(1-q) |z|_inf^q with Omega(0,0) = 0 and
/// Omega(z,0) = +inf for z != 0.
double omega_p(const VectorXd& z, double lambda, double p);

/// Most violated extreme point for sample j: argmin over the 2^d box
/// vertices of U(Phi(u,v)) + z'(v - xhat), exact by enumeration (d <= 20).
std::pair<VectorXd, double> separation_oracle(const VectorXd& u, const VectorXd& z,
                                              const model::BoxSupport& support,
                                              const model::AffineGrowthModel& growth,
                                              const model::Utility& utility,
                                              const VectorXd& xhat);

/// Solve the master problem restricted to the given active vertex sets.
/// Returned point is feasible within tol.feasibility and optimal within
/// tol.optimality. Throws InfeasibleError when the viable set has no
/// interior.
MasterCandidate master_solve(const RelaxationProblem& problem, const ActiveSets& active);

/// Algorithm: alternate master_solve with exact separation until no vertex
/// constraint is violated beyond tau_feas. epsilon = 0 degenerates to the
/// exact sample-average problem (the ambiguity ball is the singleton
/// empirical) and is solved directly.
RelaxationSolution cutting_plane(const RelaxationProblem& problem);

struct HorizonSelection {
    int n_star = 0;
    std::map<int, RelaxationSolution> solutions;
};

/// Enumerate the candidate horizons, solve each independently (optionally in
/// parallel), return the argmax of the certified per-day value; ties break
/// toward the smaller horizon. Failures carry the horizon label.
HorizonSelection select_horizon(const std::map<int, RelaxationProblem>& problems, int jobs = 1);

}  // namespace wdrc::dro
