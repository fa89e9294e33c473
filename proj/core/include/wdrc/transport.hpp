#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace wdrc::transport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finitely supported distribution: N samples in R^d with nonnegative
/// weights summing to one (uniform by default).
struct EmpiricalDistribution {
    MatrixXd samples;  // N x d
    VectorXd weights;  // length N

    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(MatrixXd samples_);
    EmpiricalDistribution(MatrixXd samples_, VectorXd weights_);

    int size() const { return static_cast<int>(samples.rows()); }
    int dim() const { return static_cast<int>(samples.cols()); }
};

struct TransportPlan {
    MatrixXd pi;  // N_A x N_B, nonnegative, marginals = weights
    double cost = 0.0;  // sum pi_ij * |a_i - b_j|_1^p
};

struct WassersteinResult {
    double distance = 0.0;  // cost^(1/p)
    TransportPlan plan;
};

/// Exact p-Wasserstein distance under the l1 ground norm, solved as the
/// dense bipartite transportation LP (network simplex). Deterministic.
WassersteinResult wasserstein_p(const EmpiricalDistribution& A, const EmpiricalDistribution& B,
                                double p);

}  // namespace wdrc::transport
