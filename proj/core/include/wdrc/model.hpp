#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wdrc::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Axis-aligned compact disturbance support. Vertices are indexed by a bit
/// mask: bit i set selects hi[i], clear selects lo[i].
struct BoxSupport {
    VectorXd lo;
    VectorXd hi;

    BoxSupport() = default;
    BoxSupport(VectorXd lo_, VectorXd hi_);

    int dim() const { return static_cast<int>(lo.size()); }
    std::uint64_t vertex_count() const { return std::uint64_t{1} << dim(); }
    VectorXd vertex(std::uint64_t mask) const;
    bool contains(const VectorXd& x, double tol = 0.0) const;
    /// Diameter under the l1 ground norm: sum_i (hi - lo).
    double diameter() const { return (hi - lo).sum(); }
};

/// Affine growth factor Phi_n(u, x) = u'x + c_n(u), with
/// c_n(u) = (1 + riskfree_n) - sum_i friction[i] * |u[i]|.
struct AffineGrowthModel {
    VectorXd friction;   // per-asset proportional cost, each in [0,1)
    double riskfree_n = 0.0;
    int period = 1;      // n, trading days per sampling interval

    AffineGrowthModel() = default;
    AffineGrowthModel(VectorXd friction_, double riskfree_n_, int period_);

    int dim() const { return static_cast<int>(friction.size()); }
    double cash_growth(const VectorXd& u) const;  // c_n(u)
};

/// Concave nondecreasing stage utility: log, or affine a*t + b with a >= 0.
struct Utility {
    enum class Kind { log_utility, affine };
    Kind kind = Kind::log_utility;
    double a = 1.0;  // affine slope
    double b = 0.0;  // affine intercept

    static Utility log() { return Utility{Kind::log_utility, 1.0, 0.0}; }
    static Utility affine(double a_, double b_);

    bool is_log() const { return kind == Kind::log_utility; }
    double operator()(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;
    /// Lower edge of dom(U): 0 for log, -inf for affine.
    double domain_lower_bound() const;
};

/// Long-only control polytope {u : lower <= u, sum u <= leverage_cap} plus
/// the viability margin eta used by is_viable.
struct ControlSet {
    VectorXd lower;          // componentwise lower bounds, >= 0
    double leverage_cap = 1.0;
    double eta = 0.5;        // viability margin, > 0

    ControlSet() = default;
    ControlSet(VectorXd lower_, double leverage_cap_, double eta_);
    static ControlSet long_only(int dim, double leverage_cap = 1.0, double eta = 0.5);

    int dim() const { return static_cast<int>(lower.size()); }
    /// Polytope membership only (no margin check).
    bool contains_polytope(const VectorXd& u, double tol = 1e-12) const;
};

/// Phi_n(u, x). Not clamped: may be <= 0 for inadmissible u; viability is
/// gated upstream.
double growth_factor(const AffineGrowthModel& model, const VectorXd& u, const VectorXd& x);

/// min over the support of Phi_n(u, .); the sign-selected vertex rule
/// (u_i >= 0 picks lo[i], u_i < 0 picks hi[i]).
double worst_margin(const AffineGrowthModel& model, const VectorXd& u, const BoxSupport& support);

/// Mask of the sign-selected worst vertex for the given control.
std::uint64_t worst_vertex_mask(const VectorXd& u);

bool is_viable(const AffineGrowthModel& model, const VectorXd& u, const BoxSupport& support,
               const ControlSet& controls);

/// Gradient-Lipschitz constant L_n(u) of the stage reward x -> U(Phi_n(u,x))
/// on the support (dual l-inf norm): log utility gives |u|_inf^2 / margin^2,
/// affine gives 0. Throws for log utility when the margin is not positive.
double smoothness_constant(const AffineGrowthModel& model, const Utility& utility,
                           const VectorXd& u, const BoxSupport& support);

double diameter(const BoxSupport& support);

}  // namespace wdrc::model
