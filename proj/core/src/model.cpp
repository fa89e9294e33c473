#include "wdrc/model.hpp"

#include <cmath>
#include <limits>

namespace wdrc::model {

BoxSupport::BoxSupport(VectorXd lo_, VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw ModelError("BoxSupport: lo/hi dimension mismatch");
    if (lo.size() == 0) throw ModelError("BoxSupport: empty box");
    for (int i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw ModelError("BoxSupport: lo > hi at coordinate " + std::to_string(i));
}

VectorXd BoxSupport::vertex(std::uint64_t mask) const {
    VectorXd v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    return v;
}

bool BoxSupport::contains(const VectorXd& x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
}

AffineGrowthModel::AffineGrowthModel(VectorXd friction_, double riskfree_n_, int period_)
    : friction(std::move(friction_)), riskfree_n(riskfree_n_), period(period_) {
    if (friction.size() == 0) throw ModelError("AffineGrowthModel: empty friction vector");
    for (int i = 0; i < friction.size(); ++i)
        if (friction[i] < 0.0 || friction[i] >= 1.0)
            throw ModelError("AffineGrowthModel: friction outside [0,1)");
    if (period < 1) throw ModelError("AffineGrowthModel: period must be >= 1");
}

double AffineGrowthModel::cash_growth(const VectorXd& u) const {
    if (u.size() != friction.size()) throw ModelError("cash_growth: dimension mismatch");
    double tc = 0.0;
    for (int i = 0; i < u.size(); ++i) tc += friction[i] * std::abs(u[i]);
    return 1.0 + riskfree_n - tc;
}

Utility Utility::affine(double a_, double b_) {
    if (a_ < 0.0) throw ModelError("Utility::affine: slope must be >= 0");
    return Utility{Kind::affine, a_, b_};
}

double Utility::operator()(double t) const {
    if (kind == Kind::log_utility) {
        if (t <= 0.0) throw ModelError("log utility evaluated at nonpositive growth");
        return std::log(t);
    }
    return a * t + b;
}

double Utility::derivative(double t) const {
    if (kind == Kind::log_utility) {
        if (t <= 0.0) throw ModelError("log utility derivative at nonpositive growth");
        return 1.0 / t;
    }
    return a;
}

double Utility::second_derivative(double t) const {
    if (kind == Kind::log_utility) return -1.0 / (t * t);
    return 0.0;
}

double Utility::domain_lower_bound() const {
    return kind == Kind::log_utility ? 0.0 : -std::numeric_limits<double>::infinity();
}

ControlSet::ControlSet(VectorXd lower_, double leverage_cap_, double eta_)
    : lower(std::move(lower_)), leverage_cap(leverage_cap_), eta(eta_) {
    if (lower.size() == 0) throw ModelError("ControlSet: empty lower bound vector");
    for (int i = 0; i < lower.size(); ++i)
        if (lower[i] < 0.0) throw ModelError("ControlSet: short selling not supported (lower < 0)");
    if (leverage_cap < lower.sum()) throw ModelError("ControlSet: empty polytope (cap below lower bounds)");
    if (eta <= 0.0) throw ModelError("ControlSet: viability margin must be positive");
}

ControlSet ControlSet::long_only(int dim, double leverage_cap, double eta) {
    return ControlSet(VectorXd::Zero(dim), leverage_cap, eta);
}

bool ControlSet::contains_polytope(const VectorXd& u, double tol) const {
    if (u.size() != lower.size()) return false;
    for (int i = 0; i < u.size(); ++i)
        if (u[i] < lower[i] - tol) return false;
    return u.sum() <= leverage_cap + tol;
}

double growth_factor(const AffineGrowthModel& model, const VectorXd& u, const VectorXd& x) {
    if (u.size() != model.dim() || x.size() != model.dim())
        throw ModelError("growth_factor: dimension mismatch");
    double dot = 0.0;
    for (int i = 0; i < u.size(); ++i) dot += u[i] * x[i];  // fixed order, see verify_viability
    return dot + model.cash_growth(u);
}

std::uint64_t worst_vertex_mask(const VectorXd& u) {
    std::uint64_t mask = 0;
    for (int i = 0; i < u.size(); ++i)
        if (u[i] < 0.0) mask |= std::uint64_t{1} << i;  // ties (u_i == 0) pick lo
    return mask;
}

double worst_margin(const AffineGrowthModel& model, const VectorXd& u, const BoxSupport& support) {
    if (u.size() != support.dim() || u.size() != model.dim())
        throw ModelError("worst_margin: dimension mismatch");
    return growth_factor(model, u, support.vertex(worst_vertex_mask(u)));
}

bool is_viable(const AffineGrowthModel& model, const VectorXd& u, const BoxSupport& support,
               const ControlSet& controls) {
    if (!controls.contains_polytope(u)) return false;
    return worst_margin(model, u, support) >= controls.eta;
}

double smoothness_constant(const AffineGrowthModel& model, const Utility& utility,
                           const VectorXd& u, const BoxSupport& support) {
    if (!utility.is_log()) return 0.0;
    const double margin = worst_margin(model, u, support);
    if (margin <= 0.0) throw ModelError("smoothness_constant: control not viable (margin <= 0)");
    const double uinf = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    return (uinf * uinf) / (margin * margin);
}

double diameter(const BoxSupport& support) { return support.diameter(); }

}  // namespace wdrc::model
