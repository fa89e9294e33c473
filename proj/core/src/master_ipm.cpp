#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "solver_detail.hpp"

// Primal-dual interior-point solver for the finite master program
//
//   max  -eps^p * lambda + (1/N) sum_j s_j
//   s.t. U(Phi(u,v)) + z_j'(v - xhat_j) - Omega_p(z_j, lambda) >= s_j
//                                  for every j and active vertex v,
//        |z_ji| <= lambda (p = 1)  or  |z_ji| <= t_j with the perspective
//        term Omega carried in the cut rows (p > 1),
//        u in the long-only polytope with the affine viability margin,
//        0 <= lambda <= kLambdaMax.
//
// All constraints are concave and smooth on the interior, so a feasible
// start Newton method on the perturbed KKT system applies directly. The
// variable order (u, lambda | s_j, z_j, t_j per sample) gives the Newton
// matrix a block-arrow shape; each step eliminates the per-sample blocks
// and solves a dense (m+1) Schur system.
//
// kLambdaMax exists so the central path stays bounded when eps is zero or
// tiny (lambda is then objective-flat); it is far outside any realistic
// optimum and the reported lambda is re-pinned afterwards for eps = 0.

namespace wdrc::dro::detail {

namespace {

constexpr double kLambdaMax = 1e6;

struct Llt {
    // Cholesky with a diagonal ridge fallback.
    static MatrixXd solve(MatrixXd A, const MatrixXd& rhs) {
        const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
        for (int attempt = 0; attempt < 6; ++attempt) {
            Eigen::LLT<MatrixXd> llt(A);
            if (llt.info() == Eigen::Success) return llt.solve(rhs);
            A.diagonal().array() += scale * std::pow(10.0, attempt - 12);
        }
        throw SolverError("interior point: Newton system not positive definite");
    }
};

struct OmegaDerivs {
    double value = 0.0, dl = 0.0, dt = 0.0, dll = 0.0, dlt = 0.0, dtt = 0.0;
};

// omega(lambda, t) = (1/q) p^(1-q) lambda^(1-q) t^q for p > 1.
OmegaDerivs omega_terms(double lambda, double t, double p) {
    const double q = p / (p - 1.0);
    const double c = std::pow(p, 1.0 - q);
    OmegaDerivs o;
    const double lq = std::pow(lambda, -q), tq = std::pow(t, q);
    o.value = (c / q) * std::pow(lambda, 1.0 - q) * tq;
    o.dl = (c * (1.0 - q) / q) * lq * tq;
    o.dt = c * std::pow(lambda, 1.0 - q) * std::pow(t, q - 1.0);
    o.dll = c * (q - 1.0) * std::pow(lambda, -q - 1.0) * tq;
    o.dlt = c * (1.0 - q) * lq * std::pow(t, q - 1.0);
    o.dtt = c * (q - 1.0) * std::pow(lambda, 1.0 - q) * std::pow(t, q - 2.0);
    return o;
}

struct Master {
    const RelaxationProblem& pb;
    const ActiveSets& active;
    int m, N, d, gdim, bdim;
    bool p1;
    double b_rf, eps_pow;
    VectorXd gamma;  // margin gradient lo - kappa

    struct Cut {
        int j;
        VectorXd a;  // vertex - kappa (gradient of Phi wrt u)
        VectorXd r;  // vertex - xhat_j
    };
    std::vector<Cut> cuts;

    // Variables.
    VectorXd g;   // (u, lambda)
    MatrixXd W;   // N x bdim: (s_j, z_j, [t_j])
    // Multipliers, grouped like the constraints.
    VectorXd nu_cut, f_cut;
    MatrixXd nu_box, f_box;  // N x 2d: (minus side i, plus side i)
    VectorXd nu_g, f_g;      // ulow(m), ucap, margin, lnn, lcap

    explicit Master(const RelaxationProblem& pb_, const ActiveSets& active_)
        : pb(pb_), active(active_) {
        m = pb.dim();
        N = pb.sample_count();
        d = m;
        p1 = pb.p == 1.0;
        gdim = m + 1;
        bdim = 1 + d + (p1 ? 0 : 1);
        b_rf = 1.0 + pb.growth.riskfree_n;
        eps_pow = std::pow(pb.epsilon, pb.p);
        gamma = pb.support.lo - pb.growth.friction;
        for (int j = 0; j < N; ++j)
            for (std::uint64_t mask : active[static_cast<size_t>(j)]) {
                Cut c;
                c.j = j;
                VectorXd v = pb.support.vertex(mask);
                c.a = v - pb.growth.friction;
                c.r = v - pb.empirical.samples.row(j).transpose();
                cuts.push_back(std::move(c));
            }
    }

    int n_constraints() const {
        return static_cast<int>(cuts.size()) + 2 * N * d + m + 4;
    }

    double phi_of(const Cut& c, const VectorXd& u) const { return c.a.dot(u) + b_rf; }

    // Constraint values for a candidate point; returns false when any
    // constraint (or a log domain) is violated. Polytope rows come first so
    // the utility is only evaluated on a positive margin.
    bool eval(const VectorXd& gv, const MatrixXd& Wv, VectorXd& fc, MatrixXd& fb,
              VectorXd& fg) const {
        const auto u = gv.head(m);
        const double lambda = gv[m];
        fg.resize(m + 4);
        for (int i = 0; i < m; ++i) fg[i] = u[i] - pb.control.lower[i];
        fg[m] = pb.control.leverage_cap - u.sum();
        fg[m + 1] = gamma.dot(u) + b_rf - pb.control.eta;
        fg[m + 2] = lambda;
        fg[m + 3] = kLambdaMax - lambda;
        if ((fg.array() <= 0.0).any()) return false;

        fb.resize(N, 2 * d);
        for (int j = 0; j < N; ++j) {
            const double bound = p1 ? lambda : Wv(j, 1 + d);
            for (int i = 0; i < d; ++i) {
                fb(j, 2 * i) = bound - Wv(j, 1 + i);
                fb(j, 2 * i + 1) = bound + Wv(j, 1 + i);
            }
        }
        if ((fb.array() <= 0.0).any()) return false;

        fc.resize(cuts.size());
        for (size_t k = 0; k < cuts.size(); ++k) {
            const Cut& c = cuts[k];
            const double phi = phi_of(c, u);
            if (phi <= 0.0) return false;
            double val = pb.utility(phi) + c.r.dot(Wv.row(c.j).segment(1, d)) - Wv(c.j, 0);
            if (!p1) val -= omega_terms(lambda, Wv(c.j, 1 + d), pb.p).value;
            fc[static_cast<long>(k)] = val;
            if (!(val > 0.0)) return false;
        }
        return true;
    }

    double objective(const VectorXd& gv, const MatrixXd& Wv) const {
        return -eps_pow * gv[m] + Wv.col(0).mean();
    }

    VectorXd grad_G_g() const {
        VectorXd v = VectorXd::Zero(gdim);
        v[m] = -eps_pow;
        return v;
    }

    void init() {
        VectorXd u0;
        if (!interior_control(pb, u0))
            throw InfeasibleError("master: viable control set has no interior");
        g.resize(gdim);
        g.head(m) = u0;
        g[m] = 1.0;
        W = MatrixXd::Zero(N, bdim);
        if (!p1) W.col(1 + d).setConstant(1.0);
        // Slack the epigraph values below the attainable cut minimum.
        VectorXd smin = VectorXd::Constant(N, std::numeric_limits<double>::infinity());
        for (const auto& c : cuts) {
            double val = pb.utility(phi_of(c, g.head(m)));
            if (!p1) val -= omega_terms(g[m], 1.0, pb.p).value;
            smin[c.j] = std::min(smin[c.j], val);
        }
        for (int j = 0; j < N; ++j) W(j, 0) = smin[j] - std::max(1.0, std::abs(smin[j]));

        VectorXd fc;
        MatrixXd fb;
        VectorXd fg;
        if (!eval(g, W, fc, fb, fg)) throw SolverError("master: initial point infeasible");
        const double mu0 = std::max(1e-2, std::abs(objective(g, W))) / n_constraints();
        f_cut = fc;
        f_box = fb;
        f_g = fg;
        nu_cut = (mu0 / fc.array()).matrix();
        nu_box = (mu0 / fb.array()).matrix();
        nu_g = (mu0 / fg.array()).matrix();
    }

    double comp_gap() const {
        double gap = nu_g.dot(f_g);
        gap += (nu_box.array() * f_box.array()).sum();
        if (f_cut.size()) gap += nu_cut.dot(f_cut);
        return gap;
    }

    // Dual residual ||grad G + sum nu grad f||_inf, assembled groupwise.
    double dual_residual() const {
        VectorXd rg = grad_G_g();
        MatrixXd rw = MatrixXd::Zero(N, bdim);
        rw.col(0).setConstant(1.0 / N);
        const auto u = g.head(m);
        const double lambda = g[m];
        for (size_t k = 0; k < cuts.size(); ++k) {
            const Cut& c = cuts[k];
            const double phi = phi_of(c, u);
            const double up = pb.utility.derivative(phi);
            const double nu = nu_cut[static_cast<long>(k)];
            rg.head(m) += nu * up * c.a;
            rw(c.j, 0) -= nu;
            rw.row(c.j).segment(1, d) += nu * c.r.transpose();
            if (!p1) {
                auto o = omega_terms(lambda, W(c.j, 1 + d), pb.p);
                rg[m] -= nu * o.dl;
                rw(c.j, 1 + d) -= nu * o.dt;
            }
        }
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < d; ++i) {
                const double nm = nu_box(j, 2 * i), np = nu_box(j, 2 * i + 1);
                if (p1)
                    rg[m] += nm + np;
                else
                    rw(j, 1 + d) += nm + np;
                rw(j, 1 + i) += -nm + np;
            }
        for (int i = 0; i < m; ++i) rg[i] += nu_g[i];
        rg.head(m).array() -= nu_g[m];
        rg.head(m) += nu_g[m + 1] * gamma;
        rg[m] += nu_g[m + 2] - nu_g[m + 3];
        return std::max(rg.cwiseAbs().maxCoeff(), rw.cwiseAbs().maxCoeff());
    }

    IpmResult run(double gap_tol, int iter_cap) {
        init();
        double sigma = 0.2;
        double alpha_prev = 1.0;
        int it = 0;
        for (; it < iter_cap; ++it) {
            const double gap = comp_gap();
            const double rd = dual_residual();
            if (gap <= gap_tol && rd <= 1e-8) break;
            sigma = alpha_prev > 0.8 ? 0.1 : 0.5;
            const double mu = sigma * gap / n_constraints();

            // Assemble the Newton system.
            MatrixXd SG = MatrixXd::Zero(gdim, gdim);
            VectorXd rhs_g = grad_G_g();
            std::vector<MatrixXd> Dj(N, MatrixXd::Zero(bdim, bdim));
            std::vector<MatrixXd> Cj(N, MatrixXd::Zero(gdim, bdim));
            MatrixXd rhs_w = MatrixXd::Zero(N, bdim);
            rhs_w.col(0).setConstant(1.0 / N);

            const auto u = g.head(m);
            const double lambda = g[m];
            struct CutCache {
                double up, upp, phi;
                OmegaDerivs o;
            };
            std::vector<CutCache> cache(cuts.size());
            for (size_t k = 0; k < cuts.size(); ++k) {
                const Cut& c = cuts[k];
                const double f = f_cut[static_cast<long>(k)];
                const double nu = nu_cut[static_cast<long>(k)];
                const double w1 = nu / f, cmu = mu / f;
                CutCache& cc = cache[k];
                cc.phi = phi_of(c, u);
                cc.up = pb.utility.derivative(cc.phi);
                cc.upp = pb.utility.second_derivative(cc.phi);
                if (!p1) cc.o = omega_terms(lambda, W(c.j, 1 + d), pb.p);

                // Gradient pieces: gu = up*a, glam = -o.dl, gs = -1, gz = r, gt = -o.dt.
                const VectorXd gu = cc.up * c.a;
                const double glam = p1 ? 0.0 : -cc.o.dl;
                const double gt = p1 ? 0.0 : -cc.o.dt;

                SG.topLeftCorner(m, m) += w1 * gu * gu.transpose() + (nu * -cc.upp) * c.a * c.a.transpose();
                if (!p1) {
                    SG.col(m).head(m) += w1 * glam * gu;
                    SG.row(m).head(m) += (w1 * glam * gu).transpose();
                    SG(m, m) += w1 * glam * glam + nu * cc.o.dll;
                }
                // Block couplings.
                Cj[c.j].block(0, 0, m, 1) += w1 * gu * -1.0;
                Cj[c.j].block(0, 1, m, d) += w1 * gu * c.r.transpose();
                if (!p1) {
                    Cj[c.j].block(0, 1 + d, m, 1) += w1 * gu * gt;
                    Cj[c.j](m, 0) += w1 * glam * -1.0;
                    Cj[c.j].row(m).segment(1, d) += w1 * glam * c.r.transpose();
                    Cj[c.j](m, 1 + d) += w1 * glam * gt + nu * cc.o.dlt;
                }
                MatrixXd gb = MatrixXd::Zero(bdim, 1);
                gb(0, 0) = -1.0;
                gb.block(1, 0, d, 1) = c.r;
                if (!p1) gb(1 + d, 0) = gt;
                Dj[c.j] += w1 * gb * gb.transpose();
                if (!p1) Dj[c.j](1 + d, 1 + d) += nu * cc.o.dtt;

                rhs_g.head(m) += cmu * gu;
                if (!p1) rhs_g[m] += cmu * glam;
                rhs_w(c.j, 0) -= cmu;
                rhs_w.row(c.j).segment(1, d) += cmu * c.r.transpose();
                if (!p1) rhs_w(c.j, 1 + d) += cmu * gt;
            }

            for (int j = 0; j < N; ++j)
                for (int i = 0; i < d; ++i)
                    for (int side = 0; side < 2; ++side) {
                        const double sgn = side == 0 ? -1.0 : 1.0;  // z coefficient
                        const double f = f_box(j, 2 * i + side);
                        const double nu = nu_box(j, 2 * i + side);
                        const double w1 = nu / f, cmu = mu / f;
                        if (p1) {
                            SG(m, m) += w1;
                            Cj[j](m, 1 + i) += w1 * sgn;
                            rhs_g[m] += cmu;
                        } else {
                            Dj[j](1 + d, 1 + d) += w1;
                            Dj[j](1 + d, 1 + i) += w1 * sgn;
                            Dj[j](1 + i, 1 + d) += w1 * sgn;
                            rhs_w(j, 1 + d) += cmu;
                        }
                        Dj[j](1 + i, 1 + i) += w1;
                        rhs_w(j, 1 + i) += cmu * sgn;
                    }

            for (int i = 0; i < m; ++i) {
                SG(i, i) += nu_g[i] / f_g[i];
                rhs_g[i] += mu / f_g[i];
            }
            {
                const double w1 = nu_g[m] / f_g[m], cmu = mu / f_g[m];
                SG.topLeftCorner(m, m).array() += w1;
                rhs_g.head(m).array() -= cmu;
            }
            {
                const double w1 = nu_g[m + 1] / f_g[m + 1], cmu = mu / f_g[m + 1];
                SG.topLeftCorner(m, m) += w1 * gamma * gamma.transpose();
                rhs_g.head(m) += cmu * gamma;
            }
            SG(m, m) += nu_g[m + 2] / f_g[m + 2] + nu_g[m + 3] / f_g[m + 3];
            rhs_g[m] += mu / f_g[m + 2] - mu / f_g[m + 3];

            // Schur elimination of the per-sample blocks.
            MatrixXd S = SG;
            VectorXd r = rhs_g;
            std::vector<MatrixXd> Dinv_Ct(N);
            std::vector<VectorXd> Dinv_rw(N);
            for (int j = 0; j < N; ++j) {
                Dinv_Ct[j] = Llt::solve(Dj[j], Cj[j].transpose());
                Dinv_rw[j] = Llt::solve(Dj[j], rhs_w.row(j).transpose());
                S -= Cj[j] * Dinv_Ct[j];
                r -= Cj[j] * Dinv_rw[j];
            }
            const VectorXd dg = Llt::solve(S, r);
            MatrixXd dW(N, bdim);
            for (int j = 0; j < N; ++j)
                dW.row(j) = (Dinv_rw[j] - Dinv_Ct[j] * dg).transpose();

            // Multiplier steps: dnu = (mu - nu f)/f - (nu/f) * grad_f'dx.
            VectorXd dnu_cut(cuts.size());
            for (size_t k = 0; k < cuts.size(); ++k) {
                const Cut& c = cuts[k];
                const CutCache& cc = cache[k];
                double gdx = cc.up * c.a.dot(dg.head(m)) - dW(c.j, 0) +
                             c.r.dot(dW.row(c.j).segment(1, d));
                if (!p1) gdx += -cc.o.dl * dg[m] - cc.o.dt * dW(c.j, 1 + d);
                const double f = f_cut[static_cast<long>(k)];
                const double nu = nu_cut[static_cast<long>(k)];
                dnu_cut[static_cast<long>(k)] = (mu - nu * f) / f - nu / f * gdx;
            }
            MatrixXd dnu_box(N, 2 * d);
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < d; ++i)
                    for (int side = 0; side < 2; ++side) {
                        const double sgn = side == 0 ? -1.0 : 1.0;
                        double gdx = (p1 ? dg[m] : dW(j, 1 + d)) + sgn * dW(j, 1 + i);
                        const double f = f_box(j, 2 * i + side);
                        const double nu = nu_box(j, 2 * i + side);
                        dnu_box(j, 2 * i + side) = (mu - nu * f) / f - nu / f * gdx;
                    }
            VectorXd dnu_g(m + 4);
            for (int i = 0; i < m; ++i) {
                const double gdx = dg[i];
                dnu_g[i] = (mu - nu_g[i] * f_g[i]) / f_g[i] - nu_g[i] / f_g[i] * gdx;
            }
            dnu_g[m] = (mu - nu_g[m] * f_g[m]) / f_g[m] - nu_g[m] / f_g[m] * (-dg.head(m).sum());
            dnu_g[m + 1] = (mu - nu_g[m + 1] * f_g[m + 1]) / f_g[m + 1] -
                           nu_g[m + 1] / f_g[m + 1] * gamma.dot(dg.head(m));
            dnu_g[m + 2] =
                (mu - nu_g[m + 2] * f_g[m + 2]) / f_g[m + 2] - nu_g[m + 2] / f_g[m + 2] * dg[m];
            dnu_g[m + 3] =
                (mu - nu_g[m + 3] * f_g[m + 3]) / f_g[m + 3] + nu_g[m + 3] / f_g[m + 3] * dg[m];

            // Longest multiplier-positive step, then primal feasibility, then
            // a merit backtrack on the KKT residual.
            double alpha = 1.0;
            auto cap_alpha = [&alpha](double nu, double dnu) {
                if (dnu < 0.0) alpha = std::min(alpha, -0.995 * nu / dnu);
            };
            for (long k = 0; k < dnu_cut.size(); ++k) cap_alpha(nu_cut[k], dnu_cut[k]);
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < 2 * d; ++i) cap_alpha(nu_box(j, i), dnu_box(j, i));
            for (int i = 0; i < m + 4; ++i) cap_alpha(nu_g[i], dnu_g[i]);

            VectorXd fc_new;
            MatrixXd fb_new;
            VectorXd fg_new;
            VectorXd g_new;
            MatrixXd W_new;
            const double theta0 = merit(mu);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                g_new = g + alpha * dg;
                W_new = W + alpha * dW;
                if (eval(g_new, W_new, fc_new, fb_new, fg_new)) {
                    // Tentatively update multipliers to measure the merit.
                    VectorXd nc = nu_cut + alpha * dnu_cut;
                    MatrixXd nb = nu_box + alpha * dnu_box;
                    VectorXd ng = nu_g + alpha * dnu_g;
                    const double theta = merit_at(mu, g_new, W_new, fc_new, fb_new, fg_new, nc, nb, ng);
                    if (theta <= (1.0 - 0.01 * alpha) * theta0 || alpha < 1e-10) {
                        g = g_new;
                        W = W_new;
                        f_cut = fc_new;
                        f_box = fb_new;
                        f_g = fg_new;
                        nu_cut = nc;
                        nu_box = nb;
                        nu_g = ng;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            alpha_prev = alpha;
            if (!accepted) break;  // stalled; report with converged flag below
        }

        IpmResult res_out;
        res_out.u = g.head(m);
        res_out.lambda = g[m];
        res_out.s = W.col(0);
        res_out.z = W.middleCols(1, d);
        res_out.objective = objective(g, W);
        res_out.gap = comp_gap();
        res_out.iterations = it;
        res_out.converged = res_out.gap <= gap_tol * 4.0;
        return res_out;
    }

    double merit(double mu) const {
        return merit_at(mu, g, W, f_cut, f_box, f_g, nu_cut, nu_box, nu_g);
    }

    double merit_at(double mu, const VectorXd& gv, const MatrixXd& Wv, const VectorXd& fc,
                    const MatrixXd& fb, const VectorXd& fg, const VectorXd& nc, const MatrixXd& nb,
                    const VectorXd& ng) const {
        // || grad G + sum nu grad f ||^2 + || nu.f - mu ||^2 at the candidate.
        VectorXd rg = grad_G_g();
        MatrixXd rw = MatrixXd::Zero(N, bdim);
        rw.col(0).setConstant(1.0 / N);
        const auto u = gv.head(m);
        const double lambda = gv[m];
        for (size_t k = 0; k < cuts.size(); ++k) {
            const Cut& c = cuts[k];
            const double up = pb.utility.derivative(phi_of(c, u));
            const double nu = nc[static_cast<long>(k)];
            rg.head(m) += nu * up * c.a;
            rw(c.j, 0) -= nu;
            rw.row(c.j).segment(1, d) += nu * c.r.transpose();
            if (!p1) {
                auto o = omega_terms(lambda, Wv(c.j, 1 + d), pb.p);
                rg[m] -= nu * o.dl;
                rw(c.j, 1 + d) -= nu * o.dt;
            }
        }
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < d; ++i) {
                const double nm = nb(j, 2 * i), np = nb(j, 2 * i + 1);
                if (p1)
                    rg[m] += nm + np;
                else
                    rw(j, 1 + d) += nm + np;
                rw(j, 1 + i) += -nm + np;
            }
        for (int i = 0; i < m; ++i) rg[i] += ng[i];
        rg.head(m).array() -= ng[m];
        rg.head(m) += ng[m + 1] * gamma;
        rg[m] += ng[m + 2] - ng[m + 3];

        double theta = rg.squaredNorm() + rw.squaredNorm();
        for (long k = 0; k < fc.size(); ++k) theta += std::pow(nc[k] * fc[k] - mu, 2);
        theta += ((nb.array() * fb.array()) - mu).square().sum();
        for (int i = 0; i < m + 4; ++i) theta += std::pow(ng[i] * fg[i] - mu, 2);
        return theta;
    }
};

}  // namespace

bool interior_control(const RelaxationProblem& pb, VectorXd& u0) {
    const int m = pb.dim();
    const VectorXd& lower = pb.control.lower;
    const double cap = pb.control.leverage_cap;
    const double b_rf = 1.0 + pb.growth.riskfree_n;
    const VectorXd gamma = pb.support.lo - pb.growth.friction;
    auto margin = [&](const VectorXd& u) { return gamma.dot(u) + b_rf; };

    // Margin-maximizing vertex: budget on the best positive-gamma coordinate.
    VectorXd u_best = lower;
    int arg = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (gamma[i] > best) {
            best = gamma[i];
            arg = i;
        }
    const double budget = cap - lower.sum();
    if (budget <= 0.0) return false;  // polytope has no interior
    if (best > 0.0 && arg >= 0) u_best[arg] += budget;
    const double margin_max = margin(u_best);
    if (margin_max <= pb.control.eta + 1e-12) return false;

    // Strict polytope interior; push toward the margin maximizer if needed.
    VectorXd u_c = lower + VectorXd::Constant(m, 0.5 * budget / m);
    if (margin(u_c) > pb.control.eta) {
        u0 = u_c;
        return true;
    }
    const double t_star = (pb.control.eta - margin(u_c)) / (margin_max - margin(u_c));
    const double t = t_star + 0.45 * (1.0 - t_star);
    u0 = (1.0 - t) * u_c + t * u_best;
    return margin(u0) > pb.control.eta && u0.sum() < cap;
}

IpmResult solve_master(const RelaxationProblem& pb, const ActiveSets& active) {
    Master master(pb, active);
    // Two orders below tau_opt: criterion-level slacks (1e-8) must absorb the
    // solve noise of *differences* of values across radii.
    const double gap_tol = std::max(5e-11, 0.01 * pb.tol.optimality);
    return master.run(gap_tol, 400);
}

SaaResult solve_saa(const RelaxationProblem& pb) {
    const int m = pb.dim();
    const int N = pb.sample_count();
    const VectorXd& lower = pb.control.lower;
    const double cap = pb.control.leverage_cap;
    const double b_rf = 1.0 + pb.growth.riskfree_n;
    const VectorXd gamma = pb.support.lo - pb.growth.friction;
    MatrixXd X(N, m);  // gradient of Phi wrt u per sample
    for (int j = 0; j < N; ++j)
        X.row(j) = pb.empirical.samples.row(j) - pb.growth.friction.transpose();

    VectorXd u;
    if (!interior_control(pb, u)) {
        // Singleton polytope (cap equal to the lower bounds): the unique
        // candidate is u = lower; otherwise the viable set is empty.
        const double budget = cap - lower.sum();
        const double margin0 = gamma.dot(lower) + b_rf;
        if (budget <= 1e-14 && budget >= 0.0 && margin0 >= pb.control.eta) {
            SaaResult fixed;
            fixed.u = lower;
            double acc = 0.0;
            for (int j = 0; j < N; ++j) acc += pb.utility(X.row(j).dot(lower) + b_rf);
            fixed.mean_utility = acc / N;
            fixed.converged = true;
            return fixed;
        }
        throw InfeasibleError("saa: viable control set has no interior");
    }

    const int K = m + 2;
    auto eval_f = [&](const VectorXd& uu, VectorXd& f) {
        f.resize(K);
        for (int i = 0; i < m; ++i) f[i] = uu[i] - lower[i];
        f[m] = cap - uu.sum();
        f[m + 1] = gamma.dot(uu) + b_rf - pb.control.eta;
        return (f.array() > 0.0).all();
    };
    auto value = [&](const VectorXd& uu) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j) acc += pb.utility(X.row(j).dot(uu) + b_rf);
        return acc / N;
    };

    VectorXd f;
    eval_f(u, f);
    double mu = 1e-2;
    VectorXd nu = (mu / f.array()).matrix();

    SaaResult out;
    int it = 0;
    for (; it < 300; ++it) {
        const double gap = nu.dot(f);
        // Dual residual.
        VectorXd gradG = VectorXd::Zero(m);
        MatrixXd hessG = MatrixXd::Zero(m, m);
        for (int j = 0; j < N; ++j) {
            const double phi = X.row(j).dot(u) + b_rf;
            gradG += pb.utility.derivative(phi) / N * X.row(j).transpose();
            hessG += pb.utility.second_derivative(phi) / N * X.row(j).transpose() * X.row(j);
        }
        VectorXd rd = gradG;
        for (int i = 0; i < m; ++i) rd[i] += nu[i];
        rd.array() -= nu[m];
        rd += nu[m + 1] * gamma;
        if (gap <= std::max(1e-11, 0.01 * pb.tol.optimality) && rd.cwiseAbs().maxCoeff() <= 1e-9)
            break;

        mu = (it == 0 ? 0.2 : 0.1) * gap / K;
        MatrixXd M = -hessG;
        VectorXd rhs = gradG;
        for (int i = 0; i < m; ++i) {
            M(i, i) += nu[i] / f[i];
            rhs[i] += mu / f[i];
        }
        M.array() += nu[m] / f[m];
        rhs.array() -= mu / f[m];
        M += nu[m + 1] / f[m + 1] * gamma * gamma.transpose();
        rhs += mu / f[m + 1] * gamma;
        const VectorXd du = Llt::solve(M, rhs);
        VectorXd gdx(K);
        for (int i = 0; i < m; ++i) gdx[i] = du[i];
        gdx[m] = -du.sum();
        gdx[m + 1] = gamma.dot(du);
        VectorXd dnu(K);
        for (int i = 0; i < K; ++i) dnu[i] = (mu - nu[i] * f[i]) / f[i] - nu[i] / f[i] * gdx[i];

        double alpha = 1.0;
        for (int i = 0; i < K; ++i)
            if (dnu[i] < 0.0) alpha = std::min(alpha, -0.995 * nu[i] / dnu[i]);
        VectorXd u_new, f_new;
        for (int ls = 0; ls < 60; ++ls) {
            u_new = u + alpha * du;
            if (eval_f(u_new, f_new)) break;
            alpha *= 0.5;
        }
        u = u_new;
        f = f_new;
        nu += alpha * dnu;
    }
    out.u = u;
    out.mean_utility = value(u);
    out.iterations = it;
    out.converged = it < 300;
    return out;
}

}  // namespace wdrc::dro::detail
