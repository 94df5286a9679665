#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>
#include <cstdio>

namespace equiclass::detail {

/**
 * Primal-dual interior-point solver for the self-dual embedding of
 *
 *   min  c'x   s.t.  A x = b,   G x + s = h,   s in K,
 *
 * where K is a product of a nonnegative orthant (the first lp_dim rows of G)
 * and second-order cones. Mehrotra predictor-corrector steps with
 * Nesterov-Todd scaling; the homogeneous (tau, kappa) embedding provides
 * certificates of primal or dual infeasibility.
 */
class ConeInteriorPointSolver {
   public:
    struct Settings {
        double feastol = 1e-8;
        double abstol = 1e-8;
        double reltol = 1e-8;
        double feastol_reduced = 1e-6;
        double abstol_reduced = 1e-6;
        double reltol_reduced = 1e-6;
        int max_iters = 100;

        double step_damping = 0.99;
        double static_reg = 7e-8;
        int refine_max = 9;
        double refine_stop = 1e-14;
        double refine_improvement = 6.0;
        double centering_min = 1e-4;
        double centering_max = 0.99;
        double step_min = 1e-7;
        double step_max = 0.9999;
        int equil_iters = 3;
    };

    enum class Exit {
        optimal,
        close_to_optimal,
        primal_infeasible,
        close_to_primal_infeasible,
        dual_infeasible,
        close_to_dual_infeasible,
        max_iterations,
        numerics
    };

    struct Info {
        double pcost = 0.0;
        double dcost = 0.0;
        double gap = 0.0;
        std::optional<double> relgap;
        double pres = 0.0;
        double dres = 0.0;
        std::optional<double> pinfres;
        std::optional<double> dinfres;
        double mu = 0.0;
        int iterations = 0;
    };

    ConeInteriorPointSolver(Eigen::SparseMatrix<double> A, Eigen::SparseMatrix<double> G,
                            Eigen::VectorXd c, Eigen::VectorXd b, Eigen::VectorXd h, int lp_dim,
                            std::vector<int> soc_dims, Settings settings)
        : A_(std::move(A)),
          G_(std::move(G)),
          c_(std::move(c)),
          b_(std::move(b)),
          h_(std::move(h)),
          lp_dim_(lp_dim),
          settings_(settings) {
        n_ = static_cast<int>(c_.size());
        p_ = static_cast<int>(A_.rows());
        m_ = static_cast<int>(G_.rows());
        cones_.reserve(soc_dims.size());
        for (int dim : soc_dims) cones_.push_back(SocState{dim});
        dim_K_ = n_ + p_ + m_;
        equilibrate();
        At_ = A_.transpose();
        Gt_ = G_.transpose();
        build_constant_triplets();
    }

    Exit solve() {
        Iterate w;
        w.x.resize(n_);
        w.y.resize(p_);
        w.z.resize(m_);
        w.s.resize(m_);
        lambda_.resize(m_);

        // Initial point: least-squares primal/dual solves against unit scalings.
        set_unit_scalings();
        assemble_kkt();
        ldlt_.analyzePattern(K_);
        ldlt_.factorize(K_);
        if (ldlt_.info() != Eigen::Success) return Exit::numerics;

        Eigen::VectorXd rhs1 = Eigen::VectorXd::Zero(dim_K_);
        rhs1.segment(n_, p_) = b_;
        rhs1.tail(m_) = h_;
        Eigen::VectorXd dx1(n_), dy1(p_), dz1(m_);
        solve_kkt(rhs1, dx1, dy1, dz1);
        w.x = dx1;
        bring_to_cone(-dz1, w.s);

        Eigen::VectorXd rhs2 = Eigen::VectorXd::Zero(dim_K_);
        rhs2.head(n_) = -c_;
        Eigen::VectorXd dx2(n_), dy2(p_), dz2(m_);
        solve_kkt(rhs2, dx2, dy2, dz2);
        w.y = dy2;
        bring_to_cone(dz2, w.z);

        w.tau = 1.0;
        w.kap = 1.0;

        rhs1.head(n_) = -c_;

        resx0_ = std::max(1.0, c_.norm());
        resy0_ = std::max(1.0, b_.norm());
        resz0_ = std::max(1.0, h_.norm());

        Exit code = Exit::numerics;
        Iterate best = w;
        Info best_info;
        bool have_best = false;
        double last_step = 1.0;

        for (int iter = 0; iter <= settings_.max_iters; ++iter) {
            compute_residuals(w);
            update_statistics(w);
            info_.iterations = iter;
#ifdef EQUICLASS_IPM_DEBUG
            std::printf("it %d pcost %.6e dcost %.6e gap %.3e pres %.3e dres %.3e tau %.3e kap %.3e step %.3e\n",
                        iter, info_.pcost, info_.dcost, info_.gap, info_.pres, info_.dres, w.tau,
                        w.kap, last_step);
#endif

            // A residual spike can be the embedding renormalizing on its way
            // out of a degenerate plateau, so only a lost cone (negative gap)
            // stops the iteration; the best iterate is tracked either way.
            if (iter > 0 && info_.gap < 0.0) {
                if (have_best) restore(w, best, best_info);
                code = check_exit(w, true);
                if (code == Exit::max_iterations) code = Exit::numerics;
                break;
            }

            code = check_exit(w, false);
            if (code != Exit::max_iterations) break;

            if (iter > 0 && last_step <= settings_.step_min * settings_.step_damping + 1e-15) {
                if (have_best && better_than(best_info, info_)) restore(w, best, best_info);
                code = check_exit(w, true);
                if (code == Exit::max_iterations) code = Exit::numerics;
                break;
            }
            if (iter == settings_.max_iters) {
                if (have_best && better_than(best_info, info_)) restore(w, best, best_info);
                code = check_exit(w, true);
                break;
            }
            if (!std::isfinite(info_.pcost)) {
                if (have_best) restore(w, best, best_info);
                code = check_exit(w, true);
                if (code == Exit::max_iterations) code = Exit::numerics;
                break;
            }

            if (!have_best || better_than(info_, best_info)) {
                best = w;
                best_info = info_;
                have_best = true;
            }

            if (!update_scalings(w)) {
                if (have_best) restore(w, best, best_info);
                code = check_exit(w, true);
                if (code == Exit::max_iterations) code = Exit::numerics;
                break;
            }
            assemble_kkt();
            ldlt_.factorize(K_);
            if (ldlt_.info() != Eigen::Success) {
                code = Exit::numerics;
                break;
            }

            solve_kkt(rhs1, dx1, dy1, dz1);
            const double dtau_denom =
                w.kap / w.tau - c_.dot(dx1) - dot_eq(b_, dy1) - h_.dot(dz1);

            // Affine (predictor) direction.
            rhs2.head(n_) = rx_;
            rhs2.segment(n_, p_) = -ry_;
            rhs2.tail(m_) = w.s - rz_;
            solve_kkt(rhs2, dx2, dy2, dz2);

            const double dtau_aff =
                (rt_ - w.kap + c_.dot(dx2) + dot_eq(b_, dy2) + h_.dot(dz2)) / dtau_denom;
            dz2 += dtau_aff * dz1;
            Eigen::VectorXd W_dzaff(m_);
            scale(dz2, W_dzaff);
            Eigen::VectorXd ds_by_W = -W_dzaff - lambda_;
            const double dkap_aff = -w.kap - w.kap / w.tau * dtau_aff;
            const double step_aff = cone_line_search(ds_by_W, W_dzaff, w.tau, dtau_aff, w.kap, dkap_aff);

            const double sigma =
                std::clamp(std::pow(1.0 - step_aff, 3), settings_.centering_min, settings_.centering_max);
            const double sigma_mu = sigma * info_.mu;

            // Combined (corrector) direction.
            Eigen::VectorXd ds_comb(m_);
            conic_product(lambda_, lambda_, ds_comb);
            Eigen::VectorXd corr(m_);
            conic_product(ds_by_W, W_dzaff, corr);
            ds_comb += corr;
            add_unit(ds_comb, -sigma_mu);
            Eigen::VectorXd lambda_div(m_);
            conic_division(lambda_, ds_comb, lambda_div);
            Eigen::VectorXd W_lambda_div(m_);
            scale(lambda_div, W_lambda_div);

            const double one_minus_sigma = 1.0 - sigma;
            rhs2.head(n_) = one_minus_sigma * rx_;
            rhs2.segment(n_, p_) = -one_minus_sigma * ry_;
            rhs2.tail(m_) = -one_minus_sigma * rz_ + W_lambda_div;
            solve_kkt(rhs2, dx2, dy2, dz2);

            const double bkap = w.kap * w.tau + dkap_aff * dtau_aff - sigma_mu;
            const double dtau = (one_minus_sigma * rt_ - bkap / w.tau + c_.dot(dx2) +
                                 dot_eq(b_, dy2) + h_.dot(dz2)) /
                                dtau_denom;
            dx2 += dtau * dx1;
            dy2 += dtau * dy1;
            dz2 += dtau * dz1;

            Eigen::VectorXd W_dz(m_);
            scale(dz2, W_dz);
            ds_by_W = -(lambda_div + W_dz);
            Eigen::VectorXd ds(m_);
            scale(ds_by_W, ds);
            const double dkap = -(bkap + w.kap * dtau) / w.tau;

            const double step = settings_.step_damping *
                                cone_line_search(ds_by_W, W_dz, w.tau, dtau, w.kap, dkap);
            last_step = step;

            w.x += step * dx2;
            w.y += step * dy2;
            w.z += step * dz2;
            w.s += step * ds;
            w.kap += step * dkap;
            w.tau += step * dtau;
        }

        backscale(w);
        final_ = w;
        return code;
    }

    const Eigen::VectorXd& primal() const { return final_.x; }
    const Eigen::VectorXd& dual_eq() const { return final_.y; }
    const Eigen::VectorXd& dual_cone() const { return final_.z; }
    const Info& info() const { return info_; }

   private:
    struct SocState {
        int dim = 0;
        double eta_sq = 1.0;
        double a = 0.0;
        double w = 0.0;
        double cc = 0.0;
        double dd = 0.0;
        Eigen::VectorXd q;
    };

    struct Iterate {
        Eigen::VectorXd x, y, z, s;
        double tau = 1.0;
        double kap = 1.0;
        double cx = 0.0, by = 0.0, hz = 0.0;
    };

    static double dot_eq(const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
        return b.size() > 0 ? b.dot(y) : 0.0;
    }

    void restore(Iterate& w, const Iterate& best, const Info& best_info) {
        w = best;
        info_ = best_info;
    }

    /// Ruiz-style max-norm equilibration of [A; G], with SOC row groups scaled jointly.
    void equilibrate() {
        x_equil_ = Eigen::VectorXd::Ones(n_);
        a_equil_ = Eigen::VectorXd::Ones(p_);
        g_equil_ = Eigen::VectorXd::Ones(m_);

        const auto sqrt_or_one = [](double v) { return v < 1e-12 ? 1.0 : std::sqrt(v); };

        for (int iter = 0; iter < settings_.equil_iters; ++iter) {
            Eigen::VectorXd col_max = Eigen::VectorXd::Zero(n_);
            Eigen::VectorXd a_row_max = Eigen::VectorXd::Zero(p_);
            Eigen::VectorXd g_row_max = Eigen::VectorXd::Zero(m_);
            for (int j = 0; j < A_.outerSize(); ++j)
                for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) {
                    col_max[it.col()] = std::max(col_max[it.col()], std::abs(it.value()));
                    a_row_max[it.row()] = std::max(a_row_max[it.row()], std::abs(it.value()));
                }
            for (int j = 0; j < G_.outerSize(); ++j)
                for (Eigen::SparseMatrix<double>::InnerIterator it(G_, j); it; ++it) {
                    col_max[it.col()] = std::max(col_max[it.col()], std::abs(it.value()));
                    g_row_max[it.row()] = std::max(g_row_max[it.row()], std::abs(it.value()));
                }
            // Rows of one cone must share a scale to preserve the cone.
            int row = lp_dim_;
            for (const SocState& cone : cones_) {
                const double group = g_row_max.segment(row, cone.dim).maxCoeff();
                g_row_max.segment(row, cone.dim).setConstant(group);
                row += cone.dim;
            }
            col_max = col_max.unaryExpr(sqrt_or_one);
            a_row_max = a_row_max.unaryExpr(sqrt_or_one);
            g_row_max = g_row_max.unaryExpr(sqrt_or_one);

            for (int j = 0; j < A_.outerSize(); ++j)
                for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
                    it.valueRef() /= a_row_max[it.row()] * col_max[it.col()];
            for (int j = 0; j < G_.outerSize(); ++j)
                for (Eigen::SparseMatrix<double>::InnerIterator it(G_, j); it; ++it)
                    it.valueRef() /= g_row_max[it.row()] * col_max[it.col()];

            x_equil_ = x_equil_.cwiseProduct(col_max);
            a_equil_ = a_equil_.cwiseProduct(a_row_max);
            g_equil_ = g_equil_.cwiseProduct(g_row_max);
        }
        c_ = c_.cwiseQuotient(x_equil_);
        b_ = b_.cwiseQuotient(a_equil_);
        h_ = h_.cwiseQuotient(g_equil_);
    }

    void backscale(Iterate& w) {
        w.x = w.x.cwiseQuotient(x_equil_) / w.tau;
        w.y = w.y.cwiseQuotient(a_equil_) / w.tau;
        w.z = w.z.cwiseQuotient(g_equil_) / w.tau;
        w.s = w.s.cwiseProduct(g_equil_) / w.tau;
    }

    // --- cone operations ---

    void bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& s) const {
        double alpha = -1.0;
        for (int i = 0; i < lp_dim_; ++i) alpha = std::max(alpha, -r[i]);
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            const double res = r[row] - r.segment(row + 1, cone.dim - 1).norm();
            alpha = std::max(alpha, -res);
            row += cone.dim;
        }
        alpha += 1.0;
        s = r;
        s.head(lp_dim_).array() += alpha;
        row = lp_dim_;
        for (const SocState& cone : cones_) {
            s[row] += alpha;
            row += cone.dim;
        }
    }

    void set_unit_scalings() {
        lp_scaling_ = Eigen::VectorXd::Ones(lp_dim_);
        lp_scaling_sqrt_ = Eigen::VectorXd::Ones(lp_dim_);
        for (SocState& cone : cones_) {
            cone.eta_sq = 1.0;
            cone.a = 1.0;
            cone.w = 0.0;
            cone.cc = 2.0;  // consistent with a = 1, w = 0
            cone.dd = 2.0;
            cone.q = Eigen::VectorXd::Zero(cone.dim - 1);
        }
        unit_scaling_ = true;
    }

    /// Nesterov-Todd scaling point for the current (s, z); false if either
    /// iterate left the cone interior.
    bool update_scalings(const Iterate& w) {
        for (int i = 0; i < lp_dim_; ++i) {
            if (w.s[i] <= 0.0 || w.z[i] <= 0.0) return false;
        }
        lp_scaling_ = w.s.head(lp_dim_).cwiseQuotient(w.z.head(lp_dim_));
        lp_scaling_sqrt_ = lp_scaling_.cwiseSqrt();

        int row = lp_dim_;
        for (SocState& cone : cones_) {
            const auto s_tail = w.s.segment(row + 1, cone.dim - 1);
            const auto z_tail = w.z.segment(row + 1, cone.dim - 1);
            const double s_res = w.s[row] * w.s[row] - s_tail.squaredNorm();
            const double z_res = w.z[row] * w.z[row] - z_tail.squaredNorm();
            if (s_res <= 0.0 || z_res <= 0.0) return false;
            const double s_norm = std::sqrt(s_res);
            const double z_norm = std::sqrt(z_res);

            Eigen::VectorXd s_bar = w.s.segment(row, cone.dim) / s_norm;
            Eigen::VectorXd z_bar = w.z.segment(row, cone.dim) / z_norm;
            cone.eta_sq = s_norm / z_norm;

            double gamma = std::sqrt(0.5 * (1.0 + s_bar.dot(z_bar)));
            cone.a = (0.5 / gamma) * (s_bar[0] + z_bar[0]);
            cone.q = (0.5 / gamma) * (s_bar.tail(cone.dim - 1) - z_bar.tail(cone.dim - 1));
            cone.w = cone.q.squaredNorm();
            cone.cc = 1.0 + cone.a + cone.w / (1.0 + cone.a);
            cone.dd = 1.0 + 2.0 / (1.0 + cone.a) + cone.w / ((1.0 + cone.a) * (1.0 + cone.a));
            row += cone.dim;
        }
        unit_scaling_ = false;
        scale(w.z, lambda_);
        return true;
    }

    /// lambda = W z.
    void scale(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
        if (unit_scaling_) {
            out = z;
            return;
        }
        out.head(lp_dim_) = lp_scaling_sqrt_.cwiseProduct(z.head(lp_dim_));
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            const double eta = std::sqrt(cone.eta_sq);
            const auto z_tail = z.segment(row + 1, cone.dim - 1);
            const double zeta = cone.q.dot(z_tail);
            const double factor = z[row] + zeta / (1.0 + cone.a);
            out[row] = eta * (cone.a * z[row] + zeta);
            out.segment(row + 1, cone.dim - 1) = eta * (z_tail + factor * cone.q);
            row += cone.dim;
        }
    }

    /// w = u o v (Jordan product per cone).
    void conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
        out.head(lp_dim_) = u.head(lp_dim_).cwiseProduct(v.head(lp_dim_));
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            out[row] = u.segment(row, cone.dim).dot(v.segment(row, cone.dim));
            out.segment(row + 1, cone.dim - 1) = u[row] * v.segment(row + 1, cone.dim - 1) +
                                                 v[row] * u.segment(row + 1, cone.dim - 1);
            row += cone.dim;
        }
    }

    /// v = u \ w (inverse Jordan product per cone).
    void conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
        out.head(lp_dim_) = w.head(lp_dim_).cwiseQuotient(u.head(lp_dim_));
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            const auto u_tail = u.segment(row + 1, cone.dim - 1);
            const auto w_tail = w.segment(row + 1, cone.dim - 1);
            const double rho = u[row] * u[row] - u_tail.squaredNorm();
            const double zeta = u_tail.dot(w_tail);
            const double factor = (zeta / u[row] - w[row]) / rho;
            out[row] = (u[row] * w[row] - zeta) / rho;
            out.segment(row + 1, cone.dim - 1) = factor * u_tail + w_tail / u[row];
            row += cone.dim;
        }
    }

    /// Adds t to the cone identity element's coordinates.
    void add_unit(Eigen::VectorXd& v, double t) const {
        v.head(lp_dim_).array() += t;
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            v[row] += t;
            row += cone.dim;
        }
    }

    /// Largest step to the cone boundary for s = W(lambda + alpha ds) and
    /// z = W^{-1}(lambda + alpha dz), plus the tau/kappa caps.
    double cone_line_search(const Eigen::VectorXd& ds, const Eigen::VectorXd& dz, double tau,
                            double dtau, double kap, double dkap) const {
        double alpha = 10.0;
        if (lp_dim_ > 0) {
            const double rho_min = (ds.head(lp_dim_).cwiseQuotient(lambda_.head(lp_dim_))).minCoeff();
            const double sig_min = (dz.head(lp_dim_).cwiseQuotient(lambda_.head(lp_dim_))).minCoeff();
            const double worst = std::min(rho_min, sig_min);
            if (worst < 0.0) alpha = 1.0 / (-worst);
        }
        if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
        if (dkap < 0.0) alpha = std::min(alpha, -kap / dkap);

        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            const double lk_sq =
                lambda_[row] * lambda_[row] - lambda_.segment(row + 1, cone.dim - 1).squaredNorm();
            if (lk_sq <= 0.0) {
                row += cone.dim;
                continue;
            }
            const double lk_norm = std::sqrt(lk_sq);
            const Eigen::VectorXd lk_bar = lambda_.segment(row, cone.dim) / lk_norm;
            const double inv = 1.0 / lk_norm;

            const auto boundary_step = [&](const Eigen::VectorXd& d) {
                const double lk_times_d = lk_bar[0] * d[row] -
                                          lk_bar.tail(cone.dim - 1).dot(d.segment(row + 1, cone.dim - 1));
                const double factor = (lk_times_d + d[row]) / (lk_bar[0] + 1.0);
                const double head = inv * lk_times_d;
                const double tail_norm =
                    (inv * (d.segment(row + 1, cone.dim - 1) - factor * lk_bar.tail(cone.dim - 1)))
                        .norm();
                return tail_norm - head;
            };
            const double worst = std::max({0.0, boundary_step(ds), boundary_step(dz)});
            if (worst > 0.0) alpha = std::min(alpha, 1.0 / worst);
            row += cone.dim;
        }
        return std::clamp(alpha, settings_.step_min, settings_.step_max);
    }

    // --- KKT system ---

    void build_constant_triplets() {
        constant_triplets_.clear();
        for (int i = 0; i < n_; ++i) constant_triplets_.emplace_back(i, i, settings_.static_reg);
        for (int i = 0; i < p_; ++i)
            constant_triplets_.emplace_back(n_ + i, n_ + i, -settings_.static_reg);
        for (int j = 0; j < A_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) {
                constant_triplets_.emplace_back(n_ + static_cast<int>(it.row()),
                                                static_cast<int>(it.col()), it.value());
                constant_triplets_.emplace_back(static_cast<int>(it.col()),
                                                n_ + static_cast<int>(it.row()), it.value());
            }
        for (int j = 0; j < G_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(G_, j); it; ++it) {
                constant_triplets_.emplace_back(n_ + p_ + static_cast<int>(it.row()),
                                                static_cast<int>(it.col()), it.value());
                constant_triplets_.emplace_back(static_cast<int>(it.col()),
                                                n_ + p_ + static_cast<int>(it.row()), it.value());
            }
    }

    /// K = [dI A' G'; A -dI 0; G 0 -W^2-dI], full symmetric storage, constant pattern.
    void assemble_kkt() {
        std::vector<Eigen::Triplet<double>> triplets = constant_triplets_;
        const int base = n_ + p_;
        for (int i = 0; i < lp_dim_; ++i)
            triplets.emplace_back(base + i, base + i, -lp_scaling_[i] - settings_.static_reg);
        int row = lp_dim_;
        for (const SocState& cone : cones_) {
            // Dense -W^2 block: W^2 = eta^2 [a^2+w, c q'; c q, I + d q q'].
            const int d = cone.dim;
            const double e2 = cone.eta_sq;
            triplets.emplace_back(base + row, base + row,
                                  -e2 * (cone.a * cone.a + cone.w) - settings_.static_reg);
            for (int i = 1; i < d; ++i) {
                const double off = -e2 * cone.cc * cone.q[i - 1];
                triplets.emplace_back(base + row, base + row + i, off);
                triplets.emplace_back(base + row + i, base + row, off);
                for (int j = 1; j < d; ++j) {
                    double v = -e2 * cone.dd * cone.q[i - 1] * cone.q[j - 1];
                    if (i == j) v += -e2 - settings_.static_reg;
                    triplets.emplace_back(base + row + i, base + row + j, v);
                }
            }
            row += cone.dim;
        }
        if (K_.rows() != dim_K_) K_.resize(dim_K_, dim_K_);
        K_.setFromTriplets(triplets.begin(), triplets.end());
    }

    /// Factorized-system solve with iterative refinement against the
    /// unregularized KKT matrix, removing the static perturbation's bias.
    void solve_kkt(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                   Eigen::VectorXd& dz) {
        Eigen::VectorXd x = ldlt_.solve(rhs);
        const double threshold = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * settings_.refine_stop;
        const double reg = settings_.static_reg;
        double prev_err = std::numeric_limits<double>::max();
        Eigen::VectorXd correction;
        for (int k = 0; k <= settings_.refine_max; ++k) {
            Eigen::VectorXd err = rhs - K_ * x;
            err.head(n_) += reg * x.head(n_);
            err.segment(n_, p_) -= reg * x.segment(n_, p_);
            err.tail(m_) -= reg * x.tail(m_);
            const double nerr = err.lpNorm<Eigen::Infinity>();
            if (k > 0 && nerr > prev_err) {
                x -= correction;
                break;
            }
            if (nerr < threshold || k == settings_.refine_max ||
                (k > 0 && prev_err < settings_.refine_improvement * nerr))
                break;
            prev_err = nerr;
            correction = ldlt_.solve(err);
            x += correction;
        }
        dx = x.head(n_);
        dy = x.segment(n_, p_);
        dz = x.tail(m_);
    }

    // --- residuals, statistics, exit tests ---

    void compute_residuals(Iterate& w) {
        rx_ = -(Gt_ * w.z);
        if (p_ > 0) rx_ -= At_ * w.y;
        hresx_ = rx_.norm();
        rx_ -= w.tau * c_;

        if (p_ > 0) {
            ry_ = A_ * w.x;
            hresy_ = ry_.norm();
            ry_ -= w.tau * b_;
        } else {
            ry_.resize(0);
            hresy_ = 0.0;
        }

        rz_ = w.s + G_ * w.x;
        hresz_ = rz_.norm();
        rz_ -= w.tau * h_;

        w.cx = c_.dot(w.x);
        w.by = dot_eq(b_, w.y);
        w.hz = h_.dot(w.z);
        rt_ = w.kap + w.cx + w.by + w.hz;
    }

    void update_statistics(const Iterate& w) {
        info_.gap = w.s.dot(w.z);
        info_.mu = (info_.gap + w.kap * w.tau) / (lp_dim_ + static_cast<int>(cones_.size()) + 1);
        info_.pcost = w.cx / w.tau;
        info_.dcost = -(w.hz + w.by) / w.tau;
        if (info_.pcost < 0.0)
            info_.relgap = info_.gap / -info_.pcost;
        else if (info_.dcost > 0.0)
            info_.relgap = info_.gap / info_.dcost;
        else
            info_.relgap.reset();

        const double nx = w.x.norm();
        const double ny = w.y.norm();
        const double nz = w.z.norm();
        const double ns = w.s.norm();
        const double nry = p_ > 0 ? ry_.norm() / std::max(resy0_ + nx, 1.0) : 0.0;
        const double nrz = rz_.norm() / std::max(resz0_ + nx + ns, 1.0);
        info_.pres = std::max(nry, nrz) / w.tau;
        info_.dres = rx_.norm() / std::max(resx0_ + ny + nz, 1.0) / w.tau;

        info_.pinfres.reset();
        info_.dinfres.reset();
        if ((w.hz + w.by) / std::max(ny + nz, 1.0) < -settings_.reltol)
            info_.pinfres = hresx_ / std::max(ny + nz, 1.0);
        if (w.cx / std::max(nx, 1.0) < -settings_.reltol)
            info_.dinfres = std::max(hresy_ / std::max(nx, 1.0), hresz_ / std::max(nx + ns, 1.0));
    }

    Exit check_exit(const Iterate& w, bool reduced) const {
        const double feastol = reduced ? settings_.feastol_reduced : settings_.feastol;
        const double abstol = reduced ? settings_.abstol_reduced : settings_.abstol;
        const double reltol = reduced ? settings_.reltol_reduced : settings_.reltol;

        if ((-w.cx > 0.0 || -w.by - w.hz >= -abstol) && info_.pres < feastol &&
            info_.dres < feastol &&
            (info_.gap < abstol || (info_.relgap && *info_.relgap < reltol)))
            return reduced ? Exit::close_to_optimal : Exit::optimal;

        if (info_.dinfres && *info_.dinfres < feastol && w.tau < w.kap)
            return reduced ? Exit::close_to_dual_infeasible : Exit::dual_infeasible;

        if ((info_.pinfres && *info_.pinfres < feastol && w.tau < w.kap) ||
            (w.tau < feastol && w.kap < feastol && info_.pinfres && *info_.pinfres < feastol))
            return reduced ? Exit::close_to_primal_infeasible : Exit::primal_infeasible;

        return Exit::max_iterations;  // sentinel: not converged yet
    }

    static bool better_than(const Info& a, const Info& b) {
        return a.gap > 0.0 && (b.gap <= 0.0 || a.gap < b.gap) && a.pres < b.pres && a.dres < b.dres;
    }

    Eigen::SparseMatrix<double> A_, G_, At_, Gt_;
    Eigen::VectorXd c_, b_, h_;
    int lp_dim_;
    Settings settings_;
    int n_ = 0, p_ = 0, m_ = 0, dim_K_ = 0;
    std::vector<SocState> cones_;

    Eigen::VectorXd x_equil_, a_equil_, g_equil_;
    Eigen::VectorXd lp_scaling_, lp_scaling_sqrt_, lambda_;
    bool unit_scaling_ = true;

    std::vector<Eigen::Triplet<double>> constant_triplets_;
    Eigen::SparseMatrix<double> K_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;

    Eigen::VectorXd rx_, ry_, rz_;
    double rt_ = 0.0, hresx_ = 0.0, hresy_ = 0.0, hresz_ = 0.0;
    double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;
    Info info_;
    Iterate final_;
};

}  // namespace equiclass::detail
