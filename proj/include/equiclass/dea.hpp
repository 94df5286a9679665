#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "equiclass/assembly.hpp"
#include "equiclass/detail/descent.hpp"
#include "equiclass/model.hpp"
#include "equiclass/parallel.hpp"
#include "equiclass/solver.hpp"

namespace equiclass {

/// Numeric policy shared by the dea and proximity layers.
struct EvalOptions {
    double delta = 1e-3;           // backward-difference step scale
    double epsilon = 1e-4;         // aggregated Gamma feasibility slack
    double eps_eff = 1e-6;         // an efficiency of 1 - eps_eff counts as 1
    int max_iters = 100;           // first-order iterations per category
    double sigma_cap_scale = 1e6;  // doubling cap, times the data magnitude
};

struct EvalContext {
    EvalOptions options;
    WorkerPool* pool = nullptr;
    SolveStats* stats = nullptr;
    std::function<void(const std::string&)> log;

    void emit(const std::string& line) const {
        if (log) log(line);
    }
};

namespace detail {

inline ConicProgram nominal_program(const DeaBlocks& blocks) {
    ConicProgram prog(blocks.c);
    prog.eq_matrix = blocks.B.sparseView();
    prog.eq_rhs = Eigen::Vector2d(1.0, 1.0);
    prog.le_matrix = blocks.A.sparseView();
    prog.le_rhs = Eigen::VectorXd::Zero(blocks.A.rows());
    prog.set_all_lower_bounds(0.0);
    return prog;
}

inline ConicProgram robust_program(const CharacteristicTable& table, const Category& category,
                                   int t, const SigmaVector& sigma, const UncertaintySpec& spec) {
    const DeaBlocks blocks = build_blocks(table, category, t);
    const int rows = table.num_rows();

    ConicProgram prog(blocks.c);
    prog.eq_matrix = blocks.B.sparseView();
    prog.eq_rhs = Eigen::Vector2d(1.0, 1.0);
    prog.set_all_lower_bounds(0.0);

    Eigen::MatrixXd linear(0, blocks.A.cols());
    for (int i = 0; i < rows; ++i) {
        if (sigma[i] > 0.0) {
            // A_i eta + sigma_i ||R_i eta|| <= 0 as the cone ||F eta|| <= a'eta.
            const RowUncertainty ru = build_row_uncertainty(spec, category, t, i, table.num_outputs());
            SecondOrderConeConstraint cone;
            cone.F = sigma[i] * ru.full();
            cone.g = Eigen::VectorXd::Zero(cone.F.rows());
            cone.a = -blocks.A.row(i).transpose();
            cone.b = 0.0;
            prog.cones.push_back(std::move(cone));
        } else {
            linear.conservativeResize(linear.rows() + 1, Eigen::NoChange);
            linear.row(linear.rows() - 1) = blocks.A.row(i);
        }
    }
    prog.le_matrix = linear.sparseView();
    prog.le_rhs = Eigen::VectorXd::Zero(linear.rows());
    return prog;
}

inline double solved_score(const ConicProgram& prog, SolveStats* stats, const char* what) {
    const SolveOutcome out = solve_conic_escalating(prog, stats);
    if (out.status != SolveStatus::optimal)
        throw SolverFailure(std::string(what) + " solve ended " + to_string(out.status));
    return *out.value;
}

}  // namespace detail

/// Nominal VRS input-oriented efficiency of object t within its category; in (0, 1].
inline double efficiency(const CharacteristicTable& table, const Category& category, int t,
                         const EvalContext& ctx = {}) {
    return detail::solved_score(detail::nominal_program(build_blocks(table, category, t)), ctx.stats,
                                "efficiency");
}

/**
 * Robust efficiency E^t(sigma): the efficiency LP with every constraint row
 * ranging over its ellipsoidal uncertainty set, solved as an SOCP. Equals the
 * nominal score at sigma = 0 and is nondecreasing in every component.
 */
inline double robust_efficiency(const CharacteristicTable& table, const Category& category, int t,
                                const SigmaVector& sigma, const UncertaintySpec& spec,
                                const EvalContext& ctx = {}) {
    return detail::solved_score(detail::robust_program(table, category, t, sigma, spec), ctx.stats,
                                "robust efficiency");
}

/**
 * Approximately minimal-norm sigma with E^t(sigma) = 1 (to the six-decimal
 * convention). A doubling search finds a capable uniform scale and bisection
 * shrinks it to the minimal uniform rho*; the first-order descent engine then
 * refines from rho* e with the single-object objective Gamma_t = E^t. The
 * feasible set is up-closed but not convex, and its norm minimizer frequently
 * sits on a coordinate ray (all the uncertainty in one constraint row), so
 * each axis is bisected as well and the best candidate wins.
 */
inline SigmaVector min_sigma_for_object(const CharacteristicTable& table, const Category& category,
                                        int t, const UncertaintySpec& spec,
                                        const EvalContext& ctx = {}) {
    const int rows = table.num_rows();
    const double feasible_score = 1.0 - ctx.options.eps_eff;

    const auto score_at = [&](const Eigen::VectorXd& sigma) {
        return robust_efficiency(table, category, t, SigmaVector(sigma), spec, ctx);
    };

    if (efficiency(table, category, t, ctx) >= feasible_score) return SigmaVector::zero(rows);

    const double magnitude = table.magnitude();
    const double sigma_cap = ctx.options.sigma_cap_scale * magnitude;

    // Minimal feasible scale along a ray, bracketed by doubling; nullopt when
    // the ray never reaches efficiency below the cap.
    const auto ray_minimum = [&](const Eigen::VectorXd& ray,
                                 bool must_reach) -> std::optional<std::pair<double, double>> {
        double hi = 1e-4 * magnitude;
        double lo = 0.0;
        while (score_at(hi * ray) < feasible_score) {
            lo = hi;
            hi *= 2.0;
            if (hi > sigma_cap) {
                if (must_reach)
                    throw CapabilityNotReached("object " + std::to_string(t) +
                                               " did not reach efficiency below the sigma cap");
                return std::nullopt;
            }
        }
        while (hi - lo > 1e-9 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (score_at(mid * ray) >= feasible_score)
                hi = mid;
            else
                lo = mid;
        }
        return std::make_pair(lo, hi);
    };

    // Theorem 1 guarantees the uniform ray reaches efficiency. Its minimal
    // scale also floors every feasible sigma: sigma <= ||sigma||_inf e, so
    // rho* <= ||sigma||_2.
    const auto uniform = ray_minimum(Eigen::VectorXd::Ones(rows), true);
    const double norm_floor = uniform->first;

    detail::CachedObjective cached(score_at);
    detail::DescentSettings settings;
    settings.delta_scale = ctx.options.delta;
    settings.max_iters = ctx.options.max_iters;
    const detail::DescentResult refined = detail::descend_norm(
        cached, Eigen::VectorXd::Constant(rows, uniform->second), feasible_score, norm_floor, settings);

    Eigen::VectorXd best = refined.sigma;
    for (int i = 0; i < rows; ++i) {
        // Axis candidates are already first-order stationary: the boundary
        // rule zeroes every other gradient component, so no refinement moves.
        const auto axis = ray_minimum(Eigen::VectorXd::Unit(rows, i), false);
        if (axis && axis->second < best.norm())
            best = axis->second * Eigen::VectorXd::Unit(rows, i);
    }
    return SigmaVector(best);
}

}  // namespace equiclass
