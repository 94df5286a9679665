#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "equiclass/dea.hpp"
#include "equiclass/detail/descent.hpp"
#include "equiclass/model.hpp"
#include "equiclass/parallel.hpp"

namespace equiclass {

/// Gamma(sigma) = sum of robust efficiencies over the category at one shared sigma.
struct GammaEvaluation {
    SigmaVector sigma;
    Eigen::VectorXd per_object_scores;
    double gamma = 0.0;
};

inline GammaEvaluation gamma(const CharacteristicTable& table, const Category& category,
                             const SigmaVector& sigma, const UncertaintySpec& spec,
                             const EvalContext& ctx = {}) {
    GammaEvaluation eval;
    eval.sigma = sigma;
    const std::vector<double> scores =
        parallel_map<double>(ctx.pool, category.size(), [&](std::size_t j) {
            return robust_efficiency(table, category, category[j], sigma, spec, ctx);
        });
    eval.per_object_scores =
        Eigen::Map<const Eigen::VectorXd>(scores.data(), static_cast<Eigen::Index>(scores.size()));
    eval.gamma = eval.per_object_scores.sum();
    return eval;
}

/// Per-object minimal sigmas for the whole category, in category order.
inline std::vector<SigmaVector> min_sigma_collection(const CharacteristicTable& table,
                                                     const Category& category,
                                                     const UncertaintySpec& spec,
                                                     const EvalContext& ctx = {}) {
    return parallel_map<SigmaVector>(ctx.pool, category.size(), [&](std::size_t j) {
        return min_sigma_for_object(table, category, category[j], spec, ctx);
    });
}

/// Componentwise maximum of the per-object minimal sigmas; feasible for the
/// whole category by Property 1. Categories of one or two objects are zero
/// by the paper's convention, matching their zero proximity.
inline SigmaVector sigma_hat(const CharacteristicTable& table, const Category& category,
                             const UncertaintySpec& spec, const EvalContext& ctx = {}) {
    SigmaVector hat = SigmaVector::zero(table.num_rows());
    if (category.size() <= 2) return hat;
    for (const SigmaVector& sigma : min_sigma_collection(table, category, spec, ctx))
        hat = hat.cwise_max(sigma);
    return hat;
}

/**
 * Backward-difference approximation of the Gamma gradient. Components at
 * sigma_i = 0 are zero; elsewhere the effective step is min(delta, sigma_i)
 * so probes never leave the nonnegative orthant. A forward difference would
 * read zero everywhere on the feasible set, which is why the backward form
 * matters here.
 */
inline Eigen::VectorXd gamma_gradient(const CharacteristicTable& table, const Category& category,
                                      const SigmaVector& sigma, double delta,
                                      const UncertaintySpec& spec, const EvalContext& ctx = {}) {
    detail::CachedObjective f([&](const Eigen::VectorXd& s) {
        return gamma(table, category, SigmaVector(s), spec, ctx).gamma;
    });
    return detail::backward_gradient(f, sigma.values, delta);
}

struct DirectionResult {
    Eigen::VectorXd d;
    double value = 0.0;
};

/// min { d'sigma : d'grad >= 0, ||d|| <= 1 }, solved in closed form.
inline DirectionResult direction_search(const SigmaVector& sigma, const Eigen::VectorXd& grad) {
    const detail::DirectionOutcome out = detail::solve_direction(sigma.values, grad);
    return DirectionResult{out.d, out.value};
}

/**
 * Largest step alpha within the Theorem-2 cap keeping
 * Gamma(sigma + alpha d) >= |C| - epsilon, found by bisection to a relative
 * resolution of 1e-8. Zero is always admissible.
 */
inline double line_search(const CharacteristicTable& table, const Category& category,
                          const SigmaVector& sigma, const Eigen::VectorXd& d,
                          double sigma_hat_norm, double epsilon, const UncertaintySpec& spec,
                          const EvalContext& ctx = {}) {
    const double floor = sigma_hat_norm / std::sqrt(static_cast<double>(table.num_rows()));
    const double alpha_max = detail::step_upper_bound(sigma.values, d, floor);
    if (alpha_max <= 0.0) return 0.0;

    const double target = static_cast<double>(category.size()) - epsilon;
    detail::CachedObjective f([&](const Eigen::VectorXd& s) {
        return gamma(table, category, SigmaVector(s), spec, ctx).gamma;
    });
    const auto ok = [&](double alpha) {
        const Eigen::VectorXd point = (sigma.values + alpha * d).cwiseMax(0.0);
        return f(point) >= target && point.norm() >= floor - 1e-12;
    };
    if (ok(alpha_max)) return alpha_max;
    double lo = 0.0, hi = alpha_max;
    while (hi - lo > 1e-8 * alpha_max) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/**
 * Proximity to equitable efficiency for one category.
 *
 * Categories of one or two objects are zero by convention. Otherwise builds
 * sigma_hat from the per-object minima; when a single object decides it the
 * estimate is exactly ||sigma_hat|| (Corollary 2), and otherwise the
 * first-order loop descends from sigma_hat while Gamma stays within epsilon
 * of |C|. The Theorem-2 bounds accompany the estimate either way.
 */
inline ProximityResult proximity(const CharacteristicTable& table, const Category& category,
                                 const UncertaintySpec& spec, const EvalContext& ctx = {},
                                 int category_index = 0) {
    const int rows = table.num_rows();
    ProximityResult result;
    result.category_index = category_index;
    result.sigma_hat = SigmaVector::zero(rows);

    if (category.size() <= 2) {
        result.exit = ProximityExit::trivial_small_category;
        ctx.emit("category " + std::to_string(category_index) + ": size " +
                 std::to_string(category.size()) + " -> proximity 0");
        return result;
    }

    const std::vector<SigmaVector> minima = min_sigma_collection(table, category, spec, ctx);
    for (const SigmaVector& sigma : minima) result.sigma_hat = result.sigma_hat.cwise_max(sigma);

    const double hat_norm = result.sigma_hat.norm();
    result.upper_bound = hat_norm;
    result.lower_bound = hat_norm / std::sqrt(static_cast<double>(rows));

    for (const SigmaVector& sigma : minima) {
        if ((result.sigma_hat.values - sigma.values).lpNorm<Eigen::Infinity>() <= 1e-9) {
            result.decided_by_single_object = true;
            result.estimate = hat_norm;
            result.exit = ProximityExit::single_object;
            ctx.emit("category " + std::to_string(category_index) +
                     ": single-object decided, proximity " + std::to_string(result.estimate));
            return result;
        }
    }

    detail::CachedObjective f([&](const Eigen::VectorXd& s) {
        return gamma(table, category, SigmaVector(s), spec, ctx).gamma;
    });
    detail::DescentSettings settings;
    settings.delta_scale = ctx.options.delta;
    settings.max_iters = ctx.options.max_iters;
    const double target = static_cast<double>(category.size()) - ctx.options.epsilon;

    const detail::DescentResult descent =
        detail::descend_norm(f, result.sigma_hat.values, target, result.lower_bound, settings);
    result.trace = descent.trace;
    result.exit = descent.exit;
    result.final_direction_value = descent.final_direction_value;

    // The feasible set is up-closed but not convex; a norm minimizer on a
    // coordinate ray can be unreachable by descent from sigma_hat. Bisect
    // each axis for a feasible-for-classification candidate and keep the
    // best, floored at the Theorem-2 lower bound.
    Eigen::VectorXd final_sigma = descent.sigma;
    for (int i = 0; i < rows; ++i) {
        const Eigen::VectorXd ray = Eigen::VectorXd::Unit(rows, i);
        double hi = final_sigma.norm();
        if (hi <= result.lower_bound || f(hi * ray) < target) continue;
        double lo = 0.0;
        while (hi - lo > 1e-9 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid * ray) >= target)
                hi = mid;
            else
                lo = mid;
        }
        if (hi >= result.lower_bound - 1e-12 && hi < final_sigma.norm()) final_sigma = hi * ray;
    }
    if (final_sigma != descent.sigma) {
        // Re-certify the Step-1 stopping rule at the point actually returned.
        const double delta = settings.delta_scale * std::max(1.0, final_sigma.lpNorm<Eigen::Infinity>());
        const detail::DirectionOutcome direction =
            detail::solve_direction(final_sigma, detail::backward_gradient(f, final_sigma, delta));
        result.final_direction_value = direction.value;
        result.exit = direction.value >= -1e-9 ? ProximityExit::converged : ProximityExit::stalled;
    }
    result.estimate = final_sigma.norm();
    ctx.emit("category " + std::to_string(category_index) + ": proximity " +
             std::to_string(result.estimate) + " in " + std::to_string(result.trace.size()) +
             " iterations");
    return result;
}

}  // namespace equiclass
