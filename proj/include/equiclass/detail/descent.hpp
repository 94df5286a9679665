#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstring>
#include <functional>
#include <unordered_map>
#include <vector>

#include "equiclass/model.hpp"

namespace equiclass::detail {

struct DirectionOutcome {
    Eigen::VectorXd d;
    double value = 0.0;
};

/**
 * Closed-form solution of  min { d'sigma : d'grad >= 0, d'd <= 1 }.
 * If grad'sigma <= 0 the ball minimizer -sigma/||sigma|| already satisfies
 * the halfspace; otherwise project -sigma onto the hyperplane orthogonal to
 * grad and normalize. A zero projection means no descent direction exists.
 */
inline DirectionOutcome solve_direction(const Eigen::VectorXd& sigma, const Eigen::VectorXd& grad) {
    DirectionOutcome out;
    out.d = Eigen::VectorXd::Zero(sigma.size());
    const double sigma_norm = sigma.norm();
    if (sigma_norm <= 0.0) return out;

    if (grad.dot(sigma) <= 0.0) {
        out.d = -sigma / sigma_norm;
        out.value = -sigma_norm;
        return out;
    }
    const double gg = grad.squaredNorm();
    Eigen::VectorXd projected = sigma - (grad.dot(sigma) / gg) * grad;
    const double pnorm = projected.norm();
    if (pnorm <= 1e-14 * sigma_norm) return out;  // sigma parallel to grad
    out.d = -projected / pnorm;
    out.value = -pnorm;
    return out;
}

/// Step-size cap keeping ||sigma + alpha d|| at or above the norm floor;
/// negative radicands (possible through feasibility slack) clamp to zero.
inline double step_upper_bound(const Eigen::VectorXd& sigma, const Eigen::VectorXd& d,
                               double norm_floor) {
    const double sd = sigma.dot(d);
    if (sd >= 0.0) return 0.0;
    double radicand = sd * sd - (sigma.squaredNorm() - norm_floor * norm_floor);
    if (radicand < 0.0) radicand = 0.0;
    return -sd - std::sqrt(radicand);
}

/// Memoizes a scalar function of sigma on exact bit patterns, so the descent
/// loop never pays twice for the same Gamma evaluation.
class CachedObjective {
   public:
    explicit CachedObjective(std::function<double(const Eigen::VectorXd&)> fn) : fn_(std::move(fn)) {}

    double operator()(const Eigen::VectorXd& sigma) {
        Key key{std::vector<double>(sigma.data(), sigma.data() + sigma.size())};
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double value = fn_(sigma);
        cache_.emplace(std::move(key), value);
        return value;
    }

    std::size_t evaluations() const { return cache_.size(); }

   private:
    struct Key {
        std::vector<double> v;
        bool operator==(const Key& o) const { return v == o.v; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = k.v.size();
            for (double x : k.v) {
                std::uint64_t bits;
                std::memcpy(&bits, &x, sizeof bits);
                h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            }
            return h;
        }
    };
    std::function<double(const Eigen::VectorXd&)> fn_;
    std::unordered_map<Key, double, KeyHash> cache_;
};

struct DescentSettings {
    double delta_scale = 1e-3;   // backward-difference step, scaled by max(1, ||sigma||_inf)
    int max_iters = 100;
    double bisect_resolution = 1e-8;  // relative to the step cap
    double stop_threshold = -1e-9;    // direction value at or above this terminates
};

struct DescentResult {
    Eigen::VectorXd sigma;
    std::vector<TracePoint> trace;
    ProximityExit exit = ProximityExit::converged;
    double final_direction_value = 0.0;
};

/// Backward-difference gradient with the boundary rule: zero component where
/// sigma_i = 0, effective step min(delta, sigma_i) otherwise.
inline Eigen::VectorXd backward_gradient(CachedObjective& f, const Eigen::VectorXd& sigma,
                                         double delta) {
    const double f0 = f(sigma);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(sigma.size());
    for (int i = 0; i < sigma.size(); ++i) {
        if (sigma[i] <= 0.0) continue;
        const double step = std::min(delta, sigma[i]);
        Eigen::VectorXd probe = sigma;
        probe[i] -= step;
        grad[i] = (f0 - f(probe)) / step;
    }
    return grad;
}

/**
 * The Step 1/Step 2 loop: from a feasible sigma0, repeatedly compute a
 * backward-difference gradient, solve the direction problem, and bisect for
 * the largest step keeping f >= target inside the norm-floor cap. Terminates
 * once the direction problem's optimum is nonnegative.
 */
inline DescentResult descend_norm(CachedObjective& f, Eigen::VectorXd sigma0, double target,
                                  double norm_floor, const DescentSettings& settings) {
    DescentResult result;
    Eigen::VectorXd sigma = std::move(sigma0);
    result.trace.push_back(TracePoint{sigma.norm(), f(sigma)});
    if (result.trace.front().gamma < target) {
        result.exit = ProximityExit::stalled;
        result.sigma = std::move(sigma);
        return result;
    }

    const auto trial_point = [&](const Eigen::VectorXd& base, const Eigen::VectorXd& d,
                                 double alpha) -> Eigen::VectorXd {
        return (base + alpha * d).cwiseMax(0.0);
    };
    // A clamped trial could in principle dip under the norm floor; such
    // points are rejected so the Theorem-2 floor holds exactly.
    const auto acceptable = [&](const Eigen::VectorXd& point) {
        return f(point) >= target && point.norm() >= norm_floor - 1e-12;
    };

    result.exit = ProximityExit::iteration_limit;
    double delta_scale = settings.delta_scale;
    int shrink_count = 0;
    for (int iter = 0; iter < settings.max_iters; ++iter) {
        const double delta = delta_scale * std::max(1.0, sigma.lpNorm<Eigen::Infinity>());
        const Eigen::VectorXd grad = backward_gradient(f, sigma, delta);
        const DirectionOutcome direction = solve_direction(sigma, grad);
        result.final_direction_value = direction.value;
        if (direction.value >= settings.stop_threshold) {
            result.exit = ProximityExit::converged;
            break;
        }

        const double alpha_max = step_upper_bound(sigma, direction.d, norm_floor);
        double alpha = 0.0;
        if (alpha_max > 0.0) {
            if (acceptable(trial_point(sigma, direction.d, alpha_max))) {
                alpha = alpha_max;
            } else {
                double lo = 0.0, hi = alpha_max;
                while (hi - lo > settings.bisect_resolution * alpha_max) {
                    const double mid = 0.5 * (lo + hi);
                    if (acceptable(trial_point(sigma, direction.d, mid)))
                        lo = mid;
                    else
                        hi = mid;
                }
                alpha = lo;
            }
        }
        Eigen::VectorXd candidate;
        if (alpha > 0.0) candidate = trial_point(sigma, direction.d, alpha);
        if (alpha <= 0.0 || candidate.norm() >= sigma.norm() - 1e-9) {
            // The smeared gradient can overstate feasible descent near a
            // kink; a sharper step either finds a usable direction or
            // certifies termination.
            if (shrink_count < 3) {
                ++shrink_count;
                delta_scale *= 0.1;
                continue;
            }
            result.exit = ProximityExit::stalled;
            break;
        }
        shrink_count = 0;
        delta_scale = settings.delta_scale;
        sigma = std::move(candidate);
        result.trace.push_back(TracePoint{sigma.norm(), f(sigma)});
    }
    result.sigma = std::move(sigma);
    return result;
}

}  // namespace equiclass::detail
