#pragma once

// Test-only oracles, independent of the first-order machinery they check.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "equiclass/model.hpp"

namespace oracle {

/**
 * Exact 1-input/1-output VRS input-oriented efficiency: the envelopment LP's
 * optimum is attained by a convex combination of at most two peers, so a scan
 * over singletons and pairs is exhaustive.
 */
inline double vrs_efficiency_1x1(const equiclass::CharacteristicTable& table,
                                 const equiclass::Category& category, int t) {
    const double xt = table.inputs(0, t);
    const double yt = table.outputs(0, t);
    double best_x = std::numeric_limits<double>::infinity();
    for (int i : category) {
        if (table.outputs(0, i) >= yt) best_x = std::min(best_x, table.inputs(0, i));
    }
    for (std::size_t a = 0; a < category.size(); ++a) {
        for (std::size_t b = a + 1; b < category.size(); ++b) {
            const double ya = table.outputs(0, category[a]);
            const double yb = table.outputs(0, category[b]);
            if ((ya < yt && yb < yt) || ya == yb) continue;
            const double lam = (yt - yb) / (ya - yb);  // lam*ya + (1-lam)*yb = yt
            if (lam < 0.0 || lam > 1.0) continue;
            const double x = lam * table.inputs(0, category[a]) +
                             (1.0 - lam) * table.inputs(0, category[b]);
            best_x = std::min(best_x, x);
        }
    }
    return best_x / xt;
}

/**
 * Grid-search minimum of ||sigma|| over a 2-D grid of resolution `res`,
 * subject to a monotone (up-closed) feasibility predicate. Feasibility is
 * monotone in each component by Property 1, so each grid column's threshold
 * is found by binary search; this visits the same set of grid points a dense
 * scan would accept.
 */
inline std::optional<double> grid_min_norm_2d(
    const std::function<bool(const Eigen::Vector2d&)>& feasible, double res, double cap) {
    const int K = static_cast<int>(std::ceil(cap / res));
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= K; ++i) {
        const double s0 = i * res;
        if (s0 >= best) break;  // norm >= s0 beyond this column
        if (!feasible(Eigen::Vector2d(s0, K * res))) continue;
        int lo = 0, hi = K;  // smallest feasible index along the second axis
        if (feasible(Eigen::Vector2d(s0, 0.0))) {
            hi = 0;
        } else {
            while (hi - lo > 1) {
                const int mid = (lo + hi) / 2;
                if (feasible(Eigen::Vector2d(s0, mid * res)))
                    hi = mid;
                else
                    lo = mid;
            }
        }
        best = std::min(best, std::hypot(s0, hi * res));
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

/// All partitions of {0..T-1} into exactly S nonempty blocks (canonical:
/// blocks ordered by smallest element).
inline std::vector<std::vector<equiclass::Category>> all_partitions(int T, int S) {
    std::vector<std::vector<equiclass::Category>> out;
    std::vector<equiclass::Category> blocks;
    const std::function<void(int)> rec = [&](int t) {
        if (static_cast<int>(blocks.size()) > S) return;
        if (t == T) {
            if (static_cast<int>(blocks.size()) == S) out.push_back(blocks);
            return;
        }
        const std::size_t count = blocks.size();  // recursion reallocates the vector
        for (std::size_t i = 0; i < count; ++i) {
            blocks[i].push_back(t);
            rec(t + 1);
            blocks[i].pop_back();
        }
        blocks.push_back({t});
        rec(t + 1);
        blocks.pop_back();
    };
    rec(0);
    return out;
}

/// All partitions with the exact (nondecreasing) size multiset.
inline std::vector<std::vector<equiclass::Category>> partitions_with_sizes(
    int T, const std::vector<int>& sizes) {
    std::vector<std::vector<equiclass::Category>> out;
    for (auto& partition : all_partitions(T, static_cast<int>(sizes.size()))) {
        std::vector<int> got;
        for (const auto& block : partition) got.push_back(static_cast<int>(block.size()));
        std::sort(got.begin(), got.end());
        if (got == sizes) out.push_back(partition);
    }
    return out;
}

/// Exact p-median cost of a partition: each block pays its best member median.
inline double pmedian_cost(const Eigen::MatrixXd& dist, const std::vector<equiclass::Category>& blocks) {
    double total = 0.0;
    for (const auto& block : blocks) {
        double best = std::numeric_limits<double>::infinity();
        for (int median : block) {
            double cost = 0.0;
            for (int i : block) cost += dist(i, median);
            best = std::min(best, cost);
        }
        total += best;
    }
    return total;
}

inline equiclass::CharacteristicTable random_table_1x1(std::mt19937& rng, int T) {
    std::uniform_real_distribution<double> in(0.4, 3.0);
    std::uniform_real_distribution<double> out(0.2, 3.0);
    equiclass::CharacteristicTable table;
    table.inputs.resize(1, T);
    table.outputs.resize(1, T);
    for (int t = 0; t < T; ++t) {
        table.inputs(0, t) = in(rng);
        table.outputs(0, t) = out(rng);
        table.object_ids.push_back("o" + std::to_string(t));
    }
    return table;
}

inline equiclass::CharacteristicTable random_table(std::mt19937& rng, int T, int N, int M) {
    std::uniform_real_distribution<double> in(0.3, 3.0);
    std::uniform_real_distribution<double> out(0.2, 3.0);
    equiclass::CharacteristicTable table;
    table.inputs.resize(N, T);
    table.outputs.resize(M, T);
    for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t) table.inputs(i, t) = in(rng);
    for (int i = 0; i < M; ++i)
        for (int t = 0; t < T; ++t) table.outputs(i, t) = out(rng);
    for (int t = 0; t < T; ++t) table.object_ids.push_back("o" + std::to_string(t));
    return table;
}

}  // namespace oracle
