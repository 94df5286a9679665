#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "equiclass/errors.hpp"
#include "equiclass/model.hpp"
#include "equiclass/parallel.hpp"
#include "equiclass/proximity.hpp"
#include "equiclass/solver.hpp"

namespace equiclass {

/// Category sizes (p_1,...,p_S), nondecreasing, each >= 2, summing to T.
struct SizeMultiset {
    std::vector<int> sizes;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(sizes[i]);
        }
        return s + ")";
    }
};

/// All multisets of S parts >= 2 summing to T, in lexicographic order:
/// (2,2,T-4), (2,3,T-5), ...
inline std::vector<SizeMultiset> enumerate_size_multisets(int T, int S) {
    if (T < 2 * S)
        throw InfeasibleSizes("cannot split " + std::to_string(T) + " objects into " +
                              std::to_string(S) + " categories of size >= 2");
    std::vector<SizeMultiset> out;
    std::vector<int> parts(static_cast<std::size_t>(S));
    const auto rec = [&](auto&& self, int index, int minimum, int remaining) -> void {
        if (index == S - 1) {
            if (remaining >= minimum) {
                parts[static_cast<std::size_t>(index)] = remaining;
                out.push_back(SizeMultiset{parts});
            }
            return;
        }
        const int slots_left = S - index - 1;
        for (int p = minimum; p * (slots_left + 1) <= remaining; ++p) {
            parts[static_cast<std::size_t>(index)] = p;
            self(self, index + 1, p, remaining - p);
        }
    };
    rec(rec, 0, 2, T);
    return out;
}

/// Norms of the per-object minimal sigmas against the whole object set.
inline std::vector<double> min_sigma_norms(const CharacteristicTable& table,
                                           const UncertaintySpec& spec,
                                           const EvalContext& ctx = {}) {
    Category all(static_cast<std::size_t>(table.num_objects()));
    for (int t = 0; t < table.num_objects(); ++t) all[static_cast<std::size_t>(t)] = t;
    std::vector<double> norms;
    for (const SigmaVector& sigma : min_sigma_collection(table, all, spec, ctx))
        norms.push_back(sigma.norm());
    return norms;
}

/// d(t_i, t_j) = | ||sigma^i|| - ||sigma^j|| | with sigmas taken against the
/// entire collection, not any proposed partition.
inline Eigen::MatrixXd pairwise_distances(const CharacteristicTable& table,
                                          const UncertaintySpec& spec,
                                          const EvalContext& ctx = {}) {
    const std::vector<double> norms = min_sigma_norms(table, spec, ctx);
    const int T = table.num_objects();
    Eigen::MatrixXd d(T, T);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j)
            d(i, j) = std::abs(norms[static_cast<std::size_t>(i)] - norms[static_cast<std::size_t>(j)]);
    return d;
}

/**
 * The cardinality-constrained p-median program: assignment variables
 * zeta_ij over objects, median indicators zeta_jj with sum S, and size
 * selectors omega_jk matching each chosen median's set size to one entry of
 * the unique-size list with the right multiplicity. Solved exactly by
 * branch-and-bound; categories come back ordered by median index.
 */
inline std::vector<Category> solve_cardinality_pmedian(const Eigen::MatrixXd& distances,
                                                       const SizeMultiset& sizes,
                                                       SolveStats* stats = nullptr) {
    const int T = static_cast<int>(distances.rows());
    const int S = static_cast<int>(sizes.sizes.size());

    std::vector<int> unique_sizes = sizes.sizes;
    std::sort(unique_sizes.begin(), unique_sizes.end());
    unique_sizes.erase(std::unique(unique_sizes.begin(), unique_sizes.end()), unique_sizes.end());
    const int K = static_cast<int>(unique_sizes.size());
    std::vector<int> multiplicity(static_cast<std::size_t>(K), 0);
    for (int p : sizes.sizes)
        for (int k = 0; k < K; ++k)
            if (unique_sizes[static_cast<std::size_t>(k)] == p) ++multiplicity[static_cast<std::size_t>(k)];

    const int n_zeta = T * T;
    const int n = n_zeta + T * K;
    const auto zeta = [T](int i, int j) { return i * T + j; };
    const auto omega = [n_zeta, K](int j, int k) { return n_zeta + j * K + k; };

    BinaryProgram bp;
    bp.objective = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j) bp.objective[zeta(i, j)] = distances(i, j);

    std::vector<Eigen::Triplet<double>> eq, le;
    std::vector<double> eq_rhs, le_rhs;
    int row = 0;
    for (int i = 0; i < T; ++i) {  // every object assigned once
        for (int j = 0; j < T; ++j) eq.emplace_back(row, zeta(i, j), 1.0);
        eq_rhs.push_back(1.0);
        ++row;
    }
    for (int j = 0; j < T; ++j) eq.emplace_back(row, zeta(j, j), 1.0);  // S medians
    eq_rhs.push_back(static_cast<double>(S));
    ++row;
    for (int j = 0; j < T; ++j) {  // set size matches a selected unique size
        for (int i = 0; i < T; ++i) eq.emplace_back(row, zeta(i, j), 1.0);
        for (int k = 0; k < K; ++k)
            eq.emplace_back(row, omega(j, k), -static_cast<double>(unique_sizes[static_cast<std::size_t>(k)]));
        eq_rhs.push_back(0.0);
        ++row;
    }
    for (int k = 0; k < K; ++k) {  // each unique size used with its multiplicity
        for (int j = 0; j < T; ++j) eq.emplace_back(row, omega(j, k), 1.0);
        eq_rhs.push_back(static_cast<double>(multiplicity[static_cast<std::size_t>(k)]));
        ++row;
    }
    bp.eq_matrix.resize(row, n);
    bp.eq_matrix.setFromTriplets(eq.begin(), eq.end());
    bp.eq_rhs = Eigen::Map<const Eigen::VectorXd>(eq_rhs.data(), static_cast<Eigen::Index>(eq_rhs.size()));

    row = 0;
    for (int i = 0; i < T; ++i)  // assignment only to open medians
        for (int j = 0; j < T; ++j) {
            if (i == j) continue;
            le.emplace_back(row, zeta(i, j), 1.0);
            le.emplace_back(row, zeta(j, j), -1.0);
            le_rhs.push_back(0.0);
            ++row;
        }
    for (int j = 0; j < T; ++j) {  // at most one size per median slot
        for (int k = 0; k < K; ++k) le.emplace_back(row, omega(j, k), 1.0);
        le_rhs.push_back(1.0);
        ++row;
    }
    bp.le_matrix.resize(row, n);
    bp.le_matrix.setFromTriplets(le.begin(), le.end());
    bp.le_rhs = Eigen::Map<const Eigen::VectorXd>(le_rhs.data(), static_cast<Eigen::Index>(le_rhs.size()));

    const SolveOutcome out = solve_binary_program(bp, stats);
    if (out.status != SolveStatus::optimal)
        throw SolverFailure("cardinality p-median solve ended " + std::string(to_string(out.status)));

    const Eigen::VectorXd& x = *out.solution;
    std::vector<Category> categories;
    for (int j = 0; j < T; ++j) {
        if (x[zeta(j, j)] < 0.5) continue;
        Category members;
        for (int i = 0; i < T; ++i)
            if (x[zeta(i, j)] > 0.5) members.push_back(i);
        categories.push_back(std::move(members));
    }

    std::vector<int> got;
    for (const Category& c : categories) got.push_back(static_cast<int>(c.size()));
    std::sort(got.begin(), got.end());
    if (static_cast<int>(categories.size()) != S || got != sizes.sizes)
        throw SolverFailure("p-median solution violates the requested cardinalities");
    return categories;
}

/// Shared category -> proximity cache; identical recomputation makes
/// concurrent double-inserts harmless.
class ProximityMemo {
   public:
    ProximityResult get_or_compute(const CharacteristicTable& table, const Category& category,
                                   const UncertaintySpec& spec, const EvalContext& ctx) {
        {
            std::lock_guard lock(mutex_);
            const auto it = cache_.find(category);
            if (it != cache_.end()) return it->second;
        }
        ProximityResult result = proximity(table, category, spec, ctx);
        std::lock_guard lock(mutex_);
        return cache_.emplace(category, std::move(result)).first->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }

   private:
    mutable std::mutex mutex_;
    std::map<Category, ProximityResult> cache_;
};

namespace detail {

inline Classification with_proximities(const CharacteristicTable& table,
                                       std::vector<Category> categories,
                                       const UncertaintySpec& spec, const EvalContext& ctx,
                                       ProximityMemo& memo) {
    Classification classification;
    classification.categories = std::move(categories);
    std::vector<double> values;
    double total = 0.0;
    for (const Category& category : classification.categories) {
        const double p = memo.get_or_compute(table, category, spec, ctx).estimate;
        values.push_back(p);
        total += p;
    }
    classification.proximity = std::move(values);
    classification.total = total;
    return classification;
}

}  // namespace detail

/**
 * Initial classification: solve the adapted p-median for every admissible
 * size multiset, evaluate each partition's total proximity, and keep the
 * smallest (ties to the earlier multiset in lexicographic order).
 */
inline Classification seed_classification(const CharacteristicTable& table, int S,
                                          const UncertaintySpec& spec, const EvalContext& ctx = {},
                                          ProximityMemo* memo = nullptr) {
    if (!spec.mutable_under_search())
        throw ExplicitSpecInSearch("explicit uncertainty matrices cannot follow category changes");
    const std::vector<SizeMultiset> multisets = enumerate_size_multisets(table.num_objects(), S);
    const Eigen::MatrixXd distances = pairwise_distances(table, spec, ctx);

    ProximityMemo local;
    ProximityMemo& shared = memo ? *memo : local;

    const std::vector<Classification> candidates =
        parallel_map<Classification>(ctx.pool, multisets.size(), [&](std::size_t m) {
            std::vector<Category> categories =
                solve_cardinality_pmedian(distances, multisets[m], ctx.stats);
            Classification c = detail::with_proximities(table, std::move(categories), spec, ctx, shared);
            ctx.emit("seed multiset " + multisets[m].to_string() + ": total " +
                     std::to_string(*c.total));
            return c;
        });

    std::size_t best = 0;
    for (std::size_t m = 1; m < candidates.size(); ++m)
        if (*candidates[m].total < *candidates[best].total) best = m;
    return candidates[best];
}

}  // namespace equiclass
