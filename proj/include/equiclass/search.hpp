#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "equiclass/model.hpp"
#include "equiclass/seeding.hpp"

namespace equiclass {

namespace detail {

/// A single-object move: object t leaves category src for category dst.
struct Move {
    int object;
    int src;
    int dst;
};

/// Moves in canonical order: object index ascending, destination ascending.
/// Moves that would empty their source category are excluded.
inline std::vector<Move> enumerate_moves(const Classification& classification) {
    const int S = classification.num_categories();
    std::vector<Move> moves;
    int num_objects = 0;
    for (const Category& c : classification.categories) num_objects += static_cast<int>(c.size());
    for (int t = 0; t < num_objects; ++t) {
        int src = -1;
        for (int s = 0; s < S; ++s)
            if (category_slot(classification.categories[static_cast<std::size_t>(s)], t) >= 0) {
                src = s;
                break;
            }
        if (classification.categories[static_cast<std::size_t>(src)].size() == 1) continue;
        for (int dst = 0; dst < S; ++dst)
            if (dst != src) moves.push_back(Move{t, src, dst});
    }
    return moves;
}

inline Classification apply_move(const Classification& classification, const Move& move) {
    Classification next = classification;
    Category& src = next.categories[static_cast<std::size_t>(move.src)];
    src.erase(std::find(src.begin(), src.end(), move.object));
    Category& dst = next.categories[static_cast<std::size_t>(move.dst)];
    dst.insert(std::upper_bound(dst.begin(), dst.end(), move.object), move.object);
    next.proximity.reset();
    next.total.reset();
    return next;
}

}  // namespace detail

/// Every classification reachable by one single-object move.
inline std::vector<Classification> neighbors(const Classification& classification) {
    std::vector<Classification> out;
    for (const detail::Move& move : detail::enumerate_moves(classification))
        out.push_back(detail::apply_move(classification, move));
    return out;
}

struct ImproveOutcome {
    Classification classification;
    bool improved = false;
};

/**
 * One best-improvement step: evaluate the total proximity of every neighbor,
 * recomputing only the two categories a move touches, and accept the best
 * neighbor when it beats the incumbent by more than 1e-9. Ties go to the
 * lowest moved-object index, then the lowest destination index.
 */
inline ImproveOutcome improve(const CharacteristicTable& table, const Classification& incumbent,
                              const UncertaintySpec& spec, const EvalContext& ctx = {},
                              ProximityMemo* memo = nullptr) {
    if (!spec.mutable_under_search())
        throw ExplicitSpecInSearch("explicit uncertainty matrices cannot follow category changes");
    ProximityMemo local;
    ProximityMemo& shared = memo ? *memo : local;

    Classification current = incumbent;
    if (!current.proximity || !current.total)
        current = detail::with_proximities(table, current.categories, spec, ctx, shared);
    const std::vector<double>& base = *current.proximity;

    const std::vector<detail::Move> moves = detail::enumerate_moves(current);

    // Each move needs the proximities of its shrunken source and grown
    // destination; compute the distinct categories once, in parallel.
    std::vector<Category> needed;
    for (const detail::Move& move : moves) {
        Category src = current.categories[static_cast<std::size_t>(move.src)];
        src.erase(std::find(src.begin(), src.end(), move.object));
        Category dst = current.categories[static_cast<std::size_t>(move.dst)];
        dst.insert(std::upper_bound(dst.begin(), dst.end(), move.object), move.object);
        needed.push_back(std::move(src));
        needed.push_back(std::move(dst));
    }
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    parallel_map<char>(ctx.pool, needed.size(), [&](std::size_t i) {
        shared.get_or_compute(table, needed[i], spec, ctx);
        return char(0);
    });

    std::optional<std::size_t> best;
    double best_total = *current.total;
    std::vector<double> best_parts;
    for (std::size_t m = 0; m < moves.size(); ++m) {
        const detail::Move& move = moves[m];
        Category src = current.categories[static_cast<std::size_t>(move.src)];
        src.erase(std::find(src.begin(), src.end(), move.object));
        Category dst = current.categories[static_cast<std::size_t>(move.dst)];
        dst.insert(std::upper_bound(dst.begin(), dst.end(), move.object), move.object);
        const double p_src = shared.get_or_compute(table, src, spec, ctx).estimate;
        const double p_dst = shared.get_or_compute(table, dst, spec, ctx).estimate;
        const double total = *current.total - base[static_cast<std::size_t>(move.src)] -
                             base[static_cast<std::size_t>(move.dst)] + p_src + p_dst;
        const double threshold = best ? best_total : *current.total - 1e-9;
        if (total < threshold) {
            best = m;
            best_total = total;
            best_parts = {p_src, p_dst};
        }
    }

    if (!best) return ImproveOutcome{current, false};

    const detail::Move& move = moves[*best];
    Classification next = detail::apply_move(current, move);
    std::vector<double> parts = base;
    parts[static_cast<std::size_t>(move.src)] = best_parts[0];
    parts[static_cast<std::size_t>(move.dst)] = best_parts[1];
    next.proximity = parts;
    double sum = 0.0;
    for (double p : parts) sum += p;
    next.total = sum;
    ctx.emit("improve: moved object " + std::to_string(move.object) + " from category " +
             std::to_string(move.src) + " to " + std::to_string(move.dst) + ", total " +
             std::to_string(sum));
    return ImproveOutcome{std::move(next), true};
}

struct ClassifyOutcome {
    Classification final;
    std::vector<Classification> history;
};

/**
 * The two-phase classification: a p-median seed over all size multisets,
 * then best-improvement single-object moves to local optimality. The history
 * starts at the seed and each later entry strictly lowers the total.
 */
inline ClassifyOutcome classify(const CharacteristicTable& table, int S,
                                const UncertaintySpec& spec, const EvalContext& ctx = {},
                                ProximityMemo* memo = nullptr) {
    ProximityMemo local;
    ProximityMemo& shared = memo ? *memo : local;
    ClassifyOutcome outcome;
    outcome.history.push_back(seed_classification(table, S, spec, ctx, &shared));
    for (;;) {
        ImproveOutcome step = improve(table, outcome.history.back(), spec, ctx, &shared);
        if (!step.improved) break;
        outcome.history.push_back(std::move(step.classification));
    }
    outcome.final = outcome.history.back();
    return outcome;
}

}  // namespace equiclass
