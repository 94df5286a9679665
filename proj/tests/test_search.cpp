#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "equiclass/search.hpp"
#include "oracles.hpp"

using namespace equiclass;

namespace {

const UncertaintySpec kIdentity = UncertaintySpec::identity();

CharacteristicTable planted_two_tiers() {
    CharacteristicTable table;
    table.object_ids = {"a1", "a2", "a3", "b1", "b2", "b3"};
    table.inputs.resize(1, 6);
    table.inputs << 1.0, 1.15, 1.3, 2.5, 2.65, 2.8;
    table.outputs.resize(1, 6);
    table.outputs << 2.0, 2.2, 2.35, 1.2, 1.4, 1.55;
    return table;
}

double brute_force_optimum(const CharacteristicTable& table, int S, ProximityMemo& memo,
                           const EvalContext& ctx) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& partition : oracle::all_partitions(table.num_objects(), S)) {
        double total = 0.0;
        for (const Category& c : partition)
            total += memo.get_or_compute(table, c, kIdentity, ctx).estimate;
        best = std::min(best, total);
    }
    return best;
}

}  // namespace

TEST_CASE("neighbor counts") {
    SECTION("two pairs give four neighbors") {
        const Classification c{{{0, 1}, {2, 3}}, {}, {}};
        CHECK(neighbors(c).size() == 4);
    }
    SECTION("singleton sources are frozen") {
        const Classification c{{{0}, {1, 2}}, {}, {}};
        const auto list = neighbors(c);
        REQUIRE(list.size() == 2);
        CHECK(list[0].categories == std::vector<Category>{{0, 1}, {2}});
        CHECK(list[1].categories == std::vector<Category>{{0, 2}, {1}});
    }
    SECTION("one category has no neighbors") {
        const Classification c{{{0, 1, 2}}, {}, {}};
        CHECK(neighbors(c).empty());
    }
}

TEST_CASE("neighbors preserve validity") {
    const Classification c{{{0, 1, 2}, {3, 4}, {5}}, {}, {}};
    for (const Classification& n : neighbors(c)) CHECK(partition_is_valid(n, 6, 3));
}

TEST_CASE("improve fixes a planted misassignment") {
    const auto table = planted_two_tiers();
    const EvalContext ctx;
    ProximityMemo memo;

    // Object 3 (first of tier b) planted in tier a's category.
    Classification warped;
    warped.categories = {{0, 1, 2, 3}, {4, 5}};
    const ImproveOutcome step = improve(table, warped, kIdentity, ctx, &memo);
    REQUIRE(step.improved);
    CHECK(step.classification.categories == std::vector<Category>{{0, 1, 2}, {3, 4, 5}});
    CHECK(*step.classification.total == Catch::Approx(0.0).margin(1e-9));

    // Already optimal: no further improvement.
    const ImproveOutcome done = improve(table, step.classification, kIdentity, ctx, &memo);
    CHECK_FALSE(done.improved);
    CHECK(done.classification.categories == step.classification.categories);
}

TEST_CASE("improve updates caches consistently") {
    const auto table = planted_two_tiers();
    const EvalContext ctx;
    ProximityMemo memo;
    Classification warped;
    warped.categories = {{0, 1, 2, 3}, {4, 5}};
    const ImproveOutcome step = improve(table, warped, kIdentity, ctx, &memo);
    REQUIRE(step.improved);

    // Cached per-category values equal a from-scratch recomputation.
    double recomputed = 0.0;
    for (std::size_t s = 0; s < step.classification.categories.size(); ++s) {
        const double fresh =
            proximity(table, step.classification.categories[s], kIdentity, ctx).estimate;
        CHECK((*step.classification.proximity)[s] == Catch::Approx(fresh).margin(1e-9));
        recomputed += fresh;
    }
    CHECK(*step.classification.total == Catch::Approx(recomputed).margin(1e-9));
}

TEST_CASE("classify recovers the planted two-tier optimum") {
    const auto table = planted_two_tiers();
    const EvalContext ctx;
    const ClassifyOutcome outcome = classify(table, 2, kIdentity, ctx);

    REQUIRE(!outcome.history.empty());
    CHECK(partition_is_valid(outcome.final, 6, 2));
    for (std::size_t k = 1; k < outcome.history.size(); ++k)
        CHECK(*outcome.history[k].total < *outcome.history[k - 1].total - 1e-9);

    ProximityMemo memo;
    const double optimum = brute_force_optimum(table, 2, memo, ctx);
    CHECK(*outcome.final.total == Catch::Approx(optimum).margin(1e-6));
}

TEST_CASE("classify on a noisy instance reaches a local optimum") {
    std::mt19937 rng(2718);
    auto table = oracle::random_table_1x1(rng, 7);
    const EvalContext ctx;
    const ClassifyOutcome outcome = classify(table, 3, kIdentity, ctx);

    CHECK(partition_is_valid(outcome.final, 7, 3));
    for (std::size_t k = 1; k < outcome.history.size(); ++k)
        CHECK(*outcome.history[k].total < *outcome.history[k - 1].total - 1e-9);

    // Local optimality under the single-move neighborhood.
    ProximityMemo memo;
    for (const Classification& n : neighbors(outcome.final)) {
        double total = 0.0;
        for (const Category& c : n.categories)
            total += memo.get_or_compute(table, c, kIdentity, ctx).estimate;
        CHECK(total >= *outcome.final.total - 1e-9);
    }
}
