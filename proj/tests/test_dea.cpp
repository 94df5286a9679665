#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "equiclass/dea.hpp"
#include "oracles.hpp"

using namespace equiclass;

namespace {

/// a strictly dominates b: less input, more output.
CharacteristicTable dominated_pair() {
    CharacteristicTable table;
    table.object_ids = {"a", "b"};
    table.inputs.resize(1, 2);
    table.inputs << 1.0, 2.0;
    table.outputs.resize(1, 2);
    table.outputs << 2.0, 1.0;
    return table;
}

}  // namespace

TEST_CASE("efficiency of a singleton category is one") {
    CharacteristicTable table;
    table.object_ids = {"solo"};
    table.inputs.resize(2, 1);
    table.inputs << 0.8, 1.3;
    table.outputs.resize(1, 1);
    table.outputs << 0.6;
    CHECK(efficiency(table, {0}, 0) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("a dominating object is efficient, the dominated one scores its input ratio") {
    const auto table = dominated_pair();
    CHECK(efficiency(table, {0, 1}, 0) == Catch::Approx(1.0).margin(1e-7));
    // Best peer for b delivers y >= 1 at input 1, so theta = 1/2.
    CHECK(efficiency(table, {0, 1}, 1) == Catch::Approx(0.5).margin(1e-7));
    CHECK(efficiency(table, {0, 1}, 1) ==
          Catch::Approx(oracle::vrs_efficiency_1x1(table, {0, 1}, 1)).margin(1e-7));
}

TEST_CASE("identical columns receive equal scores") {
    CharacteristicTable table;
    table.object_ids = {"a", "b", "c"};
    table.inputs.resize(1, 3);
    table.inputs << 1.5, 0.9, 1.5;
    table.outputs.resize(2, 3);
    table.outputs << 1.0, 1.4, 1.0,
                     0.7, 0.5, 0.7;
    const Category all{0, 1, 2};
    CHECK(efficiency(table, all, 0) == Catch::Approx(efficiency(table, all, 2)).margin(1e-6));
}

TEST_CASE("efficiency never exceeds one on random instances") {
    std::mt19937 rng(424242);
    for (int rep = 0; rep < 30; ++rep) {
        const int T = 2 + static_cast<int>(rng() % 6);
        const int N = 1 + static_cast<int>(rng() % 3);
        const int M = 1 + static_cast<int>(rng() % 3);
        const auto table = oracle::random_table(rng, T, N, M);
        Category all;
        for (int t = 0; t < T; ++t) all.push_back(t);
        for (int t = 0; t < T; ++t) {
            const double score = efficiency(table, all, t);
            CHECK(score <= 1.0 + 1e-9);
            CHECK(score > 0.0);
        }
    }
}

TEST_CASE("scores are invariant under column permutation") {
    std::mt19937 rng(5150);
    const auto table = oracle::random_table(rng, 5, 2, 2);

    CharacteristicTable shuffled = table;
    const std::vector<int> perm{3, 0, 4, 1, 2};
    for (int j = 0; j < 5; ++j) {
        shuffled.inputs.col(j) = table.inputs.col(perm[static_cast<std::size_t>(j)]);
        shuffled.outputs.col(j) = table.outputs.col(perm[static_cast<std::size_t>(j)]);
    }
    const Category all{0, 1, 2, 3, 4};
    for (int t = 0; t < 5; ++t) {
        const int original = perm[static_cast<std::size_t>(t)];
        CHECK(efficiency(shuffled, all, t) ==
              Catch::Approx(efficiency(table, all, original)).margin(1e-6));
    }
}

TEST_CASE("robust efficiency at sigma = 0 equals the nominal score") {
    const auto table = dominated_pair();
    const auto spec = UncertaintySpec::identity();
    const SigmaVector zero = SigmaVector::zero(2);
    CHECK(robust_efficiency(table, {0, 1}, 1, zero, spec) ==
          Catch::Approx(efficiency(table, {0, 1}, 1)).margin(1e-6));
}

TEST_CASE("large uniform sigma makes the dominated object efficient") {
    const auto table = dominated_pair();
    const auto spec = UncertaintySpec::identity();
    const SigmaVector big = SigmaVector::uniform(2, 10.0);
    CHECK(robust_efficiency(table, {0, 1}, 1, big, spec) >= 1.0 - 1e-6);
}

TEST_CASE("robust efficiency is monotone past capability (Property 1)") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    const auto spec = UncertaintySpec::identity();

    for (int rep = 0; rep < 10; ++rep) {
        const int T = 2 + static_cast<int>(rng() % 4);
        const auto table = oracle::random_table(rng, T, 1 + rng() % 2, 1 + rng() % 2);
        Category all;
        for (int t = 0; t < T; ++t) all.push_back(t);
        const int t = static_cast<int>(rng() % static_cast<unsigned>(T));

        // Find a sigma' with score one by scaling up, then perturb upward.
        const SigmaVector base = min_sigma_for_object(table, all, t, spec);
        SigmaVector prime(base.values * 1.01);
        if (robust_efficiency(table, all, t, prime, spec) < 1.0 - 1e-6) continue;
        Eigen::VectorXd larger = prime.values;
        for (int i = 0; i < larger.size(); ++i) larger[i] += bump(rng);
        CHECK(robust_efficiency(table, all, t, SigmaVector(larger), spec) >= 1.0 - 1e-6);
    }
}

TEST_CASE("min_sigma_for_object returns zero for efficient objects") {
    const auto table = dominated_pair();
    const auto spec = UncertaintySpec::identity();
    CHECK(min_sigma_for_object(table, {0, 1}, 0, spec).is_zero());
}

TEST_CASE("min_sigma_for_object matches a dense grid oracle (1x1)") {
    const auto table = dominated_pair();
    const auto spec = UncertaintySpec::identity();
    const EvalContext ctx;

    const SigmaVector sigma = min_sigma_for_object(table, {0, 1}, 1, spec, ctx);
    CHECK(sigma.norm() > 0.0);
    CHECK(robust_efficiency(table, {0, 1}, 1, sigma, spec, ctx) >= 1.0 - 2e-6);

    const auto feasible = [&](const Eigen::Vector2d& s) {
        return robust_efficiency(table, {0, 1}, 1, SigmaVector(s), spec, ctx) >= 1.0 - 1e-6;
    };
    const auto oracle_norm = oracle::grid_min_norm_2d(feasible, 1e-3, 1.5);
    REQUIRE(oracle_norm.has_value());
    CHECK(std::abs(sigma.norm() - *oracle_norm) <= 2e-3);
}

TEST_CASE("min_sigma_for_object is deterministic") {
    const auto table = dominated_pair();
    const auto spec = UncertaintySpec::identity();
    const SigmaVector first = min_sigma_for_object(table, {0, 1}, 1, spec);
    const SigmaVector second = min_sigma_for_object(table, {0, 1}, 1, spec);
    CHECK(first.values == second.values);
}

TEST_CASE("capability: the doubling search terminates on random instances") {
    std::mt19937 rng(140);
    const auto spec = UncertaintySpec::identity();
    for (int rep = 0; rep < 10; ++rep) {
        const int T = 2 + static_cast<int>(rng() % 5);
        const auto table = oracle::random_table(rng, T, 1 + rng() % 2, 1 + rng() % 2);
        Category all;
        for (int t = 0; t < T; ++t) all.push_back(t);
        for (int t = 0; t < T; ++t) {
            SigmaVector sigma;
            REQUIRE_NOTHROW(sigma = min_sigma_for_object(table, all, t, spec));
            CHECK(robust_efficiency(table, all, t, sigma, spec) >= 1.0 - 2e-6);
        }
    }
}
