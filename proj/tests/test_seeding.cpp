#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "equiclass/seeding.hpp"
#include "oracles.hpp"

using namespace equiclass;

namespace {

const UncertaintySpec kIdentity = UncertaintySpec::identity();

Eigen::MatrixXd line_distances(const std::vector<double>& points) {
    const int T = static_cast<int>(points.size());
    Eigen::MatrixXd d(T, T);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j) d(i, j) = std::abs(points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]);
    return d;
}

/// Two planted frontiers, three objects each: splitting by tier costs zero.
CharacteristicTable planted_two_tiers() {
    CharacteristicTable table;
    table.object_ids = {"a1", "a2", "a3", "b1", "b2", "b3"};
    table.inputs.resize(1, 6);
    table.inputs << 1.0, 1.15, 1.3, 2.5, 2.65, 2.8;
    table.outputs.resize(1, 6);
    table.outputs << 2.0, 2.2, 2.35, 1.2, 1.4, 1.55;
    return table;
}

}  // namespace

TEST_CASE("enumerate_size_multisets") {
    SECTION("paper-style enumeration order for T=30, S=3") {
        const auto list = enumerate_size_multisets(30, 3);
        REQUIRE(list.size() >= 3);
        CHECK(list[0].sizes == std::vector<int>{2, 2, 26});
        CHECK(list[1].sizes == std::vector<int>{2, 3, 25});
        CHECK(list[2].sizes == std::vector<int>{2, 4, 24});
        for (const auto& m : list) {
            int sum = 0;
            for (std::size_t i = 0; i < m.sizes.size(); ++i) {
                sum += m.sizes[i];
                CHECK(m.sizes[i] >= 2);
                if (i) CHECK(m.sizes[i] >= m.sizes[i - 1]);
            }
            CHECK(sum == 30);
        }
    }
    SECTION("tight and near-tight cases") {
        CHECK(enumerate_size_multisets(6, 3).size() == 1);
        CHECK(enumerate_size_multisets(6, 3)[0].sizes == std::vector<int>{2, 2, 2});
        CHECK(enumerate_size_multisets(7, 3).size() == 1);
        CHECK(enumerate_size_multisets(7, 3)[0].sizes == std::vector<int>{2, 2, 3});
        CHECK(enumerate_size_multisets(9, 3).size() == 3);
    }
    SECTION("infeasible when T < 2S") {
        CHECK_THROWS_AS(enumerate_size_multisets(5, 3), InfeasibleSizes);
    }
}

TEST_CASE("pairwise distances") {
    CharacteristicTable table;
    table.object_ids = {"eff", "dup", "dom"};
    table.inputs.resize(1, 3);
    table.inputs << 1.0, 1.0, 2.0;
    table.outputs.resize(1, 3);
    table.outputs << 2.0, 2.0, 1.0;

    const Eigen::MatrixXd d = pairwise_distances(table, kIdentity);
    CHECK(d(0, 1) == 0.0);  // identical objects
    CHECK(d.diagonal().isZero(0.0));
    CHECK(d == d.transpose());

    // d(efficient, dominated) = ||sigma_dominated||.
    const Category all{0, 1, 2};
    const double dom_norm = min_sigma_for_object(table, all, 2, kIdentity).norm();
    CHECK(d(0, 2) == Catch::Approx(dom_norm).margin(1e-12));

    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) CHECK(std::abs(d(i, k) - d(j, k)) <= d(i, j) + 1e-12);
}

TEST_CASE("cardinality p-median on a line") {
    const Eigen::MatrixXd d = line_distances({0.0, 0.1, 1.0, 1.1});
    const auto categories = solve_cardinality_pmedian(d, SizeMultiset{{2, 2}});
    REQUIRE(categories.size() == 2);
    CHECK(categories[0] == Category{0, 1});
    CHECK(categories[1] == Category{2, 3});
}

TEST_CASE("cardinality p-median with all distances equal is deterministic") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(4, 4);
    d.diagonal().setZero();
    const auto first = solve_cardinality_pmedian(d, SizeMultiset{{2, 2}});
    const auto second = solve_cardinality_pmedian(d, SizeMultiset{{2, 2}});
    CHECK(first == second);
    Classification c{first, {}, {}};
    CHECK(partition_is_valid(c, 4, 2));
}

TEST_CASE("single category p-median is the 1-median") {
    const std::vector<double> pts{0.0, 0.3, 0.4, 2.0};
    const Eigen::MatrixXd d = line_distances(pts);
    const auto categories = solve_cardinality_pmedian(d, SizeMultiset{{4}});
    REQUIRE(categories.size() == 1);
    CHECK(categories[0] == Category{0, 1, 2, 3});

    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) best = std::min(best, d.col(j).sum());
    // Median 0.3: cost 0.3 + 0 + 0.1 + 1.7 = 2.1.
    CHECK(best == Catch::Approx(2.1).margin(1e-12));
}

TEST_CASE("cardinality p-median equals exhaustive enumeration") {
    std::mt19937 rng(80301);
    std::uniform_real_distribution<double> point(0.0, 2.0);
    for (int rep = 0; rep < 12; ++rep) {
        const int T = 5 + static_cast<int>(rng() % 3);  // 5..7
        std::vector<double> pts;
        for (int i = 0; i < T; ++i) pts.push_back(point(rng));
        const Eigen::MatrixXd d = line_distances(pts);
        for (int S = 1; 2 * S <= T; ++S) {
            for (const SizeMultiset& sizes : enumerate_size_multisets(T, S)) {
                const auto categories = solve_cardinality_pmedian(d, sizes);
                double milp_value = oracle::pmedian_cost(d, categories);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& partition : oracle::partitions_with_sizes(T, sizes.sizes))
                    best = std::min(best, oracle::pmedian_cost(d, partition));
                CHECK(milp_value == Catch::Approx(best).margin(1e-6));
            }
        }
    }
}

TEST_CASE("seed classification recovers planted tiers") {
    const auto table = planted_two_tiers();
    ProximityMemo memo;
    const Classification seed = seed_classification(table, 2, kIdentity, {}, &memo);

    REQUIRE(partition_is_valid(seed, 6, 2));
    REQUIRE(seed.total.has_value());
    CHECK(*seed.total == Catch::Approx(0.0).margin(1e-9));
    CHECK(seed.categories[0] == Category{0, 1, 2});
    CHECK(seed.categories[1] == Category{3, 4, 5});
    for (double p : *seed.proximity) CHECK(p >= 0.0);
}

TEST_CASE("seed with T = 2S has a single multiset") {
    const auto table = planted_two_tiers();  // T = 6, S = 3
    const Classification seed = seed_classification(table, 3, kIdentity);
    REQUIRE(partition_is_valid(seed, 6, 3));
    for (const Category& c : seed.categories) CHECK(c.size() == 2);
}

TEST_CASE("seed rejects explicit uncertainty") {
    const auto table = planted_two_tiers();
    const auto spec = UncertaintySpec::explicit_rows({});
    CHECK_THROWS_AS(seed_classification(table, 2, spec), ExplicitSpecInSearch);
}

TEST_CASE("seed total is minimal over the evaluated multisets") {
    const auto table = planted_two_tiers();
    ProximityMemo memo;
    const EvalContext ctx;
    const Classification seed = seed_classification(table, 2, kIdentity, ctx, &memo);

    const Eigen::MatrixXd d = pairwise_distances(table, kIdentity, ctx);
    for (const SizeMultiset& sizes : enumerate_size_multisets(6, 2)) {
        const auto categories = solve_cardinality_pmedian(d, sizes);
        double total = 0.0;
        for (const Category& c : categories)
            total += memo.get_or_compute(table, c, kIdentity, ctx).estimate;
        CHECK(*seed.total <= total + 1e-9);
    }
}
