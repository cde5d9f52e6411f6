#include <doctest.h>

#include <cmath>

#include "fairtree/fairness.hpp"
#include "fairtree/oracle.hpp"
#include "fairtree/tree_io.hpp"
#include "support.hpp"

using namespace fairtree;

namespace {

ColorAssignment colors(std::vector<int> c, std::size_t lam = 2) { return ColorAssignment::from_colors(c, lam); }

}  // namespace

TEST_CASE("a half-and-half cluster is fair") {
    const auto t = parse_nested("(0,1,2,3)");
    const auto a = fairness_audit(t, colors({0, 1, 0, 1}), FairnessParams::uniform(2, 0.25, 0.75));
    CHECK(a.passed);
    CHECK(a.violations.empty());
}

TEST_CASE("mixed leaf and internal children violate the leaf rule") {
    const auto t = parse_nested("(0,(1,2,3))");
    const auto a = fairness_audit(t, colors({0, 1, 0, 1}), FairnessParams::uniform(2, 0.1, 0.9));
    CHECK_FALSE(a.passed);
    bool found = false;
    for (const auto& v : a.violations) found = found || (v.kind == FairnessViolation::Kind::leaf_children && v.node == t.root());
    CHECK(found);
}

TEST_CASE("singletons are never reported") {
    const auto t = parse_nested("((0,1),(2,3))");
    const auto a = fairness_audit(t, colors({0, 1, 1, 0}), FairnessParams::uniform(2, 0.5, 0.5));
    CHECK(a.passed);
    const auto b = fairness_audit(t, colors({0, 0, 1, 1}), FairnessParams::uniform(2, 0.25, 0.75));
    CHECK_FALSE(b.passed);
    for (const auto& v : b.violations) CHECK_FALSE(t.is_leaf(v.node));
    CHECK((b.worst_fraction == 0.0 || b.worst_fraction == 1.0));
}

TEST_CASE("fairness parameter validation") {
    CHECK_THROWS(FairnessParams::uniform(2, 0.0, 0.5).validate(2));
    CHECK_THROWS(FairnessParams::uniform(2, 0.6, 0.5).validate(2));
    CHECK_THROWS(FairnessParams::uniform(2, 0.2, 1.0).validate(2));
    CHECK_THROWS(FairnessParams::uniform(3, 0.2, 0.8).validate(2));
    CHECK_NOTHROW(FairnessParams::uniform(2, 0.2, 0.8).validate(2));
}

TEST_CASE("color sampling") {
    const auto sure = StochasticColorModel::uniform(50, {0.0, 1.0}, 0.5);
    for (int c : sample_colors(sure, 3).color) CHECK(c == 1);

    const auto fair = StochasticColorModel::uniform(10000, {0.5, 0.5}, 0.5);
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        const auto s = sample_colors(fair, seed);
        CHECK(s.counts[0] >= 4500);
        CHECK(s.counts[0] <= 5500);
        CHECK(s.counts[0] + s.counts[1] == 10000);
    }
    CHECK(sample_colors(fair, 8).color == sample_colors(fair, 8).color);
    CHECK(sample_colors(fair, 8).color != sample_colors(fair, 9).color);
}

TEST_CASE("admissibility of a color model") {
    const auto fp = FairnessParams::uniform(2, 0.2, 0.8);
    CHECK(StochasticColorModel::uniform(8, {0.5, 0.5}, 0.5).admissible(fp));
    // 0.2 / (1 - 0.5) = 0.4 > 0.25
    CHECK_FALSE(StochasticColorModel::uniform(8, {0.25, 0.75}, 0.5).admissible(fp));
}

TEST_CASE("concentration thresholds") {
    const auto fp = FairnessParams::uniform(2, 0.2, 0.8);
    const double raw = 3.0 * 0.5 / (0.2 * 0.25) * std::log(2.0 * 1024.0);
    CHECK(raw == doctest::Approx(228.7).epsilon(1e-3));
    CHECK(chernoff_threshold(1024, 2, fp, 0.5, Fraction{1, 8}, ThresholdMode::size) == 229);
    CHECK(std::log(raw / 1024.0) / std::log(0.475) == doctest::Approx(2.01).epsilon(1e-2));
    CHECK(chernoff_threshold(1024, 2, fp, 0.5, Fraction{1, 40}, ThresholdMode::depth) == 2);
    CHECK_THROWS_AS(chernoff_threshold(8, 2, fp, 0.5, Fraction{1, 40}, ThresholdMode::depth), std::domain_error);
    CHECK_THROWS_AS(chernoff_threshold(8, 2, fp, 0.5, Fraction{1, 40}, ThresholdMode::size), std::domain_error);
    CHECK(parse_threshold_mode("size") == ThresholdMode::size);
    CHECK_THROWS(parse_threshold_mode("width"));
}

TEST_CASE("depth-mode abstraction of a perfect tree") {
    const std::size_t n = 1024;
    const auto t = testing::perfect_tree(n);
    const auto m = StochasticColorModel::uniform(n, {0.5, 0.5}, 0.5);
    const auto fp = FairnessParams::uniform(2, 0.2, 0.8);
    const auto r = stochastically_fair_hc(t, m, fp, Fraction{0, 1}, ThresholdMode::depth);
    CHECK(r.threshold == 2);
    // Depths 0..2 survive; each depth-2 cluster keeps its 256 leaves as direct children.
    const auto& o = r.tree;
    CHECK(o.height() == 3);
    std::size_t frontier = 0;
    for (NodeId v : o.preorder()) {
        if (o.depth(v) != 2) continue;
        ++frontier;
        CHECK(o.size(v) == 256);
        CHECK(o.children(v).size() == 256);
    }
    CHECK(frontier == 4);
    CHECK(r.ledger.entries().size() == 1);
    CHECK(r.ledger.entries()[0].kind == OpKind::abstract);
    CHECK(min_internal_size(o) >= r.size_floor);
}

TEST_CASE("size-mode abstraction of a four-leaf tree") {
    const auto fp = FairnessParams::uniform(2, 0.45, 0.55);
    const double raw = 3.0 * 0.15 / (0.45 * 0.85 * 0.85) * std::log(8.0);
    REQUIRE(std::ceil(raw) == 3.0);
    const auto m = StochasticColorModel::uniform(4, {0.5, 0.5}, 0.85);
    const auto t = parse_nested("((0,1),(2,3))");
    const auto r = stochastically_fair_hc(t, m, fp, Fraction{1, 8}, ThresholdMode::size);
    CHECK(r.threshold == 3);
    CHECK(r.tree.num_internal() == 1);
    CHECK(r.tree.children(r.tree.root()).size() == 4);
    Rng rng(1);
    CHECK(verify_ledger(t, r.tree, testing::random_graph(4, rng), r.ledger).ok);
}

TEST_CASE("unbalanced input is refused") {
    const auto m = StochasticColorModel::uniform(64, {0.5, 0.5}, 0.5);
    const auto fp = FairnessParams::uniform(2, 0.2, 0.8);
    CHECK_THROWS_WITH(stochastically_fair_hc(testing::caterpillar(64), m, fp, Fraction{1, 8}, ThresholdMode::size),
                      doctest::Contains("balance audit"));
}
