#include <doctest.h>

#include "fairtree/cost.hpp"
#include "fairtree/linkage.hpp"
#include "fairtree/simd.hpp"
#include "fairtree/tree_io.hpp"
#include "fairtree/oracle.hpp"
#include "support.hpp"

using namespace fairtree;

TEST_CASE("average linkage on tiny inputs") {
    const auto one = build_average_linkage(WeightedGraph::from_dense(1, {0.0}));
    CHECK(one.num_leaves() == 1);
    CHECK(one.num_internal() == 0);

    const auto two = build_average_linkage(WeightedGraph::from_dense(2, {0, 0.3, 0.3, 0}));
    CHECK(two.num_internal() == 1);
    CHECK(two.children(two.root()).size() == 2);
}

TEST_CASE("average linkage merges the heavy pairs first") {
    // a=0, b=1, c=2, d=3: w(a,b)=0.9, w(c,d)=0.8, cross pairs 0.1.
    std::vector<double> w(16, 0.1);
    for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i * 5)] = 0.0;
    w[0 * 4 + 1] = w[1 * 4 + 0] = 0.9;
    w[2 * 4 + 3] = w[3 * 4 + 2] = 0.8;
    const auto g = WeightedGraph::from_dense(4, w);
    const auto t = build_average_linkage(g);
    CHECK(t.lca(0, 1) != t.root());
    CHECK(t.lca(2, 3) != t.root());
    CHECK(t.lca(0, 2) == t.root());
    // That tree is also the cheapest one.
    CHECK(dasgupta_cost(t, g) == doctest::Approx(optimal_cost(g).cost).epsilon(1e-12));
}

TEST_CASE("average linkage output is binary and independent of the kernel table") {
    Rng rng(2);
    const auto& before = simd::active();
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t n = 3 + rng.below(80);
        const auto g = testing::random_graph(n, rng);
        simd::set_active(simd::scalar_kernels());
        const auto a = build_average_linkage(g);
        simd::set_active(before);
        const auto b = build_average_linkage(g);
        CHECK(a.is_binary());
        CHECK(a.num_leaves() == n);
        CHECK(identical_trees(a, b));
    }
    simd::set_active(before);
}
