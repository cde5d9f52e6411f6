#include <doctest.h>

#include <sstream>

#include "fairtree/cost.hpp"
#include "fairtree/oracle.hpp"
#include "fairtree/tree.hpp"
#include "fairtree/tree_io.hpp"
#include "support.hpp"

using namespace fairtree;

namespace {

NodeId parent_of(const HierarchyTree& t, VertexId a) { return t.parent(t.leaf_node(a)); }

WeightedGraph k3() {
    return WeightedGraph::from_dense(3, {0, 1, 1, 1, 0, 1, 1, 1, 0});
}

// w(0,1)=3, w(2,3)=3, w(0,2)=1.
WeightedGraph two_pairs() {
    const WeightedGraph::Edge e[] = {{0, 1, 3.0}, {2, 3, 3.0}, {0, 2, 1.0}};
    return WeightedGraph::from_edges(4, e);
}

}  // namespace

TEST_CASE("cluster sizes") {
    const auto t = parse_nested("((0,1),2)");
    CHECK(t.size(t.leaf_node(2)) == 1);
    CHECK(t.size(t.root()) == 3);
    CHECK(t.size(parent_of(t, 0)) == 2);
    CHECK(cluster_size(t, parent_of(t, 1)) == 2);
}

TEST_CASE("lowest common ancestor") {
    const auto t = parse_nested("((0,1),2)");
    CHECK(t.lca(0, 1) == parent_of(t, 0));
    CHECK(t.lca(0, 2) == t.root());
    CHECK_THROWS(t.lca(1, 1));
}

TEST_CASE("edge cost") {
    const auto t = parse_nested("((0,1),2)");
    const auto g = k3();
    CHECK(edge_cost(t, g, 0, 1) == 2.0);
    CHECK(edge_cost(t, g, 0, 2) == 3.0);
    const auto z = WeightedGraph::from_dense(3, std::vector<double>(9, 0.0));
    CHECK(edge_cost(t, z, 0, 1) == 0.0);
}

TEST_CASE("cost of every three-leaf tree on a unit triangle is 8") {
    const auto g = k3();
    for (const auto& t : enumerate_binary_trees(3)) {
        CHECK(dasgupta_cost(t, g) == 8.0);
        CHECK(brute_force_cost(t, g) == 8.0);
    }
}

TEST_CASE("cost of two four-leaf trees") {
    const auto g = two_pairs();
    const auto a = parse_nested("((0,1),(2,3))");
    const auto b = parse_nested("(((0,1),2),3)");
    CHECK(dasgupta_cost(a, g) == 16.0);
    CHECK(dasgupta_cost(b, g) == 21.0);
    CHECK(brute_force_cost(a, g) == 16.0);
    CHECK(brute_force_cost(b, g) == 21.0);
    CHECK(dasgupta_cost_by_pairs(b, g) == 21.0);
    const auto z = WeightedGraph::from_dense(4, std::vector<double>(16, 0.0));
    CHECK(dasgupta_cost(a, z) == 0.0);
}

TEST_CASE("cost routes agree on random instances") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rng.below(60);
        const auto g = testing::random_graph(n, rng);
        const auto t = testing::random_binary_tree(n, rng);
        const double a = dasgupta_cost(t, g);
        CHECK(a == doctest::Approx(dasgupta_cost_by_pairs(t, g)).epsilon(1e-12));
        CHECK(a == doctest::Approx(brute_force_cost(t, g)).epsilon(1e-12));
    }
}

TEST_CASE("ratio cost") {
    const auto g = two_pairs();
    const auto a = parse_nested("((0,1),(2,3))");
    const auto b = parse_nested("(((0,1),2),3)");
    CHECK(ratio_cost(g, a, a) == 1.0);
    CHECK(ratio_cost(g, a, b) == doctest::Approx(21.0 / 16.0));
    const auto z = WeightedGraph::from_dense(4, std::vector<double>(16, 0.0));
    CHECK_THROWS(ratio_cost(z, a, b));
}

TEST_CASE("node depths") {
    TreeBuilder b;
    b.set_root(b.add_leaf(0));
    const auto single = std::move(b).finish();
    CHECK(node_depths(single)[static_cast<std::size_t>(single.root())] == 0);
    CHECK(single.height() == 0);

    const auto p = testing::perfect_tree(8);
    for (VertexId v = 0; v < 8; ++v) CHECK(p.depth(p.leaf_node(v)) == 3);

    const auto c = testing::caterpillar(4);
    const auto d = node_depths(c);
    std::vector<std::size_t> leaf_depths;
    for (VertexId v = 0; v < 4; ++v) leaf_depths.push_back(d[static_cast<std::size_t>(c.leaf_node(v))]);
    CHECK(leaf_depths == std::vector<std::size_t>{3, 3, 2, 1});
}

TEST_CASE("relative balance audit") {
    for (auto eps : {Fraction{1, 6}, Fraction{1, 8}, Fraction{1, 40}}) {
        const auto a = relative_balance_audit(testing::perfect_tree(16), eps);
        CHECK(a.passed);
        CHECK(a.max_deviation == 0.0);
    }
    const auto cat = testing::caterpillar(8);
    const auto bad = relative_balance_audit(cat, Fraction{1, 6});
    CHECK_FALSE(bad.passed);
    CHECK(std::find(bad.violations.begin(), bad.violations.end(), cat.root()) != bad.violations.end());

    // |C_p| = 3 is gated at 1/6 and the 2/3 split sits exactly on the boundary.
    CHECK(relative_balance_audit(parse_nested("((0,1),2)"), Fraction{1, 6}).passed);
    // Just below the gate the split is not checked.
    CHECK(relative_balance_audit(parse_nested("((0,1),2)"), Fraction{1, 7}).passed);
    CHECK_FALSE(relative_balance_audit(parse_nested("(((0,1),2),3)"), Fraction{1, 7}).passed);
    // Gated multiway node fails, small one is exempt.
    CHECK_FALSE(relative_balance_audit(parse_nested("(0,1,2,3)"), Fraction{1, 6}).passed);
    CHECK(relative_balance_audit(parse_nested("(0,1,2)"), Fraction{1, 8}).passed);
}

TEST_CASE("tree validation") {
    TreeBuilder b;
    const NodeId a = b.add_leaf(0);
    const NodeId r = b.add_internal({a});
    b.set_root(r);
    CHECK_THROWS_AS(std::move(b).finish(), TreeError);

    TreeBuilder d;
    const NodeId x = d.add_leaf(0);
    const NodeId y = d.add_leaf(0);
    d.set_root(d.add_internal({x, y}));
    CHECK_THROWS_AS(std::move(d).finish(), TreeError);
}

TEST_CASE("line format round trip") {
    Rng rng(9);
    const auto t = testing::random_binary_tree(30, rng);
    std::stringstream s;
    write_tree(s, t);
    const auto back = read_tree(s);
    CHECK(identical_trees(t, back));

    std::istringstream bad("3 -1 -\n4 3 0\n");
    CHECK_THROWS(read_tree(bad));
    std::istringstream noroot("1 0 -\n");
    CHECK_THROWS_AS(read_tree(noroot), ParseError);
}

TEST_CASE("linkage matrix reader") {
    std::istringstream in("0 1 0.5 2\n2 3 0.7 2\n4, 5, 1.0, 4\n");
    const auto t = read_linkage(in);
    CHECK(same_topology(t, parse_nested("((0,1),(2,3))")));
    std::istringstream wrong("0 1 0.5 3\n");
    CHECK_THROWS_AS(read_linkage(wrong), ParseError);
    std::istringstream reuse("0 1 0.5 2\n0 2 1 3\n");
    CHECK_THROWS_AS(read_linkage(reuse), ParseError);
}

TEST_CASE("nested form") {
    const auto t = parse_nested("((0,1),(2,(3,4)))");
    CHECK(to_nested(t) == "((0,1),(2,(3,4)))");
    CHECK(t.num_leaves() == 5);
    CHECK_THROWS_AS(parse_nested("((0,1)"), ParseError);
    CHECK_THROWS_AS(parse_nested("(0,1))"), ParseError);
    CHECK(same_topology(t, parse_nested("((0,1),(2,(3,4)))")));
    CHECK_FALSE(same_topology(t, parse_nested("((1,0),(2,(3,4)))")));
}
