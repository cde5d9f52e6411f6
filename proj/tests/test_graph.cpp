#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fairtree/graph.hpp"

using namespace fairtree;

namespace {

PointDataset parse(const std::string& text, const std::string& color = "color", CsvOptions opts = {}) {
    std::istringstream in(text);
    return load_points(in, color, opts);
}

PointDataset two_points(double dx) {
    return PointDataset({"a", "b"}, 1, {0.0, dx}, {0, 0}, {"x"});
}

}  // namespace

TEST_CASE("csv with three rows and two features") {
    const auto d = parse("x,y,color\n0,1,red\n2,3,blue\n4,5,red\n");
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK(d.num_colors() == 2);
    CHECK(d.color(0) == d.color(2));
    CHECK(d.color(0) != d.color(1));
    CHECK(d.color_labels()[0] == "red");
    CHECK(d.feature(1, 1) == 3.0);
    CHECK(d.id(2) == "2");
}

TEST_CASE("csv errors name the problem") {
    CHECK_THROWS_WITH_AS(parse("x,y,group\n0,1,red\n"), doctest::Contains("color column not found"), ParseError);
    try {
        parse("x,y,color\n0,1,red\nabc,2,blue\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("'x'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("x,color\n1,a,extra\n"), ParseError);
}

TEST_CASE("csv id column and delimiter") {
    CsvOptions o;
    o.delimiter = ';';
    o.id_column = "name";
    const auto d = parse("name;v;color\np;1.5;a\nq;2.5;b\n", "color", o);
    CHECK(d.id(1) == "q");
    CHECK(d.dim() == 1);
    CHECK_THROWS_AS(parse("name;v;color\np;1;a\np;2;b\n", "color", o), ParseError);
}

TEST_CASE("similarity is 1/(1+d)") {
    CHECK(similarity_from_points(two_points(0.0)).weight(0, 1) == 1.0);
    CHECK(similarity_from_points(two_points(1.0)).weight(0, 1) == 0.5);
    CHECK(similarity_from_points(two_points(3.0)).weight(0, 1) == 0.25);
    const auto g = similarity_from_points(PointDataset({"a", "b"}, 2, {0.0, 3.0, 0.0, 4.0}, {0, 0}, {"x"}));
    CHECK(g.weight(1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(g.weight(0, 0) == 0.0);
}

TEST_CASE("weighted graph validation") {
    CHECK_THROWS(WeightedGraph::from_dense(2, {0, 1, 2, 0}));
    CHECK_THROWS(WeightedGraph::from_dense(2, {0, -1, -1, 0}));
    const WeightedGraph::Edge e[] = {{0, 2, 1.5}};
    const auto g = WeightedGraph::from_edges(3, e);
    CHECK(g.weight(2, 0) == 1.5);
    CHECK(g.weight(0, 1) == 0.0);
}

TEST_CASE("synthetic data color counts and determinism") {
    const std::vector<double> p{0.125, 0.875};
    const auto d = synthetic_colored_points(256, p, 7);
    std::size_t c0 = 0;
    for (int c : d.colors()) c0 += c == 0;
    CHECK(c0 == 32);
    CHECK(d.size() - c0 == 224);

    const std::vector<double> half{0.5, 0.5};
    const auto a = synthetic_colored_points(4, half, 3);
    const auto b = synthetic_colored_points(4, half, 3);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(a.color(r) == b.color(r));
        for (std::size_t k = 0; k < a.dim(); ++k) CHECK(a.feature(r, k) == b.feature(r, k));
    }
    const std::vector<double> bad{0.5, 0.6};
    CHECK_THROWS_AS(synthetic_colored_points(10, bad, 1), std::invalid_argument);
}

TEST_CASE("apportion uses largest remainders") {
    const std::vector<double> p{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto q = apportion(10, p);
    CHECK(q[0] + q[1] + q[2] == 10);
    CHECK(q[0] == 4);
}

TEST_CASE("normalization maps features to the unit interval") {
    const PointDataset d({"a", "b", "c"}, 2, {1, 3, 5, 7, 7, 7}, {0, 1, 0}, {"x", "y"});
    const auto m = d.min_max_normalized();
    CHECK(m.feature(0, 0) == 0.0);
    CHECK(m.feature(1, 0) == 0.5);
    CHECK(m.feature(2, 0) == 1.0);
    CHECK(m.feature(1, 1) == 0.0);
}
