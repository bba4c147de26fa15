#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "ccrgnn/c2g.hpp"
#include "ccrgnn/errors.hpp"
#include "test_support.hpp"

using namespace ccrgnn;

namespace {

// Oracle: reachability via boolean matrix powering (transitive closure),
// self-loops ignored.
bool connected_oracle(const Matrix& adj) {
    const int d = adj.rows();
    if (d <= 1) return true;
    std::vector<std::vector<bool>> reach(static_cast<size_t>(d),
                                         std::vector<bool>(static_cast<size_t>(d), false));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && adj.at(i, j) != 0.0) reach[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
    for (int step = 0; step < d; ++step)
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                if (reach[static_cast<size_t>(i)][static_cast<size_t>(k)])
                    for (int j = 0; j < d; ++j)
                        if (reach[static_cast<size_t>(k)][static_cast<size_t>(j)])
                            reach[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
    for (int j = 1; j < d; ++j)
        if (!reach[0][static_cast<size_t>(j)]) return false;
    return true;
}

// Oracle: enumerate the distinct entries of x x^T in descending order and
// take the first threshold whose graph is connected.
double first_connected_value(const std::vector<double>& x) {
    const InteractionMap map = interaction_map(x);
    std::set<double, std::greater<double>> values(map.values.data().begin(),
                                                  map.values.data().end());
    for (double r : values) {
        if (connected_oracle(threshold_activate(map, r))) return r;
    }
    REQUIRE(false);  // the minimum always yields the complete graph
    return 0.0;
}

std::set<std::pair<int, int>> edge_set(const FeatureGraph& g) {
    return {g.edges.begin(), g.edges.end()};
}

}  // namespace

TEST_SUITE("c2g") {

TEST_CASE("interaction map values") {
    SUBCASE("x = (1,1)") {
        const InteractionMap m = interaction_map({1, 1});
        for (long long i = 0; i < 4; ++i) CHECK(m.values.data()[i] == 1.0);
    }
    SUBCASE("all zeros") {
        const InteractionMap m = interaction_map({0, 0, 0});
        for (double v : m.values.data()) CHECK(v == 0.0);
    }
    SUBCASE("x = (3,2,1) against an elementwise loop") {
        const std::vector<double> x{3, 2, 1};
        const InteractionMap m = interaction_map(x);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(m.values.at(i, j) == x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)]);
        CHECK(m.values.at(0, 0) == 9.0);
        CHECK(m.values.at(2, 0) == 3.0);
    }
}

TEST_CASE("threshold activation") {
    const InteractionMap m = interaction_map({3, 2, 1});
    SUBCASE("very low threshold keeps everything") {
        const Matrix a = threshold_activate(m, -1e300);
        for (double v : a.data()) CHECK(v == 1.0);
    }
    SUBCASE("r = 6 keeps the three largest entries") {
        const Matrix a = threshold_activate(m, 6.0);
        // entries >= 6: (0,0)=9, (0,1)=6, (1,0)=6
        CHECK(a.at(0, 0) == 1.0);
        CHECK(a.at(0, 1) == 1.0);
        CHECK(a.at(1, 0) == 1.0);
        CHECK(a.at(0, 2) == 0.0);
        CHECK(a.at(1, 1) == 0.0);
        CHECK(a.at(2, 2) == 0.0);
    }
    SUBCASE("r = max keeps at least one entry") {
        const Matrix a = threshold_activate(m, max_entry(m.values));
        double total = 0.0;
        for (double v : a.data()) total += v;
        CHECK(total >= 1.0);
    }
}

TEST_CASE("is_connected") {
    SUBCASE("self-loops only") { CHECK_FALSE(is_connected(Matrix::identity(3))); }
    SUBCASE("path 0-1, 1-2") {
        Matrix a(3, 3, {0, 1, 0, 1, 0, 1, 0, 1, 0});
        CHECK(is_connected(a));
    }
    SUBCASE("single node") { CHECK(is_connected(Matrix::identity(1))); }
    SUBCASE("asymmetric input is a contract violation") {
        Matrix a(2, 2, {0, 1, 0, 0});
        CHECK_THROWS_AS(is_connected(a), ContractViolation);
    }
    SUBCASE("random 50-node graphs match the transitive-closure oracle") {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            const double density = 0.01 + 0.05 * trial;
            Matrix a(50, 50);
            for (int i = 0; i < 50; ++i)
                for (int j = i + 1; j < 50; ++j)
                    if (unit(rng) < density) a.at(i, j) = a.at(j, i) = 1.0;
            CHECK(is_connected(a) == connected_oracle(a));
        }
    }
}

TEST_CASE("build_graph on small examples") {
    SUBCASE("x = (1,1), step 0.5: connected at the initial threshold") {
        const FeatureGraph g = build_graph({1, 1}, 0.5);
        CHECK(g.threshold == 1.0);
        CHECK(g.iterations == 1);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0] == std::pair<int, int>(0, 1));
    }
    SUBCASE("x = (3,2,1), step 1: stops at r=3 with edges {0,1},{0,2}") {
        const FeatureGraph g = build_graph({3, 2, 1}, 1.0);
        CHECK(g.threshold == doctest::Approx(3.0));
        const auto edges = edge_set(g);
        CHECK(edges.count({0, 1}) == 1);
        CHECK(edges.count({0, 2}) == 1);
        CHECK(edges.count({1, 2}) == 0);  // 2*1 = 2 < 3
        // oracle agreement
        CHECK(g.threshold == doctest::Approx(first_connected_value({3, 2, 1})));
    }
    SUBCASE("all zeros: complete graph at r=0 on the first check") {
        const FeatureGraph g = build_graph({0, 0, 0, 0}, 0.1);
        CHECK(g.threshold == 0.0);
        CHECK(g.iterations == 1);
        CHECK(g.edges.size() == 6);
    }
    SUBCASE("single feature is trivially connected") {
        const FeatureGraph g = build_graph({0.7}, 0.01);
        CHECK(g.node_count() == 1);
        CHECK(g.edges.empty());
        CHECK(g.threshold == doctest::Approx(0.49));
    }
    SUBCASE("non-positive step is a config error") {
        CHECK_THROWS_AS(build_graph({1, 2}, 0.0), ConfigError);
        CHECK_THROWS_AS(build_graph({1, 2}, -1.0), ConfigError);
    }
}

TEST_CASE("build_graph properties over random vectors") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(2, 24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double steps[] = {0.5, 0.1, 0.01};

    for (int trial = 0; trial < 300; ++trial) {
        const int d = dim(rng);
        std::vector<double> x(static_cast<size_t>(d));
        for (double& v : x) v = unit(rng);
        const double step = steps[trial % 3];

        const FeatureGraph g = build_graph(x, step);
        INFO("trial " << trial << " d=" << d << " step=" << step);

        // always connected
        CHECK(is_connected(g.adjacency));

        // iteration bound
        const InteractionMap map = interaction_map(x);
        const double span = max_entry(map.values) - min_entry(map.values);
        CHECK(g.iterations <= static_cast<int>(std::ceil(span / step)) + 1);

        // threshold within one step of the exact value-set oracle
        const double oracle_r = first_connected_value(x);
        CHECK(g.threshold <= oracle_r + 1e-12);
        CHECK(g.threshold > oracle_r - step - 1e-12);
    }
}

TEST_CASE("threshold monotonicity: lower r gives a superset of edges") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(8);
        for (double& v : x) v = unit(rng);
        const InteractionMap map = interaction_map(x);
        const double r2 = unit(rng);
        const double r1 = r2 - 0.3;  // r1 <= r2
        const Matrix a1 = threshold_activate(map, r1);
        const Matrix a2 = threshold_activate(map, r2);
        for (long long i = 0; i < a1.size(); ++i)
            if (a2.data()[i] == 1.0) CHECK(a1.data()[i] == 1.0);
    }
}

TEST_CASE("build_graph commutes with node relabeling") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 6;
        std::vector<double> x(static_cast<size_t>(d));
        for (double& v : x) v = unit(rng);
        std::vector<int> perm(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) perm[static_cast<size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);

        std::vector<double> px(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) px[static_cast<size_t>(perm[static_cast<size_t>(i)])] = x[static_cast<size_t>(i)];

        const FeatureGraph g = build_graph(x, 0.05);
        const FeatureGraph pg = build_graph(px, 0.05);

        // interaction_map(Px) = P A P^T, so adjacency permutes the same way
        CHECK(pg.threshold == doctest::Approx(g.threshold));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                CHECK(g.adjacency.at(i, j) ==
                      pg.adjacency.at(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]));
    }
}

TEST_CASE("graph JSON and DOT round trips") {
    const FeatureGraph g = build_graph({0.9, 0.4, 0.2, 0.7}, 0.05);
    SUBCASE("JSON re-parses to the same graph") {
        const FeatureGraph back = graph_from_json(graph_to_json(g));
        CHECK(back.node_attrs == g.node_attrs);
        CHECK(back.threshold == g.threshold);
        CHECK(edge_set(back) == edge_set(g));
        CHECK(is_connected(back.adjacency));
    }
    SUBCASE("DOT output has the expected shape") {
        const std::string dot = graph_to_dot(g);
        CHECK(dot.find("graph feature_graph {") == 0);
        CHECK(dot.find("--") != std::string::npos);
        CHECK(dot.back() == '\n');
        CHECK(std::count(dot.begin(), dot.end(), '{') == std::count(dot.begin(), dot.end(), '}'));
    }
}

}  // TEST_SUITE
