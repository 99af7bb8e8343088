#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "midgcn/filter.hpp"
#include "support/test_support.hpp"

using namespace midgcn;

TEST_CASE("filter responses at pinned points") {
    const FilterSpec low = FilterSpec::make(FilterKind::low);
    const FilterSpec high = FilterSpec::make(FilterKind::high);
    const FilterSpec mid = FilterSpec::make(FilterKind::mid);
    const FilterSpec half = FilterSpec::make(FilterKind::mid_alpha, 0.5);

    CHECK(filter_response(low, 0.0) == 2.0);
    CHECK(filter_response(low, 2.0) == 0.0);
    CHECK(filter_response(high, 0.3) == 0.3);
    CHECK(filter_response(mid, 0.0) == 0.0);
    CHECK(filter_response(mid, 1.0) == 1.0);
    CHECK(filter_response(mid, 2.0) == 0.0);
    CHECK(filter_response(half, 0.0) == -1.0);
    CHECK(filter_response(half, 2.0) == 0.0);
    CHECK(filter_response(half, 1.0) == Catch::Approx(0.5));

    CHECK_THROWS_AS(filter_response(mid, -0.01), ConfigError);
    CHECK_THROWS_AS(filter_response(mid, 2.01), ConfigError);
    CHECK_THROWS_AS(FilterSpec::make(FilterKind::mid_alpha, -0.1), ConfigError);
    CHECK_THROWS_AS(FilterSpec::make(FilterKind::mid_alpha, 2.1), ConfigError);
}

TEST_CASE("filter kind names round-trip") {
    for (FilterKind k : {FilterKind::low, FilterKind::high, FilterKind::mid, FilterKind::mid_alpha})
        CHECK(parse_filter_kind(filter_kind_name(k)) == k);
    CHECK_THROWS_AS(parse_filter_kind("bandstop"), ConfigError);
}

TEST_CASE("mid equals mid_alpha at alpha one and is symmetric about one") {
    const FilterSpec mid = FilterSpec::make(FilterKind::mid);
    const FilterSpec one = FilterSpec::make(FilterKind::mid_alpha, 1.0);
    for (double lam = 0.0; lam <= 2.0; lam += 0.125) {
        CHECK(filter_response(mid, lam) == Catch::Approx(filter_response(one, lam)).margin(1e-15));
    }
    for (double t = 0.0; t <= 1.0; t += 0.1)
        CHECK(filter_response(mid, 1.0 - t) == Catch::Approx(filter_response(mid, 1.0 + t)).margin(1e-15));
}

TEST_CASE("edgeless graphs pass signals through") {
    const Graph g = Graph::from_edges(5, {});
    const Eigen::MatrixXd x = testsupport::random_matrix(5, 3, 8);
    for (FilterKind k : {FilterKind::low, FilterKind::high, FilterKind::mid}) {
        const FilteredSignal out = apply_filter(FilterSpec::make(k), g, x);
        CHECK((out.values - x).cwiseAbs().maxCoeff() == 0.0);
    }
    const FilteredSignal scaled = apply_filter(FilterSpec::make(FilterKind::mid_alpha, 0.3), g, x);
    CHECK((scaled.values - 0.3 * x).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("spatial filtering matches the spectral definition") {
    const std::vector<Graph> graphs = {
        testsupport::connected_graph(20, 0.2, 31),
        testsupport::er_graph(26, 0.12, 7),
        Graph::from_edges(6, {{0, 1}, {1, 2}}),   // isolated nodes included
    };
    for (const Graph& g : graphs) {
        const Eigen::MatrixXd x = testsupport::random_matrix(g.n, 4, 17 + static_cast<std::uint64_t>(g.n));
        for (FilterKind k : {FilterKind::low, FilterKind::high, FilterKind::mid}) {
            const FilterSpec spec = FilterSpec::make(k);
            const FilteredSignal got = apply_filter(spec, g, x);
            CHECK((got.values - testsupport::spectral_filter_oracle(g, spec, x)).cwiseAbs().maxCoeff() < 1e-9);
            CHECK(got.graph_hash == g.hash());
        }
        for (double alpha : {0.2, 0.5, 1.0, 2.0}) {
            const FilterSpec spec = FilterSpec::make(FilterKind::mid_alpha, alpha);
            const FilteredSignal got = apply_filter(spec, g, x);
            CHECK((got.values - testsupport::spectral_filter_oracle(g, spec, x)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("filtering is linear") {
    const Graph g = testsupport::connected_graph(14, 0.3, 2);
    const Eigen::MatrixXd x = testsupport::random_matrix(14, 3, 5);
    const Eigen::MatrixXd y = testsupport::random_matrix(14, 3, 6);
    const FilterSpec spec = FilterSpec::make(FilterKind::mid_alpha, 0.7);
    const Eigen::MatrixXd lhs = apply_filter(spec, g, 2.0 * x - 3.0 * y).values;
    const Eigen::MatrixXd rhs = 2.0 * apply_filter(spec, g, x).values - 3.0 * apply_filter(spec, g, y).values;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("triangle mid filter by hand") {
    const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
    x(0, 0) = 1.0;
    const FilteredSignal out = apply_filter(FilterSpec::make(FilterKind::mid), g, x);
    CHECK(out.values(0, 0) == Catch::Approx(0.5));
    CHECK(out.values(1, 0) == Catch::Approx(-0.25));
    CHECK(out.values(2, 0) == Catch::Approx(-0.25));
}

TEST_CASE("apply_filter_to argument validation") {
    const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    const FilterSpec spec = FilterSpec::make(FilterKind::mid);
    CHECK_THROWS_AS(apply_filter_to(laplacian(g), spec, Eigen::MatrixXd::Zero(3, 1)), ConfigError);
    CHECK_THROWS_AS(apply_filter_to(normalized_adjacency(g), spec, Eigen::MatrixXd::Zero(4, 1)), DataError);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 1);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(apply_filter(spec, g, bad), NumericalError);
}

TEST_CASE("connected-pair distances in closed form") {
    Eigen::VectorXd hu(2), hv(2);
    hu << 1.0, 0.0;
    hv << 0.0, 1.0;
    const double d = std::sqrt(2.0);

    // Lone edge: degrees one, no common neighbors.
    CHECK(pair_distance_under_filter(FilterKind::low, hu, hv, 1, 1, {}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(pair_distance_under_filter(FilterKind::high, hu, hv, 1, 1, {}) == Catch::Approx(2.0 * d));
    CHECK(pair_distance_under_filter(FilterKind::mid, hu, hv, 1, 1, {}) == Catch::Approx(d));

    // Triangle edge: degrees two, one common neighbor of degree two.
    CHECK(pair_distance_under_filter(FilterKind::low, hu, hv, 2, 2, {2}) == Catch::Approx(0.5 * d));
    CHECK(pair_distance_under_filter(FilterKind::high, hu, hv, 2, 2, {2}) == Catch::Approx(1.5 * d));
    CHECK(pair_distance_under_filter(FilterKind::mid, hu, hv, 2, 2, {2}) == Catch::Approx(1.25 * d));

    CHECK(pair_distance_under_filter(FilterKind::mid, hu, hu, 3, 4, {2, 5}) == 0.0);

    CHECK_THROWS_AS(pair_distance_under_filter(FilterKind::mid, hu, hv, 2, 2, {1}), DataError);
    CHECK_THROWS_AS(pair_distance_under_filter(FilterKind::mid, hu, hv, 0, 2, {}), DataError);
    CHECK_THROWS_AS(pair_distance_under_filter(FilterKind::mid, hu, Eigen::VectorXd::Zero(3), 2, 2, {}), DataError);
    CHECK_THROWS_AS(pair_distance_under_filter(FilterKind::mid_alpha, hu, hv, 2, 2, {}), ConfigError);
}

TEST_CASE("theoretic sensitivity rates") {
    CHECK(theoretic_rate(FilterKind::low, 4.0, 1.0, {}) == Catch::Approx(0.0625));
    CHECK(theoretic_rate(FilterKind::high, 4.0, 1.0, {}) == Catch::Approx(0.0625));
    CHECK(theoretic_rate(FilterKind::mid, 4.0, 1.0, {2}) == Catch::Approx(0.03125));
    CHECK(theoretic_rate(FilterKind::mid, 4.0, 1.0, {}) == 0.0);
    CHECK(theoretic_rate(FilterKind::mid, 4.0, 1.0, {2, 4}) == Catch::Approx(0.046875));

    CHECK_THROWS_AS(theoretic_rate(FilterKind::low, 0.0, 1.0, {}), DataError);
    CHECK_THROWS_AS(theoretic_rate(FilterKind::low, 4.0, -1.0, {}), DataError);
    CHECK_THROWS_AS(theoretic_rate(FilterKind::mid, 4.0, 1.0, {1}), DataError);
    CHECK_THROWS_AS(theoretic_rate(FilterKind::mid_alpha, 4.0, 1.0, {}), ConfigError);
}

TEST_CASE("distance ordering low < mid < high when reciprocal sums stay small") {
    Rng rng(314159);
    Eigen::VectorXd hu(3), hv(3);
    for (int trial = 0; trial < 1000; ++trial) {
        for (int i = 0; i < 3; ++i) {
            hu(i) = rng.uniform(-1.0, 1.0);
            hv(i) = rng.uniform(-1.0, 1.0);
        }
        if ((hu - hv).norm() < 1e-6) continue;
        const int k = static_cast<int>(rng.below(4));
        std::vector<int> common;
        for (int i = 0; i < k; ++i) common.push_back(4 + static_cast<int>(rng.below(17)));
        const int du = k + 1 + static_cast<int>(rng.below(15));
        const int dv = k + 1 + static_cast<int>(rng.below(15));

        const double lo = pair_distance_under_filter(FilterKind::low, hu, hv, du, dv, common);
        const double md = pair_distance_under_filter(FilterKind::mid, hu, hv, du, dv, common);
        const double hi = pair_distance_under_filter(FilterKind::high, hu, hv, du, dv, common);
        REQUIRE(lo < md);
        REQUIRE(md < hi);

        double s = 0.0;
        for (int dt : common) s += 1.0 / dt;
        REQUIRE(s < 1.0);
    }
}
