#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "midgcn/analysis.hpp"
#include "support/test_support.hpp"

using namespace midgcn;

TEST_CASE("distance change rate on constructed embeddings") {
    const Graph k4 = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    const Eigen::MatrixXd h = testsupport::random_matrix(4, 3, 44);

    CHECK(distance_change_rate(h, h, k4, 2) == 0.0);
    CHECK(distance_change_rate(h, 2.0 * h, k4, 2) == Catch::Approx(0.5));
    CHECK(distance_change_rate(2.0 * h, h, k4, 2) == Catch::Approx(0.5));

    const Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 3);
    CHECK(distance_change_rate(flat, flat, k4, 2) == 0.0);
}

TEST_CASE("distance change rate uses only edges above the degree threshold") {
    // Degrees: 0 and 2 have three, 1 and 3 have two; only edge (0,2) passes
    // a threshold of two.
    const Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
    Eigen::MatrixXd clean = Eigen::MatrixXd::Zero(4, 1);
    clean << 0.0, 9.0, 1.0, -4.0;
    Eigen::MatrixXd attacked = Eigen::MatrixXd::Zero(4, 1);
    attacked << 0.0, 5.0, 3.0, 7.0;
    CHECK(distance_change_rate(clean, attacked, g, 2) == Catch::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(distance_change_rate(clean, attacked, g, 3), DataError);
    CHECK_THROWS_AS(distance_change_rate(clean, Eigen::MatrixXd::Zero(3, 1), g, 0), DataError);
    CHECK_THROWS_AS(distance_change_rate(clean, Eigen::MatrixXd::Zero(4, 2), g, 0), DataError);
    CHECK_THROWS_AS(distance_change_rate(clean, attacked, g, -1), ConfigError);
}

TEST_CASE("common-neighbor reciprocal sums") {
    const Graph k3 = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(common_neighbor_reciprocal_sum(k3, 0, 1) == Catch::Approx(0.5));

    const Graph p3 = Graph::from_edges(3, {{0, 1}, {1, 2}});
    CHECK(common_neighbor_reciprocal_sum(p3, 0, 2) == Catch::Approx(0.5));
    CHECK(common_neighbor_reciprocal_sum(p3, 0, 1) == 0.0);

    const Graph k4 = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(common_neighbor_reciprocal_sum(k4, 0, 1) == Catch::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(common_neighbor_reciprocal_sum(k3, 0, 3), DataError);
}

TEST_CASE("reciprocal-sum statistics over all edges") {
    // Trees have no common neighbors on any edge.
    const Graph path = Graph::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
    const Lemma1Stats tree = lemma1_monte_carlo(path);
    CHECK(tree.mean == 0.0);
    CHECK(tree.violation_fraction == 0.0);
    CHECK(tree.pairs == 5);

    // Complete graph: every edge sums to (n-2)/(n-1).
    std::vector<std::pair<int, int>> kedges;
    const int n = 9;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) kedges.push_back({u, v});
    const Lemma1Stats kn = lemma1_monte_carlo(Graph::from_edges(n, kedges));
    CHECK(std::abs(kn.mean - 7.0 / 8.0) < 1e-12);
    CHECK(kn.violation_fraction == 0.0);
    CHECK(kn.pairs == n * (n - 1) / 2);

    // Diamond with two degree-two common neighbors: the (0,1) edge hits one.
    const Graph diamond = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
    const Lemma1Stats d = lemma1_monte_carlo(diamond);
    CHECK(d.mean == Catch::Approx(7.0 / 15.0));
    CHECK(d.violation_fraction == Catch::Approx(0.2));

    CHECK_THROWS_AS(lemma1_monte_carlo(Graph::from_edges(3, {})), DataError);
}

TEST_CASE("numeric rank thresholds singular values") {
    CHECK(numeric_rank(Eigen::MatrixXd::Identity(5, 5)) == 5);
    CHECK(numeric_rank(Eigen::MatrixXd::Zero(4, 4)) == 0);
    CHECK(numeric_rank(Eigen::MatrixXd(0, 0)) == 0);

    const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    CHECK(numeric_rank(a * a.transpose()) == 1);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1e-12;
    CHECK(numeric_rank(d) == 1);
    d(1, 1) = 1e-4;
    CHECK(numeric_rank(d) == 2);

    CHECK_THROWS_AS(numeric_rank(d, 0.0), ConfigError);
}

TEST_CASE("rank growth rows pair adjacency with its square") {
    const Graph ring = testsupport::ring_graph(20);
    const std::vector<double> rates = {0.0, 0.1, 0.25};
    const auto rows = rank_growth_curve(ring, rates, 3);
    REQUIRE(rows.size() == 3);

    // A ring on 20 nodes has two zero adjacency eigenvalues.
    CHECK(rows[0].rate == 0.0);
    CHECK(rows[0].rank_a == 18);
    CHECK(rows[0].rank_a2 == 18);
    CHECK(rows[0].rank_a == numeric_rank(testsupport::dense_adjacency(ring)));

    for (const auto& row : rows) {
        CHECK(row.rank_a2 <= row.rank_a);
        CHECK(row.rank_a <= 20);
    }

    const auto again = rank_growth_curve(ring, rates, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].rank_a == again[i].rank_a);
}

TEST_CASE("band energies decompose the signal") {
    const Graph ring = testsupport::ring_graph(8);
    const SpectralDecomposition dec = eig(normalized_adjacency(ring));
    const BandPartition bands = band_partition(dec, 0.5);
    CHECK(bands.low.size() == 3);
    CHECK(bands.mid.size() == 2);
    CHECK(bands.high.size() == 3);

    const Eigen::VectorXd mid_vec = dec.eigenvectors.col(bands.mid[0]);
    const BandEnergy pure = band_energy(mid_vec, dec, bands);
    CHECK(pure.low == Catch::Approx(0.0).margin(1e-12));
    CHECK(pure.mid == Catch::Approx(1.0));
    CHECK(pure.high == Catch::Approx(0.0).margin(1e-12));

    Rng rng(5);
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x(i) = rng.uniform(-1.0, 1.0);
    const BandEnergy e = band_energy(x, dec, bands);
    CHECK(e.total() == Catch::Approx(x.squaredNorm()).margin(1e-9));
    CHECK(band_energy(Eigen::VectorXd::Zero(8), dec, bands).total() == 0.0);
}

TEST_CASE("inter-community insertion moves mid-band eigenvalues least") {
    // Two four-cliques joined by one bridge, then one extra cross edge.
    std::vector<std::pair<int, int>> edges;
    for (int b : {0, 4})
        for (int u = b; u < b + 4; ++u)
            for (int v = u + 1; v < b + 4; ++v) edges.push_back({u, v});
    edges.push_back({3, 4});
    const Graph clean = Graph::from_edges(8, edges);

    EdgePerturbation p;
    p.ops.push_back({0, 4, EdgeOp::insert});
    const Graph attacked = apply_perturbation(clean, p);

    // The clique eigenvalues sit at -1/3, so p = 0.3 keeps every band
    // populated.
    const BandDeltaStats stats = band_eigendelta_stats(clean, attacked, 0.3);
    REQUIRE(stats.mean_abs_delta_low.has_value());
    REQUIRE(stats.mean_abs_delta_mid.has_value());
    REQUIRE(stats.mean_abs_delta_high.has_value());
    CHECK(*stats.mean_abs_delta_mid < *stats.mean_abs_delta_low);
    CHECK(*stats.mean_abs_delta_mid < *stats.mean_abs_delta_high);
}

TEST_CASE("band delta stats basics") {
    const Graph g = testsupport::connected_graph(10, 0.3, 19);
    const BandDeltaStats same = band_eigendelta_stats(g, g);
    if (same.mean_abs_delta_low) CHECK(*same.mean_abs_delta_low == 0.0);
    if (same.mean_abs_delta_mid) CHECK(*same.mean_abs_delta_mid == 0.0);
    if (same.mean_abs_delta_high) CHECK(*same.mean_abs_delta_high == 0.0);

    // A lone edge has spectrum {-1, 1}: no mid band at all.
    const Graph pair = Graph::from_edges(2, {{0, 1}});
    const BandDeltaStats lone = band_eigendelta_stats(pair, pair);
    CHECK(lone.mean_abs_delta_low.has_value());
    CHECK(lone.mean_abs_delta_high.has_value());
    CHECK_FALSE(lone.mean_abs_delta_mid.has_value());

    CHECK_THROWS_AS(band_eigendelta_stats(g, pair), DataError);
}

TEST_CASE("srl endpoints") {
    SpectralDecomposition dec;
    dec.basis = OperatorKind::laplacian;
    dec.eigenvalues = Eigen::VectorXd::Zero(3);
    dec.eigenvalues << 0.0, 1.0, 2.0;
    dec.eigenvectors = Eigen::MatrixXd::Identity(3, 3);
    const FilterSpec mid = FilterSpec::make(FilterKind::mid);

    Eigen::VectorXd beta = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd aligned(3);
    aligned << 0.0, std::sqrt(3.0), 0.0;   // sqrt(N) times the unit g-weighted beta
    CHECK(srl(dec, mid, aligned, beta) == Catch::Approx(0.0).margin(1e-12));

    Eigen::VectorXd orthogonal(3);
    orthogonal << 1.0, 0.0, 1.0;
    CHECK(srl(dec, mid, orthogonal, beta) == Catch::Approx(2.0));

    CHECK(srl(dec, mid, -aligned, beta) == Catch::Approx(4.0));

    Eigen::VectorXd dead(3);
    dead << 1.0, 0.0, 1.0;   // mid response vanishes at both endpoints
    CHECK_THROWS_AS(srl(dec, mid, aligned, dead), NumericalError);
    CHECK_THROWS_AS(srl(dec, mid, Eigen::VectorXd::Ones(2), beta), DataError);

    SpectralDecomposition adj = dec;
    adj.basis = OperatorKind::adjacency_hat;
    CHECK_THROWS_AS(srl(adj, mid, aligned, beta), ConfigError);

    SpectralDecomposition wild = dec;
    wild.eigenvalues(0) = -0.5;
    CHECK_THROWS_AS(srl(wild, mid, aligned, beta), NumericalError);
}

TEST_CASE("generalization condition holds only for the symmetric response") {
    CHECK(generalization_condition(FilterSpec::make(FilterKind::mid)));
    CHECK(generalization_condition(FilterSpec::make(FilterKind::mid_alpha, 1.0)));
    CHECK_FALSE(generalization_condition(FilterSpec::make(FilterKind::low)));
    CHECK_FALSE(generalization_condition(FilterSpec::make(FilterKind::high)));
    CHECK_FALSE(generalization_condition(FilterSpec::make(FilterKind::mid_alpha, 0.5)));
}

TEST_CASE("ring label pair: srl agrees under mid, differs under low") {
    // Even rings are bipartite, so flipping the sign of every other node
    // mirrors label-vector energy from Laplacian eigenvalue l to 2 - l. The
    // symmetric mid response cannot tell the two labelings apart; low can.
    const int n = 32;
    const Graph ring = testsupport::ring_graph(n);
    const SpectralDecomposition dec = eig(laplacian(ring));

    Eigen::VectorXd s_blocks(n), s_modulated(n);
    for (int i = 0; i < n; ++i) {
        s_blocks(i) = i < n / 2 ? 1.0 : -1.0;
        s_modulated(i) = (i % 2 == 0 ? 1.0 : -1.0) * s_blocks(i);
    }
    const Eigen::VectorXd c_a = graph_fourier(s_blocks, dec);
    const Eigen::VectorXd c_b = graph_fourier(s_modulated, dec);

    const FilterSpec mid = FilterSpec::make(FilterKind::mid);
    const FilterSpec low = FilterSpec::make(FilterKind::low);
    CHECK(srl(dec, mid, c_a, c_a) == Catch::Approx(srl(dec, mid, c_b, c_b)).margin(1e-9));
    CHECK(std::abs(srl(dec, low, c_a, c_a) - srl(dec, low, c_b, c_b)) > 1e-3);

    // Exact extreme labelings concentrate on an annihilated eigenvalue.
    Eigen::VectorXd constant_coeffs = Eigen::VectorXd::Zero(n);
    constant_coeffs(0) = std::sqrt(static_cast<double>(n));
    CHECK_THROWS_AS(srl(dec, mid, constant_coeffs, constant_coeffs), NumericalError);
}
