#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <cmath>
#include <limits>
#include <numeric>

#include "shp/error.hpp"
#include "shp/evaluation.hpp"
#include "shp/likelihood.hpp"
#include "shp/simulator.hpp"
#include "support/oracles.hpp"

using namespace shp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(const std::vector<Count>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance_of(const std::vector<Count>& xs) {
    const double m = mean_of(xs);
    double ss = 0.0;
    for (Count x : xs) ss += (static_cast<double>(x) - m) * (static_cast<double>(x) - m);
    return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("random_dag") {
    CHECK(random_dag(1, 0.0, 1).edge_count() == 0);
    CHECK(random_dag(1, 5.0, 1).edge_count() == 0);
    CHECK_THROWS_AS(random_dag(5, 2.5, 1), ValidationError);
    CHECK_THROWS_AS(random_dag(5, -0.1, 1), ValidationError);
    CHECK(random_dag(12, 2.0, 99) == random_dag(12, 2.0, 99));

    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto g = random_dag(20, 1.5, seed);
        CHECK(is_acyclic(g));
        total += static_cast<double>(g.edge_count());
    }
    CHECK(total / 200.0 == doctest::Approx(30.0).epsilon(0.10));
}

TEST_CASE("sample_params support and ranges") {
    SimConfig cfg;
    cfg.mu_range = {0.0005, 0.0001};  // inverted bounds are normalized
    CHECK(cfg.mu_range.lo == 0.0001);
    const CausalGraph empty(default_node_names(4));
    const auto p0 = sample_params(empty, cfg, 5);
    for (double a : p0.alpha.data()) CHECK(a == 0.0);
    for (double m : p0.mu) CHECK((m >= 0.0001 && m <= 0.0005));

    const CausalGraph chain({"a", "b", "c"}, {{0, 1}, {1, 2}});
    const auto p = sample_params(chain, cfg, 6);
    int nonzero = 0;
    for (NodeIndex s = 0; s < 3; ++s)
        for (NodeIndex v = 0; v < 3; ++v)
            if (p.alpha(s, v) != 0.0) {
                ++nonzero;
                CHECK(chain.has_edge(s, v));
                CHECK((p.alpha(s, v) >= 0.3 && p.alpha(s, v) <= 0.5));
            }
    CHECK(nonzero == 2);
}

TEST_CASE("sample_params enforces stability") {
    SimConfig cfg;
    cfg.self_excitation = true;
    cfg.self_alpha_range = {0.2, 0.99};
    cfg.delta = 1.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto g = random_dag(6, 1.5, seed);
        const auto p = sample_params(g, cfg, seed + 1000);
        for (auto kind : {KernelKind::Continuous, KernelKind::Discrete}) {
            // On a DAG plus self-loops the branching matrix is permutation-similar to a
            // triangular one, so its spectrum is its diagonal.
            const auto b = branching_matrix(p, kind);
            double oracle_radius = 0.0;
            for (std::size_t i = 0; i < b.rows(); ++i) oracle_radius = std::max(oracle_radius, std::abs(b(i, i)));
            CHECK(oracle_radius < 1.0);
            CHECK(spectral_radius(p, kind) == doctest::Approx(oracle_radius).epsilon(1e-9));
        }
    }
    cfg.self_alpha_range = {1.5, 2.0};
    CHECK_THROWS_WITH_AS(sample_params(random_dag(3, 1.0, 1), cfg, 1), doctest::Contains("spectral radius"),
                         ValidationError);
}

TEST_CASE("spectral radius of a dense matrix matches power iteration") {
    ShpParams p = ShpParams::zeros(3, 1.0, 1.0);
    const double vals[3][3] = {{0.1, 0.3, 0.0}, {0.2, 0.1, 0.4}, {0.3, 0.0, 0.2}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.alpha(i, j) = vals[i][j];
    CHECK(spectral_radius(p, KernelKind::Continuous) ==
          doctest::Approx(oracle::power_iteration_radius(branching_matrix(p, KernelKind::Continuous))).epsilon(1e-9));
}

TEST_CASE("simulate_continuous: homogeneous Poisson counts") {
    const CausalGraph g({"a", "b"});
    ShpParams p = ShpParams::zeros(2, 1.0, 1.0);
    p.mu = {0.5, 2.0};
    const double horizon = 100.0;
    std::vector<double> totals(2, 0.0);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto seq = simulate_continuous(p, g, horizon, seed);
        for (const auto& r : seq.records()) totals[g.index_of(r.event_type)] += 1.0;
    }
    CHECK(totals[0] / 200.0 == doctest::Approx(50.0).epsilon(0.05));
    CHECK(totals[1] / 200.0 == doctest::Approx(200.0).epsilon(0.05));
}

TEST_CASE("simulate_continuous: branching mean of a self-exciting node") {
    const CausalGraph g({"a"});
    ShpParams p = ShpParams::zeros(1, 1.0, 1.0);
    p.mu = {1.0};
    p.alpha(0, 0) = 0.5;
    const double horizon = 200.0;
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) total += static_cast<double>(simulate_continuous(p, g, horizon, seed).size());
    CHECK(total / 200.0 == doctest::Approx(horizon / (1.0 - 0.5)).epsilon(0.10));
}

TEST_CASE("simulate_continuous edge cases") {
    const CausalGraph g({"a"});
    ShpParams p = ShpParams::zeros(1, 1.0, 1.0);
    p.mu = {3.0};
    CHECK(simulate_continuous(p, g, 0.0, 1).size() == 0);
    const auto s1 = simulate_continuous(p, g, 50.0, 4);
    const auto s2 = simulate_continuous(p, g, 50.0, 4);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1.records()[i].timestamp == s2.records()[i].timestamp);
    p.alpha(0, 0) = 1.2;
    CHECK_THROWS_AS(simulate_continuous(p, g, 10.0, 1), ValidationError);
}

TEST_CASE("simulate_discrete with no excitation is i.i.d. Poisson") {
    const CausalGraph g(default_node_names(4));
    ShpParams p = ShpParams::zeros(4, 1.0, 2.0);
    p.mu = {1.0, 1.0, 1.0, 1.0};  // mean 2 per bin
    const auto counts = simulate_discrete(p, g, 25000, 11);
    const double mean = 2.0;
    boost::math::poisson_distribution<double> pois(mean);
    // Categories 0..7 and a lumped tail.
    constexpr int kCats = 9;
    std::vector<double> observed(kCats, 0.0);
    for (Count c : counts.counts().data()) observed[std::min<Count>(c, kCats - 1)] += 1.0;
    const double cells = static_cast<double>(counts.counts().data().size());
    CHECK(cells == 100000.0);
    double chi2 = 0.0;
    for (int c = 0; c < kCats; ++c) {
        const double prob = c < kCats - 1 ? boost::math::pdf(pois, c) : 1.0 - boost::math::cdf(pois, kCats - 2);
        const double expected = prob * cells;
        chi2 += (observed[c] - expected) * (observed[c] - expected) / expected;
    }
    const double critical = boost::math::quantile(boost::math::chi_squared_distribution<double>(kCats - 1), 0.99);
    CHECK(chi2 < critical);
}

TEST_CASE("simulate_discrete instantaneous pair mean") {
    const CausalGraph g({"X", "Y"}, {{0, 1}});
    ShpParams p = ShpParams::zeros(2, kInf, 1.0);
    p.alpha(0, 1) = 0.5;
    p.mu = {1.0, 0.1};
    const auto counts = simulate_discrete(p, g, 100000, 3);
    CHECK(mean_of(counts.counts().column(1)) == doctest::Approx(0.6).epsilon(0.03));
}

TEST_CASE("simulate_discrete recovers instantaneous slopes by least squares") {
    // a -> c <- b, c -> d; instantaneous only.
    const CausalGraph g({"a", "b", "c", "d"}, {{0, 2}, {1, 2}, {2, 3}});
    ShpParams p = ShpParams::zeros(4, kInf, 1.0);
    p.alpha(0, 2) = 0.4;
    p.alpha(1, 2) = 0.3;
    p.alpha(2, 3) = 0.5;
    p.mu = {1.0, 1.5, 0.2, 0.3};
    const auto x = simulate_discrete(p, g, 100000, 8);
    // Regress c on (1, a, b) via normal equations.
    double s[3][3] = {}, r[3] = {};
    for (std::size_t k = 0; k < x.bins(); ++k) {
        const double f[3] = {1.0, static_cast<double>(x(k, 0)), static_cast<double>(x(k, 1))};
        for (int i = 0; i < 3; ++i) {
            r[i] += f[i] * static_cast<double>(x(k, 2));
            for (int j = 0; j < 3; ++j) s[i][j] += f[i] * f[j];
        }
    }
    // Gaussian elimination on the 3x3 system.
    for (int c = 0; c < 3; ++c)
        for (int row = c + 1; row < 3; ++row) {
            const double m = s[row][c] / s[c][c];
            for (int j = c; j < 3; ++j) s[row][j] -= m * s[c][j];
            r[row] -= m * r[c];
        }
    double beta[3];
    for (int i = 2; i >= 0; --i) {
        double acc = r[i];
        for (int j = i + 1; j < 3; ++j) acc -= s[i][j] * beta[j];
        beta[i] = acc / s[i][i];
    }
    CHECK(beta[1] == doctest::Approx(0.4).epsilon(0.05));
    CHECK(beta[2] == doctest::Approx(0.3).epsilon(0.05));

    double cd = 0.0, cc = 0.0, c1 = 0.0, d1 = 0.0;
    for (std::size_t k = 0; k < x.bins(); ++k) {
        const double c = static_cast<double>(x(k, 2)), d = static_cast<double>(x(k, 3));
        cd += c * d;
        cc += c * c;
        c1 += c;
        d1 += d;
    }
    const double n = static_cast<double>(x.bins());
    const double slope = (cd - c1 * d1 / n) / (cc - c1 * c1 / n);
    CHECK(slope == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("simulate_discrete edge cases") {
    const CausalGraph g({"a", "b"}, {{0, 1}});
    ShpParams p = ShpParams::zeros(2, 1.0, 1.0);
    p.mu = {1.0, 1.0};
    p.alpha(0, 1) = 0.2;
    CHECK(simulate_discrete(p, g, 0, 1).bins() == 0);
    CHECK(simulate_discrete(p, g, 500, 9) == simulate_discrete(p, g, 500, 9));
    const CausalGraph cyclic({"a", "b"}, {{0, 1}, {1, 0}});
    CHECK_THROWS_AS(simulate_discrete(p, cyclic, 10, 1), ValidationError);
    ShpParams off_support = p;
    off_support.alpha(1, 0) = 0.1;
    CHECK_THROWS_AS(simulate_discrete(off_support, g, 10, 1), ValidationError);
}

TEST_CASE("continuous and discrete generators agree at fine resolution") {
    const CausalGraph g({"X", "Y"}, {{0, 1}});
    ShpParams p = ShpParams::zeros(2, 1.0, 0.05);
    p.mu = {0.5, 0.3};
    p.alpha(0, 0) = 0.3;
    p.alpha(0, 1) = 0.4;
    const double horizon = 40000.0;
    const auto binned = bin_events(simulate_continuous(p, g, horizon, 21), p.delta, g.nodes());
    const auto direct = simulate_discrete(p, g, binned.bins(), 22);
    for (NodeIndex v = 0; v < 2; ++v) {
        const auto a = binned.counts().column(v);
        const auto b = direct.counts().column(v);
        CHECK(mean_of(a) == doctest::Approx(mean_of(b)).epsilon(0.05));
        CHECK(variance_of(a) == doctest::Approx(variance_of(b)).epsilon(0.05));
    }
}

TEST_CASE("simulate_instantaneous_pair") {
    const auto x = simulate_instantaneous_pair(0.5, 1.0, 0.1, 100000, 17);
    REQUIRE(x.bins() == 100000);
    REQUIRE(x.nodes() == 2);
    const auto y = x.counts().column(1);
    CHECK(mean_of(y) == doctest::Approx(0.6).epsilon(0.02));
    const double theory = 1.0 + 1.0 * 0.25 / (0.5 + 0.1);
    CHECK(dispersion_index(y) == doctest::Approx(theory).epsilon(0.05));
    CHECK_THROWS_AS(simulate_instantaneous_pair(0.5, 0.0, 0.1, 10, 1), ValidationError);
    CHECK_THROWS_AS(simulate_instantaneous_pair(0.0, 1.0, 0.1, 10, 1), ValidationError);
    CHECK(simulate_instantaneous_pair(0.5, 1.0, 0.1, 100, 3) == simulate_instantaneous_pair(0.5, 1.0, 0.1, 100, 3));
}

TEST_CASE("simulate_dataset is deterministic and sized by the config") {
    SimConfig cfg;
    cfg.n_nodes = 5;
    cfg.n_bins = 300;
    cfg.mu_range = {0.05, 0.1};
    cfg.seed = 42;
    const auto a = simulate_dataset(cfg);
    const auto b = simulate_dataset(cfg);
    CHECK(a.counts == b.counts);
    CHECK(a.truth == b.truth);
    CHECK(a.counts.bins() == 300);
    CHECK(a.counts.nodes() == 5);
    cfg.generator = Generator::Discrete;
    CHECK(simulate_dataset(cfg).counts.bins() == 300);
}
