#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectralens/errors.hpp"
#include "spectralens/quadrature.hpp"
#include "spectralens/rmtstats.hpp"
#include "spectralens/stats.hpp"
#include "spectralens/theory.hpp"

using namespace spectralens;

namespace {

// GOE sample with the central 80% of levels as the bulk.
SpectrumD goe_bulk(Eigen::Index n, std::uint64_t seed) {
    const auto s = goe_wigner_sample(n, {seed, 0});
    return s.with_bulk({n / 10 + 1, n - n / 10});
}

SpectrumD uniform_levels(Eigen::Index n, std::uint64_t seed) {
    Philox rng({seed, 0}, 0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.uniform() * static_cast<double>(n);
    }
    return SpectrumD(v).with_bulk({1, n});
}

}  // namespace

TEST_CASE("unfold: uniform levels on [0, n] map to themselves") {
    const Eigen::Index n = 400;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = static_cast<double>(i);
    }
    const auto u = unfold(SpectrumD(v).with_bulk({1, n}));
    CHECK(std::abs(u.mean_spacing - 1.0) < 1e-3);
    CHECK(u.quality_ok);
    for (std::size_t k = 0; k < u.levels.size(); ++k) {
        CHECK(std::abs(u.levels[k] - (static_cast<double>(k) + 1.0)) < 1e-3);
    }
}

TEST_CASE("unfold: GOE 1000 bulk has unit mean spacing within 0.02") {
    const auto u = unfold(goe_bulk(1000, 1));
    CHECK(std::abs(u.mean_spacing - 1.0) < 0.02);
    CHECK(std::is_sorted(u.levels.begin(), u.levels.end()));
}

TEST_CASE("unfold: bulk under 100 levels is rejected") {
    const auto s = goe_wigner_sample(300, {2, 0}).with_bulk({10, 100});
    CHECK_THROWS_AS(unfold(s), InsufficientSpectrum);
}

TEST_CASE("level_spacing: arithmetic levels give a single-bin spike") {
    UnfoldedSpectrum u;
    for (int k = 0; k < 200; ++k) {
        u.levels.push_back(k);
    }
    const auto sp = level_spacing(u, 40);
    CHECK(sp.spacings.size() == 199);
    for (double s : sp.spacings) {
        CHECK(s == 1.0);
    }
    const auto peak = std::max_element(sp.histogram.masses.begin(), sp.histogram.masses.end());
    CHECK(*peak == doctest::Approx(1.0));
}

TEST_CASE("level_spacing: GOE against the Wigner surmise, KS < 0.05") {
    const auto sp = level_spacing(unfold(goe_bulk(2000, 3)));
    CHECK(ks_distance(sp.spacings, wigner_surmise_cdf) < 0.05);
}

TEST_CASE("level_spacing: Poisson levels against exp(-s), KS < 0.05") {
    const auto sp = level_spacing(unfold(uniform_levels(3000, 4)));
    CHECK(ks_distance(sp.spacings, poisson_spacing_cdf) < 0.05);
}

TEST_CASE("level_spacing: needs 100 levels") {
    UnfoldedSpectrum u;
    u.levels = {0, 1, 2};
    CHECK_THROWS_AS(level_spacing(u), InsufficientSpectrum);
}

TEST_CASE("wigner_surmise: repulsion, normalization and unit mean") {
    CHECK(wigner_surmise(0.0) == 0.0);
    const auto norm = integrate([](double s) { return wigner_surmise(s); }, 0.0, 20.0, 1e-13, 1e-13);
    const auto mean = integrate([](double s) { return s * wigner_surmise(s); }, 0.0, 20.0, 1e-13, 1e-13);
    CHECK(std::abs(norm.value - 1.0) < 1e-10);
    CHECK(std::abs(mean.value - 1.0) < 1e-10);
    CHECK_THROWS_AS(wigner_surmise(1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(wigner_surmise(-1.0), InvalidArgument);
}

TEST_CASE("r_statistics: (1, 2, 4) gives r = 0.5") {
    const std::vector<double> lv{1, 2, 4};
    const auto r = r_statistics_of_levels(lv);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values[0] == 0.5);
}

TEST_CASE("r_statistics: degenerate gaps") {
    const std::vector<double> lv{1, 1, 2, 2, 2, 3};
    const auto r = r_statistics_of_levels(lv);
    // gaps (0, 1, 0, 0, 1): pairs (0,1) -> 0, (1,0) -> 0, (0,0) skipped, (0,1) -> 0
    CHECK(r.values.size() == 3);
    CHECK(r.mean == 0.0);
}

TEST_CASE("r_statistics: GOE 2000 bulk within 0.01 of 4 - 2 sqrt 3") {
    const auto r = r_statistics(goe_bulk(2000, 5));
    CHECK(std::abs(r.mean - kGoeMeanR) < 0.01);
}

TEST_CASE("r_statistics: iid exponential spacings within 0.01 of the Poisson value") {
    Philox rng({6, 0}, 0);
    std::vector<double> lv{0.0};
    for (int k = 0; k < 100000; ++k) {
        lv.push_back(lv.back() - std::log(rng.uniform()));
    }
    CHECK(std::abs(r_statistics_of_levels(lv).mean - kPoissonMeanR) < 0.01);
}

TEST_CASE("r_statistics: invariant under affine maps") {
    const auto s = goe_bulk(400, 7);
    const auto r0 = r_statistics(s);
    const SpectrumD t(Eigen::VectorXd((3.0 * s.eigenvalues().array() + 11.0).matrix()), 0, s.bulk_range());
    const auto r1 = r_statistics(t);
    REQUIRE(r0.values.size() == r1.values.size());
    for (std::size_t k = 0; k < r0.values.size(); ++k) {
        CHECK(r0.values[k] == doctest::Approx(r1.values[k]).epsilon(1e-12));
    }
}

TEST_CASE("r_statistics: bulk under 50 is rejected") {
    CHECK_THROWS_AS(r_statistics(goe_wigner_sample(100, {1, 0}).with_bulk({1, 40})), InsufficientSpectrum);
}

TEST_CASE("goe_r_density: normalization, mean and repulsion") {
    const auto norm = integrate([](double r) { return goe_r_density(r); }, 0.0, 1.0, 1e-13, 1e-13);
    const auto mean = integrate([](double r) { return r * goe_r_density(r); }, 0.0, 1.0, 1e-13, 1e-13);
    CHECK(std::abs(norm.value - 1.0) < 1e-8);
    CHECK(std::abs(mean.value - (4.0 - 2.0 * std::sqrt(3.0))) < 1e-6);
    CHECK(goe_r_density(0.0) == 0.0);
    CHECK_THROWS_AS(goe_r_density(1.5), InvalidArgument);
    CHECK_THROWS_AS(goe_r_density(-0.1), InvalidArgument);
}

TEST_CASE("sff: single level gives K = 1") {
    const std::vector<std::vector<double>> one{{0.37}};
    const std::vector<double> taus{0.1, 0.5, 1.0, 7.3};
    const auto c = spectral_form_factor(std::span<const std::vector<double>>(one), taus);
    for (double v : c.values) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("sff: plateau near 1 at large tau for GOE levels") {
    std::vector<UnfoldedSpectrum> members;
    for (std::uint64_t s = 0; s < 10; ++s) {
        members.push_back(unfold(goe_bulk(600, 100 + s)));
    }
    std::vector<double> taus;
    for (int k = 0; k <= 200; ++k) {
        taus.push_back(45.0 + 10.0 * k / 200.0);
    }
    const auto c = spectral_form_factor(members, taus);
    CHECK(std::abs(mean_of(c.values) - 1.0) < 0.1);
}

TEST_CASE("sff: invariant under a global shift of the levels") {
    const auto u = unfold(goe_bulk(300, 9));
    std::vector<double> shifted = u.levels;
    for (double& e : shifted) {
        e += 123.25;
    }
    const std::vector<std::vector<double>> a{u.levels}, b{shifted};
    const std::vector<double> taus{0.1, 0.4, 0.9, 2.5};
    const auto ka = spectral_form_factor(std::span<const std::vector<double>>(a), taus);
    const auto kb = spectral_form_factor(std::span<const std::vector<double>>(b), taus);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        CHECK(ka.values[k] == doctest::Approx(kb.values[k]).epsilon(1e-9));
    }
}

TEST_CASE("sff: empty grid and nonpositive tau are rejected") {
    const std::vector<std::vector<double>> one{{0.0, 1.0}};
    const std::vector<double> none, bad{0.0};
    CHECK_THROWS_AS(spectral_form_factor(std::span<const std::vector<double>>(one), none), InvalidArgument);
    CHECK_THROWS_AS(spectral_form_factor(std::span<const std::vector<double>>(one), bad), InvalidArgument);
}

TEST_CASE("goe_sff: branch values") {
    CHECK(goe_sff(std::nextafter(1.0, 0.0)) == doctest::Approx(2.0 - std::log(3.0)).epsilon(1e-12));
    CHECK(goe_sff(1.0) == 1.0);
    CHECK(goe_sff(std::nextafter(1.0, 2.0)) == 1.0);
    CHECK(goe_sff(2.0) == 1.0);
    CHECK(goe_sff(1e-12) < 1e-11);
    CHECK_THROWS_AS(goe_sff(0.0), InvalidArgument);
    CHECK_THROWS_AS(goe_sff(-1.0), InvalidArgument);
}
