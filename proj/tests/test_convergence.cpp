#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectralens/convergence.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/synth.hpp"

using namespace spectralens;

namespace {

DataMatrixD cgd(Eigen::Index d, Eigen::Index m, double alpha, std::uint64_t seed) {
    return preprocess(sample_gaussian(PopulationCovariance<double>::toeplitz(d, 1.0, alpha), m, {seed, 0}), false);
}

}  // namespace

TEST_CASE("spectral_norm: diagonal and signed matrices") {
    Eigen::MatrixXd a = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0).asDiagonal();
    CHECK(spectral_norm(a) == doctest::Approx(6.0).epsilon(1e-5));
    a(0, 0) = -9.0;
    CHECK(spectral_norm(a) == doctest::Approx(9.0).epsilon(1e-5));
    CHECK(spectral_norm(Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 4))) == 0.0);
}

TEST_CASE("spectral_norm: agrees with the eigensolver on a random symmetric matrix") {
    Philox rng({3, 0}, 0);
    Eigen::MatrixXd b(40, 40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        for (Eigen::Index j = 0; j < 40; ++j) {
            b(i, j) = rng.normal();
        }
    }
    const Eigen::MatrixXd a = b + b.transpose();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    const double ref = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    CHECK(spectral_norm(a, 1e-10, 200000) == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("gram_columns: subset Gram matches the direct product") {
    const auto x = cgd(20, 300, 0.25, 1);
    const std::vector<Eigen::Index> cols{0, 5, 17, 230, 299};
    Eigen::MatrixXd sub(20, 5);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        sub.col(static_cast<Eigen::Index>(k)) = x.values().col(cols[k]);
    }
    const Eigen::MatrixXd ref = sub * sub.transpose() / 5.0;
    CHECK((gram_columns(x.values(), cols) - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("sample_columns: distinct, ascending, in range, deterministic") {
    Philox a({9, 0}, 4), b({9, 0}, 4);
    const auto s = sample_columns(1000, 300, a);
    CHECK(s == sample_columns(1000, 300, b));
    CHECK(s.size() == 300);
    CHECK(std::adjacent_find(s.begin(), s.end(), [](auto p, auto q) { return p >= q; }) == s.end());
    CHECK(s.front() >= 0);
    CHECK(s.back() < 1000);
}

TEST_CASE("log_grid: endpoints, monotone, deduplicated") {
    const auto g = log_grid(100, 60000, 24);
    CHECK(g.front() == 100);
    CHECK(g.back() == 60000);
    CHECK(std::adjacent_find(g.begin(), g.end(), [](auto p, auto q) { return p >= q; }) == g.end());
    const auto small = log_grid(1, 4, 50);
    CHECK(small == std::vector<Eigen::Index>{1, 2, 3, 4});
    CHECK_THROWS_AS(log_grid(0, 10, 5), InvalidArgument);
    CHECK_THROWS_AS(log_grid(10, 5, 5), InvalidArgument);
}

TEST_CASE("sweep: the full dataset compares to itself with Delta = epsilon = 0") {
    const auto x = cgd(200, 4000, 0.25, 2);
    const auto s = sweep(x, {1000, 4000}, 1, {7, 0});
    CHECK(s.Delta[1] == 0.0);
    CHECK(s.epsilon[1] == 0.0);
    CHECK(s.entropy[1] == doctest::Approx(s.reference.entropy_full).epsilon(1e-15));
    CHECK(s.epsilon[0] > 0.0);
    for (const auto* v : {&s.delta, &s.Delta, &s.epsilon, &s.entropy}) {
        REQUIRE(v->size() == 2);
        for (double e : *v) {
            CHECK(e >= 0.0);
        }
    }
    const auto t = entropy_trajectory(s);
    CHECK(t.normalized_entropy[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sweep: epsilon(4M) < epsilon(M) for 5-seed averages below M_crit") {
    const auto x = cgd(200, 20000, 0.25, 3);
    const auto s = sweep(x, {20, 80, 320, 1280}, 5, {11, 0});
    for (std::size_t k = 0; k + 1 < s.m_values.size(); ++k) {
        CAPTURE(s.m_values[k]);
        CHECK(s.epsilon[k + 1] < s.epsilon[k]);
    }
}

TEST_CASE("sweep: small subsets mark bulk metrics as skipped, epsilon stays defined") {
    const auto x = cgd(200, 2000, 0.25, 4);
    const auto s = sweep(x, {5, 2000}, 2, {1, 0});
    CHECK(is_skipped(s.delta[0]));
    CHECK(is_skipped(s.Delta[0]));
    CHECK(s.skipped[0] == 2);
    CHECK_FALSE(is_skipped(s.epsilon[0]));
    CHECK(s.skipped[1] == 0);
}

TEST_CASE("sweep: column permutation leaves the full-data metrics unchanged and subset metrics within noise") {
    const auto x = cgd(200, 8000, 0.25, 5);
    std::vector<Eigen::Index> perm(8000);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Philox rng({77, 0}, 0);
    for (std::size_t k = perm.size() - 1; k > 0; --k) {
        std::swap(perm[k], perm[rng.next_u64() % (k + 1)]);
    }
    Eigen::MatrixXd y(200, 8000);
    for (Eigen::Index j = 0; j < 8000; ++j) {
        y.col(j) = x.values().col(perm[static_cast<std::size_t>(j)]);
    }
    const DataMatrixD xp(y);
    const std::vector<Eigen::Index> ms{500, 8000};
    const auto a = sweep(x, ms, 8, {13, 0});
    const auto b = sweep(xp, ms, 8, {13, 0});
    CHECK(a.reference.alpha_full == doctest::Approx(b.reference.alpha_full).epsilon(1e-9));
    CHECK(a.delta[1] == doctest::Approx(b.delta[1]).epsilon(1e-9));
    CHECK(b.Delta[1] == 0.0);
    CHECK(b.epsilon[1] == 0.0);
    // 8 seeds each: means agree within 4 combined standard errors
    CHECK(std::abs(a.epsilon[0] - b.epsilon[0]) < 4 * std::hypot(a.epsilon_se[0], b.epsilon_se[0]));
    CHECK(std::abs(a.Delta[0] - b.Delta[0]) < 4 * std::hypot(a.Delta_se[0], b.Delta_se[0]));
    CHECK(std::abs(a.delta[0] - b.delta[0]) < 4 * std::hypot(a.delta_se[0], b.delta_se[0]));
}

TEST_CASE("sweep: determinism and argument errors") {
    const auto x = cgd(100, 1000, 0.25, 6);
    const auto a = sweep(x, {200, 500}, 3, {5, 0});
    const auto b = sweep(x, {200, 500}, 3, {5, 0});
    CHECK(a.epsilon == b.epsilon);
    CHECK_THROWS_AS(sweep(x, {200, 100}, 1, {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(sweep(x, {200, 2000}, 1, {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(sweep(x, {200}, 0, {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(sweep(x, {}, 1, {0, 0}), InvalidArgument);
}

TEST_CASE("locate_mcrit: 1/M + 0.01 crosses the 20% band where 1/M = 0.2 plateau") {
    std::vector<Eigen::Index> m;
    std::vector<double> v;
    for (int k = 0; k <= 48; ++k) {
        m.push_back(static_cast<Eigen::Index>(std::llround(std::pow(10.0, 1.0 + 4.0 * k / 48.0))));
        v.push_back(1.0 / static_cast<double>(m.back()) + 0.01);
    }
    // plateau = 0.01 + mean of 1/M over the last three points
    const double plateau = 0.01 + (1.0 / m[46] + 1.0 / m[47] + 1.0 / m[48]) / 3.0;
    // inside the band once 1/M + 0.01 - plateau <= 0.2 plateau
    const double crossing = 1.0 / (1.2 * plateau - 0.01);
    const auto r = locate_mcrit(m, v);
    REQUIRE(r.converged);
    CHECK(r.plateau == doctest::Approx(plateau).epsilon(1e-14));
    const auto expected = *std::find_if(m.begin(), m.end(), [&](Eigen::Index x) { return x >= crossing; });
    CHECK(r.m_crit == expected);
    // 1/M = 0.2 plateau gives M near 500; grid points are 10^(1/12) apart
    CHECK(static_cast<double>(r.m_crit) >= 1.0 / (0.2 * plateau) / std::pow(10.0, 1.0 / 12.0));
    CHECK(static_cast<double>(r.m_crit) <= 1.0 / (0.2 * plateau) * std::pow(10.0, 1.0 / 12.0));
}

TEST_CASE("locate_mcrit: increasing or too short metrics do not converge") {
    std::vector<Eigen::Index> m{10, 20, 40, 80, 160, 320};
    const std::vector<double> up{1, 2, 3, 4, 5, 6};
    CHECK_FALSE(locate_mcrit(m, up).converged);
    const std::vector<double> flat{1, 1, 1, 1, 1, 1};
    CHECK_FALSE(locate_mcrit(m, flat).converged);
    const std::vector<double> short_metric{5, 4, kSkipped, kSkipped, 1, 1};
    const auto r = locate_mcrit(m, short_metric);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.reason.empty());
}

TEST_CASE("entropy_trajectory: zero references give skip markers") {
    ConvergenceSweep s;
    s.m_values = {10, 20};
    s.entropy = {1.0, 2.0};
    s.delta = {0.0, 0.5};
    s.Delta = {kSkipped, 0.4};
    s.reference.entropy_full = 0.0;
    const auto t = entropy_trajectory(s);
    CHECK(is_skipped(t.normalized_entropy[0]));
    CHECK(is_skipped(t.normalized_delta[1]));
    CHECK(is_skipped(t.normalized_Delta[0]));
    CHECK(t.normalized_Delta[1] == 1.0);
}
