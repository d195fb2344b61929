#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ocp/sampler.hpp"
#include "ocp/stats.hpp"

using namespace ocp;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("hard wall, beta zero and zero-delta moves") {
    ChainState s(initial_config(10, 1), 2.0, 9, 0.3);
    const PointConfig before = s.config();
    CHECK_FALSE(s.try_move(0, {100.0, 0.0}));
    CHECK(s.config() == before);

    ChainState z(initial_config(10, 1), 0.0, 9, 0.3);
    for (int k = 0; k < 50; ++k) CHECK(z.try_move(static_cast<std::size_t>(k) % 10, {0.01 * k - 0.25, 0.3}));

    CHECK(s.try_move(2, s.point(2)));
}

TEST_CASE("initial configurations") {
    PointConfig one = initial_config(1, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == Vec2{0, 0});
    PointConfig seven = initial_config(7, 5);
    CHECK(seven.size() == 7);
    for (const auto& p : seven) CHECK(system_domain(7).contains(p));
    PointConfig hundred = initial_config(100, 5);
    double dmin = 1e9;
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = i + 1; j < 100; ++j) dmin = std::min(dmin, dist(hundred[i], hundred[j]));
    CHECK(dmin > 0.1);
}

TEST_CASE("chains are deterministic given the seed") {
    ChainPlan plan;
    plan.N = 16;
    plan.beta = 2;
    plan.seed = 42;
    plan.burn_in = 2000;
    plan.samples = 20;
    plan.chains = 2;
    auto a = collect_samples(plan, 1);
    auto b = collect_samples(plan, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("beta zero gives binomial disk counts") {
    ChainPlan plan;
    plan.N = 50;
    plan.beta = 0;
    plan.seed = 3;
    plan.burn_in = 5000;
    plan.thinning = 100;
    plan.samples = 10000;
    const double R = system_radius(50);
    std::vector<double> c1, c2;
    run_chain(plan, [&](std::size_t, std::size_t, const ChainState& s) {
        PointConfig X = s.config();
        c1.push_back(static_cast<double>(pts_count(X, Window::disk({0, 0}, 1.0))));
        c2.push_back(static_cast<double>(pts_count(X, Window::disk({0, 0}, 2.5))));
    });
    MomentEstimate m1 = series_moment(c1), m2 = series_moment(c2);
    CHECK(std::abs(m1.mean - 50.0 / (R * R)) < 3 * m1.se);
    CHECK(std::abs(m2.mean - 50.0 * 6.25 / (R * R)) < 3 * m2.se);
}

TEST_CASE("two-cell occupation of a single particle") {
    // N = 1: density proportional to exp(-beta pi |x|^2 / 2) on the disk
    const double beta = 2.0;
    const double R = system_radius(1);
    const double rc = R / std::sqrt(2.0);
    const double a = beta * kPi / 2;
    auto mass = [&](double r0, double r1) { return kPi / a * (std::exp(-a * r0 * r0) - std::exp(-a * r1 * r1)); };
    const double p_in = mass(0, rc) / mass(0, R);
    ChainPlan plan;
    plan.N = 1;
    plan.beta = beta;
    plan.seed = 8;
    plan.burn_in = 1000;
    plan.thinning = 5;
    plan.samples = 40000;
    std::vector<double> inside;
    run_chain(plan, [&](std::size_t, std::size_t, const ChainState& s) {
        inside.push_back(s.point(0).norm() <= rc ? 1.0 : 0.0);
    });
    MomentEstimate m = series_moment(inside);
    CHECK(std::abs(m.mean - p_in) < 3 * m.se);
}

TEST_CASE("cached energy drift over a million steps") {
    ChainState s(initial_config(64, 2), 2.0, 77, 0.4);
    s.resync_every = 10000000;
    for (int k = 0; k < 1000000; ++k) mcmc_step(s);
    const double exact = s.recompute_energy().total;
    CHECK(std::abs(s.cached_energy().total - exact) / std::abs(exact) < 1e-7);
}

TEST_CASE("adapted acceptance rates") {
    for (double beta : {1.0, 2.0, 10.0}) {
        ChainPlan plan;
        plan.N = 256;
        plan.beta = beta;
        plan.seed = 13;
        plan.burn_in = 60 * 256;
        plan.samples = 10;
        auto sum = run_chain(plan, [](std::size_t, std::size_t, const ChainState&) {});
        CHECK(sum[0].acceptance >= 0.2);
        CHECK(sum[0].acceptance <= 0.6);
    }
}
