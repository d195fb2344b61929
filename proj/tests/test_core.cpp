#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ocp/geometry.hpp"
#include "ocp/partition.hpp"

using namespace ocp;

TEST_CASE("partition sums to one and respects supports") {
    const auto& P = dyadic_partition();
    auto total = [&](double r) {
        double s = 0.0;
        for (int i = 0; i <= 14; ++i) s += P.chi(i, r).f;
        return s;
    };
    CHECK(total(Vec2{3.7, -1.2}.norm()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(P.chi(0, 0.0).f == 1.0);
    for (int i = 1; i <= 12; ++i) CHECK(P.chi(i, 0.0).f == 0.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4096.0, 4096.0);
    int checked = 0;
    while (checked < 10000) {
        Vec2 x{u(rng), u(rng)};
        if (x.norm() > 4096.0) continue;
        ++checked;
        REQUIRE(std::abs(total(x.norm()) - 1.0) < 1e-12);
        for (int i = 1; i <= 12; ++i) {
            const double r = x.norm();
            if (r <= std::ldexp(1.0, i - 1) || r >= std::ldexp(1.0, i + 1)) REQUIRE(P.chi(i, r).f == 0.0);
        }
    }
}

TEST_CASE("layers_at lists every nonzero layer") {
    const auto& P = dyadic_partition();
    std::array<int, 2> ls{};
    for (double r = 0.0; r < 5000.0; r += 0.37) {
        int n = DyadicPartition::layers_at(r, ls);
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += P.chi(ls[k], r).f;
        REQUIRE(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("analytic profile derivatives agree with finite differences") {
    for (double t : {0.1, 0.3, 0.5, 0.77, 0.93}) {
        const double h = 1e-5;
        Jet a = smoothstep(t - h), b = smoothstep(t + h), c = smoothstep(t);
        CHECK(c.d1 == doctest::Approx((b.f - a.f) / (2 * h)).epsilon(1e-6));
        CHECK(c.d2 == doctest::Approx((b.d1 - a.d1) / (2 * h)).epsilon(1e-6));
        CHECK(c.d3 == doctest::Approx((b.d2 - a.d2) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("radial seminorm of order three matches a direct tensor scan") {
    // f(r) = r^3 has D^3 f with T_rrr = 6, T_rtt = 3 r^2 ... checked against angle scan
    const double r = 1.7;
    Jet j{r * r * r, 3 * r * r, 6 * r, 6.0};
    const double c = (j.d2 - j.d1 / r) / r;
    double best = 0.0;
    for (int k = 0; k <= 200000; ++k) {
        const double a = std::numbers::pi * k / 200000.0;
        const double u = std::cos(a), v = std::sin(a);
        best = std::max(best, std::abs(j.d3 * u * u * u + 3 * c * u * v * v));
    }
    CHECK(radial_seminorm(j, r, 3) == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("derivative bounds hold with the recorded constant") {
    const auto& P = dyadic_partition();
    double measured = 0.0;
    for (int i = 0; i <= 12; ++i)
        for (int k = 0; k <= 3; ++k) {
            const double hi = std::ldexp(1.0, i + 1);
            const int n = 40000;
            for (int s = 0; s <= n; ++s) {
                const double r = hi * s / n;
                measured = std::max(measured, radial_seminorm(P.chi(i, r), r, k) * std::ldexp(1.0, i * k));
            }
        }
    CHECK(measured <= P.c_chi());
    CHECK(measured >= 0.99 * P.c_chi());
}

TEST_CASE("gradient of chi_5 scaled by 2^5 stays below the constant") {
    const auto& P = dyadic_partition();
    double m = 0.0;
    for (double r = 16.0; r <= 64.0; r += 1e-3) m = std::max(m, std::abs(P.chi(5, r).d1) * 32.0);
    CHECK(m <= P.c_chi());
    CHECK(m == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("counting, views and bulk margin") {
    CHECK(pts_count(PointConfig({{0, 0}}), Window::disk({0, 0}, 1)) == 1);
    CHECK(pts_count(PointConfig(), Window::disk({0, 0}, 1)) == 0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec2> v;
    const double R = system_radius(100);
    while (v.size() < 100) {
        Vec2 p{R * u(rng), R * u(rng)};
        if (p.norm() <= R) v.push_back(p);
    }
    PointConfig X(v);
    CHECK(pts_count(X, Window::from(system_domain(100))) == 100);
    CHECK(pts_count(PointConfig({{1, 0}}), Window::disk({0, 0}, 1)) == 1);

    CHECK(local_view(PointConfig({{1, 1}}), {1, 1})[0] == Vec2{0, 0});
    CHECK(local_view(PointConfig(), {1, 1}).empty());
    PointConfig back = local_view(local_view(X, {0.3, -2}), {-0.3, 2});
    for (std::size_t i = 0; i < X.size(); ++i) CHECK(dist(back[i], X[i]) < 1e-14);
    PointConfig Y = local_view(X, {5.5, 1.25});
    for (std::size_t i = 1; i < X.size(); ++i)
        CHECK(dist(Y[i], Y[0]) == doctest::Approx(dist(X[i], X[0])).epsilon(1e-15));

    CHECK(bulk_margin({0, 0}, 100) == doctest::Approx(1 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(bulk_margin({system_radius(100), 0}, 100) == doctest::Approx(0.0));
    CHECK(bulk_margin({system_radius(400) / 2, 0}, 400) == doctest::Approx(0.28209479).epsilon(1e-7));
    CHECK_THROWS_AS(bulk_margin({20, 0}, 100), std::domain_error);
}

TEST_CASE("configurations reject duplicates and non-finite coordinates") {
    CHECK_THROWS_AS(PointConfig({{0, 0}, {0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(PointConfig({{NAN, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Window::disk({0, 0}, 0.0), std::domain_error);
}

TEST_CASE("window areas and containment") {
    CHECK(Window::disk({1, 2}, 2).area() == doctest::Approx(4 * std::numbers::pi));
    CHECK(Window::rect({0, 0}, {2, 3}).area() == doctest::Approx(6));
    CHECK(Window::annulus({0, 0}, 1, 2).area() == doctest::Approx(3 * std::numbers::pi));
    CHECK(Window::annulus({0, 0}, 1, 2).contains({1, 0}));
    CHECK_FALSE(Window::annulus({0, 0}, 1, 2).contains({0.5, 0}));
    CHECK(Window::rect({0, 0}, {2, 3}).contains({2, 3}));
}
