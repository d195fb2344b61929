#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ocp/dlr.hpp"
#include "ocp/energy.hpp"
#include "ocp/quad.hpp"

using namespace ocp;

namespace {
constexpr double kPi = std::numbers::pi;

PointConfig uniform_config(std::size_t N, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    return binomial_sample(Window::from(system_domain(N)), N, rng);
}

// X with exactly n fresh uniform points inside Lambda
PointConfig with_interior(const PointConfig& X, const Window& L, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed, 1);
    return merge(restrict_outside(X, L), binomial_sample(L, n, rng));
}

double sum_x(const PointConfig& X, const Window& L) {
    double s = 0.0;
    for (const auto& x : X)
        if (L.contains(x)) s += x.x;
    return s;
}

double mean_of(const std::vector<double>& v) { return moment(v).mean; }
}  // namespace

TEST_CASE("binomial draws") {
    Rng rng = make_rng(7, 0);
    CHECK(binomial_sample(Window::disk({}, 1.0), 0, rng).size() == 0);
    const Window W = Window::disk({0.5, -0.2}, 1.0);
    const std::size_t n = 1000;
    const PointConfig X = binomial_sample(W, n, rng);
    REQUIRE(X.size() == n);
    std::vector<double> xs, ys;
    double left = 0;
    for (const auto& x : X) {
        CHECK(W.contains(x));
        xs.push_back(x.x - 0.5);
        ys.push_back(x.y + 0.2);
        left += x.x < 0.5;
    }
    // coordinate variance of a uniform unit disk is 1/4
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(mean_of(xs)) < 3 * se);
    CHECK(std::abs(mean_of(ys)) < 3 * se);
    CHECK(std::abs(left - n / 2.0) < 3 * std::sqrt(n / 4.0));
}

TEST_CASE("conditional chain keeps the count and is binomial at beta = 0") {
    const Window L = Window::disk({}, 1.5);
    const PointConfig X = with_interior(uniform_config(200, 3), L, 7, 4);
    const MoveSetup S = MoveSetup::finite_volume(L, 200);

    ConditionalGibbs cold(X, S, 0.0, 4);
    Rng rng = make_rng(11, 0);
    InnerSummary sum;
    const auto draws = cold.sample({0, 0, 2000}, rng, &sum);
    REQUIRE(draws.size() == 2000);
    std::vector<double> half;
    for (const auto& d : draws) {
        REQUIRE(d.size() == 7);
        for (const auto& x : d) REQUIRE(L.contains(x));
        half.push_back(static_cast<double>(pts_count(d, Window::rect({-2, -2}, {0, 2}))));
    }
    CHECK(sum.acceptance() == 1.0);
    CHECK_FALSE(sum.flagged);
    // Bin(7, 1/2) per draw; thinning 10 n makes draws effectively independent
    CHECK(std::abs(mean_of(half) - 3.5) < 3 * std::sqrt(7 / 4.0 / 2000));

    ConditionalGibbs warm(X, S, 2.0, 4);
    const auto hot = warm.sample({100, 0, 200}, rng, &sum);
    for (const auto& d : hot) CHECK(d.size() == 7);
    CHECK(sum.drift < 1e-8);
    CHECK_FALSE(sum.flagged);

    const PointConfig empty = restrict_outside(X, L);
    ConditionalGibbs none(empty, S, 2.0, 4);
    const auto blanks = none.sample({0, 0, 5}, rng);
    REQUIRE(blanks.size() == 5);
    for (const auto& d : blanks) CHECK(d.size() == 0);

    CHECK_THROWS_AS(ConditionalGibbs(X, S, -1.0, 4), std::invalid_argument);
}

TEST_CASE("single point conditional density on a grid") {
    const Window L = Window::disk({}, 0.6);
    const PointConfig X = with_interior(uniform_config(60, 21), L, 1, 22);
    const MoveSetup S = MoveSetup::finite_volume(L, 60);
    const double beta = 2.0;
    ConditionalGibbs cg(X, S, beta, 3);

    const int G = 64, sub = 4;
    const double lo = -0.6, h = 1.2 / G;
    auto cell = [&](const Vec2& x) {
        const int a = std::min(G - 1, static_cast<int>((x.x - lo) / h));
        const int b = std::min(G - 1, static_cast<int>((x.y - lo) / h));
        return a * G + b;
    };
    std::vector<double> q(G * G, 0.0), emp(G * G, 0.0);
    double z = 0.0;
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b)
            for (int s = 0; s < sub; ++s)
                for (int t = 0; t < sub; ++t) {
                    const Vec2 x{lo + (a + (s + 0.5) / sub) * h, lo + (b + (t + 0.5) / sub) * h};
                    if (!L.contains(x)) continue;
                    const double w = std::exp(-beta * cg.energy(PointConfig({x})));
                    q[a * G + b] += w;
                    z += w;
                }
    for (auto& v : q) v /= z;

    Rng rng = make_rng(5, 0);
    const std::size_t M = 1000000;
    const auto draws = cg.sample({1000, 1, M}, rng);
    for (const auto& d : draws) emp[cell(d[0])] += 1.0 / M;
    double tv = 0.0;
    for (int k = 0; k < G * G; ++k) tv += 0.5 * std::abs(q[k] - emp[k]);
    CHECK(tv < 0.05);
}

TEST_CASE("partition function estimates") {
    const Window L = Window::disk({}, 0.5);
    Rng rng = make_rng(9, 0);

    const PointConfig X = with_interior(uniform_config(100, 31), Window::disk({}, 1.0), 2, 32);
    const MoveSetup S = MoveSetup::finite_volume(Window::disk({}, 1.0), 100);
    ConditionalGibbs free(X, S, 0.0, 3);
    const MomentEstimate k0 = partition_function_estimate(free, 2, 500, rng);
    CHECK(k0.mean == 1.0);
    CHECK(k0.se == 0.0);

    // no interior points: a single atom exp(-beta F(empty))
    ConditionalGibbs empty(restrict_outside(X, S.lambda), S, 2.0, 3);
    const MomentEstimate ke = partition_function_estimate(empty, 0, 50, rng);
    CHECK(ke.mean == doctest::Approx(std::exp(-2.0 * 0.5 * window_self_energy(S.lambda))).epsilon(1e-12));
    CHECK(ke.se == 0.0);

    // one point, no exterior: E_x exp(-beta (-U(x) + self / 2)) by quadrature
    const PointConfig one = PointConfig({Vec2{0.1, 0.2}});
    ConditionalGibbs lone(one, MoveSetup::infinite_volume(L, 1e9), 2.0, 2);
    const double self = window_self_energy(L);
    const double oracle =
        integrate_window([&](const Vec2& x) { return std::exp(-2.0 * (-window_potential(x, L) + 0.5 * self)); }, L) /
        (kPi * 0.25);
    const MomentEstimate k1 = partition_function_estimate(lone, 1, 20000, rng);
    CHECK(k1.mean == doctest::Approx(oracle).epsilon(0.02));
    CHECK(std::abs(k1.mean - oracle) < 4 * k1.se);

    CHECK_THROWS_AS(partition_function_estimate(lone, 1, 0, rng), std::invalid_argument);
}

TEST_CASE("reweighting agrees with the inner chain") {
    const Window L = Window::disk({}, 1.0);
    const PointConfig X = with_interior(uniform_config(100, 41), L, 3, 42);
    const MoveSetup S = MoveSetup::finite_volume(L, 100);
    ConditionalGibbs cg(X, S, 2.0, 4);
    auto f = [&](const PointConfig& Y) { return sum_x(Y, L); };

    std::vector<double> chain, weights;
    for (std::uint64_t r = 0; r < 8; ++r) {
        Rng a = make_rng(100, r), b = make_rng(200, r);
        const auto draws = cg.sample({300, 10, 3000}, a);
        double acc = 0.0;
        for (const auto& d : draws) acc += f(d);
        chain.push_back(acc / draws.size());
        weights.push_back(reweighted_expectation(cg, f, 3000, b));
    }
    const MomentEstimate mc = moment(chain), is = moment(weights);
    CHECK(std::abs(mc.mean - is.mean) < 3 * std::hypot(mc.se, is.se));
}

TEST_CASE("truncated reweighting stays within the event bound") {
    const Window L = Window::disk({}, 1.0);
    const PointConfig X = with_interior(uniform_config(256, 51), L, 3, 52);
    const MoveSetup S = MoveSetup::finite_volume(L, 256);
    const double beta = 2.0;
    const int p = 2, p_ref = 6;
    ConditionalGibbs lo(X, S, beta, p), hi(X, S, beta, p_ref);
    auto f = [&](const PointConfig& Y) { return std::min(sum_x(Y, L), 1.0) / 3.0; };  // |f| <= 1

    Rng rng = make_rng(61, 0);
    double num_lo = 0, den_lo = 0, num_hi = 0, den_hi = 0, delta = 0;
    std::vector<double> el, eh, fv;
    for (int k = 0; k < 4000; ++k) {
        const PointConfig Y = binomial_sample(L, 3, rng);
        el.push_back(lo.energy(Y));
        eh.push_back(hi.energy(Y));
        fv.push_back(f(Y));
    }
    // self-normalization absorbs a constant shift; center on the first draw
    const double shift = eh[0] - el[0];
    for (std::size_t k = 0; k < el.size(); ++k) delta = std::max(delta, std::abs(eh[k] - el[k] - shift));
    for (std::size_t k = 0; k < el.size(); ++k) {
        const double wl = std::exp(-beta * (el[k] - el[0])), wh = std::exp(-beta * (eh[k] - eh[0]));
        num_lo += wl * fv[k];
        den_lo += wl;
        num_hi += wh * fv[k];
        den_hi += wh;
    }
    CHECK(delta > 0.0);
    CHECK(std::abs(num_hi / den_hi - num_lo / den_lo) <= 2 * (std::exp(beta * delta) - 1));
}

TEST_CASE("truncation event rate") {
    const Window L = Window::disk({}, 1.5);
    const MoveSetup S = MoveSetup::finite_volume(L, 256);
    std::vector<PointConfig> samples;
    for (std::uint64_t s = 0; s < 6; ++s) samples.push_back(uniform_config(256, 70 + s));

    const RateEstimate inf = truncation_event_rate(samples, S, std::numeric_limits<double>::infinity(), 2, 4, 1);
    CHECK(inf.rate == 1.0);
    CHECK(inf.count == 6);
    const RateEstimate same = truncation_event_rate(samples, S, 0.0, 3, 4, 1, 3);
    CHECK(same.rate == 1.0);
    CHECK(same.se == 0.0);

    double prev = 0.0;
    for (int p : {1, 3, 5}) {
        const RateEstimate r = truncation_event_rate(samples, S, 0.1, p, 4, 1);
        CHECK(r.rate >= prev);
        prev = r.rate;
    }
    // layers beyond R_N = 9 carry no exterior mass, so p = 5 vs 9 agree exactly
    CHECK(prev == 1.0);
    CHECK_THROWS_AS(truncation_event_rate(samples, S, 0.1, 4, 4, 1, 2), std::invalid_argument);
    CHECK(truncation_event_rate({}, S, 0.1, 4, 4, 1).count == 0);
}

TEST_CASE("battery and experiment validation") {
    const Window L = Window::disk({}, 1.5);
    const auto bat = default_dlr_battery(L);
    CHECK(bat.size() == 16);
    const PointConfig X = uniform_config(200, 81);
    for (const auto& o : bat) CHECK(std::abs(o.f(X)) <= o.bound);

    DlrExperiment ex;
    ex.setup = MoveSetup::finite_volume(L, 200);
    ex.battery = bat;
    CHECK_NOTHROW(ex.validate());
    DlrExperiment bad = ex;
    bad.battery.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ex;
    bad.battery.push_back(bat[0]);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ex;
    bad.battery[3].bound = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ex;
    bad.setup = MoveSetup::finite_volume(Window::disk({}, 7.5), 200);
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = ex;
    bad.beta = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("consistency statistic") {
    const Window L = Window::disk({}, 1.5);
    const std::size_t N = 200;
    std::vector<PointConfig> samples;
    for (std::uint64_t s = 0; s < 120; ++s) samples.push_back(uniform_config(N, 900 + s));

    DlrExperiment ex;
    ex.setup = MoveSetup::finite_volume(L, N);
    ex.beta = 0.0;
    ex.p = 4;
    ex.inner = {0, 0, 32};
    ex.threads = 4;
    ex.battery = {{"one", [](const PointConfig&) { return 1.0; }, 1.0}};
    DlrReport rep = dlr_consistency_test(samples, ex);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].z == 0.0);
    CHECK(rep.pass());

    // beta = 0: exact uniform outer samples satisfy the identity for every observable
    ex.battery = default_dlr_battery(L);
    rep = dlr_consistency_test(samples, ex);
    CHECK(rep.rows.size() == 16);
    CHECK(rep.z_threshold == doctest::Approx(bonferroni_z(16)));
    for (const auto& r : rep.rows) CHECK_MESSAGE(r.pass, r.name << " z=" << r.z);
    CHECK(rep.pass());

    // thread count does not change the result
    ex.threads = 1;
    const DlrReport one = dlr_consistency_test(samples, ex);
    for (std::size_t k = 0; k < 16; ++k) CHECK(one.rows[k].z == rep.rows[k].z);

    // inner chain ignores the exterior at beta = 0: no correlation with an exterior count
    std::vector<double> ext, in;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        ConditionalGibbs cg(samples[s], ex.setup, 0.0, 4);
        Rng rng = make_rng(3, s);
        const auto d = cg.sample({0, 0, 8}, rng);
        double acc = 0;
        for (const auto& y : d) acc += sum_x(y, L);
        in.push_back(acc / 8);
        ext.push_back(static_cast<double>(pts_count(samples[s], Window::disk({}, 3.0)) - pts_count(samples[s], L)));
    }
    const MomentEstimate me = moment(ext), mi = moment(in);
    double cov = 0;
    for (std::size_t s = 0; s < ext.size(); ++s) cov += (ext[s] - me.mean) * (in[s] - mi.mean);
    const double r = cov / (ext.size() - 1) / std::sqrt(me.variance * mi.variance);
    CHECK(std::abs(r) * std::sqrt(static_cast<double>(ext.size())) < 3.5);

    CHECK_THROWS_AS(dlr_consistency_test({samples[0]}, ex), std::invalid_argument);
}
