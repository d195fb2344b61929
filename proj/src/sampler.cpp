#include "ocp/sampler.hpp"

#include "ocp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace ocp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 32;

// sum over j in [a, b) of log(|old - x_j|^2 / |new - x_j|^2)
double log_ratio_sum(const double* xs, const double* ys, std::size_t a, std::size_t b,
                     double ox, double oy, double nx, double ny) {
    double acc = 0.0;
    std::size_t j = a;
    while (j + kBlock <= b) {
        double po[4] = {1, 1, 1, 1}, pn[4] = {1, 1, 1, 1};
        for (std::size_t k = 0; k < kBlock; k += 4)
            for (std::size_t l = 0; l < 4; ++l) {
                const double dxo = ox - xs[j + k + l], dyo = oy - ys[j + k + l];
                const double dxn = nx - xs[j + k + l], dyn = ny - ys[j + k + l];
                po[l] *= dxo * dxo + dyo * dyo;
                pn[l] *= dxn * dxn + dyn * dyn;
            }
        acc += std::log(((po[0] * po[1]) * (po[2] * po[3])) / ((pn[0] * pn[1]) * (pn[2] * pn[3])));
        j += kBlock;
    }
    double po = 1.0, pn = 1.0;
    for (; j < b; ++j) {
        const double dxo = ox - xs[j], dyo = oy - ys[j];
        const double dxn = nx - xs[j], dyn = ny - ys[j];
        po *= dxo * dxo + dyo * dyo;
        pn *= dxn * dxn + dyn * dyn;
    }
    return acc + std::log(po / pn);
}

}  // namespace

void ChainPlan::validate() const {
    if (N < 1) throw std::domain_error("ChainPlan: N must be >= 1");
    if (!(beta >= 0.0)) throw std::domain_error("ChainPlan: beta must be >= 0");
    if (chains < 1) throw std::domain_error("ChainPlan: chains must be >= 1");
    if (!(proposal_scale > 0.0)) throw std::domain_error("ChainPlan: proposal_scale must be > 0");
}

PointConfig initial_config(std::size_t N, std::uint64_t seed) {
    if (N < 1) throw std::domain_error("initial_config: N must be >= 1");
    if (N == 1) return PointConfig({{0.0, 0.0}});
    const double R = system_radius(N);
    const double a = std::sqrt(2.0 / std::sqrt(3.0));  // unit-density triangular lattice
    std::vector<Vec2> lat;
    const int m = static_cast<int>(std::ceil(R / a)) + 2;
    for (int j = -2 * m; j <= 2 * m; ++j)
        for (int i = -2 * m; i <= 2 * m; ++i) {
            Vec2 p{a * (i + 0.5 * j), a * (std::sqrt(3.0) / 2.0) * j};
            if (p.norm() <= R - 0.5 * a) lat.push_back(p);
        }
    std::sort(lat.begin(), lat.end(), [](const Vec2& p, const Vec2& q) {
        return p.norm2() < q.norm2() || (p.norm2() == q.norm2() && std::atan2(p.y, p.x) < std::atan2(q.y, q.x));
    });
    if (lat.size() > N) lat.resize(N);

    Rng rng = make_rng(seed, 0x1417);
    std::uniform_real_distribution<double> jit(-0.1 * a, 0.1 * a);
    for (auto& p : lat) {
        Vec2 q{p.x + jit(rng), p.y + jit(rng)};
        if (q.norm() <= R) p = q;
    }
    // fill the remainder uniformly, keeping a minimal spacing
    std::uniform_real_distribution<double> u(-R, R);
    std::size_t guard = 0;
    while (lat.size() < N) {
        Vec2 q{u(rng), u(rng)};
        if (q.norm() > R) continue;
        const double dmin = ++guard < 100000 ? 0.3 : 0.0;
        bool ok = true;
        for (const auto& p : lat)
            if (dist(p, q) <= dmin) {
                ok = false;
                break;
            }
        if (ok) lat.push_back(q);
    }
    return PointConfig(std::move(lat));
}

ChainState::ChainState(const ChainPlan& plan, std::size_t chain_index)
    : ChainState(initial_config(plan.N, derive_seed(plan.seed, chain_index)), plan.beta,
                 derive_seed(derive_seed(plan.seed, chain_index), 2), plan.proposal_scale) {
    resync_every = plan.resync_every;
}

ChainState::ChainState(const PointConfig& start, double beta, std::uint64_t stream_seed,
                       double proposal_scale)
    : beta_(beta), domain_(system_domain(start.size())), rng_(stream_seed), scale_(proposal_scale) {
    if (beta < 0) throw std::domain_error("ChainState: beta must be >= 0");
    xs_.reserve(start.size());
    ys_.reserve(start.size());
    for (const auto& p : start) {
        if (!domain_.contains(p)) throw std::domain_error("ChainState: start point outside the domain");
        xs_.push_back(p.x);
        ys_.push_back(p.y);
    }
    energy_ = recompute_energy();
}

PointConfig ChainState::config() const {
    std::vector<Vec2> v(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) v[i] = {xs_[i], ys_[i]};
    return PointConfig(std::move(v));
}

EnergyBreakdown ChainState::recompute_energy() const {
    std::vector<Vec2> v(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) v[i] = {xs_[i], ys_[i]};
    return interaction_energy(v, domain_);
}

void ChainState::resync() {
    energy_ = recompute_energy();
    since_sync_ = 0;
}

double ChainState::delta(std::size_t i, const Vec2& p) const {
    double dpp, dpb;
    delta_parts(i, p, dpp, dpb);
    return dpp + dpb;
}

void ChainState::delta_parts(std::size_t i, const Vec2& p, double& dpp, double& dpb) const {
    const double ox = xs_[i], oy = ys_[i];
    const std::size_t n = xs_.size();
    const double s = log_ratio_sum(xs_.data(), ys_.data(), 0, i, ox, oy, p.x, p.y) +
                     log_ratio_sum(xs_.data(), ys_.data(), i + 1, n, ox, oy, p.x, p.y);
    dpp = std::isnan(s) ? std::numeric_limits<double>::infinity() : 0.5 * s;
    const Vec2 c = domain_.center;
    dpb = 0.5 * kPi * ((p - c).norm2() - (Vec2{ox, oy} - c).norm2());
}

bool ChainState::try_move(std::size_t i, const Vec2& p) {
    ++steps_;
    ++since_sync_;
    bool acc = false;
    double dpp = 0.0, dpb = 0.0;
    if (domain_.contains(p)) {
        delta_parts(i, p, dpp, dpb);
        const double d = dpp + dpb;
        if (d != std::numeric_limits<double>::infinity()) {
            if (beta_ == 0.0 || d <= 0.0) {
                acc = true;
            } else {
                std::uniform_real_distribution<double> u01(0.0, 1.0);
                acc = u01(rng_) < std::exp(-beta_ * d);
            }
        }
    }
    if (acc) {
        xs_[i] = p.x;
        ys_[i] = p.y;
        ++accepted_;
        energy_.point_point += dpp;
        energy_.point_background += dpb;
        energy_.total = energy_.point_point + energy_.point_background + energy_.background_background;
    }
    if (since_sync_ >= resync_every) resync();
    return acc;
}

bool mcmc_step(ChainState& s) {
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    std::normal_distribution<double> g(0.0, s.scale_);
    const std::size_t i = pick(s.rng_);
    const Vec2 p{s.xs_[i] + g(s.rng_), s.ys_[i] + g(s.rng_)};
    return s.try_move(i, p);
}

void mcmc_sweep(ChainState& s) {
    for (std::size_t k = 0; k < s.size(); ++k) mcmc_step(s);
}

ChainSummary run_single_chain(const ChainPlan& plan, std::size_t chain_index, const SampleSink& sink) {
    plan.validate();
    ChainState s(plan, chain_index);
    const std::size_t burn = plan.burn_in_steps();
    const std::size_t window = std::max<std::size_t>(200, plan.N);
    const double R = s.domain().radius;
    std::size_t done = 0;
    while (done < burn) {
        const std::size_t todo = std::min(window, burn - done);
        const std::uint64_t a0 = s.accepted(), s0 = s.steps();
        for (std::size_t k = 0; k < todo; ++k) mcmc_step(s);
        done += todo;
        if (plan.adapt && todo == window) {
            const double rate = static_cast<double>(s.accepted() - a0) / static_cast<double>(s.steps() - s0);
            double sc = s.proposal_scale() * std::exp(2.0 * (rate - 0.35));
            s.set_proposal_scale(std::clamp(sc, 1e-4, 2.0 * R));
        }
    }
    s.resync();
    s.reset_counters();
    ChainSummary sum;
    const std::size_t thin = plan.thinning_steps();
    for (std::size_t k = 0; k < plan.samples; ++k) {
        for (std::size_t t = 0; t < thin; ++t) mcmc_step(s);
        if (plan.beta > 0.0) {
            const double cached = s.cached_energy().total;
            if (k + 1 == plan.samples || k % 16 == 0) {
                const double exact = s.recompute_energy().total;
                sum.max_energy_drift =
                    std::max(sum.max_energy_drift, std::abs(cached - exact) / std::max(1.0, std::abs(exact)));
            }
        }
        sink(chain_index, k, s);
    }
    sum.acceptance = s.acceptance_rate();
    sum.proposal_scale = s.proposal_scale();
    return sum;
}

std::vector<ChainSummary> run_chain(const ChainPlan& plan, const SampleSink& sink, unsigned threads) {
    plan.validate();
    std::vector<ChainSummary> out(plan.chains);
    parallel_for(plan.chains, threads, [&](std::size_t c) { out[c] = run_single_chain(plan, c, sink); });
    return out;
}

std::vector<PointConfig> collect_samples(const ChainPlan& plan, unsigned threads) {
    std::vector<PointConfig> out(plan.chains * plan.samples);
    run_chain(plan, [&](std::size_t c, std::size_t k, const ChainState& s) {
        out[c * plan.samples + k] = s.config();
    }, threads);
    return out;
}

}  // namespace ocp
