#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ocp/energy.hpp"
#include "ocp/geometry.hpp"
#include "ocp/rng.hpp"

namespace ocp {

struct ChainPlan {
    std::size_t N = 64;
    double beta = 2.0;
    std::uint64_t seed = 1;
    std::size_t burn_in = 0;      // single-particle steps; 0 means 1000 N
    std::size_t thinning = 0;     // steps between samples; 0 means N
    std::size_t samples = 100;    // per chain
    std::size_t chains = 1;
    double proposal_scale = 0.5;
    bool adapt = true;
    std::size_t resync_every = 100000;

    void validate() const;
    std::size_t burn_in_steps() const { return burn_in ? burn_in : 1000 * N; }
    std::size_t thinning_steps() const { return thinning ? thinning : N; }
};

PointConfig initial_config(std::size_t N, std::uint64_t seed);

// Configuration plus cached energy, RNG stream and acceptance statistics.
class ChainState {
public:
    ChainState(const ChainPlan& plan, std::size_t chain_index);
    ChainState(const PointConfig& start, double beta, std::uint64_t stream_seed,
               double proposal_scale);

    std::size_t size() const { return xs_.size(); }
    double beta() const { return beta_; }
    const DiskDomain& domain() const { return domain_; }
    PointConfig config() const;
    Vec2 point(std::size_t i) const { return {xs_[i], ys_[i]}; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

    const EnergyBreakdown& cached_energy() const { return energy_; }
    EnergyBreakdown recompute_energy() const;
    void resync();

    // F_N(x_i := p) - F_N(X) through the O(N) incremental path
    double delta(std::size_t i, const Vec2& p) const;

    Rng& rng() { return rng_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t accepted() const { return accepted_; }
    double acceptance_rate() const {
        return steps_ ? static_cast<double>(accepted_) / static_cast<double>(steps_) : 0.0;
    }
    double proposal_scale() const { return scale_; }
    void set_proposal_scale(double s) { scale_ = s; }
    void reset_counters() { steps_ = accepted_ = 0; }

    // Metropolis with a given proposal; returns whether it was accepted
    bool try_move(std::size_t i, const Vec2& p);
    std::size_t resync_every = 100000;

private:
    friend bool mcmc_step(ChainState&);
    void delta_parts(std::size_t i, const Vec2& p, double& dpp, double& dpb) const;
    double beta_;
    DiskDomain domain_;
    std::vector<double> xs_, ys_;
    EnergyBreakdown energy_;
    Rng rng_;
    std::uint64_t steps_ = 0, accepted_ = 0, since_sync_ = 0;
    double scale_;
};

// One single-particle Gaussian Metropolis update with hard-wall rejection.
bool mcmc_step(ChainState& s);
void mcmc_sweep(ChainState& s);

// Burn-in (with optional scale adaptation toward 35% acceptance) then thinned sampling.
// The callback receives (chain index, sample index, state).
using SampleSink = std::function<void(std::size_t, std::size_t, const ChainState&)>;
struct ChainSummary {
    double acceptance = 0.0;
    double proposal_scale = 0.0;
    double max_energy_drift = 0.0;
};
ChainSummary run_single_chain(const ChainPlan& plan, std::size_t chain_index, const SampleSink& sink);
// All chains; parallel across `threads` workers, outputs deterministic per chain.
std::vector<ChainSummary> run_chain(const ChainPlan& plan, const SampleSink& sink,
                                    unsigned threads = 1);
// Convenience: collect every sample of every chain, chain-major order.
std::vector<PointConfig> collect_samples(const ChainPlan& plan, unsigned threads = 1);

}  // namespace ocp
