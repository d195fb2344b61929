#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/movefn.hpp"
#include "ocp/rng.hpp"
#include "ocp/stats.hpp"

namespace ocp {

// n iid uniform points in W (rejection from the bounding box)
PointConfig binomial_sample(const Window& W, std::size_t n, Rng& rng);

struct InnerPlan {
    std::size_t burn_in = 0;     // single-point moves before the first sample
    std::size_t thinning = 0;    // moves between samples; 0 means 10 n
    std::size_t samples = 64;
};

struct InnerSummary {
    std::size_t proposed = 0;
    std::size_t accepted = 0;
    double drift = 0.0;  // |tracked energy - recomputed energy| at the end
    bool flagged = false;
    double acceptance() const { return proposed ? static_cast<double>(accepted) / proposed : 1.0; }
};

// Law of the interior of Lambda given the exterior of X, n points fixed:
//   density exp(-beta (F_Lambda(X') + M~^p(X', X))) relative to Bin_{Lambda,n}.
class ConditionalGibbs {
public:
    ConditionalGibbs(const PointConfig& X, const MoveSetup& setup, double beta, int p);

    const MoveField& field() const { return field_; }
    const PointConfig& exterior() const { return exterior_; }
    std::size_t n() const { return field_.interior().size(); }
    double beta() const { return beta_; }
    int p() const { return p_; }

    // F_Lambda(X') + M~^p(X', X)
    double energy(const PointConfig& Xp) const;
    // one move-potential term g(x) = sum_{i<=p} k_i(x)
    double g(const Vec2& x) const { return field_.potential(x, p_); }

    // Metropolis chain with uniform single-point relocations in Lambda, started at `start`
    // (the actual interior when empty and n matches)
    std::vector<PointConfig> sample(const InnerPlan& plan, Rng& rng, InnerSummary* summary = nullptr,
                                    const PointConfig* start = nullptr) const;

private:
    MoveField field_;
    PointConfig exterior_;
    double beta_;
    int p_;
};

// K_Lambda^{beta,p}: mean of exp(-beta (F_Lambda + M~^p)) over m binomial draws of size n
MomentEstimate partition_function_estimate(const ConditionalGibbs& cg, std::size_t n, std::size_t m, Rng& rng);

// f_Lambda^p(X) by self-normalized importance weights over m binomial draws
double reweighted_expectation(const ConditionalGibbs& cg, const std::function<double(const PointConfig&)>& f,
                              std::size_t m, Rng& rng);

struct RateEstimate {
    double rate = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

// Empirical P[A_Lambda^p(delta)] with the supremum over X' replaced by a maximum over
// `probes` binomial draws of the sample's own interior count; p_ref (default p + 4) stands in
// for the limit.
RateEstimate truncation_event_rate(const std::vector<PointConfig>& samples, const MoveSetup& setup, double delta,
                                   int p, std::size_t probes, std::uint64_t seed, int p_ref = -1);

// Bounded observable of the whole configuration.
struct DlrObservable {
    std::string name;
    std::function<double(const PointConfig&)> f;
    double bound = 1.0;
};

// Sixteen bounded observables localized in Lambda: count indicators, sub-window counts,
// smooth linear statistics and a clipped local energy.
std::vector<DlrObservable> default_dlr_battery(const Window& lambda);

struct DlrExperiment {
    MoveSetup setup;
    double beta = 2.0;
    int p = 6;
    double delta = 0.1;
    std::vector<DlrObservable> battery;
    InnerPlan inner;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

struct DlrRow {
    std::string name;
    double outer_mean = 0.0;
    double inner_mean = 0.0;
    double se = 0.0;
    double z = 0.0;
    bool pass = true;
};

struct DlrReport {
    std::vector<DlrRow> rows;
    double z_threshold = 3.0;
    std::size_t outer = 0;
    double min_acceptance = 1.0;
    double max_drift = 0.0;
    bool inner_flagged = false;
    bool pass() const;
};

// For each observable, the paired difference f(X) - f_Lambda^p(X) over outer samples,
// with batch-means standard errors and a Bonferroni-corrected |z| threshold.
DlrReport dlr_consistency_test(const std::vector<PointConfig>& samples, const DlrExperiment& ex);

}  // namespace ocp
