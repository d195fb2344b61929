#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ocp {

// Welford accumulator with exact merge.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& o);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased
    double se() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct MomentEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double se = 0.0;
    std::size_t count = 0;
    // log E exp(s X) with a bootstrap band; only filled by exp_moment
    double log_exp = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool heavy_tail = false;
};

MomentEstimate moment(const std::vector<double>& v);
// standard error from non-overlapping batch means; falls back to iid se for short series
double batch_means_se(const std::vector<double>& v, std::size_t batches = 20);
// moment() with se replaced by the batch-means value
MomentEstimate series_moment(const std::vector<double>& v, std::size_t batches = 20);

MomentEstimate exp_moment(const std::vector<double>& v, double s, std::uint64_t seed = 1,
                          std::size_t resamples = 400);

double normal_cdf(double z);
double normal_quantile(double p);
// |z| threshold for a Bonferroni family of m tests at the family-wise level of a 3-sigma test
double bonferroni_z(std::size_t m, double sigma = 3.0);

// two-sample Kolmogorov-Smirnov statistic and asymptotic p-value
struct KsResult {
    double d = 0.0;
    double p = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
double kolmogorov_q(double lambda);

// least-squares slope with its standard error
struct Slope {
    double slope = 0.0;
    double se = 0.0;
};
Slope weighted_slope(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& se);

}  // namespace ocp
