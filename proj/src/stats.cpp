#include "ocp/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ocp/rng.hpp"

namespace ocp {

void RunningStats::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
}

double RunningStats::variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::se() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

MomentEstimate moment(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("moment: need at least two values");
    RunningStats s;
    for (double x : v) s.add(x);
    MomentEstimate m;
    m.mean = s.mean();
    m.variance = s.variance();
    m.se = s.se();
    m.count = s.count();
    return m;
}

double batch_means_se(const std::vector<double>& v, std::size_t batches) {
    const std::size_t n = v.size();
    if (n < 4 * batches) return moment(v).se;
    const std::size_t b = n / batches;
    RunningStats s;
    for (std::size_t k = 0; k < batches; ++k) {
        double acc = 0.0;
        for (std::size_t i = k * b; i < (k + 1) * b; ++i) acc += v[i];
        s.add(acc / static_cast<double>(b));
    }
    const double se_batch = s.se();
    return std::max(se_batch, moment(v).se);
}

MomentEstimate series_moment(const std::vector<double>& v, std::size_t batches) {
    MomentEstimate m = moment(v);
    m.se = batch_means_se(v, batches);
    return m;
}

static double log_mean_exp(const std::vector<double>& v, double s) {
    double mx = -INFINITY;
    for (double x : v) mx = std::max(mx, s * x);
    double acc = 0.0;
    for (double x : v) acc += std::exp(s * x - mx);
    return mx + std::log(acc / static_cast<double>(v.size()));
}

MomentEstimate exp_moment(const std::vector<double>& v, double s, std::uint64_t seed,
                          std::size_t resamples) {
    if (v.empty()) throw std::invalid_argument("exp_moment: empty sample");
    MomentEstimate m;
    m.count = v.size();
    if (v.size() >= 2) {
        MomentEstimate b = moment(v);
        m.mean = b.mean;
        m.variance = b.variance;
        m.se = b.se;
    } else {
        m.mean = v[0];
    }
    m.log_exp = log_mean_exp(v, s);
    if (s == 0.0) {
        m.band_lo = m.band_hi = 0.0;
        return m;
    }
    // heavy tail: top 1% of summands carry more than half the mass
    std::vector<double> w(v.size());
    double mx = -INFINITY;
    for (double x : v) mx = std::max(mx, s * x);
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(s * v[i] - mx);
    std::sort(w.begin(), w.end(), std::greater<>());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const std::size_t top = std::max<std::size_t>(1, v.size() / 100);
    const double head = std::accumulate(w.begin(), w.begin() + static_cast<long>(top), 0.0);
    m.heavy_tail = v.size() > 1 && head > 0.5 * total;

    Rng rng(derive_seed(seed, 0xb007));
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::vector<double> boot(resamples), tmp(v.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& t : tmp) t = v[pick(rng)];
        boot[r] = log_mean_exp(tmp, s);
    }
    std::sort(boot.begin(), boot.end());
    m.band_lo = boot[static_cast<std::size_t>(0.025 * static_cast<double>(resamples))];
    m.band_hi = boot[static_cast<std::size_t>(0.975 * static_cast<double>(resamples - 1))];
    return m;
}

double normal_cdf(double z) {
    return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double bonferroni_z(std::size_t m, double sigma) {
    const double alpha = 2.0 * normal_cdf(-sigma);
    return normal_quantile(1.0 - alpha / (2.0 * static_cast<double>(m)));
}

double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double t = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? t : -t);
        if (t < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    KsResult r;
    r.d = d;
    r.p = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

Slope weighted_slope(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& se) {
    if (x.size() != y.size() || x.size() != se.size() || x.size() < 2)
        throw std::invalid_argument("weighted_slope: size mismatch");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / std::max(se[i] * se[i], 1e-300);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    Slope s;
    s.slope = (sw * sxy - sx * sy) / det;
    s.se = std::sqrt(sw / det);
    return s;
}

}  // namespace ocp
