#include "ocp/dlr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ocp/energy.hpp"
#include "ocp/observables.hpp"
#include "ocp/parallel.hpp"

namespace ocp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec2 uniform_point(const Window& W, Rng& rng) {
    const Vec2 lo = W.box_lo(), hi = W.box_hi();
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    for (;;) {
        const Vec2 p{ux(rng), uy(rng)};
        if (W.contains(p)) return p;
    }
}

}  // namespace

PointConfig binomial_sample(const Window& W, std::size_t n, Rng& rng) {
    std::vector<Vec2> v;
    v.reserve(n);
    while (v.size() < n) v.push_back(uniform_point(W, rng));
    return PointConfig(std::move(v));
}

ConditionalGibbs::ConditionalGibbs(const PointConfig& X, const MoveSetup& setup, double beta, int p)
    : field_(X, setup, p), exterior_(restrict_outside(X, setup.lambda)), beta_(beta), p_(p) {
    if (!(beta >= 0)) throw std::invalid_argument("ConditionalGibbs: beta must be >= 0");
}

double ConditionalGibbs::energy(const PointConfig& Xp) const {
    double e = local_energy(Xp, field_.setup().lambda).total;
    for (const auto& x : Xp) e += g(x);
    return e;
}

std::vector<PointConfig> ConditionalGibbs::sample(const InnerPlan& plan, Rng& rng, InnerSummary* summary,
                                                  const PointConfig* start) const {
    const Window& L = field_.setup().lambda;
    const std::size_t n = start ? start->size() : this->n();
    std::vector<PointConfig> out;
    out.reserve(plan.samples);
    InnerSummary sum;
    if (n == 0) {
        out.assign(plan.samples, PointConfig());
        if (summary) *summary = sum;
        return out;
    }
    std::vector<Vec2> pts = start ? start->points() : field_.interior().points();
    for (const auto& x : pts)
        if (!L.contains(x)) throw std::invalid_argument("ConditionalGibbs::sample: start point outside Lambda");
    std::vector<double> gv(n), uv(n);
    for (std::size_t i = 0; i < n; ++i) {
        gv[i] = g(pts[i]);
        uv[i] = window_potential(pts[i], L);
    }
    double tracked = energy(PointConfig(pts));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto step = [&] {
        const std::size_t i = pick(rng);
        const Vec2 y = uniform_point(L, rng);
        const Vec2 old = pts[i];
        ++sum.proposed;
        double dpp = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dn = (y - pts[j]).norm2();
            if (dn == 0.0) return;
            dpp += 0.5 * std::log((old - pts[j]).norm2() / dn);
        }
        const double uy = window_potential(y, L), gy = g(y);
        const double d = dpp - (uy - uv[i]) + (gy - gv[i]);
        if (beta_ == 0.0 || d <= 0.0 || unif(rng) < std::exp(-beta_ * d)) {
            pts[i] = y;
            uv[i] = uy;
            gv[i] = gy;
            tracked += d;
            ++sum.accepted;
        }
    };
    const std::size_t thin = plan.thinning ? plan.thinning : 10 * n;
    for (std::size_t s = 0; s < plan.burn_in; ++s) step();
    for (std::size_t k = 0; k < plan.samples; ++k) {
        for (std::size_t s = 0; s < thin; ++s) step();
        out.emplace_back(pts);
        if (out.back().size() != n) throw std::logic_error("ConditionalGibbs::sample: point count changed");
    }
    const double exact = energy(PointConfig(pts));
    sum.drift = std::abs(tracked - exact);
    sum.flagged = (beta_ > 0.0 && sum.acceptance() < 0.01) || sum.drift > 1e-8 * (1.0 + std::abs(exact));
    if (summary) *summary = sum;
    return out;
}

MomentEstimate partition_function_estimate(const ConditionalGibbs& cg, std::size_t n, std::size_t m, Rng& rng) {
    if (m == 0) throw std::invalid_argument("partition_function_estimate: need draws");
    const Window& L = cg.field().setup().lambda;
    std::vector<double> e(m), w(m);
    for (std::size_t k = 0; k < m; ++k) {
        e[k] = cg.energy(binomial_sample(L, n, rng));
        w[k] = std::exp(-cg.beta() * e[k]);
    }
    MomentEstimate out = m >= 2 ? moment(w) : MomentEstimate{w[0], 0.0, 0.0, 1};
    const MomentEstimate t = exp_moment(e, -cg.beta(), rng());
    out.log_exp = t.log_exp;
    out.band_lo = t.band_lo;
    out.band_hi = t.band_hi;
    out.heavy_tail = t.heavy_tail;
    return out;
}

double reweighted_expectation(const ConditionalGibbs& cg, const std::function<double(const PointConfig&)>& f,
                              std::size_t m, Rng& rng) {
    const Window& L = cg.field().setup().lambda;
    std::vector<double> le(m), fv(m);
    double mx = -kInf;
    for (std::size_t k = 0; k < m; ++k) {
        PointConfig Xp = binomial_sample(L, cg.n(), rng);
        le[k] = -cg.beta() * cg.energy(Xp);
        fv[k] = f(merge(Xp, cg.exterior()));
        mx = std::max(mx, le[k]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double w = std::exp(le[k] - mx);
        num += w * fv[k];
        den += w;
    }
    return num / den;
}

RateEstimate truncation_event_rate(const std::vector<PointConfig>& samples, const MoveSetup& setup, double delta,
                                   int p, std::size_t probes, std::uint64_t seed, int p_ref) {
    if (p_ref < 0) p_ref = p + 4;
    if (p_ref < p) throw std::invalid_argument("truncation_event_rate: p_ref < p");
    RateEstimate r;
    if (samples.empty()) return r;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        bool ok = true;
        if (std::isfinite(delta) && p_ref != p) {
            MoveField F(samples[s], setup, p_ref);
            Rng rng = make_rng(seed, s);
            for (std::size_t k = 0; k < probes && ok; ++k) {
                MoveEval e = convergence_diagnostic(binomial_sample(setup.lambda, F.interior().size(), rng), F);
                const double gap = std::abs(e.value[static_cast<std::size_t>(p_ref)] - e.value[static_cast<std::size_t>(p)]);
                if (!(gap <= delta)) ok = false;
            }
        }
        if (ok) ++hits;
    }
    r.count = samples.size();
    r.rate = static_cast<double>(hits) / static_cast<double>(r.count);
    r.se = std::sqrt(r.rate * (1 - r.rate) / static_cast<double>(r.count));
    return r;
}

std::vector<DlrObservable> default_dlr_battery(const Window& L) {
    const Vec2 c = L.shape == Shape::rect ? (L.lo + L.hi) * 0.5 : L.center;
    const double rho = L.shape == Shape::rect ? 0.5 * std::min(L.hi.x - L.lo.x, L.hi.y - L.lo.y) : L.r1;
    std::vector<DlrObservable> b;
    for (int k = 0; k <= 6; ++k)
        b.push_back({"pts_eq_" + std::to_string(k),
                     [L, k](const PointConfig& X) { return pts_count(X, L) == static_cast<std::size_t>(k) ? 1.0 : 0.0; },
                     1.0});
    auto capped = [](double v, double cap) { return std::min(v, cap); };
    b.push_back({"pts_left_half", [L, c, capped](const PointConfig& X) {
                     double n = 0;
                     for (const auto& x : X) n += L.contains(x) && x.x < c.x;
                     return capped(n, 8);
                 }, 8.0});
    b.push_back({"pts_lower_half", [L, c, capped](const PointConfig& X) {
                     double n = 0;
                     for (const auto& x : X) n += L.contains(x) && x.y < c.y;
                     return capped(n, 8);
                 }, 8.0});
    const Window inner = Window::disk(c, 0.5 * rho);
    b.push_back({"pts_inner_disk", [inner, capped](const PointConfig& X) {
                     return capped(static_cast<double>(pts_count(X, inner)), 8);
                 }, 8.0});
    const TestFunction bumps[3] = {smooth_bump(c, 0.25 * rho, 0.75 * rho),
                                   smooth_bump(c + Vec2{0.45 * rho, 0}, 0.1 * rho, 0.5 * rho),
                                   smooth_bump(c + Vec2{0, -0.45 * rho}, 0.0, 0.5 * rho)};
    for (int k = 0; k < 3; ++k) {
        const TestFunction f = bumps[k];
        const double mass = background_integral(f, L);
        b.push_back({"fluct_bump_" + std::to_string(k), [f, mass](const PointConfig& X) {
                         double s = -mass;
                         for (const auto& x : X)
                             if (f.support.contains(x)) s += f(x);
                         return std::clamp(s, -10.0, 10.0);
                     }, 10.0});
    }
    b.push_back({"min_pair_distance", [L, rho](const PointConfig& X) {
                     PointConfig in = restrict_to(X, L);
                     double d = rho;
                     for (std::size_t i = 0; i < in.size(); ++i)
                         for (std::size_t j = i + 1; j < in.size(); ++j) d = std::min(d, dist(in[i], in[j]));
                     return d;
                 }, rho});
    b.push_back({"nearest_to_center", [L, c, rho](const PointConfig& X) {
                     double d = rho;
                     for (const auto& x : X)
                         if (L.contains(x)) d = std::min(d, dist(x, c));
                     return d;
                 }, rho});
    b.push_back({"local_energy", [L](const PointConfig& X) {
                     return std::clamp(local_energy(restrict_to(X, L), L).total, -20.0, 20.0);
                 }, 20.0});
    return b;
}

void DlrExperiment::validate() const {
    if (!(beta >= 0)) throw std::invalid_argument("DlrExperiment: beta must be >= 0");
    if (p < 0) throw std::invalid_argument("DlrExperiment: p must be >= 0");
    if (battery.empty() || battery.size() > 16) throw std::invalid_argument("DlrExperiment: battery size must be 1..16");
    for (const auto& o : battery)
        if (!o.f || !(o.bound > 0) || !std::isfinite(o.bound))
            throw std::invalid_argument("DlrExperiment: observable " + o.name + " needs a finite bound");
    if (inner.samples == 0) throw std::invalid_argument("DlrExperiment: inner chain needs samples");
    if (setup.finite) {
        const Window sig = setup.sigma();
        const Window shrunk = Window::disk(sig.center, sig.r1 - 1.0);
        if (!window_within(setup.lambda, shrunk))
            throw std::domain_error("DlrExperiment: Lambda must sit inside Sigma_N with margin >= 1");
    }
}

bool DlrReport::pass() const {
    if (inner_flagged) return false;
    return std::all_of(rows.begin(), rows.end(), [](const DlrRow& r) { return r.pass; });
}

DlrReport dlr_consistency_test(const std::vector<PointConfig>& samples, const DlrExperiment& ex) {
    ex.validate();
    const std::size_t m = ex.battery.size(), S = samples.size();
    if (S < 2) throw std::invalid_argument("dlr_consistency_test: need at least two outer samples");
    std::vector<std::vector<double>> outer(m, std::vector<double>(S)), inner(m, std::vector<double>(S));
    std::vector<InnerSummary> sums(S);
    parallel_for(S, ex.threads, [&](std::size_t s) {
        const PointConfig& X = samples[s];
        ConditionalGibbs cg(X, ex.setup, ex.beta, ex.p);
        Rng rng = make_rng(ex.seed, s);
        auto draws = cg.sample(ex.inner, rng, &sums[s]);
        for (std::size_t k = 0; k < m; ++k) {
            const auto& f = ex.battery[k].f;
            outer[k][s] = f(X);
            double acc = 0.0;
            for (const auto& d : draws) acc += f(merge(d, cg.exterior()));
            inner[k][s] = acc / static_cast<double>(draws.size());
        }
    });
    DlrReport rep;
    rep.outer = S;
    rep.z_threshold = bonferroni_z(m);
    for (const auto& s : sums) {
        rep.min_acceptance = std::min(rep.min_acceptance, s.acceptance());
        rep.max_drift = std::max(rep.max_drift, s.drift);
        rep.inner_flagged = rep.inner_flagged || s.flagged;
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> d(S);
        for (std::size_t s = 0; s < S; ++s) d[s] = outer[k][s] - inner[k][s];
        DlrRow row;
        row.name = ex.battery[k].name;
        row.outer_mean = moment(outer[k]).mean;
        row.inner_mean = moment(inner[k]).mean;
        const double mean = moment(d).mean;
        row.se = batch_means_se(d);
        row.z = row.se > 0 ? mean / row.se : (mean == 0.0 ? 0.0 : std::copysign(kInf, mean));
        row.pass = std::abs(row.z) < rep.z_threshold;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace ocp
