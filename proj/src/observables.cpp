#include "ocp/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocp/quad.hpp"

namespace ocp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<double, 4> radial_bounds(const std::function<Jet(double)>& prof, double rmax) {
    std::array<double, 4> b{};
    const int n = 20000;
    for (int s = 0; s <= n; ++s) {
        const double r = rmax * s / n;
        const Jet j = prof(r);
        for (int k = 0; k < 4; ++k) b[k] = std::max(b[k], radial_seminorm(j, r, k));
    }
    for (auto& v : b) v *= 1.02;
    return b;
}

TestFunction make_radial(std::string name, const Vec2& c, double rmax, std::function<Jet(double)> prof) {
    TestFunction f;
    f.name = std::move(name);
    f.radial = true;
    f.center = c;
    f.support = Window::disk(c, rmax);
    f.profile = prof;
    f.eval = [prof, c, rmax](const Vec2& x) {
        const double r = dist(x, c);
        return r >= rmax ? 0.0 : prof(r).f;
    };
    f.seminorms = radial_bounds(prof, rmax);
    return f;
}

// septic C^3 smoothstep and its integral / derivatives on the real line
double p7(double u) {
    if (u <= 0) return 0.0;
    if (u >= 1) return 1.0;
    const double u4 = u * u * u * u;
    return u4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u);
}
double p7_int(double u) {
    if (u <= 0) return 0.0;
    if (u >= 1) return u - 0.5;
    const double u5 = u * u * u * u * u;
    return u5 * (7.0 - 14.0 * u + 10.0 * u * u - 2.5 * u * u * u);
}
double p7_d1(double u) {
    if (u <= 0 || u >= 1) return 0.0;
    const double v = u * (1 - u);
    return 140.0 * v * v * v;
}
double p7_d2(double u) {
    if (u <= 0 || u >= 1) return 0.0;
    const double v = u * (1 - u);
    return 420.0 * v * v * (1 - 2 * u);
}

}  // namespace

TestFunction smooth_bump(const Vec2& c, double a, double b, double height) {
    if (!(b > a && a >= 0)) throw std::domain_error("smooth_bump: need 0 <= a < b");
    auto prof = [a, b, height](double r) {
        Jet j = plateau(r, a, b);
        return Jet{height * j.f, height * j.d1, height * j.d2, height * j.d3};
    };
    return make_radial("bump", c, b, prof);
}

TestFunction tent(const Vec2& c, double h, double slope) {
    if (!(h > 0 && slope > 0)) throw std::domain_error("tent: need positive height and slope");
    TestFunction f;
    f.name = "tent";
    f.radial = true;
    f.center = c;
    const double rmax = h / slope;
    f.support = Window::disk(c, rmax);
    f.profile = [h, slope, rmax](double r) { return r < rmax ? Jet{h - slope * r, -slope, 0, 0} : Jet{}; };
    f.eval = [c, h, slope](const Vec2& x) { return std::max(0.0, h - slope * dist(x, c)); };
    f.seminorms = {h, slope, kInf, kInf};
    f.mass = kPi * h * rmax * rmax / 3;
    return f;
}

TestFunction ridge(const Vec2& c, double L, double angle, double slope) {
    const Vec2 u{std::cos(angle), std::sin(angle)};
    TestFunction f;
    f.name = "ridge";
    f.center = c;
    f.support = Window::disk(c, L);
    f.eval = [c, u, L, slope](const Vec2& x) {
        const Vec2 d = x - c;
        const double r = d.norm();
        if (r >= L) return 0.0;
        const double t = std::clamp(dot(d, u), -0.5 * L, 0.5 * L);
        return slope * t * plateau(r, 0.5 * L, L).f;
    };
    // |grad| <= slope (1 + (L/2) * 2 / (L/2))
    f.seminorms = {0.5 * L * slope, 3.0 * slope, kInf, kInf};
    f.mass = 0.0;  // odd about c
    return f;
}

TestFunction zero_function(const Window& support) {
    TestFunction f;
    f.name = "zero";
    f.support = support;
    f.eval = [](const Vec2&) { return 0.0; };
    f.seminorms = {0, 0, 0, 0};
    return f;
}

TestFunction scaled(const TestFunction& f, double a) {
    TestFunction g = f;
    g.eval = [e = f.eval, a](const Vec2& x) { return a * e(x); };
    if (f.profile) g.profile = [p = f.profile, a](double r) {
        Jet j = p(r);
        return Jet{a * j.f, a * j.d1, a * j.d2, a * j.d3};
    };
    for (auto& s : g.seminorms) s *= std::abs(a);
    for (auto& t : g.terms) t.first *= a;
    g.mass *= a;
    return g;
}

TestFunction sum(const TestFunction& f, const TestFunction& g) {
    TestFunction h;
    h.name = f.name + "+" + g.name;
    h.eval = [a = f.eval, b = g.eval](const Vec2& x) { return a(x) + b(x); };
    const Vec2 lo{std::min(f.support.box_lo().x, g.support.box_lo().x), std::min(f.support.box_lo().y, g.support.box_lo().y)};
    const Vec2 hi{std::max(f.support.box_hi().x, g.support.box_hi().x), std::max(f.support.box_hi().y, g.support.box_hi().y)};
    h.support = Window::rect(lo, hi);
    for (int k = 0; k < 4; ++k) h.seminorms[k] = f.seminorms[k] + g.seminorms[k];
    for (const TestFunction* t : {&f, &g}) {
        if (t->terms.empty()) h.terms.emplace_back(1.0, *t);
        else h.terms.insert(h.terms.end(), t->terms.begin(), t->terms.end());
    }
    return h;
}

TestFunction ghosh_peres_function(double eps, double ell, const Vec2& c) {
    if (!(eps > 0 && eps < 1)) throw std::domain_error("ghosh_peres_function: eps must lie in (0, 1)");
    if (!(ell >= 1)) throw std::domain_error("ghosh_peres_function: ell must be >= 1");
    // phi = Q(eps log(r / ell)), Q = 1 - int_0^t q, q a smoothed indicator of [0, 1] with unit mass
    const double a = std::min(0.25, 0.5 * eps * std::log(2.0));
    const double b = 1.0;
    const double rmax = ell * std::exp((b + a) / eps);
    auto prof = [eps, ell, a, b](double r) -> Jet {
        if (r <= ell) return {1.0, 0, 0, 0};
        const double t = eps * std::log(r / ell);
        const double Q = 1.0 - (a / b) * (p7_int(t / a) - p7_int((t - b) / a));
        const double q = (p7(t / a) - p7((t - b) / a)) / b;
        const double q1 = (p7_d1(t / a) - p7_d1((t - b) / a)) / (a * b);
        const double q2 = (p7_d2(t / a) - p7_d2((t - b) / a)) / (a * a * b);
        const double r2 = r * r;
        return {Q, -q * eps / r, (-q1 * eps * eps + q * eps) / r2,
                (-q2 * eps * eps * eps + 3 * q1 * eps * eps - 2 * q * eps) / (r2 * r)};
    };
    TestFunction f = make_radial("ghosh_peres", c, rmax, prof);
    f.name = "ghosh_peres(eps=" + std::to_string(eps) + ",ell=" + std::to_string(ell) + ")";
    return f;
}

double background_integral(const TestFunction& phi, const Window& W) {
    if (!phi.terms.empty()) {
        double v = 0.0;
        for (const auto& [a, t] : phi.terms) v += a * background_integral(t, W);
        return v;
    }
    if (!std::isnan(phi.mass) && window_within(phi.support, W)) return phi.mass;
    if (phi.radial && phi.profile && phi.support.shape == Shape::disk && window_within(phi.support, W)) {
        const double rmax = phi.support.r1;
        // split at unit scale and integrate in log-radius beyond it
        auto inner = [&](double r) { return 2 * kPi * r * phi.profile(r).f; };
        double v = integrate(inner, 0.0, std::min(1.0, rmax), 1e-12);
        if (rmax > 1.0) {
            auto outer = [&](double u) {
                const double r = std::exp(u);
                return 2 * kPi * r * r * phi.profile(r).f;
            };
            v += integrate(outer, 0.0, std::log(rmax), 1e-11);
        }
        return v;
    }
    if (window_within(phi.support, W)) return integrate_window(phi.eval, phi.support, 1e-10);
    if (window_within(W, phi.support)) return integrate_window(phi.eval, W, 1e-10);
    return integrate_window([&](const Vec2& x) { return W.contains(x) ? phi.eval(x) : 0.0; }, phi.support, 1e-8);
}

double dirichlet_energy(const TestFunction& phi) {
    if (!phi.radial || !phi.profile) throw std::invalid_argument("dirichlet_energy: radial functions only");
    const double rmax = phi.support.r1;
    auto f = [&](double u) {
        const double r = std::exp(u);
        const double d = phi.profile(r).d1;
        return 2 * kPi * d * d * r * r;
    };
    auto g = [&](double r) {
        const double d = phi.profile(r).d1;
        return 2 * kPi * d * d * r;
    };
    double v = integrate(g, 0.0, std::min(1.0, rmax), 1e-13);
    if (rmax > 1.0) v += integrate(f, 0.0, std::log(rmax), 1e-12);
    return v;
}

double seminorm_check(const TestFunction& phi, int k, int grid) {
    double measured = 0.0;
    if (phi.radial && phi.profile) {
        const double rmax = phi.support.r1;
        for (int s = 0; s <= grid * 50; ++s) {
            const double r = rmax * s / (grid * 50.0);
            measured = std::max(measured, radial_seminorm(phi.profile(r), r, k));
        }
    } else {
        if (k > 1) throw std::invalid_argument("seminorm_check: k > 1 needs a radial profile");
        const Vec2 lo = phi.support.box_lo(), hi = phi.support.box_hi();
        const double h = 1e-6 * std::max(hi.x - lo.x, hi.y - lo.y);
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                const Vec2 x{lo.x + (hi.x - lo.x) * (i + 0.37) / (grid + 1), lo.y + (hi.y - lo.y) * (j + 0.61) / (grid + 1)};
                if (k == 0) {
                    measured = std::max(measured, std::abs(phi(x)));
                } else {
                    const double gx = (phi({x.x + h, x.y}) - phi({x.x - h, x.y})) / (2 * h);
                    const double gy = (phi({x.x, x.y + h}) - phi({x.x, x.y - h})) / (2 * h);
                    measured = std::max(measured, std::hypot(gx, gy));
                }
            }
    }
    const double declared = phi.seminorms[static_cast<std::size_t>(k)];
    if (declared == 0.0) return measured == 0.0 ? 0.0 : kInf;
    return measured / declared;
}

double fluct(const TestFunction& phi, const PointConfig& X, const Window& background) {
    double s = 0.0;
    for (const auto& p : X) s += phi(p);
    return s - background_integral(phi, background);
}

double discrepancy(const PointConfig& X, const Window& W) {
    return static_cast<double>(pts_count(X, W)) - W.area();
}

std::vector<TestFunction> lipschitz_dictionary(const Vec2& c, double ell) {
    std::vector<TestFunction> d;
    for (double h : {ell, ell / 2, ell / 4, ell / 8}) d.push_back(tent(c, h));
    for (int k = 0; k < 8; ++k) {
        const double a = kPi * k / 4;
        d.push_back(tent(c + Vec2{std::cos(a), std::sin(a)} * (ell / 2), ell / 2));
    }
    for (int k = 0; k < 8; ++k) d.push_back(ridge(c, ell, kPi * k / 8, 1.0 / 3.0));
    for (int k = 0; k < 4; ++k) {
        const double a = kPi * k / 2 + kPi / 4;
        d.push_back(ridge(c + Vec2{std::cos(a), std::sin(a)} * (ell / 2), ell / 2, a, 1.0 / 3.0));
    }
    // smooth bumps with Lipschitz constant 0.98 (max slope of the profile is 2 / width)
    const double ab[4][2] = {{0, 1}, {0.5, 1}, {0, 0.5}, {0.25, 0.75}};
    for (auto& p : ab) d.push_back(smooth_bump(c, p[0] * ell, p[1] * ell, 0.49 * (p[1] - p[0]) * ell));
    for (int k = 0; k < 4; ++k) {
        const double a = kPi * k / 2;
        d.push_back(smooth_bump(c + Vec2{std::cos(a), std::sin(a)} * (ell / 2), 0, ell / 2, 0.245 * ell));
    }
    return d;
}

BinnedEstimate correlation_rho_k(const std::vector<PointConfig>& samples, int k,
                                 const std::vector<double>& edges, const Window& bulk) {
    if (samples.size() < 100) throw std::runtime_error("correlation_rho_k: need at least 100 samples");
    if (k < 1 || k > 3) throw std::invalid_argument("correlation_rho_k: k must be 1..3");
    if (edges.size() < 2) throw std::invalid_argument("correlation_rho_k: need bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("correlation_rho_k: edges must increase");
    const std::size_t nb = edges.size() - 1;
    auto ann = [&](std::size_t i) { return kPi * (edges[i + 1] * edges[i + 1] - edges[i] * edges[i]); };
    auto bin_of = [&](double r) -> long {
        if (r < edges.front() || r >= edges.back()) return -1;
        return static_cast<long>(std::upper_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
    };
    BinnedEstimate out;
    const std::size_t nbins = k == 3 ? nb * nb : nb;
    std::vector<RunningStats> acc(nbins);
    std::vector<double> per(nbins);
    for (const auto& X : samples) {
        std::fill(per.begin(), per.end(), 0.0);
        if (k == 1) {
            for (const auto& p : X) {
                long b = bin_of(dist(p, bulk.center));
                if (b >= 0) per[static_cast<std::size_t>(b)] += 1.0;
            }
            for (std::size_t i = 0; i < nb; ++i) per[i] /= ann(i);
        } else {
            const double A = bulk.area();
            std::vector<long> bins(X.size());
            for (std::size_t a = 0; a < X.size(); ++a) {
                if (!bulk.contains(X[a])) continue;
                for (std::size_t b = 0; b < X.size(); ++b) bins[b] = b == a ? -1 : bin_of(dist(X[a], X[b]));
                if (k == 2) {
                    for (std::size_t b = 0; b < X.size(); ++b)
                        if (bins[b] >= 0) per[static_cast<std::size_t>(bins[b])] += 1.0;
                } else {
                    std::vector<double> cnt(nb, 0.0);
                    for (std::size_t b = 0; b < X.size(); ++b)
                        if (bins[b] >= 0) cnt[static_cast<std::size_t>(bins[b])] += 1.0;
                    // ordered pairs (y, z), y != z
                    for (std::size_t i = 0; i < nb; ++i)
                        for (std::size_t j = 0; j < nb; ++j)
                            per[i * nb + j] += cnt[i] * cnt[j] - (i == j ? cnt[i] : 0.0);
                }
            }
            for (std::size_t i = 0; i < nbins; ++i) {
                const double area = k == 2 ? ann(i) : ann(i / nb) * ann(i % nb);
                per[i] /= A * area;
            }
        }
        for (std::size_t i = 0; i < nbins; ++i) acc[i].add(per[i]);
    }
    for (std::size_t i = 0; i < nbins; ++i) {
        const std::size_t a = k == 3 ? i / nb : i;
        out.lo.push_back(edges[a]);
        out.hi.push_back(edges[a + 1]);
        if (k == 3) {
            out.lo2.push_back(edges[i % nb]);
            out.hi2.push_back(edges[i % nb + 1]);
        }
        out.value.push_back(acc[i].mean());
        out.se.push_back(acc[i].se());
    }
    return out;
}

MomentEstimate variance_estimate(const std::vector<double>& v) {
    MomentEstimate m = moment(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
    MomentEstimate out;
    out.count = v.size();
    out.mean = m.variance;
    out.variance = m.variance;
    out.se = batch_means_se(sq) * static_cast<double>(v.size()) / static_cast<double>(v.size() - 1);
    return out;
}

std::vector<RigidityRow> rigidity_variance_scan(const std::vector<PointConfig>& samples,
                                                const std::vector<double>& eps,
                                                const std::vector<double>& ell, const Vec2& center,
                                                std::size_t N) {
    const Window sigma = Window::from(system_domain(N));
    std::vector<RigidityRow> rows;
    for (double e : eps)
        for (double l : ell) {
            TestFunction phi = ghosh_peres_function(e, l, center);
            if (center.norm() + phi.support.r1 > sigma.r1)
                throw std::domain_error("rigidity_variance_scan: support exceeds the system domain");
            const double integral = background_integral(phi, sigma);
            std::vector<double> f;
            f.reserve(samples.size());
            for (const auto& X : samples) {
                double s = 0.0;
                for (const auto& p : X) s += phi(p);
                f.push_back(s - integral);
            }
            MomentEstimate v = variance_estimate(f);
            rows.push_back({e, l, v.mean, v.se, dirichlet_energy(phi)});
        }
    return rows;
}

std::vector<EdgeRow> radial_hard_edge_scan(const std::vector<PointConfig>& samples,
                                           const std::vector<double>& radii, std::size_t N) {
    const double R = system_radius(N);
    std::vector<EdgeRow> rows;
    for (double r : radii) {
        if (!(r > 0 && r <= R)) throw std::domain_error("radial_hard_edge_scan: radius outside (0, R_N]");
        std::vector<double> v;
        for (const auto& X : samples) {
            // at r = R_N every point is inside and the area equals N
            const double d = r == R ? static_cast<double>(pts_count(X, Window::disk({0, 0}, r))) - static_cast<double>(N)
                                    : discrepancy(X, Window::disk({0, 0}, r));
            v.push_back(std::abs(d) / r);
        }
        MomentEstimate m = series_moment(v);
        rows.push_back({r, m.mean, m.se});
    }
    return rows;
}

}  // namespace ocp
