#include "ocp/loctrans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocp/energy.hpp"
#include "ocp/parallel.hpp"
#include "ocp/partition.hpp"

namespace ocp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDirections = 8;

double radius_of(const Window& W) { return W.shape == Shape::rect ? kInf : W.r1; }
}  // namespace

Vec2 hamiltonian_field(const Vec2& x, double L, const Vec2& v) {
    const Vec2 y = x * (1.0 / L);
    const double r = y.norm();
    if (r >= 2.0) return {0.0, 0.0};
    const Vec2 w{v.y, -v.x};
    const Jet g = plateau(r, 1.0, 2.0);
    Vec2 grad = w * g.f;
    if (r > 0.0 && g.d1 != 0.0) grad = grad + y * (dot(y, w) * g.d1 / r);
    return {-grad.y, grad.x};
}

Vec2 flow_map(const Vec2& x, double t, double L, const Vec2& v, int steps) {
    if (!(std::abs(t) <= 1.0)) throw std::invalid_argument("flow_map: t must lie in [-1, 1]");
    const double h = t / steps;
    Vec2 p = x;
    for (int s = 0; s < steps; ++s) {
        const Vec2 k1 = hamiltonian_field(p, L, v);
        const Vec2 k2 = hamiltonian_field(p + k1 * (0.5 * h), L, v);
        const Vec2 k3 = hamiltonian_field(p + k2 * (0.5 * h), L, v);
        const Vec2 k4 = hamiltonian_field(p + k3 * h, L, v);
        p = p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    return p;
}

LocalizedTranslation::LocalizedTranslation(double L, const Vec2& v, int steps) : L_(L), v_(v), steps_(steps) {
    if (!(L > 0)) throw std::invalid_argument("LocalizedTranslation: L must be positive");
    if (!(v.norm() <= 1.0)) throw std::invalid_argument("LocalizedTranslation: |v| must be <= 1");
    if (steps < 1) throw std::invalid_argument("LocalizedTranslation: steps must be >= 1");
}

PointConfig LocalizedTranslation::push(const PointConfig& X, int sign, const Window& W) const {
    std::vector<Vec2> out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(W.contains(x) ? (sign > 0 ? plus(x) : minus(x)) : x);
    return PointConfig(std::move(out));
}

TranslationReport verify_translation(const LocalizedTranslation& T, int grid, unsigned threads) {
    if (grid < 2) throw std::invalid_argument("verify_translation: grid must be >= 2");
    const double L = T.L();
    const double step = 4.0 * L / grid;
    const double fd = 0.02 * L;    // directional derivatives
    const double jac = 1e-4 * L;   // Jacobian determinant
    struct Row {
        double psi[4] = {0, 0, 0, 0}, rem[3] = {0, 0, 0};
        double det = 0, inv = 0, plat = 0, supp = 0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(grid));
    parallel_for(rows.size(), threads, [&](std::size_t a) {
        Row& R = rows[a];
        for (int b = 0; b < grid; ++b) {
            const Vec2 x{-2.0 * L + (static_cast<double>(a) + 0.5) * step, -2.0 * L + (b + 0.5) * step};
            const Vec2 tp = T.plus(x), tm = T.minus(x);
            const Vec2 pp = tp - x, pm = tm - x;
            R.psi[0] = std::max({R.psi[0], pp.norm(), pm.norm()});
            R.rem[0] = std::max(R.rem[0], (pp + pm).norm());
            R.inv = std::max(R.inv, dist(T.plus(tm), x));
            if (x.norm() <= L - T.v().norm()) R.plat = std::max(R.plat, dist(tp, x + T.v()));
            if (x.norm() >= 2.0 * L) R.supp = std::max({R.supp, pp.norm(), pm.norm()});
            for (int sign : {1, -1}) {
                auto map = [&](const Vec2& y) { return sign > 0 ? T.plus(y) : T.minus(y); };
                const Vec2 dx = (map(x + Vec2{jac, 0}) - map(x - Vec2{jac, 0})) * (0.5 / jac);
                const Vec2 dy = (map(x + Vec2{0, jac}) - map(x - Vec2{0, jac})) * (0.5 / jac);
                R.det = std::max(R.det, std::abs(dx.x * dy.y - dx.y * dy.x - 1.0));
            }
            for (int d = 0; d < kDirections; ++d) {
                const double th = std::numbers::pi * d / kDirections;
                const Vec2 e{std::cos(th), std::sin(th)};
                Vec2 sp[5], sm[5];
                for (int k = -2; k <= 2; ++k) {
                    const Vec2 y = x + e * (k * fd);
                    sp[k + 2] = T.psi_plus(y);
                    sm[k + 2] = T.psi_minus(y);
                }
                auto derivs = [&](const Vec2* s, double out[3]) {
                    out[0] = ((s[3] - s[1]) * (0.5 / fd)).norm();
                    out[1] = ((s[3] - s[2] * 2.0 + s[1]) * (1.0 / (fd * fd))).norm();
                    out[2] = ((s[4] - s[3] * 2.0 + s[1] * 2.0 - s[0]) * (0.5 / (fd * fd * fd))).norm();
                };
                double dp[3], dm[3], dr[3];
                Vec2 sr[5];
                for (int k = 0; k < 5; ++k) sr[k] = sp[k] + sm[k];
                derivs(sp, dp);
                derivs(sm, dm);
                derivs(sr, dr);
                for (int k = 0; k < 3; ++k) R.psi[k + 1] = std::max({R.psi[k + 1], dp[k], dm[k]});
                for (int k = 0; k < 2; ++k) R.rem[k + 1] = std::max(R.rem[k + 1], dr[k]);
            }
        }
    });
    TranslationReport rep;
    rep.L = L;
    rep.grid = grid;
    for (const auto& R : rows) {
        for (int k = 0; k < 4; ++k) rep.psi[k] = std::max(rep.psi[k], R.psi[k]);
        for (int k = 0; k < 3; ++k) rep.rem[k] = std::max(rep.rem[k], R.rem[k]);
        rep.det_max_dev = std::max(rep.det_max_dev, R.det);
        rep.inverse_max = std::max(rep.inverse_max, R.inv);
        rep.plateau_max = std::max(rep.plateau_max, R.plat);
        rep.support_max = std::max(rep.support_max, R.supp);
    }
    for (int k = 1; k < 4; ++k) rep.psi[k] *= std::pow(L, k);
    for (int k = 0; k < 3; ++k) rep.rem[k] *= std::pow(L, k + 1);
    return rep;
}

Window diff_window(double L, std::size_t N) {
    const double r = 10.0 * L;
    return Window::disk({}, N ? std::min(r, system_radius(N)) : r);
}

double diff1(const PointConfig& X, const LocalizedTranslation& T, std::size_t N) {
    const Window lambda = Window::disk({}, 10.0 * T.L());
    const Window bg = diff_window(T.L(), N);
    // only points inside D(2L) move; the rest of F_Lambda cancels exactly
    std::vector<Vec2> moved, still;
    for (const auto& x : X) {
        if (!lambda.contains(x)) continue;
        (x.norm() < 2.0 * T.L() ? moved : still).push_back(x);
    }
    if (moved.empty()) return 0.0;
    auto shift = [&](int sign) {
        std::vector<Vec2> img(moved.size());
        for (std::size_t i = 0; i < moved.size(); ++i) img[i] = sign > 0 ? T.plus(moved[i]) : T.minus(moved[i]);
        double d = 0.0;
        for (std::size_t i = 0; i < moved.size(); ++i) {
            for (const auto& y : still) d += 0.5 * std::log((moved[i] - y).norm2() / (img[i] - y).norm2());
            for (std::size_t j = i + 1; j < moved.size(); ++j)
                d += 0.5 * std::log((moved[i] - moved[j]).norm2() / (img[i] - img[j]).norm2());
            d -= window_potential(img[i], bg) - window_potential(moved[i], bg);
        }
        return d;
    };
    return 0.5 * (shift(1) + shift(-1));
}

double diff2(const PointConfig& X, const LocalizedTranslation& T, const MoveSetup& setup, int p) {
    MoveSetup s = setup;
    s.lambda = Window::disk({}, 10.0 * T.L());
    if (!s.finite && s.data_radius < std::max(std::ldexp(1.0, p + 1), 20.0 * T.L()))
        throw CoverageError("diff2: exterior data must reach max(2^{p+1}, 20 L)");
    if (T.v().norm() == 0.0) return 0.0;
    const MoveField F(X, s, p);
    double d = 0.0;
    for (const auto& x : F.interior()) {
        if (x.norm() >= 2.0 * T.L()) continue;
        d += 0.5 * (F.potential(T.plus(x), p) + F.potential(T.minus(x), p)) - F.potential(x, p);
    }
    return d;
}

DiffStats diff_stats(const std::vector<PointConfig>& samples, const LocalizedTranslation& T, std::size_t N,
                     double beta, int p, std::uint64_t seed, unsigned threads) {
    DiffStats st;
    st.L = T.L();
    st.radius = 10.0 * T.L();
    st.beta = beta;
    st.diff1.resize(samples.size());
    st.diff2.resize(samples.size());
    const MoveSetup setup = MoveSetup::finite_volume(Window::disk({}, st.radius), N);
    parallel_for(samples.size(), threads, [&](std::size_t k) {
        st.diff1[k] = diff1(samples[k], T, N);
        st.diff2[k] = diff2(samples[k], T, setup, p);
    });
    if (samples.empty()) return st;
    std::vector<double> a1(samples.size()), a2(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        a1[k] = std::abs(st.diff1[k]);
        a2[k] = std::abs(st.diff2[k]);
    }
    st.exp1 = exp_moment(a1, 2.0 * beta, seed);
    st.exp2 = exp_moment(a2, 2.0 * beta, seed + 1);
    return st;
}

bool InvarianceReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const InvarianceRow& r) { return r.pass; });
}

std::vector<ViewObservable> default_view_battery(const Window& W) {
    const double cap = 2.0 * radius_of(W);
    std::vector<ViewObservable> b;
    b.emplace_back("pts", [W](const PointConfig& X) { return static_cast<double>(pts_count(X, W)); });
    b.emplace_back("pts_left_half", [W](const PointConfig& X) {
        double n = 0;
        for (const auto& x : X) n += W.contains(x) && x.x < 0.0;
        return n;
    });
    b.emplace_back("pts_upper_half", [W](const PointConfig& X) {
        double n = 0;
        for (const auto& x : X) n += W.contains(x) && x.y > 0.0;
        return n;
    });
    b.emplace_back("nearest_to_center", [cap](const PointConfig& X) {
        double d = cap;
        for (const auto& x : X) d = std::min(d, x.norm());
        return d;
    });
    return b;
}

InvarianceReport translation_invariance_test(const std::vector<PointConfig>& samples, std::size_t N, const Vec2& x0,
                                             const Vec2& v, const Window& window,
                                             const std::vector<ViewObservable>& battery) {
    if (samples.size() < 2) throw std::invalid_argument("translation_invariance_test: need at least two samples");
    if (battery.empty()) throw std::invalid_argument("translation_invariance_test: empty battery");
    const double reach = window.shape == Shape::rect ? std::max(window.box_hi().norm(), window.box_lo().norm())
                                                     : window.center.norm() + window.r1;
    const double R = system_radius(N);
    for (const Vec2& c : {x0, x0 + v})
        if (R - c.norm() - reach < 1.0)
            throw std::domain_error("translation_invariance_test: window leaves the bulk");
    InvarianceReport rep;
    rep.z_threshold = bonferroni_z(battery.size());
    rep.ks_alpha = 2.0 * (1.0 - normal_cdf(rep.z_threshold));
    for (const auto& [name, f] : battery) {
        std::vector<double> a(samples.size()), b(samples.size()), d(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            a[s] = f(local_view(samples[s], x0));
            b[s] = f(local_view(samples[s], x0 + v));
            d[s] = a[s] - b[s];
        }
        InvarianceRow row;
        row.name = name;
        row.mean_a = moment(a).mean;
        row.mean_b = moment(b).mean;
        const double mean = moment(d).mean, se = batch_means_se(d);
        row.z = se > 0 ? mean / se : (mean == 0.0 ? 0.0 : std::copysign(kInf, mean));
        row.ks = ks_two_sample(a, b);
        row.pass = std::abs(row.z) < rep.z_threshold && row.ks.p > rep.ks_alpha;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace ocp
