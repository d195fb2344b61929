#include "ocp/quad.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace ocp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kMaxPanels = 2000;
}  // namespace

double integrate(const Fn1& f, double a, double b, double tol, double* err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    if (a == b) {
        if (err) *err = 0.0;
        return 0.0;
    }
    // globally adaptive on absolute error: always bisect the worst panel
    struct Panel {
        double a, b, v, e;
        bool operator<(const Panel& o) const { return e < o.e; }
    };
    auto panel = [&](double lo, double hi) {
        double e = 0.0;
        const double v = GK::integrate(f, lo, hi, 0, 0.0, &e);
        return Panel{lo, hi, v, e};
    };
    std::priority_queue<Panel> q;
    q.push(panel(a, b));
    double total = q.top().v, total_err = q.top().e;
    for (int it = 0; it < kMaxPanels && total_err > tol; ++it) {
        const Panel p = q.top();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) break;
        q.pop();
        const Panel l = panel(p.a, m), r = panel(m, p.b);
        total += l.v + r.v - p.v;
        total_err += l.e + r.e - p.e;
        q.push(l);
        q.push(r);
    }
    // re-sum to shed the running cancellation error
    total = 0.0;
    total_err = 0.0;
    for (; !q.empty(); q.pop()) {
        total += q.top().v;
        total_err += q.top().e;
    }
    if (err) *err = total_err;
    return total;
}

double integrate_window(const Fn2& f, const Window& W, double tol) {
    switch (W.shape) {
    case Shape::disk:
    case Shape::annulus: {
        const double ra = W.shape == Shape::disk ? 0.0 : W.r0;
        auto radial = [&](double r) {
            auto ang = [&](double t) {
                return f({W.center.x + r * std::cos(t), W.center.y + r * std::sin(t)});
            };
            return r * integrate(ang, 0.0, 2.0 * kPi, tol * 1e-2);
        };
        return integrate(radial, ra, W.r1, tol);
    }
    case Shape::rect: {
        auto outer = [&](double x) {
            auto inner = [&](double y) { return f({x, y}); };
            return integrate(inner, W.lo.y, W.hi.y, tol * 1e-2);
        };
        return integrate(outer, W.lo.x, W.hi.x, tol);
    }
    }
    return 0.0;
}

double integrate_window_pole(const Fn2& f, const Window& W, const Vec2& pole, double tol) {
    if (W.shape == Shape::annulus) {
        // split into outer disk minus inner disk when the pole is not inside the hole
        Window outer = Window::disk(W.center, W.r1);
        if (W.r0 == 0.0) return integrate_window_pole(f, outer, pole, tol);
        Window inner = Window::disk(W.center, W.r0);
        return integrate_window_pole(f, outer, pole, tol) - integrate_window_pole(f, inner, pole, tol);
    }
    if (!W.contains(pole)) return integrate_window(f, W, tol);
    // polar coordinates about the pole; for rectangles split at corner directions
    std::vector<double> cuts{0.0, 2.0 * kPi};
    if (W.shape == Shape::rect) {
        const Vec2 cs[4] = {W.lo, {W.hi.x, W.lo.y}, W.hi, {W.lo.x, W.hi.y}};
        for (const auto& c : cs) {
            const Vec2 d = c - pole;
            if (d.norm2() == 0.0) continue;
            double a = std::atan2(d.y, d.x);
            if (a < 0) a += 2.0 * kPi;
            cuts.push_back(a);
        }
        std::sort(cuts.begin(), cuts.end());
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] < 1e-15) continue;
        auto ang = [&](double t) {
            const double rho = W.ray_exit(pole, t);
            const double ux = std::cos(t), uy = std::sin(t);
            auto rad = [&](double s) { return s * f({pole.x + s * ux, pole.y + s * uy}); };
            return integrate(rad, 0.0, rho, tol * 1e-2);
        };
        total += integrate(ang, cuts[k], cuts[k + 1], tol);
    }
    return total;
}

}  // namespace ocp
