#include "ocp/energy.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ocp/quad.hpp"

namespace ocp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// antiderivative of (1/2) log(u^2 + v^2) in u and v
double rect_prim(double u, double v) {
    const double r2 = u * u + v * v;
    double t = -3.0 * u * v;
    if (r2 > 0.0) t += u * v * std::log(r2);
    if (u != 0.0) t += u * u * std::atan(v / u);
    if (v != 0.0) t += v * v * std::atan(u / v);
    return 0.5 * t;
}

// d/du and d/dv of rect_prim
double rect_prim_du(double u, double v) {
    const double r2 = u * u + v * v;
    double t = -v;
    if (r2 > 0.0) t = 0.5 * v * std::log(r2) - v;
    if (u != 0.0) t += u * std::atan(v / u);
    return t;
}

}  // namespace

double log_kernel(const Vec2& x, const Vec2& y) {
    const double d2 = (x - y).norm2();
    if (d2 == 0.0) return kInf;
    return -0.5 * std::log(d2);
}

double disk_background_potential(const Vec2& x, double R, const Vec2& c) {
    const double r2 = (x - c).norm2();
    if (r2 <= R * R) return kPi * R * R * (-std::log(R)) + 0.5 * kPi * (R * R - r2);
    return -kPi * R * R * 0.5 * std::log(r2);
}

static Vec2 disk_potential_grad(const Vec2& x, double R, const Vec2& c) {
    const Vec2 d = x - c;
    const double r2 = d.norm2();
    if (r2 <= R * R) return d * (-kPi);
    return d * (-kPi * R * R / r2);
}

double window_potential(const Vec2& x, const Window& W) {
    switch (W.shape) {
    case Shape::disk: return disk_background_potential(x, W.r1, W.center);
    case Shape::annulus:
        return disk_background_potential(x, W.r1, W.center) -
               (W.r0 > 0.0 ? disk_background_potential(x, W.r0, W.center) : 0.0);
    case Shape::rect: {
        const double xs[2] = {x.x - W.lo.x, x.x - W.hi.x};
        const double ys[2] = {x.y - W.lo.y, x.y - W.hi.y};
        double s = rect_prim(xs[0], ys[0]) - rect_prim(xs[1], ys[0]) - rect_prim(xs[0], ys[1]) +
                   rect_prim(xs[1], ys[1]);
        return -s;
    }
    }
    return 0.0;
}

Vec2 window_potential_grad(const Vec2& x, const Window& W) {
    switch (W.shape) {
    case Shape::disk: return disk_potential_grad(x, W.r1, W.center);
    case Shape::annulus: {
        Vec2 g = disk_potential_grad(x, W.r1, W.center);
        if (W.r0 > 0.0) g = g - disk_potential_grad(x, W.r0, W.center);
        return g;
    }
    case Shape::rect: {
        const double xs[2] = {x.x - W.lo.x, x.x - W.hi.x};
        const double ys[2] = {x.y - W.lo.y, x.y - W.hi.y};
        double gx = rect_prim_du(xs[0], ys[0]) - rect_prim_du(xs[1], ys[0]) -
                    rect_prim_du(xs[0], ys[1]) + rect_prim_du(xs[1], ys[1]);
        double gy = rect_prim_du(ys[0], xs[0]) - rect_prim_du(ys[0], xs[1]) -
                    rect_prim_du(ys[1], xs[0]) + rect_prim_du(ys[1], xs[1]);
        return {-gx, -gy};
    }
    }
    return {};
}

double concentric_disk_cross(double a, double b) {
    const double rho = std::min(a, b), R = std::max(a, b);
    if (rho == 0.0) return 0.0;
    return kPi * rho * rho * (-kPi * R * R * std::log(R) + 0.5 * kPi * R * R) -
           0.25 * kPi * kPi * rho * rho * rho * rho;
}

double window_self_energy(const Window& W) {
    switch (W.shape) {
    case Shape::disk: return concentric_disk_cross(W.r1, W.r1);
    case Shape::annulus:
        return concentric_disk_cross(W.r1, W.r1) - 2.0 * concentric_disk_cross(W.r0, W.r1) +
               concentric_disk_cross(W.r0, W.r0);
    case Shape::rect: {
        static std::mutex mu;
        static std::map<std::pair<double, double>, double> memo;
        const double w = W.hi.x - W.lo.x, h = W.hi.y - W.lo.y;
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find({w, h});
        if (it != memo.end()) return it->second;
        const Window base = Window::rect({0.0, 0.0}, {w, h});
        const double v = integrate_window(
            [&](const Vec2& x) { return window_potential(x, base); }, base, 1e-10);
        memo[{w, h}] = v;
        return v;
    }
    }
    return 0.0;
}

double tree_sum(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::size_t n = v.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < n / 2; ++i) v[i] = v[2 * i] + v[2 * i + 1];
        if (n % 2) v[n / 2] = v[n - 1];
        n = half;
    }
    return v[0];
}

double pair_energy(const std::vector<Vec2>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> rows(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = (pts[i] - pts[j]).norm2();
            if (d2 == 0.0) return kInf;
            s += -0.5 * std::log(d2);
        }
        rows[i] = s;
    }
    return tree_sum(std::move(rows));
}

EnergyBreakdown window_energy(const std::vector<Vec2>& pts, const Window& W) {
    EnergyBreakdown e;
    e.point_point = pair_energy(pts);
    std::vector<double> pb(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pb[i] = -window_potential(pts[i], W);
    e.point_background = tree_sum(std::move(pb));
    e.background_background = 0.5 * window_self_energy(W);
    e.total = e.point_point + e.point_background + e.background_background;
    return e;
}

EnergyBreakdown interaction_energy(const std::vector<Vec2>& pts, const DiskDomain& domain) {
    for (const auto& p : pts)
        if (!domain.contains(p))
            throw std::domain_error("interaction_energy: point outside the domain");
    return window_energy(pts, Window::from(domain));
}

EnergyBreakdown interaction_energy(const PointConfig& X, const DiskDomain& domain) {
    return interaction_energy(X.points(), domain);
}

EnergyBreakdown local_energy(const PointConfig& Xp, const Window& lambda) {
    for (const auto& p : Xp)
        if (!lambda.contains(p)) throw std::domain_error("local_energy: point outside the window");
    return window_energy(Xp.points(), lambda);
}

double delta_energy_move(const PointConfig& X, std::size_t i, const Vec2& newpos,
                         const DiskDomain& domain) {
    if (i >= X.size()) throw std::out_of_range("delta_energy_move: index out of range");
    if (!domain.contains(newpos)) throw std::domain_error("delta_energy_move: target outside domain");
    const Vec2 old = X[i];
    double d = 0.0;
    for (std::size_t j = 0; j < X.size(); ++j) {
        if (j == i) continue;
        const double dn = (newpos - X[j]).norm2();
        if (dn == 0.0) return kInf;
        d += 0.5 * std::log((old - X[j]).norm2() / dn);
    }
    d += -disk_background_potential(newpos, domain.radius, domain.center) +
         disk_background_potential(old, domain.radius, domain.center);
    return d;
}

}  // namespace ocp
