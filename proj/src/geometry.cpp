#include "ocp/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace ocp {

PointConfig::PointConfig(std::vector<Vec2> pts) : pts_(std::move(pts)) {
    for (const auto& p : pts_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("PointConfig: non-finite coordinate");
    std::vector<Vec2> s = pts_;
    std::sort(s.begin(), s.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] == s[i - 1]) throw std::invalid_argument("PointConfig: duplicate point");
}

DiskDomain::DiskDomain(Vec2 c, double r) : center(c), radius(r) {
    if (!(r > 0.0)) throw std::domain_error("DiskDomain: radius must be positive");
}

bool DiskDomain::contains(const Vec2& p) const {
    return (p - center).norm2() <= radius * radius;
}

double system_radius(std::size_t n) {
    return std::sqrt(static_cast<double>(n) / std::numbers::pi);
}

DiskDomain system_domain(std::size_t n) {
    if (n == 0) throw std::domain_error("system_domain: N must be >= 1");
    return DiskDomain({0.0, 0.0}, system_radius(n));
}

Window Window::disk(Vec2 c, double r) {
    if (!(r > 0.0)) throw std::domain_error("Window: radius must be positive");
    Window w;
    w.shape = Shape::disk;
    w.center = c;
    w.r1 = r;
    return w;
}

Window Window::rect(Vec2 lo, Vec2 hi) {
    if (!(hi.x > lo.x && hi.y > lo.y)) throw std::domain_error("Window: empty rectangle");
    Window w;
    w.shape = Shape::rect;
    w.lo = lo;
    w.hi = hi;
    return w;
}

Window Window::annulus(Vec2 c, double rin, double rout) {
    if (!(rin >= 0.0 && rout > rin)) throw std::domain_error("Window: bad annulus radii");
    Window w;
    w.shape = Shape::annulus;
    w.center = c;
    w.r0 = rin;
    w.r1 = rout;
    return w;
}

bool Window::contains(const Vec2& p) const {
    switch (shape) {
    case Shape::disk: return (p - center).norm2() <= r1 * r1;
    case Shape::rect: return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    case Shape::annulus: {
        double d2 = (p - center).norm2();
        return d2 >= r0 * r0 && d2 <= r1 * r1;
    }
    }
    return false;
}

double Window::area() const {
    constexpr double pi = std::numbers::pi;
    switch (shape) {
    case Shape::disk: return pi * r1 * r1;
    case Shape::rect: return (hi.x - lo.x) * (hi.y - lo.y);
    case Shape::annulus: return pi * (r1 * r1 - r0 * r0);
    }
    return 0.0;
}

Window Window::shifted(const Vec2& u) const {
    Window w = *this;
    w.center = center + u;
    w.lo = lo + u;
    w.hi = hi + u;
    return w;
}

double Window::min_abs() const {
    switch (shape) {
    case Shape::disk: return std::max(0.0, center.norm() - r1);
    case Shape::annulus: {
        double c = center.norm();
        if (c <= r0) return r0 - c;
        return std::max(0.0, c - r1);
    }
    case Shape::rect: {
        double dx = std::max({lo.x, 0.0, -hi.x});
        double dy = std::max({lo.y, 0.0, -hi.y});
        return std::hypot(dx, dy);
    }
    }
    return 0.0;
}

double Window::max_abs() const {
    switch (shape) {
    case Shape::disk:
    case Shape::annulus: return center.norm() + r1;
    case Shape::rect: {
        double dx = std::max(std::abs(lo.x), std::abs(hi.x));
        double dy = std::max(std::abs(lo.y), std::abs(hi.y));
        return std::hypot(dx, dy);
    }
    }
    return 0.0;
}

Vec2 Window::box_lo() const {
    if (shape == Shape::rect) return lo;
    return {center.x - r1, center.y - r1};
}

Vec2 Window::box_hi() const {
    if (shape == Shape::rect) return hi;
    return {center.x + r1, center.y + r1};
}

double Window::ray_exit(const Vec2& p, double theta) const {
    const double ux = std::cos(theta), uy = std::sin(theta);
    if (shape == Shape::rect) {
        double t = 1e300;
        if (ux > 0) t = std::min(t, (hi.x - p.x) / ux);
        if (ux < 0) t = std::min(t, (lo.x - p.x) / ux);
        if (uy > 0) t = std::min(t, (hi.y - p.y) / uy);
        if (uy < 0) t = std::min(t, (lo.y - p.y) / uy);
        return std::max(t, 0.0);
    }
    if (shape == Shape::annulus) throw std::logic_error("ray_exit: annulus is not convex");
    const Vec2 d = p - center;
    const double b = d.x * ux + d.y * uy;
    const double c = d.norm2() - r1 * r1;
    return std::max(0.0, -b + std::sqrt(std::max(0.0, b * b - c)));
}

std::size_t pts_count(const PointConfig& X, const Window& W) {
    std::size_t k = 0;
    for (const auto& p : X)
        if (W.contains(p)) ++k;
    return k;
}

PointConfig local_view(const PointConfig& X, const Vec2& x) {
    std::vector<Vec2> v;
    v.reserve(X.size());
    for (const auto& p : X) v.push_back(p - x);
    return PointConfig(std::move(v));
}

double bulk_margin(const Vec2& x, std::size_t n) {
    const double R = system_radius(n);
    const double r = x.norm();
    if (r > R) throw std::domain_error("bulk_margin: point outside the system domain");
    return (R - r) / std::sqrt(static_cast<double>(n));
}

PointConfig restrict_to(const PointConfig& X, const Window& W) {
    std::vector<Vec2> v;
    for (const auto& p : X)
        if (W.contains(p)) v.push_back(p);
    return PointConfig(std::move(v));
}

PointConfig restrict_outside(const PointConfig& X, const Window& W) {
    std::vector<Vec2> v;
    for (const auto& p : X)
        if (!W.contains(p)) v.push_back(p);
    return PointConfig(std::move(v));
}

PointConfig merge(const PointConfig& a, const PointConfig& b) {
    std::vector<Vec2> v = a.points();
    v.insert(v.end(), b.begin(), b.end());
    return PointConfig(std::move(v));
}

bool window_within(const Window& A, const Window& B) {
    if (A.shape == Shape::rect) {
        const Vec2 cs[4] = {A.lo, {A.hi.x, A.lo.y}, A.hi, {A.lo.x, A.hi.y}};
        if (B.shape == Shape::rect || B.shape == Shape::disk) {
            for (const auto& c : cs)
                if (!B.contains(c)) return false;
            return true;
        }
        return false;
    }
    const double rA = A.r1;
    switch (B.shape) {
    case Shape::disk: return dist(A.center, B.center) + rA <= B.r1;
    case Shape::rect:
        return A.center.x - rA >= B.lo.x && A.center.x + rA <= B.hi.x && A.center.y - rA >= B.lo.y &&
               A.center.y + rA <= B.hi.y;
    case Shape::annulus: {
        const double d = dist(A.center, B.center);
        return d + rA <= B.r1 && d - rA >= B.r0;
    }
    }
    return false;
}

}  // namespace ocp
