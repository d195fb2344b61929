#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ocp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Finite planar configuration. Duplicates and non-finite coordinates are rejected.
class PointConfig {
public:
    PointConfig() = default;
    explicit PointConfig(std::vector<Vec2> pts);

    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const Vec2& operator[](std::size_t i) const { return pts_[i]; }
    const std::vector<Vec2>& points() const { return pts_; }
    auto begin() const { return pts_.begin(); }
    auto end() const { return pts_.end(); }

    bool operator==(const PointConfig& o) const { return pts_ == o.pts_; }

private:
    std::vector<Vec2> pts_;
};

struct DiskDomain {
    Vec2 center;
    double radius = 1.0;

    DiskDomain() = default;
    DiskDomain(Vec2 c, double r);
    bool contains(const Vec2& p) const;
};

// Hard-wall system domain of N points at unit density.
double system_radius(std::size_t n);
DiskDomain system_domain(std::size_t n);

enum class Shape { disk, rect, annulus };

// Closed windows; boundary points count as inside.
struct Window {
    Shape shape = Shape::disk;
    Vec2 center;          // disk, annulus
    double r0 = 0.0;      // annulus inner radius
    double r1 = 1.0;      // disk / annulus outer radius
    Vec2 lo, hi;          // rect corners

    static Window disk(Vec2 c, double r);
    static Window rect(Vec2 lo, Vec2 hi);
    static Window annulus(Vec2 c, double rin, double rout);
    static Window from(const DiskDomain& d) { return disk(d.center, d.radius); }

    bool contains(const Vec2& p) const;
    double area() const;
    Window shifted(const Vec2& u) const;
    // smallest and largest distance from the origin reached by the window
    double min_abs() const;
    double max_abs() const;
    // bounding box
    Vec2 box_lo() const;
    Vec2 box_hi() const;
    // distance from p (inside a convex window) to the boundary along direction theta
    double ray_exit(const Vec2& p, double theta) const;
    bool centered_disk() const { return shape == Shape::disk && center.x == 0.0 && center.y == 0.0; }
};

std::size_t pts_count(const PointConfig& X, const Window& W);
PointConfig local_view(const PointConfig& X, const Vec2& x);
double bulk_margin(const Vec2& x, std::size_t n);

PointConfig restrict_to(const PointConfig& X, const Window& W);
PointConfig restrict_outside(const PointConfig& X, const Window& W);
PointConfig merge(const PointConfig& a, const PointConfig& b);

// A inside B (annuli are treated through their outer disk when inside another window)
bool window_within(const Window& A, const Window& B);

}  // namespace ocp
