#pragma once

#include <vector>

#include "ocp/geometry.hpp"

namespace ocp {

struct EnergyBreakdown {
    double point_point = 0.0;
    double point_background = 0.0;
    double background_background = 0.0;
    double total = 0.0;
};

double log_kernel(const Vec2& x, const Vec2& y);

// U(x) = int_{D(c,R)} -log|x-y| dy
double disk_background_potential(const Vec2& x, double R, const Vec2& c = {});
// int_W -log|x-y| dy in closed form for every window shape
double window_potential(const Vec2& x, const Window& W);
// grad of window_potential
Vec2 window_potential_grad(const Vec2& x, const Window& W);
// int_W int_W -log|x-y| dx dy (no 1/2); rectangles by memoized quadrature
double window_self_energy(const Window& W);
// int_{D(a)} U_{D(b)} for concentric disks
double concentric_disk_cross(double a, double b);

// 1/2 sum_{i != j} -log|x_i - x_j|, +inf on coincidence, fixed summation order
double pair_energy(const std::vector<Vec2>& pts);

// energy of points against a uniform background on W
EnergyBreakdown window_energy(const std::vector<Vec2>& pts, const Window& W);

EnergyBreakdown interaction_energy(const PointConfig& X, const DiskDomain& domain);
EnergyBreakdown interaction_energy(const std::vector<Vec2>& pts, const DiskDomain& domain);
EnergyBreakdown local_energy(const PointConfig& Xp, const Window& lambda);

double delta_energy_move(const PointConfig& X, std::size_t i, const Vec2& newpos,
                         const DiskDomain& domain);

// pairwise tree reduction with fan-in 2
double tree_sum(std::vector<double> v);

}  // namespace ocp
