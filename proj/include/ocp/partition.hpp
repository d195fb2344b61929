#pragma once

#include <array>

#include "ocp/geometry.hpp"

namespace ocp {

// Value and first three derivatives of a one-variable function.
struct Jet {
    double f = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

// C-infinity transition from 0 (t <= 0) to 1 (t >= 1), built from exp(-1/t).
Jet smoothstep(double t);

// Operator-norm seminorm |f|_k at radius r of the radial function f(|x|) with jet j.
double radial_seminorm(const Jet& j, double r, int k);

// Radial plateau: 1 on [0, a], 0 on [b, inf), smooth in between.
Jet plateau(double r, double a, double b);

// Smooth dyadic partition of unity: chi_0 lives on D(2), chi_i on D(2^{i+1}) \ D(2^{i-1}).
class DyadicPartition {
public:
    // Grid-measured sup over i <= 12, k <= 3 of |chi_i|_k 2^{ik} (884.54, set by k = 3).
    static constexpr double kCchi = 885.0;

    double c_chi() const { return kCchi; }

    // g_i(r) = 1 on [0, 2^{i-1}], 0 on [2^i, inf); g_0 == 0.
    Jet g(int i, double r) const;
    Jet chi(int i, double r) const;
    double chi(int i, const Vec2& x) const { return chi(i, x.norm()).f; }
    // sum_{i <= p} chi_i = g_{p+1}
    Jet weight(int p, double r) const { return g(p + 1, r); }
    // chi_i is nonzero only for r in the open interval (inner, outer)
    static double inner_radius(int i);
    static double outer_radius(int i);
    // layer indices i with chi_i(r) possibly nonzero, written into out; returns count (<= 2)
    static int layers_at(double r, std::array<int, 2>& out);
};

const DyadicPartition& dyadic_partition();

}  // namespace ocp
