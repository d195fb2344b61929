#include "ocp/partition.hpp"

#include <algorithm>
#include <cmath>

namespace ocp {

namespace {

// logistic sigma(z) and sigma(-z) without cancellation
void sigmoid_pair(double z, double& s, double& sm) {
    if (z >= 0) {
        double e = std::exp(-z);
        s = 1.0 / (1.0 + e);
        sm = e / (1.0 + e);
    } else {
        double e = std::exp(z);
        s = e / (1.0 + e);
        sm = 1.0 / (1.0 + e);
    }
}

}  // namespace

// exp(-1/t) / (exp(-1/t) + exp(-1/(1-t))) = sigma(1/(1-t) - 1/t)
Jet smoothstep(double t) {
    Jet j;
    if (t <= 0.0) return j;
    if (t >= 1.0) {
        j.f = 1.0;
        return j;
    }
    const double u = 1.0 - t;
    const double z = 1.0 / u - 1.0 / t;
    const double z1 = 1.0 / (u * u) + 1.0 / (t * t);
    const double z2 = 2.0 / (u * u * u) - 2.0 / (t * t * t);
    const double z3 = 6.0 / (u * u * u * u) + 6.0 / (t * t * t * t);
    double s, sm;
    sigmoid_pair(z, s, sm);
    const double s1 = s * sm;
    const double s2 = s1 * (sm - s);
    const double s3 = s1 * (sm - s) * (sm - s) - 2.0 * s1 * s1;
    j.f = s;
    j.d1 = s1 * z1;
    j.d2 = s2 * z1 * z1 + s1 * z2;
    j.d3 = s3 * z1 * z1 * z1 + 3.0 * s2 * z1 * z2 + s1 * z3;
    return j;
}

double radial_seminorm(const Jet& j, double r, int k) {
    switch (k) {
    case 0: return std::abs(j.f);
    case 1: return std::abs(j.d1);
    case 2:
        if (r == 0.0) return std::abs(j.d2);
        return std::max(std::abs(j.d2), std::abs(j.d1 / r));
    case 3: {
        if (r == 0.0) return std::abs(j.d3);
        // T(u,u,u) = (f''' - 3c) u^3 + 3c u over u = cos(angle to radial direction)
        const double c = (j.d2 - j.d1 / r) / r;
        const double a = j.d3 - 3.0 * c;
        double best = std::abs(j.d3);
        if (a != 0.0) {
            double u2 = -c / a;
            if (u2 > 0.0 && u2 < 1.0) {
                double u = std::sqrt(u2);
                best = std::max(best, std::abs(a * u2 * u + 3.0 * c * u));
            }
        }
        return best;
    }
    default: throw std::invalid_argument("radial_seminorm: k must be 0..3");
    }
}

Jet plateau(double r, double a, double b) {
    const double w = b - a;
    Jet s = smoothstep((r - a) / w);
    return {1.0 - s.f, -s.d1 / w, -s.d2 / (w * w), -s.d3 / (w * w * w)};
}

Jet DyadicPartition::g(int i, double r) const {
    if (i <= 0) return {};
    return plateau(r, std::ldexp(1.0, i - 1), std::ldexp(1.0, i));
}

Jet DyadicPartition::chi(int i, double r) const {
    if (i < 0) return {};
    if (i == 0) return g(1, r);
    Jet a = g(i + 1, r), b = g(i, r);
    return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}

double DyadicPartition::inner_radius(int i) { return i == 0 ? 0.0 : std::ldexp(1.0, i - 1); }
double DyadicPartition::outer_radius(int i) { return std::ldexp(1.0, i + 1); }

int DyadicPartition::layers_at(double r, std::array<int, 2>& out) {
    // chi_i(r) != 0 requires 2^{i-1} < r < 2^{i+1}
    if (r < 1.0) {
        out[0] = 0;
        return 1;
    }
    int e;
    std::frexp(r, &e);  // r in [2^{e-1}, 2^e)
    int n = 0;
    for (int i = std::max(0, e - 2); i <= e; ++i)
        if (r > inner_radius(i) && r < outer_radius(i)) {
            if (n < 2) out[n] = i;
            ++n;
        }
    return std::min(n, 2);
}

const DyadicPartition& dyadic_partition() {
    static const DyadicPartition p;
    return p;
}

}  // namespace ocp
