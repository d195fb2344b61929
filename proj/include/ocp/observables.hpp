#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/partition.hpp"
#include "ocp/stats.hpp"

namespace ocp {

struct TestFunction {
    std::string name;
    std::function<double(const Vec2&)> eval;
    Window support;
    // declared upper bounds on |phi|_0 .. |phi|_3 (infinite when not differentiable)
    std::array<double, 4> seminorms{};
    bool radial = false;
    Vec2 center;
    std::function<Jet(double)> profile;  // radial functions only
    // linear combination this function was built from; background integrals distribute over it
    std::vector<std::pair<double, TestFunction>> terms;
    // integral over the plane when known in closed form
    double mass = std::numeric_limits<double>::quiet_NaN();

    double operator()(const Vec2& x) const { return eval(x); }
};

// 1 on D(c, a), 0 off D(c, b)
TestFunction smooth_bump(const Vec2& c, double a, double b, double height = 1.0);
// (h - slope |x - c|)_+ ; slope-Lipschitz with support D(c, h / slope)
TestFunction tent(const Vec2& c, double h, double slope = 1.0);
// Lipschitz ridge s(<x - c, u>) cut off smoothly outside D(c, L)
TestFunction ridge(const Vec2& c, double L, double angle, double slope = 1.0);
TestFunction zero_function(const Window& support);
TestFunction scaled(const TestFunction& f, double a);
TestFunction sum(const TestFunction& f, const TestFunction& g);

// radial test function equal to 1 on D(l), 0 outside D(2 l e^{1/eps}), |D^k phi| <= C eps / |x|^k
TestFunction ghosh_peres_function(double eps, double ell, const Vec2& c = {});

// integral of phi against Lebesgue measure on W
double background_integral(const TestFunction& phi, const Window& W);
// int |grad phi|^2 for radial functions
double dirichlet_energy(const TestFunction& phi);
// grid check of the declared seminorms (k <= 1 for non-radial functions); returns max measured / declared
double seminorm_check(const TestFunction& phi, int k, int grid = 400);

double fluct(const TestFunction& phi, const PointConfig& X, const Window& background);
double discrepancy(const PointConfig& X, const Window& W);

// fixed 32-member dictionary of Lipschitz test functions supported in D(c, ell)
inline constexpr const char* kDictionaryVersion = "lipschitz-dict-v1";
std::vector<TestFunction> lipschitz_dictionary(const Vec2& c, double ell);

struct BinnedEstimate {
    std::vector<double> lo, hi;        // bin edges (first coordinate)
    std::vector<double> lo2, hi2;      // second coordinate for k = 3
    std::vector<double> value, se;
};

// rho_1 on radial annuli; rho_2, rho_3 isotropic in the pair distances, anchor point in `bulk`
BinnedEstimate correlation_rho_k(const std::vector<PointConfig>& samples, int k,
                                 const std::vector<double>& edges, const Window& bulk);

struct RigidityRow {
    double eps = 0.0, ell = 0.0;
    double variance = 0.0, se = 0.0;
    double dirichlet = 0.0;
};
std::vector<RigidityRow> rigidity_variance_scan(const std::vector<PointConfig>& samples,
                                                const std::vector<double>& eps,
                                                const std::vector<double>& ell, const Vec2& center,
                                                std::size_t N);
// variance estimate of a series with a batch-means standard error
MomentEstimate variance_estimate(const std::vector<double>& v);

struct EdgeRow {
    double r = 0.0, mean_abs_over_r = 0.0, se = 0.0;
};
std::vector<EdgeRow> radial_hard_edge_scan(const std::vector<PointConfig>& samples,
                                           const std::vector<double>& radii, std::size_t N);

}  // namespace ocp
