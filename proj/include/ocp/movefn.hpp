#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/observables.hpp"

namespace ocp {

// Exterior data does not reach the outermost requested layer.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pts(X', Lambda) != Pts(X, Lambda).
struct CanonicalError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Where the exterior lives. Finite volume restricts both points and background
// to Sigma_N (centered at sigma_center); infinite volume integrates the background
// over the whole plane and needs exterior points out to `data_radius`.
// The dyadic layers are always centered at the origin.
struct MoveSetup {
    Window lambda;
    bool finite = true;
    std::size_t N = 0;
    Vec2 sigma_center;
    double data_radius = std::numeric_limits<double>::infinity();

    static MoveSetup finite_volume(const Window& lambda, std::size_t N, const Vec2& sigma_center = {});
    static MoveSetup infinite_volume(const Window& lambda, double data_radius);
    Window sigma() const;
};

// y -> (-log|x - y| + log|y|) chi_i(y)
TestFunction phi_ix(int i, const Vec2& x);

// Layered move potential of a fixed exterior. For x in Lambda,
//   k_i(x) = Fluct[phi_{i,x} 1_{Lambda^c}](X)
// so that M~^p(X', X) = sum_{x in X'} sum_{i <= p} k_i(x).
class MoveField {
public:
    MoveField(const PointConfig& X, const MoveSetup& setup, int p_max);

    int p_max() const { return p_max_; }
    const MoveSetup& setup() const { return setup_; }
    const PointConfig& interior() const { return interior_; }
    std::size_t exterior_size() const { return ext_.size(); }

    // per-layer k_0(x) .. k_{p_max}(x)
    std::vector<double> layers(const Vec2& x) const;
    // sum_{i <= p} k_i(x)
    double potential(const Vec2& x, int p) const;
    // background part of k_i(x): int_{Lambda^c} phi_{i,x} (restricted to Sigma_N when finite)
    double layer_background(int i, const Vec2& x) const;

private:
    struct Ext {
        Vec2 y;
        double y2;
        int n;
        int layer[2];
        double chi[2];
    };
    MoveSetup setup_;
    int p_max_;
    PointConfig interior_;
    std::vector<Ext> ext_;
    std::vector<double> log_moment_;        // int_{Lambda [cap Sigma]} log|y| chi_i(y) dy per layer
    std::vector<double> sigma_log_moment_;  // int_Sigma log|y| chi_i(y) dy when Sigma is off-center
    bool radial_zero_;                      // background vanishes identically (concentric disks)
};

// M~^p(X', X) by the layer rewrite
double partial_move_tilde(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p);
// M^p(X', X) = M~^p(X', X) - M~^p(X_Lambda, X)
double partial_move(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p);
// M^p(X', X) straight from the signed-measure double integral with weight sum_{i<=p} chi_i
double partial_move_direct(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p);

struct MoveEval {
    Window lambda;
    std::vector<int> p;
    std::vector<double> tilde;        // M~^p(X', X)
    std::vector<double> value;        // M^p(X', X)
    std::vector<double> layer;        // layer-i contribution to M; value[p] = sum_{i<=p} layer[i]
    std::vector<double> tilde_layer;  // same for M~
    std::vector<double> increment;    // |M^{p+1} - M^p|, p = 0 .. p_max - 1
    double tolerance = 1e-3;
    bool converged = false;
};

// Converged when the last three increments are all below tol.
MoveEval convergence_diagnostic(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup,
                                int p_max, double tol = 1e-3);
MoveEval convergence_diagnostic(const PointConfig& Xp, const MoveField& field, double tol = 1e-3);

// First-order split of a far layer: phi_{i,x} = <x, J_i> + Rem_i(x, .)
struct TaylorSplit {
    int i;
    Vec2 x;
    // J_i(y) = y chi_i(y) / |y|^2
    Vec2 J(const Vec2& y) const;
    double rem(const Vec2& y) const;
    TestFunction rem_function() const;
    // <x, Fluct[J_i](X)>; J_i is odd so its integral vanishes
    double j_contribution(const PointConfig& X) const;
};

// Requires Lambda inside D(2^{i-4}).
TaylorSplit taylor_split(int i, const Vec2& x, const Window& lambda);

// Grid maxima of |J_i|_0, |J_i|_1 and |Rem_i(x, .)|_0, |Rem_i(x, .)|_1 over the layer annulus.
struct TaylorConstants {
    double j0 = 0, j1 = 0, rem0 = 0, rem1 = 0;
};
TaylorConstants measure_taylor(const TaylorSplit& s, int grid = 256);

}  // namespace ocp
