#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/movefn.hpp"
#include "ocp/stats.hpp"

namespace ocp {

// Divergence-free generator of a localized translation at scale L:
//   field(x) = perp grad H(x / L),  H(y) = <y, w> g(|y|),  w = (v2, -v1),
// with g = 1 on [0, 1] and 0 beyond 2, so the field is v on D(L) and 0 off D(2L).
Vec2 hamiltonian_field(const Vec2& x, double L, const Vec2& v = {1.0, 0.0});

// Time-t map of the flow of hamiltonian_field by classical RK4 with a fixed step count.
Vec2 flow_map(const Vec2& x, double t, double L, const Vec2& v = {1.0, 0.0}, int steps = 64);

class LocalizedTranslation {
public:
    LocalizedTranslation(double L, const Vec2& v, int steps = 64);

    double L() const { return L_; }
    const Vec2& v() const { return v_; }
    int steps() const { return steps_; }

    Vec2 field(const Vec2& x) const { return hamiltonian_field(x, L_, v_); }
    Vec2 plus(const Vec2& x) const { return flow_map(x, 1.0, L_, v_, steps_); }
    Vec2 minus(const Vec2& x) const { return flow_map(x, -1.0, L_, v_, steps_); }
    Vec2 psi_plus(const Vec2& x) const { return plus(x) - x; }
    Vec2 psi_minus(const Vec2& x) const { return minus(x) - x; }
    // psi+ + psi-
    Vec2 rem(const Vec2& x) const { return psi_plus(x) + psi_minus(x); }

    // image of the points of X lying in W under T+ (sign > 0) or T- (sign < 0); others untouched
    PointConfig push(const PointConfig& X, int sign, const Window& W) const;

private:
    double L_;
    Vec2 v_;
    int steps_;
};

// Grid-measured constants of a localized translation over the box [-2L, 2L]^2.
// Derivative seminorms are maxima of directional finite differences over 8 directions.
struct TranslationReport {
    double L = 0.0;
    int grid = 0;
    double psi[4] = {0, 0, 0, 0};  // max over +/- of |psi|_k L^k
    double rem[3] = {0, 0, 0};     // |Rem|_k L^{k+1}
    double det_max_dev = 0.0;      // max |det D T+/- - 1|
    double inverse_max = 0.0;      // max |T+(T-(x)) - x|
    double plateau_max = 0.0;      // max |T+(x) - x - v| over |x| <= L - |v|
    double support_max = 0.0;      // max |T+/-(x) - x| over |x| >= 2L (exactly 0)
};
TranslationReport verify_translation(const LocalizedTranslation& T, int grid = 64, unsigned threads = 1);

// Window Lambda = D(10 L); the background of F_Lambda is Lambda restricted to Sigma_N when
// the system is finite (both disks are centered, so this is the smaller one).
Window diff_window(double L, std::size_t N = 0);

// 1/2 (F(T+ X_Lambda) + F(T- X_Lambda)) - F(X_Lambda) with F the local energy on diff_window
double diff1(const PointConfig& X, const LocalizedTranslation& T, std::size_t N = 0);
// 1/2 (M^p(T+ X_Lambda, X) + M^p(T- X_Lambda, X)); needs exterior data out to max(2^{p+1}, 20 L)
double diff2(const PointConfig& X, const LocalizedTranslation& T, const MoveSetup& setup, int p);

struct DiffStats {
    double L = 0.0;
    double radius = 0.0;  // Lambda = D(radius)
    double beta = 2.0;
    std::vector<double> diff1, diff2;
    MomentEstimate exp1, exp2;  // log E exp(2 beta |Diff|) with bootstrap bands
};
DiffStats diff_stats(const std::vector<PointConfig>& samples, const LocalizedTranslation& T, std::size_t N,
                     double beta, int p, std::uint64_t seed = 1, unsigned threads = 1);

struct InvarianceRow {
    std::string name;
    double mean_a = 0.0, mean_b = 0.0;
    double z = 0.0;  // paired mean difference over its batch-means SE
    KsResult ks;
    bool pass = true;
};
struct InvarianceReport {
    std::vector<InvarianceRow> rows;
    double z_threshold = 3.0;
    double ks_alpha = 0.0;
    bool pass() const;
};

using ViewObservable = std::pair<std::string, std::function<double(const PointConfig&)>>;

// Pts of the window, its halves and nearest-point distance, evaluated on a local view.
std::vector<ViewObservable> default_view_battery(const Window& window);

// Compares each observable on local_view(X, x0) against local_view(X, x0 + v).
// Both windows, shifted to x0 and x0 + v, must keep distance >= 1 from the wall.
InvarianceReport translation_invariance_test(const std::vector<PointConfig>& samples, std::size_t N, const Vec2& x0,
                                             const Vec2& v, const Window& window,
                                             const std::vector<ViewObservable>& battery);

}  // namespace ocp
