#pragma once

#include <stdexcept>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/observables.hpp"
#include "ocp/stats.hpp"

namespace ocp {

// Field requested exactly at an untruncated charge.
struct SingularEvaluation : std::domain_error {
    using std::domain_error::domain_error;
};

// Base spacing too coarse to resolve the largest truncation disk.
struct ResolutionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// min(log(|x| / eta), 0)
double f_eta(const Vec2& x, double eta);

// r(x_i) = 1/4 min(min_{j != i} |x_i - x_j|, 1)
double nn_distance(const PointConfig& X, std::size_t i);
std::vector<double> nn_distances(const PointConfig& X);

enum class EtaPolicy { nearest, uniform };
std::vector<double> truncation_vector(const PointConfig& X, EtaPolicy policy, double eta = 0.25);

// Truncated electric field of X against the neutralizing background on Sigma_N:
//   grad h(x) = sum_i -(x - x_i) / |x - x_i|^2 - grad U_Sigma(x),
// with each charge's kernel clipped at radius eta_i (its field vanishes inside D(x_i, eta_i)).
// Satisfies -div E = 2 pi (X^(eta) - 1_Sigma Leb).
class TruncatedField {
public:
    TruncatedField(const PointConfig& X, const DiskDomain& domain, std::vector<double> eta);
    Vec2 operator()(const Vec2& x) const;
    const PointConfig& points() const { return X_; }
    const std::vector<double>& eta() const { return eta_; }
    const DiskDomain& domain() const { return domain_; }

private:
    PointConfig X_;
    DiskDomain domain_;
    std::vector<double> eta_;
};

Vec2 truncated_field(const PointConfig& X, const DiskDomain& domain, const std::vector<double>& eta, const Vec2& x);

// Midpoint rule on a graded quadtree over Omega: cells are at most h, at most kappa * (distance to
// the nearest charge, or its eta when larger), and at most h / 8 where they straddle the boundary.
// Two passes (h, kappa) and (h / 2, kappa / 2) are combined by Richardson extrapolation.
struct EnerResult {
    double value = 0.0;   // extrapolated
    double coarse = 0.0;  // h
    double fine = 0.0;    // h / 2
    double error = 0.0;   // |fine - coarse| / 3
    std::size_t cells = 0;
};
EnerResult electric_energy(const TruncatedField& E, const Window& omega, double h = 0.125, double kappa = 0.5);

// Ener(X, Omega) with nearest-neighbor truncation r(x)
EnerResult local_electric_energy(const PointConfig& X, const Window& omega, std::size_t N, double h = 0.125);

// |Omega|^{1/2} Ener^{1/2} + Pts(X, Omega)
double ener_pts(const PointConfig& X, const Window& omega, std::size_t N, double h = 0.125);

// 1/2 (E / (2 pi) + sum log eta) + sum_x int_{D(x, eta) cap Sigma} f_eta(t - x) dt for a given
// whole-plane energy E = int |grad h_eta|^2; equals F_N when eta <= r.
double renormalized_energy(const PointConfig& X, const std::vector<double>& eta, const DiskDomain& domain,
                           double field_energy);

struct LocalLawRow {
    double ell = 0.0;
    std::size_t count = 0;
    double mean = 0.0;  // of Ener / ell^2
    double se = 0.0;
    double q10 = 0.0, q50 = 0.0, q90 = 0.0;
    double max_error = 0.0;  // largest quadrature error estimate / ell^2
};
struct LocalLawScan {
    std::vector<LocalLawRow> rows;
    double spread = 0.0;  // max mean / min mean - 1
    bool growing = false; // means strictly increasing in ell
};

// Each (center, ell) must satisfy dist(D(center, ell), wall) >= margin * N^{1/4}.
LocalLawScan local_law_scan(const std::vector<PointConfig>& samples, std::size_t N, const std::vector<Vec2>& centers,
                            const std::vector<double>& ells, double h = 0.125, double margin = 1.0,
                            unsigned threads = 1);

// |Fluct_Sigma[phi](X)| / (|phi|_1 EnerPts(X, Omega)); needs Omega to contain a 1-neighborhood of supp phi
double apriori_bound_check(const PointConfig& X, const TestFunction& phi, const Window& omega, std::size_t N,
                           double h = 0.125);
// product kernel K = phi (x) psi with |K|_{1+1} = |phi|_1 |psi|_1
double apriori_bound_check(const PointConfig& X, const TestFunction& phi, const Window& omega1,
                           const TestFunction& psi, const Window& omega2, std::size_t N, double h = 0.125);

}  // namespace ocp
