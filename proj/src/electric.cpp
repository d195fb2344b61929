#include "ocp/electric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ocp/energy.hpp"
#include "ocp/parallel.hpp"
#include "ocp/quad.hpp"

namespace ocp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfDiag = 0.70710678118654752;
constexpr int kSuper = 4;

// Uniform bucket grid for nearest-charge queries.
class PointIndex {
public:
    PointIndex(const PointConfig& X, double cell) : X_(X), cell_(cell) {
        if (X.size() == 0) return;
        lo_ = X[0];
        Vec2 hi = X[0];
        for (const auto& p : X) {
            lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        nx_ = static_cast<int>((hi.x - lo_.x) / cell_) + 1;
        ny_ = static_cast<int>((hi.y - lo_.y) / cell_) + 1;
        buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < X.size(); ++i) buckets_[bucket(X[i])].push_back(i);
    }

    // index of the nearest point and its distance; (npos, inf) when empty
    std::pair<std::size_t, double> nearest(const Vec2& q) const {
        std::size_t best = static_cast<std::size_t>(-1);
        double bd = kInf;
        if (buckets_.empty()) return {best, bd};
        const int cx = std::clamp(static_cast<int>(std::floor((q.x - lo_.x) / cell_)), 0, nx_ - 1);
        const int cy = std::clamp(static_cast<int>(std::floor((q.y - lo_.y) / cell_)), 0, ny_ - 1);
        // distance from q to the clamped bucket, so rings stay valid for queries outside the grid
        const double off = std::hypot(std::max({lo_.x - q.x, q.x - (lo_.x + nx_ * cell_), 0.0}),
                                      std::max({lo_.y - q.y, q.y - (lo_.y + ny_ * cell_), 0.0}));
        for (int ring = 0;; ++ring) {
            if (best != static_cast<std::size_t>(-1) && (ring - 1) * cell_ + off > bd) break;
            if (ring > nx_ + ny_) break;
            for (int a = cx - ring; a <= cx + ring; ++a)
                for (int b = cy - ring; b <= cy + ring; ++b) {
                    if (std::max(std::abs(a - cx), std::abs(b - cy)) != ring) continue;
                    if (a < 0 || b < 0 || a >= nx_ || b >= ny_) continue;
                    for (std::size_t i : buckets_[static_cast<std::size_t>(a) * ny_ + b]) {
                        const double d = dist(q, X_[i]);
                        if (d < bd) {
                            bd = d;
                            best = i;
                        }
                    }
                }
        }
        return {best, bd};
    }

private:
    std::size_t bucket(const Vec2& p) const {
        const int a = std::min(nx_ - 1, static_cast<int>((p.x - lo_.x) / cell_));
        const int b = std::min(ny_ - 1, static_cast<int>((p.y - lo_.y) / cell_));
        return static_cast<std::size_t>(a) * ny_ + b;
    }
    const PointConfig& X_;
    double cell_;
    Vec2 lo_;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::size_t>> buckets_;
};

enum class Overlap { outside, inside, straddle };

Overlap classify(const Window& W, const Vec2& c, double s) {
    if (W.shape == Shape::disk) {
        const double d = dist(c, W.center), r = kHalfDiag * s;
        if (d + r <= W.r1) return Overlap::inside;
        if (d - r >= W.r1) return Overlap::outside;
        return Overlap::straddle;
    }
    const double a = 0.5 * s;
    if (c.x + a <= W.lo.x || c.x - a >= W.hi.x || c.y + a <= W.lo.y || c.y - a >= W.hi.y) return Overlap::outside;
    if (c.x - a >= W.lo.x && c.x + a <= W.hi.x && c.y - a >= W.lo.y && c.y + a <= W.hi.y) return Overlap::inside;
    return Overlap::straddle;
}

// angle of the circle C(x, r) lying inside D(0, R)
double inside_angle(double ax, double r, double R) {
    if (ax + r <= R) return 2 * kPi;
    if (r >= ax + R || ax >= r + R) return 0.0;
    const double c = (ax * ax + r * r - R * R) / (2 * ax * r);
    return 2 * std::acos(std::clamp(c, -1.0, 1.0));
}
}  // namespace

double f_eta(const Vec2& x, double eta) {
    if (!(eta > 0)) throw std::invalid_argument("f_eta: eta must be positive");
    return std::min(std::log(x.norm() / eta), 0.0);
}

double nn_distance(const PointConfig& X, std::size_t i) {
    if (i >= X.size()) throw std::out_of_range("nn_distance: index");
    double m = 1.0;
    for (std::size_t j = 0; j < X.size(); ++j)
        if (j != i) m = std::min(m, dist(X[i], X[j]));
    return 0.25 * m;
}

std::vector<double> nn_distances(const PointConfig& X) {
    std::vector<double> m(X.size(), 1.0);
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j) {
            const double d = dist(X[i], X[j]);
            m[i] = std::min(m[i], d);
            m[j] = std::min(m[j], d);
        }
    for (auto& v : m) v *= 0.25;
    return m;
}

std::vector<double> truncation_vector(const PointConfig& X, EtaPolicy policy, double eta) {
    if (policy == EtaPolicy::nearest) return nn_distances(X);
    if (!(eta > 0)) throw std::invalid_argument("truncation_vector: eta must be positive");
    return std::vector<double>(X.size(), eta);
}

TruncatedField::TruncatedField(const PointConfig& X, const DiskDomain& domain, std::vector<double> eta)
    : X_(X), domain_(domain), eta_(std::move(eta)) {
    if (eta_.size() != X_.size()) throw std::invalid_argument("TruncatedField: one eta per point");
    for (double e : eta_)
        if (!(e >= 0)) throw std::invalid_argument("TruncatedField: eta must be >= 0");
}

Vec2 TruncatedField::operator()(const Vec2& x) const {
    Vec2 e = window_potential_grad(x, Window::from(domain_)) * -1.0;
    for (std::size_t i = 0; i < X_.size(); ++i) {
        const Vec2 z = x - X_[i];
        const double r2 = z.norm2();
        if (r2 == 0.0 && eta_[i] == 0.0) throw SingularEvaluation("TruncatedField: evaluation at a charge");
        if (r2 <= eta_[i] * eta_[i]) continue;
        e = e - z * (1.0 / r2);
    }
    return e;
}

Vec2 truncated_field(const PointConfig& X, const DiskDomain& domain, const std::vector<double>& eta, const Vec2& x) {
    return TruncatedField(X, domain, eta)(x);
}

EnerResult electric_energy(const TruncatedField& E, const Window& omega, double h, double kappa) {
    if (!(h > 0) || h > 0.25) throw ResolutionError("electric_energy: base spacing must lie in (0, 1/4]");
    if (!(kappa > 0) || kappa > 1) throw std::invalid_argument("electric_energy: kappa must lie in (0, 1]");
    if (omega.shape == Shape::annulus) throw std::invalid_argument("electric_energy: disk or rectangle windows only");
    const PointConfig& X = E.points();
    for (std::size_t i = 0; i < X.size(); ++i)
        if (E.eta()[i] == 0.0 && omega.contains(X[i])) return {kInf, kInf, kInf, 0.0, 0};
    const PointIndex index(X, 1.0);

    auto pass = [&](double hh, double kk, std::size_t& cells) {
        std::vector<double> acc;
        auto visit = [&](auto&& self, const Vec2& c, double s) -> void {
            const Overlap o = classify(omega, c, s);
            if (o == Overlap::outside) return;
            bool split = s > hh || (o == Overlap::straddle && s > hh / 8);
            if (!split) {
                const auto [i, d] = index.nearest(c);
                if (i != static_cast<std::size_t>(-1)) {
                    const double scale = std::max(d - kHalfDiag * s, E.eta()[i]);
                    split = s > kk * scale;
                }
            }
            if (split) {
                const double q = 0.25 * s;
                for (const Vec2 off : {Vec2{-q, -q}, Vec2{q, -q}, Vec2{-q, q}, Vec2{q, q}})
                    self(self, c + off, 0.5 * s);
                return;
            }
            // the field jumps across a truncation circle: supersample cells that cut one
            const auto [i, d] = index.nearest(c);
            const bool cut = i != static_cast<std::size_t>(-1) && std::abs(d - E.eta()[i]) < kHalfDiag * s + 1e-12;
            const int m = cut ? kSuper : 1;
            const double t = s / m;
            double v = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    const Vec2 y = c + Vec2{(a + 0.5) * t - 0.5 * s, (b + 0.5) * t - 0.5 * s};
                    if (o == Overlap::straddle && !omega.contains(y)) continue;
                    v += E(y).norm2() * t * t;
                }
            acc.push_back(v);
            ++cells;
        };
        const Vec2 lo = omega.box_lo(), hi = omega.box_hi();
        const int nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / hh)));
        const int ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / hh)));
        for (int a = 0; a < nx; ++a)
            for (int b = 0; b < ny; ++b) visit(visit, lo + Vec2{(a + 0.5) * hh, (b + 0.5) * hh}, hh);
        return tree_sum(std::move(acc));
    };
    EnerResult r;
    r.coarse = pass(h, kappa, r.cells);
    r.fine = pass(0.5 * h, 0.5 * kappa, r.cells);
    r.value = r.fine + (r.fine - r.coarse) / 3.0;
    r.error = std::abs(r.fine - r.coarse) / 3.0;
    return r;
}

EnerResult local_electric_energy(const PointConfig& X, const Window& omega, std::size_t N, double h) {
    const TruncatedField E(X, system_domain(N), nn_distances(X));
    return electric_energy(E, omega, h);
}

double ener_pts(const PointConfig& X, const Window& omega, std::size_t N, double h) {
    const EnerResult e = local_electric_energy(X, omega, N, h);
    return std::sqrt(omega.area() * std::max(e.value, 0.0)) + static_cast<double>(pts_count(X, omega));
}

double renormalized_energy(const PointConfig& X, const std::vector<double>& eta, const DiskDomain& domain,
                           double field_energy) {
    if (eta.size() != X.size()) throw std::invalid_argument("renormalized_energy: one eta per point");
    double logs = 0.0, self = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double e = eta[i];
        if (!(e > 0)) throw std::invalid_argument("renormalized_energy: eta must be positive");
        logs += std::log(e);
        const double ax = dist(X[i], domain.center);
        if (ax + e <= domain.radius) {
            self -= 0.5 * kPi * e * e;
        } else {
            self += integrate([&](double r) { return r * std::log(r / e) * inside_angle(ax, r, domain.radius); },
                              0.0, e, 1e-12);
        }
    }
    return 0.5 * (field_energy / (2 * kPi) + logs) + self;
}

LocalLawScan local_law_scan(const std::vector<PointConfig>& samples, std::size_t N, const std::vector<Vec2>& centers,
                            const std::vector<double>& ells, double h, double margin, unsigned threads) {
    if (samples.empty() || centers.empty() || ells.empty())
        throw std::invalid_argument("local_law_scan: need samples, centers and scales");
    const double R = system_radius(N), need = margin * std::pow(static_cast<double>(N), 0.25);
    for (double ell : ells)
        for (const auto& c : centers)
            if (!(ell > 0) || R - c.norm() - ell < need)
                throw std::domain_error("local_law_scan: (center, ell) too close to the wall");
    LocalLawScan scan;
    const std::size_t C = centers.size();
    for (double ell : ells) {
        std::vector<double> vals(samples.size() * C), errs(samples.size() * C);
        parallel_for(samples.size(), threads, [&](std::size_t s) {
            const TruncatedField E(samples[s], system_domain(N), nn_distances(samples[s]));
            for (std::size_t k = 0; k < C; ++k) {
                const EnerResult r = electric_energy(E, Window::disk(centers[k], ell), h);
                vals[s * C + k] = r.value / (ell * ell);
                errs[s * C + k] = r.error / (ell * ell);
            }
        });
        LocalLawRow row;
        row.ell = ell;
        row.count = vals.size();
        // centers within a sample are correlated; the SE uses per-sample averages
        std::vector<double> per(samples.size(), 0.0);
        for (std::size_t s = 0; s < samples.size(); ++s)
            for (std::size_t k = 0; k < C; ++k) per[s] += vals[s * C + k] / static_cast<double>(C);
        const MomentEstimate m = moment(per);
        row.mean = m.mean;
        row.se = m.se;
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        auto q = [&](double p) { return sorted[static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1))]; };
        row.q10 = q(0.1);
        row.q50 = q(0.5);
        row.q90 = q(0.9);
        row.max_error = *std::max_element(errs.begin(), errs.end());
        scan.rows.push_back(row);
    }
    double lo = kInf, hi = -kInf;
    for (const auto& r : scan.rows) {
        lo = std::min(lo, r.mean);
        hi = std::max(hi, r.mean);
    }
    scan.spread = hi / lo - 1.0;
    scan.growing = scan.rows.size() > 1;
    for (std::size_t k = 1; k < scan.rows.size(); ++k)
        scan.growing = scan.growing && scan.rows[k].mean > scan.rows[k - 1].mean;
    return scan;
}

namespace {
void require_neighborhood(const TestFunction& phi, const Window& omega) {
    const Window& s = phi.support;
    Window grown;
    if (s.shape == Shape::rect)
        grown = Window::rect(s.lo - Vec2{1, 1}, s.hi + Vec2{1, 1});
    else
        grown = Window::disk(s.center, s.r1 + 1.0);
    if (!window_within(grown, omega))
        throw std::domain_error("apriori_bound_check: Omega must contain a 1-neighborhood of supp phi");
}

double apriori_ratio(const PointConfig& X, const TestFunction& phi, const Window& omega, std::size_t N, double h) {
    require_neighborhood(phi, omega);
    const double lip = phi.seminorms[1];
    if (!std::isfinite(lip)) throw std::invalid_argument("apriori_bound_check: phi needs a finite |phi|_1");
    const double fl = fluct(phi, X, Window::from(system_domain(N)));
    if (lip == 0.0) return 0.0;
    return std::abs(fl) / (lip * ener_pts(X, omega, N, h));
}
}  // namespace

double apriori_bound_check(const PointConfig& X, const TestFunction& phi, const Window& omega, std::size_t N,
                           double h) {
    return apriori_ratio(X, phi, omega, N, h);
}

double apriori_bound_check(const PointConfig& X, const TestFunction& phi, const Window& omega1,
                           const TestFunction& psi, const Window& omega2, std::size_t N, double h) {
    return apriori_ratio(X, phi, omega1, N, h) * apriori_ratio(X, psi, omega2, N, h);
}

}  // namespace ocp
