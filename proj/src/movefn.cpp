#include "ocp/movefn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ocp/partition.hpp"
#include "ocp/quad.hpp"

namespace ocp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// -log|x - y| + log|y| without cancellation for |y| >> |x|
inline double layer_kernel(const Vec2& x, const Vec2& y, double y2) {
    return -0.5 * std::log1p((x.norm2() - 2.0 * dot(x, y)) / y2);
}

double layer_tol(int i) { return 1e-8 * std::ldexp(1.0, -i); }

enum class Region { lambda, sigma, partial };

// how Lambda meets the volume the background lives on
Region region_of(const MoveSetup& s) {
    if (!s.finite) return Region::lambda;
    const Window sig = s.sigma();
    if (window_within(s.lambda, sig)) return Region::lambda;
    if (window_within(sig, s.lambda)) return Region::sigma;
    return Region::partial;
}

bool sigma_at_origin(const MoveSetup& s) { return !s.finite || (s.sigma_center.x == 0.0 && s.sigma_center.y == 0.0); }

bool chi_meets(int i, const Window& W) {
    return W.max_abs() > DyadicPartition::inner_radius(i) && W.min_abs() < DyadicPartition::outer_radius(i);
}

// int_{D(rcut)} (-log|x - y| + log|y|) f(|y|) dy for radial f supported in (lo, hi)
double newton_layer(const std::function<double(double)>& f, double a, double lo, double hi, double rcut, double tol) {
    // the -log|x - y| average over circles of radius r > |x| is -log r: only r < |x| survives
    const double top = std::min({a, rcut, hi});
    if (top <= lo) return 0.0;
    return integrate([&](double r) { return 2 * kPi * r * f(r) * std::log(r / a); }, lo, top, tol);
}

void check_setup(const MoveSetup& s, int p) {
    if (p < 0) throw std::invalid_argument("move function: p must be >= 0");
    if (s.finite && s.N == 0) throw std::invalid_argument("move function: finite volume needs N");
    if (!s.finite && s.data_radius < DyadicPartition::outer_radius(p))
        throw CoverageError("move function: exterior data radius " + std::to_string(s.data_radius) +
                            " < 2^{p+1} = " + std::to_string(DyadicPartition::outer_radius(p)));
}

void check_canonical(const PointConfig& Xp, const PointConfig& X, const Window& lambda) {
    for (const auto& x : Xp)
        if (!lambda.contains(x)) throw std::invalid_argument("move function: X' must lie in Lambda");
    if (Xp.size() != pts_count(X, lambda))
        throw CanonicalError("move function: Pts(X', Lambda) = " + std::to_string(Xp.size()) +
                             " but Pts(X, Lambda) = " + std::to_string(pts_count(X, lambda)));
}
}  // namespace

MoveSetup MoveSetup::finite_volume(const Window& lambda, std::size_t N, const Vec2& sigma_center) {
    MoveSetup s;
    s.lambda = lambda;
    s.finite = true;
    s.N = N;
    s.sigma_center = sigma_center;
    return s;
}

Window MoveSetup::sigma() const {
    return finite ? Window::disk(sigma_center, system_radius(N)) : Window::disk({0, 0}, kInf);
}

MoveSetup MoveSetup::infinite_volume(const Window& lambda, double data_radius) {
    MoveSetup s;
    s.lambda = lambda;
    s.finite = false;
    s.data_radius = data_radius;
    return s;
}

TestFunction phi_ix(int i, const Vec2& x) {
    TestFunction f;
    f.name = "phi_" + std::to_string(i);
    f.support = i == 0 ? Window::disk({0, 0}, DyadicPartition::outer_radius(0))
                       : Window::annulus({0, 0}, DyadicPartition::inner_radius(i), DyadicPartition::outer_radius(i));
    f.eval = [i, x](const Vec2& y) {
        const double c = dyadic_partition().chi(i, y);
        if (c == 0.0) return 0.0;
        return c * layer_kernel(x, y, y.norm2());
    };
    f.seminorms = {kInf, kInf, kInf, kInf};
    return f;
}

MoveField::MoveField(const PointConfig& X, const MoveSetup& setup, int p_max)
    : setup_(setup), p_max_(p_max) {
    check_setup(setup, p_max);
    const Window& L = setup.lambda;
    const Window sigma = setup.sigma();
    std::vector<Vec2> in;
    const DyadicPartition& P = dyadic_partition();
    for (const auto& y : X) {
        if (L.contains(y)) {
            in.push_back(y);
            continue;
        }
        if (setup.finite && !sigma.contains(y)) continue;
        const double r = y.norm();
        std::array<int, 2> ls;
        const int n = DyadicPartition::layers_at(r, ls);
        Ext e{y, y.norm2(), 0, {0, 0}, {0, 0}};
        for (int k = 0; k < n; ++k) {
            if (ls[k] > p_max) continue;
            const double c = P.chi(ls[k], r).f;
            if (c == 0.0) continue;
            e.layer[e.n] = ls[k];
            e.chi[e.n] = c;
            ++e.n;
        }
        if (e.n > 0) ext_.push_back(e);
    }
    interior_ = PointConfig(std::move(in));

    const Region reg = region_of(setup);
    radial_zero_ = (L.centered_disk() && sigma_at_origin(setup)) || reg == Region::sigma;
    const std::size_t n = static_cast<std::size_t>(p_max) + 1;
    log_moment_.assign(n, 0.0);
    sigma_log_moment_.assign(n, 0.0);
    if (radial_zero_) return;
    for (int i = 0; i <= p_max; ++i) {
        auto f = [&, i](const Vec2& y) {
            if (reg == Region::partial && !sigma.contains(y)) return 0.0;
            const double c = P.chi(i, y);
            return c == 0.0 ? 0.0 : c * 0.5 * std::log(y.norm2());
        };
        if (chi_meets(i, L)) log_moment_[static_cast<std::size_t>(i)] = integrate_window_pole(f, L, {0, 0}, layer_tol(i));
        if (!sigma_at_origin(setup) && chi_meets(i, sigma)) {
            auto g = [&, i](const Vec2& y) {
                const double c = P.chi(i, y);
                return c == 0.0 ? 0.0 : c * 0.5 * std::log(y.norm2());
            };
            sigma_log_moment_[static_cast<std::size_t>(i)] = integrate_window_pole(g, sigma, {0, 0}, layer_tol(i));
        }
    }
}

double MoveField::layer_background(int i, const Vec2& x) const {
    if (radial_zero_ || i < 0 || i > p_max_) return 0.0;
    const DyadicPartition& P = dyadic_partition();
    const Window sigma = setup_.sigma();
    const double a = x.norm();
    const double lo = DyadicPartition::inner_radius(i), hi = DyadicPartition::outer_radius(i);
    auto pot = [&](const Vec2& y) {
        const double c = P.chi(i, y);
        return c == 0.0 ? 0.0 : -c * std::log(dist(x, y));
    };
    // int over the whole (finite or infinite) volume; Newton's theorem when it is concentric with the layers
    double whole = 0.0;
    if (sigma_at_origin(setup_)) {
        if (a > 0.0) whole = newton_layer([&](double r) { return P.chi(i, r).f; }, a, lo, hi, sigma.r1, layer_tol(i));
    } else if (chi_meets(i, sigma)) {
        whole = integrate_window_pole(pot, sigma, x, layer_tol(i)) + sigma_log_moment_[static_cast<std::size_t>(i)];
    }
    if (!chi_meets(i, setup_.lambda)) return whole;
    const bool partial = region_of(setup_) == Region::partial;
    auto f = [&](const Vec2& y) { return partial && !sigma.contains(y) ? 0.0 : pot(y); };
    const double inside = integrate_window_pole(f, setup_.lambda, x, layer_tol(i)) +
                          log_moment_[static_cast<std::size_t>(i)];
    return whole - inside;
}

std::vector<double> MoveField::layers(const Vec2& x) const {
    std::vector<double> k(static_cast<std::size_t>(p_max_) + 1, 0.0);
    for (const auto& e : ext_) {
        const double v = layer_kernel(x, e.y, e.y2);
        for (int n = 0; n < e.n; ++n) k[static_cast<std::size_t>(e.layer[n])] += e.chi[n] * v;
    }
    if (!radial_zero_)
        for (int i = 0; i <= p_max_; ++i) k[static_cast<std::size_t>(i)] -= layer_background(i, x);
    return k;
}

double MoveField::potential(const Vec2& x, int p) const {
    if (p > p_max_) throw std::out_of_range("MoveField::potential: p exceeds p_max");
    double s = 0.0;
    for (const auto& e : ext_) {
        double w = 0.0;
        for (int n = 0; n < e.n; ++n)
            if (e.layer[n] <= p) w += e.chi[n];
        if (w != 0.0) s += w * layer_kernel(x, e.y, e.y2);
    }
    if (!radial_zero_)
        for (int i = 0; i <= p; ++i) s -= layer_background(i, x);
    return s;
}

double partial_move_tilde(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p) {
    for (const auto& x : Xp)
        if (!setup.lambda.contains(x)) throw std::invalid_argument("move function: X' must lie in Lambda");
    MoveField F(X, setup, p);
    double s = 0.0;
    for (const auto& x : Xp) s += F.potential(x, p);
    return s;
}

double partial_move(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p) {
    check_canonical(Xp, X, setup.lambda);
    MoveField F(X, setup, p);
    double a = 0.0, b = 0.0;
    for (const auto& x : Xp) a += F.potential(x, p);
    for (const auto& x : F.interior()) b += F.potential(x, p);
    return a - b;
}

double partial_move_direct(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p) {
    check_setup(setup, p);
    check_canonical(Xp, X, setup.lambda);
    const Window& L = setup.lambda;
    const DyadicPartition& P = dyadic_partition();
    const Window sigma = setup.sigma();
    const bool concentric = sigma_at_origin(setup);
    const double top = std::min(DyadicPartition::outer_radius(p), concentric ? sigma.r1 : kInf);
    auto w = [&](double r) { return P.weight(p, r).f; };
    const Region reg = region_of(setup);

    // D(x) = int_{Lambda^c [cap Sigma]} -log|x - y| w(|y|) dy
    auto background = [&](const Vec2& x) -> double {
        if (reg == Region::sigma) return 0.0;
        if (L.centered_disk() && concentric) {
            // |x| <= rho < |y|: the circle average of -log|x - y| is -log|y|
            const double rho = L.r1;
            if (rho >= top) return 0.0;
            return integrate([&](double r) { return -2 * kPi * r * w(r) * std::log(r); }, rho, top, 1e-11);
        }
        auto pot = [&](const Vec2& y) {
            const double c = w(y.norm());
            return c == 0.0 ? 0.0 : -c * std::log(dist(x, y));
        };
        double whole = 0.0;
        if (concentric) {
            const double a = x.norm();
            const double m = std::min(a, top);
            if (m > 0) whole += integrate([&](double r) { return -2 * kPi * r * w(r) * std::log(a); }, 0.0, m, 1e-11);
            if (top > a) whole += integrate([&](double r) { return -2 * kPi * r * w(r) * std::log(r); }, a, top, 1e-11);
        } else {
            whole = integrate_window_pole(pot, sigma, x, 1e-10);
        }
        auto f = [&](const Vec2& y) { return reg == Region::partial && !sigma.contains(y) ? 0.0 : pot(y); };
        return whole - integrate_window_pole(f, L, x, 1e-10);
    };

    std::vector<std::pair<Vec2, double>> ext;
    for (const auto& y : X) {
        if (L.contains(y) || (setup.finite && !sigma.contains(y))) continue;
        const double c = w(y.norm());
        if (c != 0.0) ext.emplace_back(y, c);
    }
    auto k = [&](const Vec2& x) {
        double s = 0.0;
        for (const auto& [y, c] : ext) s += -c * std::log(dist(x, y));
        return s - background(x);
    };
    double a = 0.0, b = 0.0;
    for (const auto& x : Xp) a += k(x);
    for (const auto& x : X)
        if (L.contains(x)) b += k(x);
    return a - b;
}

MoveEval convergence_diagnostic(const PointConfig& Xp, const MoveField& field, double tol) {
    const MoveSetup& s = field.setup();
    if (Xp.size() != field.interior().size())
        throw CanonicalError("convergence_diagnostic: Pts(X', Lambda) = " + std::to_string(Xp.size()) +
                             " but Pts(X, Lambda) = " + std::to_string(field.interior().size()));
    for (const auto& x : Xp)
        if (!s.lambda.contains(x)) throw std::invalid_argument("move function: X' must lie in Lambda");
    const std::size_t n = static_cast<std::size_t>(field.p_max()) + 1;
    MoveEval e;
    e.lambda = s.lambda;
    e.tolerance = tol;
    e.tilde_layer.assign(n, 0.0);
    e.layer.assign(n, 0.0);
    for (const auto& x : Xp) {
        const auto k = field.layers(x);
        for (std::size_t i = 0; i < n; ++i) e.tilde_layer[i] += k[i];
    }
    std::vector<double> ref(n, 0.0);
    for (const auto& x : field.interior()) {
        const auto k = field.layers(x);
        for (std::size_t i = 0; i < n; ++i) ref[i] += k[i];
    }
    for (std::size_t i = 0; i < n; ++i) e.layer[i] = e.tilde_layer[i] - ref[i];
    double t = 0.0, v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t += e.tilde_layer[i];
        v += e.layer[i];
        e.p.push_back(static_cast<int>(i));
        e.tilde.push_back(t);
        e.value.push_back(v);
        if (i > 0) e.increment.push_back(std::abs(e.layer[i]));
    }
    if (e.increment.size() >= 3) {
        e.converged = true;
        for (std::size_t j = e.increment.size() - 3; j < e.increment.size(); ++j)
            if (!(e.increment[j] < tol)) e.converged = false;
    }
    return e;
}

MoveEval convergence_diagnostic(const PointConfig& Xp, const PointConfig& X, const MoveSetup& setup, int p_max,
                                double tol) {
    check_canonical(Xp, X, setup.lambda);
    return convergence_diagnostic(Xp, MoveField(X, setup, p_max), tol);
}

Vec2 TaylorSplit::J(const Vec2& y) const {
    const double r2 = y.norm2();
    const double c = dyadic_partition().chi(i, y);
    return c == 0.0 ? Vec2{} : y * (c / r2);
}

double TaylorSplit::rem(const Vec2& y) const {
    const double c = dyadic_partition().chi(i, y);
    if (c == 0.0) return 0.0;
    const double y2 = y.norm2();
    return c * (layer_kernel(x, y, y2) - dot(x, y) / y2);
}

TestFunction TaylorSplit::rem_function() const {
    TestFunction f = phi_ix(i, x);
    f.name = "rem_" + std::to_string(i);
    f.eval = [s = *this](const Vec2& y) { return s.rem(y); };
    return f;
}

double TaylorSplit::j_contribution(const PointConfig& X) const {
    Vec2 s{};
    for (const auto& y : X) s = s + J(y);
    return dot(x, s);
}

TaylorSplit taylor_split(int i, const Vec2& x, const Window& lambda) {
    if (i < 1 || lambda.max_abs() > std::ldexp(1.0, i - 4))
        throw std::domain_error("taylor_split: layer " + std::to_string(i) + " overlaps the neighbourhood of Lambda");
    if (!lambda.contains(x)) throw std::domain_error("taylor_split: x must lie in Lambda");
    return TaylorSplit{i, x};
}

TaylorConstants measure_taylor(const TaylorSplit& s, int grid) {
    TaylorConstants c;
    const double ro = DyadicPartition::outer_radius(s.i), ri = DyadicPartition::inner_radius(s.i);
    const double h = 1e-6 * ro;
    for (int a = 0; a <= grid; ++a)
        for (int b = 0; b <= grid; ++b) {
            const Vec2 y{-ro + 2 * ro * a / grid, -ro + 2 * ro * b / grid};
            const double r = y.norm();
            if (r <= ri || r >= ro) continue;
            const Vec2 j = s.J(y);
            c.j0 = std::max(c.j0, j.norm());
            c.rem0 = std::max(c.rem0, std::abs(s.rem(y)));
            const Vec2 ex{h, 0}, ey{0, h};
            const Vec2 jx = (s.J(y + ex) - s.J(y - ex)) * (0.5 / h), jy = (s.J(y + ey) - s.J(y - ey)) * (0.5 / h);
            // operator norm of the 2x2 Jacobian [jx jy]
            const double p = jx.norm2() + jy.norm2();
            const double det = jx.x * jy.y - jx.y * jy.x;
            c.j1 = std::max(c.j1, std::sqrt(0.5 * (p + std::sqrt(std::max(0.0, p * p - 4 * det * det)))));
            const Vec2 g{(s.rem(y + ex) - s.rem(y - ex)) * (0.5 / h), (s.rem(y + ey) - s.rem(y - ey)) * (0.5 / h)};
            c.rem1 = std::max(c.rem1, g.norm());
        }
    return c;
}

}  // namespace ocp
