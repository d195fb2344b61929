#pragma once

#include <functional>

#include "ocp/geometry.hpp"

namespace ocp {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(const Vec2&)>;

// Adaptive Gauss-Kronrod on [a, b] to absolute tolerance tol.
double integrate(const Fn1& f, double a, double b, double tol = 1e-11, double* err = nullptr);

// Integral of f over a window. Disks and annuli use polar coordinates about their
// center, rectangles a nested tensor rule. Integrable point singularities at `pole`
// are handled by switching to polar coordinates about the pole (convex windows only).
double integrate_window(const Fn2& f, const Window& W, double tol = 1e-10);
double integrate_window_pole(const Fn2& f, const Window& W, const Vec2& pole, double tol = 1e-10);

}  // namespace ocp
